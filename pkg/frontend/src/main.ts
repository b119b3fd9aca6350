/**
 * Page entry point. Reads the run configuration from URL query
 * parameters (seed, traps, trapLength, period, pop), starts the island
 * against the origin that served the page, and keeps the corner chart
 * fed. No cookies, no storage, no tracking: the only identity is a
 * random per-load token so the server log can tell tabs apart.
 */

import { ProgressChart } from "./chart.js";
import { defaultParams } from "./engine.js";
import { FetchTransport, IslandRunner, runBrowserIsland } from "./island.js";
import { maxFitness } from "./trap.js";

function intParam(params: URLSearchParams, name: string, fallback: number): number {
  const raw = params.get(name);
  if (raw === null) return fallback;
  const v = Number.parseInt(raw, 10);
  return Number.isFinite(v) ? v : fallback;
}

function randomSeed(): number {
  return Math.floor(Math.random() * 2 ** 48);
}

export function start(): void {
  const q = new URLSearchParams(window.location.search);
  const spec = {
    trapLength: intParam(q, "trapLength", 4),
    trapCount: intParam(q, "traps", 40),
  };
  const params = defaultParams();
  params.migrationPeriod = intParam(q, "period", 100);
  params.populationSize = intParam(q, "pop", 256);
  const seed = intParam(q, "seed", randomSeed());

  const statusEl = document.getElementById("status") as HTMLElement;
  const canvas = document.getElementById("chart") as HTMLCanvasElement;
  const chart = new ProgressChart(canvas, maxFitness(spec));
  const token = `page-${seed.toString(16)}-${Math.floor(Math.random() * 1e9).toString(36)}`;
  const transport = new FetchTransport(window.location.origin, token);

  statusEl.textContent =
    `running: ${spec.trapCount} traps x ${spec.trapLength} bits, ` +
    `population ${params.populationSize}, seed ${seed}`;

  const onProgress = (runner: IslandRunner) => {
    chart.render(runner.trace.map(([g, f]) => ({ generation: g, fitness: f })));
    const gen = runner.population.generation;
    const best = runner.population.bestFitness();
    statusEl.textContent = runner.solved
      ? `solved at generation ${gen} (fitness ${best}); chart frozen`
      : `generation ${gen}, best ${best}/${maxFitness(spec)}, ` +
        `sent ${runner.migrationsSent}, received ${runner.migrationsReceived}`;
  };

  runBrowserIsland(params, spec, transport, seed, onProgress).then((report) => {
    if (!report.solved) {
      statusEl.textContent = `stopped at generation ${report.generations}`;
    }
  });
}

start();
