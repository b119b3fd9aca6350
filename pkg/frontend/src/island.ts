/**
 * The browser island: the native GA loop plus fire-and-forget migration
 * over fetch, advancing in time-sliced batches (one migration period
 * per slice) so the page stays responsive.
 */

import {
  EAParams,
  Population,
  eliteIndices,
  newRandomPopulation,
  runSpan,
  validateParams,
} from "./engine.js";
import { P_IMM, drawUnit } from "./rng.js";
import {
  TrapSpec,
  bitsFromString,
  bitsToString,
  chromosomeLength,
  evaluateRow,
  maxFitness,
  validateSpec,
} from "./trap.js";
import { U64, fromNumber } from "./u64.js";

export interface MigrationTransport {
  sendOne(chromosome: string): Promise<void>;
  fetchRandom(): Promise<string | null>;
}

export class NullTransport implements MigrationTransport {
  async sendOne(_: string): Promise<void> {}

  async fetchRandom(): Promise<string | null> {
    return null;
  }
}

type FetchLike = (url: string, init?: Record<string, unknown>) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
}>;

export function putOneBody(chromosome: string): string {
  // canonical compact form; must stay byte-identical across clients
  return JSON.stringify({ chromosome });
}

export class FetchTransport implements MigrationTransport {
  private headers: Record<string, string>;

  constructor(
    private baseUrl: string,
    clientToken: string | null = null,
    private timeoutMs = 2000,
    private fetchFn: FetchLike = (globalThis as { fetch: FetchLike }).fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.headers = clientToken ? { "X-Island-Id": clientToken } : {};
  }

  private withTimeout(init: Record<string, unknown>): Record<string, unknown> {
    const ctl = new AbortController();
    setTimeout(() => ctl.abort(), this.timeoutMs);
    return { ...init, signal: ctl.signal };
  }

  async sendOne(chromosome: string): Promise<void> {
    try {
      await this.fetchFn(
        `${this.baseUrl}/one`,
        this.withTimeout({
          method: "PUT",
          headers: { "Content-Type": "application/json", ...this.headers },
          body: putOneBody(chromosome),
        }),
      );
    } catch {
      // fire and forget
    }
  }

  async fetchRandom(): Promise<string | null> {
    try {
      const resp = await this.fetchFn(
        `${this.baseUrl}/random`,
        this.withTimeout({ method: "GET", headers: this.headers }),
      );
      if (resp.status !== 200) return null;
      const body = JSON.parse(await resp.text()) as { chromosome?: unknown };
      return typeof body.chromosome === "string" ? body.chromosome : null;
    } catch {
      return null;
    }
  }
}

export type IslandStatus = "idle" | "running" | "solved";

export interface IslandReport {
  solved: boolean;
  generations: number;
  migrationsSent: number;
  migrationsReceived: number;
  migrationsDiscarded: number;
  bestFitness: number;
  trace: Array<[number, number]>;
}

export class IslandRunner {
  readonly params: EAParams;
  readonly spec: TrapSpec;
  readonly key: U64;
  population: Population;
  solved: boolean;
  migrationsSent = 0;
  migrationsReceived = 0;
  migrationsDiscarded = 0;
  trace: Array<[number, number]> = [];

  constructor(
    params: EAParams,
    spec: TrapSpec,
    private transport: MigrationTransport,
    seed: number | U64,
  ) {
    validateParams(params);
    validateSpec(spec);
    this.params = params;
    this.spec = spec;
    this.key = typeof seed === "number" ? fromNumber(seed) : seed;
    this.population = newRandomPopulation(params, spec, this.key);
    this.solved = this.population.bestFitness() >= maxFitness(spec);
  }

  private async exchange(): Promise<void> {
    const pop = this.population;
    const best = pop.bestIndex();
    await this.transport.sendOne(bitsToString(pop.row(best)));
    this.migrationsSent++;
    const fetched = await this.transport.fetchRandom();
    if (fetched === null) return;
    const bits = bitsFromString(fetched, chromosomeLength(this.spec));
    if (bits === null) {
      this.migrationsDiscarded++;
      return;
    }
    const protectedSet = new Set(eliteIndices(pop.fitness, this.params.eliteSize));
    const eligible: number[] = [];
    for (let i = 0; i < pop.n; i++) {
      if (!protectedSet.has(i)) eligible.push(i);
    }
    if (eligible.length === 0) {
      this.migrationsDiscarded++;
      return;
    }
    const u = drawUnit(this.key, P_IMM, pop.generation, 0);
    const slot = eligible[Math.floor(u * eligible.length)];
    pop.bits.set(bits, slot * pop.length);
    pop.fitness[slot] = evaluateRow(pop.bits, slot * pop.length, this.spec);
    this.migrationsReceived++;
  }

  /** One migration period; returns "solved" | "migrated" | "limit". */
  async runCycle(): Promise<string> {
    const p = this.params;
    let span = p.migrationPeriod;
    if (p.maxGenerations !== null) {
      span = Math.min(span, p.maxGenerations - this.population.generation);
      if (span <= 0) return "limit";
    }
    if (this.solved) return "solved";
    const base = this.population.generation;
    const res = runSpan(this.population, p, this.spec, this.key, span);
    for (let i = 0; i < res.generationsDone; i++) {
      this.trace.push([base + 1 + i, res.bestTrace[i]]);
    }
    this.population = res.population;
    let solved = res.solved;
    const atBoundary =
      this.population.generation % p.migrationPeriod === 0 &&
      res.generationsDone === span;
    if (atBoundary) {
      await this.exchange();
      if (!solved) {
        solved = this.population.bestFitness() >= maxFitness(this.spec);
      }
    }
    if (solved) {
      this.solved = true;
      return "solved";
    }
    if (p.maxGenerations !== null && this.population.generation >= p.maxGenerations) {
      return "limit";
    }
    return "migrated";
  }

  report(): IslandReport {
    return {
      solved: this.solved,
      generations: this.population.generation,
      migrationsSent: this.migrationsSent,
      migrationsReceived: this.migrationsReceived,
      migrationsDiscarded: this.migrationsDiscarded,
      bestFitness: this.population.bestFitness(),
      trace: this.trace,
    };
  }
}

const yieldToEventLoop = () =>
  new Promise<void>((resolve) => setTimeout(resolve, 0));

/**
 * Run a full island, yielding to the event loop between migration
 * periods. `onProgress` fires after every batch with the live runner.
 */
export async function runBrowserIsland(
  params: EAParams,
  spec: TrapSpec,
  transport: MigrationTransport,
  seed: number | U64,
  onProgress?: (runner: IslandRunner) => void,
): Promise<IslandReport> {
  const runner = new IslandRunner(params, spec, transport, seed);
  for (;;) {
    const status = await runner.runCycle();
    if (onProgress) onProgress(runner);
    if (status !== "migrated") break;
    await yieldToEventLoop();
  }
  return runner.report();
}
