/**
 * Generational GA engine: byte array population, addressed random draws.
 *
 * The algorithm and its draw addressing replicate the native engine
 * decision for decision, so a browser island seeded like a native one
 * produces the identical best-fitness trajectory. Elites are the
 * elite-size best individuals (ties to the lower index); children come
 * from pairwise tournament selection, two-point crossover and per-bit
 * mutation realized as geometric gaps between flipped bits.
 */

import {
  P_INIT,
  P_MUT,
  P_SEL,
  P_XCUT,
  P_XRATE,
  buildGapCdf,
  drawUnit,
  drawWord,
  gapFromUnit,
} from "./rng.js";
import { TrapSpec, chromosomeLength, evaluateRow, validateSpec } from "./trap.js";
import { U64 } from "./u64.js";

export interface EAParams {
  populationSize: number;
  eliteSize: number;
  tournamentSize: number;
  crossoverRate: number;
  mutationRate: number | null; // null -> 1 / chromosome length
  migrationPeriod: number;
  maxGenerations: number | null;
}

export function defaultParams(): EAParams {
  return {
    populationSize: 256,
    eliteSize: 2,
    tournamentSize: 2,
    crossoverRate: 0.9,
    mutationRate: null,
    migrationPeriod: 100,
    maxGenerations: null,
  };
}

export function validateParams(p: EAParams): void {
  const n = p.populationSize;
  if (!Number.isInteger(n) || n < 2 || n > 65536) {
    throw new Error("populationSize must be an integer in [2, 65536]");
  }
  if (!Number.isInteger(p.eliteSize) || p.eliteSize < 0 || p.eliteSize >= n) {
    throw new Error("eliteSize must satisfy 0 <= elite < population");
  }
  if (!Number.isInteger(p.tournamentSize) || p.tournamentSize < 1 || p.tournamentSize > n) {
    throw new Error("tournamentSize must be in [1, populationSize]");
  }
  if (p.crossoverRate < 0 || p.crossoverRate > 1) {
    throw new Error("crossoverRate must be a probability");
  }
  if (p.mutationRate !== null && (p.mutationRate < 0 || p.mutationRate > 1)) {
    throw new Error("mutationRate must be a probability");
  }
  if (!Number.isInteger(p.migrationPeriod) || p.migrationPeriod < 1) {
    throw new Error("migrationPeriod must be >= 1");
  }
}

export class Population {
  readonly n: number;
  readonly length: number;
  bits: Uint8Array; // flat n x length
  fitness: Int32Array;
  generation: number;

  constructor(n: number, length: number) {
    this.n = n;
    this.length = length;
    this.bits = new Uint8Array(n * length);
    this.fitness = new Int32Array(n);
    this.generation = 0;
  }

  bestIndex(): number {
    let best = 0;
    for (let i = 1; i < this.n; i++) {
      if (this.fitness[i] > this.fitness[best]) best = i;
    }
    return best;
  }

  bestFitness(): number {
    return this.fitness[this.bestIndex()];
  }

  row(i: number): Uint8Array {
    return this.bits.subarray(i * this.length, (i + 1) * this.length);
  }
}

/** Indices of the top `eliteSize` members, fitness desc then index asc. */
export function eliteIndices(fitness: Int32Array, eliteSize: number): number[] {
  const chosen: number[] = [];
  for (let e = 0; e < eliteSize; e++) {
    let best = -1;
    let bf = -1;
    for (let i = 0; i < fitness.length; i++) {
      if (fitness[i] > bf && !chosen.includes(i)) {
        bf = fitness[i];
        best = i;
      }
    }
    chosen.push(best);
  }
  return chosen;
}

export function newRandomPopulation(
  params: EAParams,
  spec: TrapSpec,
  key: U64,
): Population {
  validateParams(params);
  validateSpec(spec);
  const length = chromosomeLength(spec);
  const w = Math.ceil(length / 64);
  const pop = new Population(params.populationSize, length);
  for (let i = 0; i < pop.n; i++) {
    const base = i * length;
    for (let wi = 0; wi < w; wi++) {
      const word = drawWord(key, P_INIT, 0, i * w + wi);
      const upper = Math.min(64, length - wi * 64);
      for (let b = 0; b < upper; b++) {
        const bit = b < 32 ? (word[1] >>> b) & 1 : (word[0] >>> (b - 32)) & 1;
        pop.bits[base + wi * 64 + b] = bit;
      }
    }
    pop.fitness[i] = evaluateRow(pop.bits, base, spec);
  }
  return pop;
}

/** Advance one generation in place (double-buffered internally). */
export function stepGeneration(
  pop: Population,
  params: EAParams,
  spec: TrapSpec,
  key: U64,
): Population {
  const n = pop.n;
  const L = pop.length;
  const e = params.eliteSize;
  const k = params.tournamentSize;
  const gen = pop.generation + 1;
  const rate = params.crossoverRate;
  const p = params.mutationRate ?? 1.0 / L;
  const gapCdf = buildGapCdf(p, L);
  const uNoFlip = gapCdf[L - 1];
  const next = new Population(n, L);
  next.generation = gen;

  const elites = eliteIndices(pop.fitness, e);
  for (let slot = 0; slot < e; slot++) {
    next.bits.set(pop.row(elites[slot]), slot * L);
    next.fitness[slot] = pop.fitness[elites[slot]];
  }

  const nc = n - e;
  const npairs = (nc + 1) >> 1;
  for (let pair = 0; pair < npairs; pair++) {
    const winners = [0, 0];
    for (let t = 0; t < 2; t++) {
      const tbase = (pair * 2 + t) * k;
      let wi = -1;
      let wf = -1;
      for (let j = 0; j < k; j++) {
        const c = Math.floor(drawUnit(key, P_SEL, gen, tbase + j) * n);
        if (pop.fitness[c] > wf) {
          wf = pop.fitness[c];
          wi = c;
        }
      }
      winners[t] = wi;
    }
    let lo = 0;
    let hi = 0;
    if (drawUnit(key, P_XRATE, gen, pair) < rate) {
      let att = 0;
      let ca = 0;
      let cb = 0;
      for (;;) {
        const abase = ((att << 20) >>> 0);
        ca = 1 + Math.floor(drawUnit(key, P_XCUT, gen, abase | (2 * pair)) * (L - 1));
        cb = 1 + Math.floor(drawUnit(key, P_XCUT, gen, abase | (2 * pair + 1)) * (L - 1));
        if (ca !== cb) break;
        att++;
      }
      lo = Math.min(ca, cb);
      hi = Math.max(ca, cb);
    }
    const rows = [e + 2 * pair];
    if (e + 2 * pair + 1 < n) rows.push(e + 2 * pair + 1);
    for (let ri = 0; ri < rows.length; ri++) {
      const row = rows[ri];
      const outer = pop.row(winners[ri === 0 ? 0 : 1]);
      const inner = pop.row(winners[ri === 0 ? 1 : 0]);
      const base = row * L;
      for (let b = 0; b < L; b++) {
        next.bits[base + b] = b >= lo && b < hi ? inner[b] : outer[b];
      }
      // mutation: walk geometric gaps between flipped bits
      const s = ((row - e) << 16) >>> 0;
      let pos = -1;
      let j = 0;
      for (;;) {
        const u = drawUnit(key, P_MUT, gen, (s | j) >>> 0);
        if (u >= uNoFlip) break;
        pos += 1 + gapFromUnit(gapCdf, u);
        if (pos >= L) break;
        next.bits[base + pos] ^= 1;
        j++;
      }
      next.fitness[row] = evaluateRow(next.bits, base, spec);
    }
  }
  return next;
}

export interface SpanResult {
  population: Population;
  generationsDone: number;
  solved: boolean;
  bestTrace: number[]; // best fitness after each generation run
}

export function runSpan(
  pop: Population,
  params: EAParams,
  spec: TrapSpec,
  key: U64,
  ngens: number,
  stopAtSolution = true,
): SpanResult {
  const target = stopAtSolution ? spec.trapLength * spec.trapCount : Infinity;
  const trace: number[] = [];
  let cur = pop;
  let done = 0;
  let solved = false;
  for (let i = 0; i < ngens; i++) {
    cur = stepGeneration(cur, params, spec, key);
    const best = cur.bestFitness();
    trace.push(best);
    done++;
    if (best >= target) {
      solved = true;
      break;
    }
  }
  return { population: cur, generationsDone: done, solved, bestTrace: trace };
}
