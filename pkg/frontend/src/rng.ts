/**
 * Addressed random draws, mirroring the native engine's scheme exactly:
 *
 *   addr = purpose << 56 | generation << 32 | index
 *   word = mix64(key + addr * PHI)
 *
 * Draws are pure functions of (key, address), so both runtimes can
 * evaluate them in any order and still agree bit for bit.
 */

import { U64, unitFromWord, wordAt } from "./u64.js";

export const P_INIT = 1;
export const P_SEL = 2;
export const P_XRATE = 3;
export const P_XCUT = 4;
export const P_MUT = 5;
export const P_IMM = 6;

export function drawAddress(purpose: number, gen: number, idx: number): U64 {
  // purpose in bits 56..63, generation in 32..55, index in 0..31
  const hi = (((purpose << 24) >>> 0) | (gen & 0xffffff)) >>> 0;
  return [hi, idx >>> 0];
}

export function drawWord(key: U64, purpose: number, gen: number, idx: number): U64 {
  return wordAt(key, drawAddress(purpose, gen, idx));
}

export function drawUnit(key: U64, purpose: number, gen: number, idx: number): number {
  return unitFromWord(drawWord(key, purpose, gen, idx));
}

/**
 * CDF of the geometric gap to the next mutated bit: table[k] = 1-(1-p)^(k+1),
 * built by sequential multiplication so each entry is the same double the
 * native engine computes.
 */
export function buildGapCdf(p: number, length: number): Float64Array {
  const q = 1.0 - p;
  const table = new Float64Array(length);
  let acc = 1.0;
  for (let i = 0; i < length; i++) {
    acc *= q;
    table[i] = 1.0 - acc;
  }
  return table;
}

/** Smallest k with table[k] > u (searchsorted right). */
export function gapFromUnit(table: Float64Array, u: number): number {
  let lo = 0;
  let hi = table.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (table[mid] > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}
