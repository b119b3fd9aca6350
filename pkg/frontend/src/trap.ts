/**
 * Concatenated deceptive trap fitness on 0/1 arrays.
 */

export interface TrapSpec {
  trapLength: number;
  trapCount: number;
}

export function chromosomeLength(spec: TrapSpec): number {
  return spec.trapLength * spec.trapCount;
}

export function maxFitness(spec: TrapSpec): number {
  return spec.trapLength * spec.trapCount;
}

export function validateSpec(spec: TrapSpec): void {
  if (!Number.isInteger(spec.trapLength) || spec.trapLength < 2) {
    throw new Error(`trapLength must be an integer >= 2, got ${spec.trapLength}`);
  }
  if (!Number.isInteger(spec.trapCount) || spec.trapCount < 1) {
    throw new Error(`trapCount must be an integer >= 1, got ${spec.trapCount}`);
  }
}

export function trapFitness(block: ArrayLike<number>, trapLength: number): number {
  if (block.length !== trapLength) {
    throw new Error(`block length ${block.length} != trap length ${trapLength}`);
  }
  let ones = 0;
  for (let i = 0; i < trapLength; i++) ones += block[i];
  return ones === trapLength ? trapLength : trapLength - 1 - ones;
}

/** Fitness of row `row` in a flat (n x length) population array. */
export function evaluateRow(
  bits: Uint8Array,
  offset: number,
  spec: TrapSpec,
): number {
  const l = spec.trapLength;
  let total = 0;
  for (let blk = 0; blk < spec.trapCount; blk++) {
    let ones = 0;
    const base = offset + blk * l;
    for (let b = 0; b < l; b++) ones += bits[base + b];
    total += ones === l ? l : l - 1 - ones;
  }
  return total;
}

export function evaluate(bits: ArrayLike<number>, spec: TrapSpec): number {
  const length = chromosomeLength(spec);
  if (bits.length !== length) {
    throw new Error(`chromosome length ${bits.length} != ${length}`);
  }
  const arr = bits instanceof Uint8Array ? bits : Uint8Array.from(bits);
  return evaluateRow(arr, 0, spec);
}

export function isSolution(bits: ArrayLike<number>, spec: TrapSpec): boolean {
  if (bits.length !== chromosomeLength(spec)) {
    throw new Error("chromosome length mismatch");
  }
  for (let i = 0; i < bits.length; i++) {
    if (bits[i] !== 1) return false;
  }
  return true;
}

export function bitsToString(bits: Uint8Array): string {
  let s = "";
  for (let i = 0; i < bits.length; i++) s += bits[i] ? "1" : "0";
  return s;
}

export function bitsFromString(s: string, length: number): Uint8Array | null {
  if (s.length !== length) return null;
  const out = new Uint8Array(length);
  for (let i = 0; i < length; i++) {
    const c = s.charCodeAt(i);
    if (c === 49) out[i] = 1;
    else if (c !== 48) return null;
  }
  return out;
}
