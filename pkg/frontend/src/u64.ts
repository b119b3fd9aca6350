/**
 * Exact 64-bit unsigned arithmetic on [hi, lo] pairs of uint32 values.
 *
 * Only the operations the random generator needs: wrapping add and
 * multiply, xor, and logical right shifts. Implemented with 16-bit limb
 * products so every intermediate stays exactly representable in a
 * double; results are bit-identical to native uint64 arithmetic.
 */

export type U64 = [number, number]; // [hi, lo], each an unsigned 32-bit value

export const PHI: U64 = [0x9e3779b9, 0x7f4a7c15];
export const M1: U64 = [0xbf58476d, 0x1ce4e5b9];
export const M2: U64 = [0x94d049bb, 0x133111eb];

export function fromNumber(n: number): U64 {
  // exact for 0 <= n < 2^53
  const hi = Math.floor(n / 0x100000000);
  return [hi >>> 0, (n - hi * 0x100000000) >>> 0];
}

export function fromHex(hex: string): U64 {
  const s = hex.padStart(16, "0");
  return [parseInt(s.slice(0, 8), 16) >>> 0, parseInt(s.slice(8), 16) >>> 0];
}

export function toHex(x: U64): string {
  return (
    x[0].toString(16).padStart(8, "0") + x[1].toString(16).padStart(8, "0")
  );
}

export function add64(a: U64, b: U64): U64 {
  const lo = a[1] + b[1];
  const carry = lo > 0xffffffff ? 1 : 0;
  return [(a[0] + b[0] + carry) >>> 0, lo >>> 0];
}

export function mul64(a: U64, b: U64): U64 {
  const a0 = a[1] & 0xffff;
  const a1 = a[1] >>> 16;
  const a2 = a[0] & 0xffff;
  const a3 = a[0] >>> 16;
  const b0 = b[1] & 0xffff;
  const b1 = b[1] >>> 16;
  const b2 = b[0] & 0xffff;
  const b3 = b[0] >>> 16;
  const r0 = a0 * b0;
  const r1 = a1 * b0 + a0 * b1 + Math.floor(r0 / 0x10000);
  const r2 = a2 * b0 + a1 * b1 + a0 * b2 + Math.floor(r1 / 0x10000);
  const r3 = a3 * b0 + a2 * b1 + a1 * b2 + a0 * b3 + Math.floor(r2 / 0x10000);
  const lo = ((r0 & 0xffff) + (r1 & 0xffff) * 0x10000) >>> 0;
  const hi = ((r2 & 0xffff) + (r3 & 0xffff) * 0x10000) >>> 0;
  return [hi, lo];
}

export function xor64(a: U64, b: U64): U64 {
  return [(a[0] ^ b[0]) >>> 0, (a[1] ^ b[1]) >>> 0];
}

/** Logical right shift for 0 < s < 32 (all this generator uses). */
export function shr64(x: U64, s: number): U64 {
  return [x[0] >>> s, ((x[1] >>> s) | ((x[0] << (32 - s)) >>> 0)) >>> 0];
}

/** splitmix64 finalizer. */
export function mix64(z: U64): U64 {
  z = xor64(z, shr64(z, 30));
  z = mul64(z, M1);
  z = xor64(z, shr64(z, 27));
  z = mul64(z, M2);
  return xor64(z, shr64(z, 31));
}

/** The random word at `addr` under `key`: mix64(key + addr * PHI). */
export function wordAt(key: U64, addr: U64): U64 {
  return mix64(add64(key, mul64(addr, PHI)));
}

/** Map a word to [0, 1) using its top 53 bits; exact double arithmetic. */
export function unitFromWord(w: U64): number {
  return (w[0] * 0x200000 + (w[1] >>> 11)) * Math.pow(2, -53);
}
