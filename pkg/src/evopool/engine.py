"""Generational GA engine on bit-packed chromosomes.

The population lives in a (n, W) uint64 matrix, W = ceil(length/64),
chromosome bit b stored at bit (b % 64) of word (b // 64).  A numba
kernel advances whole spans of generations; a pure-numpy reference
implementation of the identical algorithm exists for cross-validation
(tests assert bit-identical trajectories between the two).

Every random decision is an addressed draw: word(key, addr) where
addr packs (purpose, generation, index).  The layout below is a frozen
contract -- the browser client reimplements it bit-for-bit, which is
what makes native/browser trajectory equivalence testable.

    addr = purpose << 56 | generation << 32 | index
    P_INIT  index = individual * W + word          (initial population)
    P_SEL   index = parent_slot * k + j            (tournament entrants)
    P_XRATE index = pair                           (crossover coin)
    P_XCUT  index = attempt << 20 | 2*pair + side  (cut points, redrawn
                                                    while the two collide)
    P_MUT   index = child << 16 | j                (geometric flip gaps)
    P_IMM   index = 0                              (immigrant slot)

Uniform ints are floor(unit * bound) with unit = (word >> 11) * 2**-53;
mutation samples gaps between flipped bits by inverse CDF over a table
of 1 - (1-p)**(k+1), which is exactly per-bit Bernoulli(p) but costs
O(flips) draws instead of O(length).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numba import njit, int64, uint64

from .rng import MASK64, Rng, word_at, words_at, unit_from_word, units_from_words
from .trap import TrapSpec, evaluate_matrix

P_INIT = 1
P_SEL = 2
P_XRATE = 3
P_XCUT = 4
P_MUT = 5
P_IMM = 6

MAX_GENERATION = (1 << 24) - 1  # address space for the generation field
MAX_POPULATION = 1 << 16
MAX_LENGTH = (1 << 16) - 1

_C55 = np.uint64(0x5555555555555555)
_C33 = np.uint64(0x3333333333333333)
_C0F = np.uint64(0x0F0F0F0F0F0F0F0F)
_C01 = np.uint64(0x0101010101010101)
_FULL = np.uint64(0xFFFFFFFFFFFFFFFF)
_PHI = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO53 = 2.0 ** -53


@dataclass
class EAParams:
    """GA configuration; defaults follow the canonical setup."""

    population_size: int = 256
    elite_size: int = 2
    tournament_size: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1 / chromosome length
    migration_period: int = 100
    max_generations: int | None = None

    def __post_init__(self):
        n = self.population_size
        if n < 2 or n > MAX_POPULATION:
            raise ValueError(f"population_size must be in [2, {MAX_POPULATION}]")
        if not 0 <= self.elite_size < n:
            raise ValueError("elite_size must satisfy 0 <= elite < population")
        if not 1 <= self.tournament_size <= n:
            raise ValueError("tournament_size must be in [1, population_size]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be a probability")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be a probability")
        if self.migration_period < 1:
            raise ValueError("migration_period must be >= 1")
        if self.max_generations is not None and not (
            1 <= self.max_generations <= MAX_GENERATION
        ):
            raise ValueError(f"max_generations must be in [1, {MAX_GENERATION}]")

    def resolved_mutation_rate(self, spec: TrapSpec) -> float:
        return self.mutation_rate if self.mutation_rate is not None else 1.0 / spec.length


@dataclass
class Individual:
    bits: np.ndarray  # (length,) uint8
    fitness: int


class Population:
    """Snapshot of one generation: packed bits, fitness, counter."""

    __slots__ = ("packed", "fitness", "generation", "length")

    def __init__(self, packed: np.ndarray, fitness: np.ndarray, generation: int, length: int):
        self.packed = packed
        self.fitness = fitness
        self.generation = generation
        self.length = length

    @property
    def size(self) -> int:
        return self.packed.shape[0]

    def bits_matrix(self) -> np.ndarray:
        return matrix_from_packed(self.packed, self.length)

    def member(self, i: int) -> Individual:
        return Individual(unpack_row(self.packed[i], self.length), int(self.fitness[i]))

    def members(self) -> Iterator[Individual]:
        for i in range(self.size):
            yield self.member(i)

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.fitness))  # first index on ties

    @property
    def best_fitness(self) -> int:
        return int(self.fitness[self.best_index])


def words_per_chromosome(length: int) -> int:
    return (length + 63) // 64


def packed_from_matrix(bits: np.ndarray) -> np.ndarray:
    """(n, L) 0/1 uint8 -> (n, W) uint64, LSB-first within each word."""
    n, length = bits.shape
    w = words_per_chromosome(length)
    padded = np.zeros((n, w * 64), dtype=np.uint8)
    padded[:, :length] = bits
    # packbits is MSB-first per byte; reverse bit order inside each byte
    rev = padded.reshape(n, w * 8, 8)[:, :, ::-1]
    as_bytes = np.packbits(rev.reshape(n, -1), axis=1)
    return as_bytes.view("<u8").reshape(n, w)


def matrix_from_packed(packed: np.ndarray, length: int) -> np.ndarray:
    n, w = packed.shape
    as_bytes = packed.astype("<u8", copy=False).view(np.uint8).reshape(n, w * 8)
    bits = np.unpackbits(as_bytes, axis=1).reshape(n, w * 8, 8)[:, :, ::-1]
    return bits.reshape(n, w * 64)[:, :length].copy()


def pack_row(bits: np.ndarray) -> np.ndarray:
    return packed_from_matrix(bits.reshape(1, -1))[0]


def unpack_row(packed_row: np.ndarray, length: int) -> np.ndarray:
    return matrix_from_packed(packed_row.reshape(1, -1), length)[0]


def build_gap_cdf(p: float, length: int) -> np.ndarray:
    """CDF of the geometric gap to the next flipped bit: 1 - (1-p)^(k+1).

    Built by sequential multiplication so every entry is reproducible
    bit-for-bit in any IEEE-754 runtime.
    """
    q = 1.0 - p
    table = np.empty(length, dtype=np.float64)
    acc = 1.0
    for i in range(length):
        acc *= q
        table[i] = 1.0 - acc
    return table


def draw_address(purpose: int, gen: int, idx: int) -> int:
    return (purpose << 56) | (gen << 32) | idx


# ---------------------------------------------------------------------------
# numba kernel
# ---------------------------------------------------------------------------

@njit(uint64(uint64, uint64), cache=True, inline="always")
def _word(key, addr):
    z = key + addr * _PHI
    z ^= z >> 30
    z *= _M1
    z ^= z >> 27
    z *= _M2
    z ^= z >> 31
    return z


@njit(cache=True, inline="always")
def _unit(key, addr):
    return (_word(key, addr) >> uint64(11)) * _TO53


@njit(uint64(uint64,), cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> uint64(1)) & _C55)
    v = (v & _C33) + ((v >> uint64(2)) & _C33)
    v = (v + (v >> uint64(4))) & _C0F
    return (v * _C01) >> uint64(56)


@njit(uint64(int64, int64), cache=True, inline="always")
def _mask_range(a, b):
    # ones at bit positions [a, b), 0 <= a <= b <= 64
    if a >= b:
        return uint64(0)
    hi = _FULL if b >= 64 else (uint64(1) << uint64(b)) - uint64(1)
    lo = (uint64(1) << uint64(a)) - uint64(1)
    return hi & ~lo


@njit(int64(uint64[:, :], int64, int64, int64, int64, uint64), cache=True, inline="always")
def _eval_row(words, row, l, length, m_blocks, pat):
    w_count = words.shape[1]
    ones = uint64(0)
    nall = uint64(0)
    if pat != uint64(0):  # l divides 64: SWAR all-ones-block detection
        for w in range(w_count):
            v = words[row, w]
            ones += _popcount(v)
            t = v
            for s in range(1, l):
                t &= v >> uint64(s)
            nall += _popcount(t & pat)
    else:
        for w in range(w_count):
            ones += _popcount(words[row, w])
        lmask = (uint64(1) << uint64(l)) - uint64(1)
        for blk in range(m_blocks):
            s = blk * l
            wi = s >> 6
            off = s & 63
            v = words[row, wi] >> uint64(off)
            rem = 64 - off
            if rem < l:
                v |= words[row, wi + 1] << uint64(rem)
            if (v & lmask) == lmask:
                nall += uint64(1)
    return m_blocks * (l - 1) - int64(ones) + (l + 1) * int64(nall)


@njit(cache=True)
def _block_pattern(l):
    if 64 % l != 0:
        return uint64(0)
    pat = uint64(0)
    i = 0
    while i < 64:
        pat |= uint64(1) << uint64(i)
        i += l
    return pat


@njit(cache=True)
def eval_packed(words, l, length):
    """Fitness of every row of a packed population matrix."""
    n = words.shape[0]
    m_blocks = length // l
    pat = _block_pattern(l)
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _eval_row(words, i, l, length, m_blocks, pat)
    return out


@njit(cache=True)
def span_kernel(
    bits, fit, buf_bits, buf_fit, trace,
    gen0, ngens, key, elite, k, rate, gap_cdf, l, length, target, elite_idx,
):
    """Advance up to `ngens` generations; stop early once best >= target.

    Returns (generations_done, solved).  The result lands in `bits`/`fit`
    when generations_done is even, in the buffers when odd; trace[i] is
    the best fitness after generation gen0 + i.
    """
    n = bits.shape[0]
    w_count = bits.shape[1]
    nc = n - elite
    npairs = (nc + 1) // 2
    table_len = len(gap_cdf)
    u_nf = gap_cdf[table_len - 1]  # u >= this means "no flip in this row"
    m_blocks = length // l
    pat = _block_pattern(l)
    cur = bits
    curf = fit
    nxt = buf_bits
    nxtf = buf_fit
    done = 0
    solved = False
    for it in range(ngens):
        gen = gen0 + it
        g = uint64(gen) << uint64(32)
        p_sel = (uint64(P_SEL) << uint64(56)) | g
        p_xr = (uint64(P_XRATE) << uint64(56)) | g
        p_xc = (uint64(P_XCUT) << uint64(56)) | g
        p_mut = (uint64(P_MUT) << uint64(56)) | g
        # elites: top-elite by (fitness desc, index asc)
        for e in range(elite):
            best = -1
            bf = int64(-1)
            for i in range(n):
                f = curf[i]
                if f > bf:
                    taken = False
                    for t in range(e):
                        if elite_idx[t] == i:
                            taken = True
                            break
                    if not taken:
                        bf = f
                        best = i
            elite_idx[e] = best
            nxtf[e] = bf
            for w in range(w_count):
                nxt[e, w] = cur[best, w]
        for pair in range(npairs):
            # two tournament winners; strict > keeps first-drawn on ties
            base0 = uint64(pair * 2 * k)
            win0 = -1
            wf0 = int64(-1)
            for j in range(k):
                c = int64(_unit(key, p_sel | (base0 + uint64(j))) * n)
                if curf[c] > wf0:
                    wf0 = curf[c]
                    win0 = c
            base1 = uint64((pair * 2 + 1) * k)
            win1 = -1
            wf1 = int64(-1)
            for j in range(k):
                c = int64(_unit(key, p_sel | (base1 + uint64(j))) * n)
                if curf[c] > wf1:
                    wf1 = curf[c]
                    win1 = c
            row1 = elite + 2 * pair
            row2 = row1 + 1
            has2 = row2 < n
            u = _unit(key, p_xr | uint64(pair))
            lo = 0
            hi = 0
            if u < rate:
                att = 0
                ca = 0
                cb = 0
                while True:
                    abase = p_xc | (uint64(att) << uint64(20))
                    ca = 1 + int64(_unit(key, abase | uint64(2 * pair)) * (length - 1))
                    cb = 1 + int64(_unit(key, abase | uint64(2 * pair + 1)) * (length - 1))
                    if ca != cb:
                        break
                    att += 1
                if ca < cb:
                    lo = ca
                    hi = cb
                else:
                    lo = cb
                    hi = ca
            for w in range(w_count):
                w0 = 64 * w
                a = lo - w0
                if a < 0:
                    a = 0
                b = hi - w0
                if b > 64:
                    b = 64
                m = _mask_range(a, b)
                va = cur[win0, w]
                vb = cur[win1, w]
                nxt[row1, w] = (va & ~m) | (vb & m)
                if has2:
                    nxt[row2, w] = (vb & ~m) | (va & m)
            nrows = 2 if has2 else 1
            for ri in range(nrows):
                row = row1 + ri
                s = uint64(row - elite) << uint64(16)
                pos = -1
                j = uint64(0)
                while True:
                    u1 = _unit(key, p_mut | s | j)
                    if u1 >= u_nf:
                        break
                    a2 = 0
                    b2 = table_len
                    while a2 < b2:  # first k with gap_cdf[k] > u1
                        mid = (a2 + b2) >> 1
                        if gap_cdf[mid] > u1:
                            b2 = mid
                        else:
                            a2 = mid + 1
                    pos += 1 + a2
                    if pos >= length:
                        break
                    nxt[row, pos >> 6] ^= uint64(1) << uint64(pos & 63)
                    j += uint64(1)
                nxtf[row] = _eval_row(nxt, row, l, length, m_blocks, pat)
        tmp = cur
        cur = nxt
        nxt = tmp
        tmpf = curf
        curf = nxtf
        nxtf = tmpf
        bfv = int64(-1)
        for i in range(n):
            if curf[i] > bfv:
                bfv = curf[i]
        trace[it] = bfv
        done = it + 1
        if bfv >= target:
            solved = True
            break
    return done, solved


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _check_engine_limits(params: EAParams, spec: TrapSpec) -> None:
    if spec.length > MAX_LENGTH:
        raise ValueError(f"chromosome length {spec.length} exceeds engine limit {MAX_LENGTH}")
    if spec.trap_length > 64:
        raise ValueError("packed engine supports trap_length <= 64")


def new_random_population(params: EAParams, spec: TrapSpec, rng: Rng) -> Population:
    """Uniform random population at generation 0, deterministic in rng.key."""
    _check_engine_limits(params, spec)
    n = params.population_size
    w = words_per_chromosome(spec.length)
    idx = np.arange(n * w, dtype=np.uint64) | np.uint64(draw_address(P_INIT, 0, 0))
    packed = words_at(rng.key, idx).reshape(n, w)
    rem = spec.length % 64
    if rem:
        packed[:, -1] &= np.uint64((1 << rem) - 1)
    fitness = evaluate_matrix(matrix_from_packed(packed, spec.length), spec)
    return Population(packed, fitness.astype(np.int64), 0, spec.length)


def run_span(
    pop: Population,
    params: EAParams,
    spec: TrapSpec,
    rng: Rng,
    ngens: int,
    stop_at_solution: bool = True,
):
    """Run up to `ngens` generations from `pop`.

    Returns (new_population, generations_done, solved, best_trace) where
    best_trace[i] is the best fitness after generation pop.generation+1+i.
    """
    _check_engine_limits(params, spec)
    if pop.generation + ngens > MAX_GENERATION:
        raise ValueError(f"generation counter would exceed {MAX_GENERATION}")
    n = params.population_size
    if pop.size != n:
        raise ValueError("population size does not match params")
    bits = pop.packed.copy()
    fit = pop.fitness.copy()
    buf_bits = np.empty_like(bits)
    buf_fit = np.empty_like(fit)
    trace = np.empty(ngens, dtype=np.int64)
    elite_idx = np.empty(max(params.elite_size, 1), dtype=np.int64)
    target = spec.max_fitness if stop_at_solution else np.iinfo(np.int64).max
    done, solved = span_kernel(
        bits, fit, buf_bits, buf_fit, trace,
        pop.generation + 1, ngens, np.uint64(rng.key),
        params.elite_size, params.tournament_size,
        params.crossover_rate,
        build_gap_cdf(params.resolved_mutation_rate(spec), spec.length),
        spec.trap_length, spec.length, target, elite_idx,
    )
    if done % 2 == 1:
        bits, buf_bits = buf_bits, bits
        fit, buf_fit = buf_fit, fit
    new_pop = Population(bits, fit, pop.generation + done, spec.length)
    return new_pop, int(done), bool(solved), trace[:done].copy()


def step_generation(pop: Population, params: EAParams, spec: TrapSpec, rng: Rng) -> Population:
    """Advance exactly one generation (elitism + tournament/crossover/mutation)."""
    new_pop, _, _, _ = run_span(pop, params, spec, rng, 1, stop_at_solution=False)
    return new_pop


def elite_indices(fitness: np.ndarray, elite_size: int) -> list[int]:
    """Indices of the top `elite_size` members (fitness desc, index asc)."""
    if elite_size == 0:
        return []
    order = np.argsort(-fitness.astype(np.int64), kind="stable")
    return [int(i) for i in order[:elite_size]]


def tournament_select(pop: Population, k: int, rng: Rng) -> Individual:
    """Draw k members uniformly with replacement, return the fittest.

    Ties go to the earliest-drawn contestant.
    """
    if not 1 <= k <= pop.size:
        raise ValueError("tournament size must be in [1, population size]")
    best = -1
    best_fit = -1
    for _ in range(k):
        c = rng.below(pop.size)
        f = int(pop.fitness[c])
        if f > best_fit:
            best_fit = f
            best = c
    return pop.member(best)


def crossover(a: np.ndarray, b: np.ndarray, rate: float, rng: Rng):
    """Two-point crossover with probability `rate`, else parents unchanged.

    Cut points are distinct positions in [1, L-1]; the middle segment is
    swapped between the two children.
    """
    if len(a) != len(b):
        raise ValueError("parents must have equal length")
    length = len(a)
    if length < 2:
        raise ValueError("chromosomes must have at least 2 bits")
    if rng.unit() >= rate:
        return a.copy(), b.copy()
    while True:
        ca = 1 + rng.below(length - 1)
        cb = 1 + rng.below(length - 1)
        if ca != cb:
            break
    lo, hi = min(ca, cb), max(ca, cb)
    c1 = a.copy()
    c2 = b.copy()
    c1[lo:hi] = b[lo:hi]
    c2[lo:hi] = a[lo:hi]
    return c1, c2


def mutate(bits: np.ndarray, per_bit_rate: float, rng: Rng) -> np.ndarray:
    """Flip each bit independently with probability `per_bit_rate`."""
    flips = rng.unit_array(len(bits)) < per_bit_rate
    out = bits.copy()
    out[flips] ^= 1
    return out


# ---------------------------------------------------------------------------
# reference implementation (unpacked numpy; used to cross-check the kernel)
# ---------------------------------------------------------------------------

def step_generation_reference(pop: Population, params: EAParams, spec: TrapSpec, rng: Rng) -> Population:
    """Same algorithm and draw addressing as span_kernel, written plainly."""
    n = params.population_size
    e = params.elite_size
    k = params.tournament_size
    length = spec.length
    gen = pop.generation + 1
    key = rng.key
    bits = pop.bits_matrix()
    fit = pop.fitness.astype(np.int64)
    nc = n - e
    npairs = (nc + 1) // 2
    new_bits = np.empty_like(bits)
    new_fit = np.empty(n, dtype=np.int64)

    elites = elite_indices(fit, e)
    for slot, i in enumerate(elites):
        new_bits[slot] = bits[i]
        new_fit[slot] = fit[i]

    def unit(purpose, idx):
        return unit_from_word(word_at(key, draw_address(purpose, gen, idx)))

    gap_cdf = build_gap_cdf(params.resolved_mutation_rate(spec), length)
    u_nf = gap_cdf[-1]
    for pair in range(npairs):
        winners = []
        for t in (2 * pair, 2 * pair + 1):
            wi, wf = -1, -1
            for j in range(k):
                c = int(unit(P_SEL, t * k + j) * n)
                if fit[c] > wf:
                    wf, wi = int(fit[c]), c
            winners.append(wi)
        pa, pb = winners
        lo = hi = 0
        if unit(P_XRATE, pair) < params.crossover_rate:
            att = 0
            while True:
                ca = 1 + int(unit(P_XCUT, (att << 20) | (2 * pair)) * (length - 1))
                cb = 1 + int(unit(P_XCUT, (att << 20) | (2 * pair + 1)) * (length - 1))
                if ca != cb:
                    break
                att += 1
            lo, hi = min(ca, cb), max(ca, cb)
        rows = [e + 2 * pair] + ([e + 2 * pair + 1] if e + 2 * pair + 1 < n else [])
        for ri, row in enumerate(rows):
            src_out, src_in = (pa, pb) if ri == 0 else (pb, pa)
            child = bits[src_out].copy()
            child[lo:hi] = bits[src_in][lo:hi]
            pos = -1
            j = 0
            while True:
                u1 = unit(P_MUT, ((row - e) << 16) | j)
                if u1 >= u_nf:
                    break
                gap = int(np.searchsorted(gap_cdf, u1, side="right"))
                pos += 1 + gap
                if pos >= length:
                    break
                child[pos] ^= 1
                j += 1
            new_bits[row] = child
    new_fit[e:] = evaluate_matrix(new_bits[e:], spec)
    return Population(packed_from_matrix(new_bits), new_fit, gen, length)
