"""A native island: the GA loop plus periodic pool migration.

Every `migration_period` generations the island sends its current best
individual to the pool and asks for one random individual back; an
arriving immigrant replaces a uniformly random non-elite member.  Both
halves are independent and fire-and-forget, so the loop runs to the
all-ones solution even against a dead server.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import engine
from .engine import EAParams, Population
from .rng import Rng, unit_from_word, word_at
from .trap import TrapSpec, bits_from_string, bits_to_string, evaluate
from .transport import MigrationTransport


@dataclass
class IslandReport:
    solved: bool
    generations: int
    evaluations: int
    migrations_sent: int
    migrations_received: int
    migrations_discarded: int
    wall_clock_seconds: float
    best_fitness: int
    seed: int
    best_fitness_trace: list[tuple[int, int]] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "solved": self.solved,
            "generations": self.generations,
            "evaluations": self.evaluations,
            "migrations_sent": self.migrations_sent,
            "migrations_received": self.migrations_received,
            "migrations_discarded": self.migrations_discarded,
            "wall_clock_seconds": self.wall_clock_seconds,
            "best_fitness": self.best_fitness,
            "seed": self.seed,
            "best_fitness_trace": [[g, f] for g, f in self.best_fitness_trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2) + "\n"


def migrate_exchange(
    pop: Population,
    params: EAParams,
    spec: TrapSpec,
    transport: MigrationTransport,
    rng: Rng,
) -> tuple[Population, bool, bool]:
    """One emigrate/immigrate exchange against the pool.

    Sends the current best individual, then asks for a random one; if a
    valid chromosome comes back it replaces a uniformly random non-elite
    member (elite = the elite_size best of the current population).
    Returns (population, received, discarded); transport faults leave
    the population untouched.
    """
    try:
        transport.send_one(bits_to_string(pop.member(pop.best_index).bits))
    except Exception:
        pass  # transports should not raise, but the loop must not die
    try:
        fetched = transport.fetch_random()
    except Exception:
        fetched = None
    if fetched is None:
        return pop, False, False
    try:
        bits = bits_from_string(fetched, spec)
    except (ValueError, TypeError):
        return pop, False, True  # malformed immigrant, dropped
    n = pop.size
    e = params.elite_size
    protected = set(engine.elite_indices(pop.fitness, e))
    eligible = [i for i in range(n) if i not in protected]
    if not eligible:
        return pop, False, True
    u = unit_from_word(word_at(rng.key, engine.draw_address(engine.P_IMM, pop.generation, 0)))
    slot = eligible[int(u * len(eligible))]
    pop.packed[slot] = engine.pack_row(bits)
    pop.fitness[slot] = int(evaluate(bits, spec))
    return pop, True, False


class IslandRunner:
    """Incremental island execution: one migration cycle at a time."""

    def __init__(self, params: EAParams, spec: TrapSpec, transport: MigrationTransport, seed: int):
        self.params = params
        self.spec = spec
        self.transport = transport
        self.rng = Rng(seed)
        self.seed = seed
        self.population = engine.new_random_population(params, spec, self.rng)
        self.evaluations = params.population_size
        self.migrations_sent = 0
        self.migrations_received = 0
        self.migrations_discarded = 0
        self.trace: list[tuple[int, int]] = []
        self.solved = bool(self.population.best_fitness >= spec.max_fitness)

    def run_cycle(self) -> str:
        """Advance up to one migration period.

        Returns "solved", "migrated" or "limit" (max_generations hit).
        A solution found exactly at a period boundary still emigrates,
        so the pool receives the winning chromosome.
        """
        p = self.params
        span = p.migration_period
        if p.max_generations is not None:
            span = min(span, p.max_generations - self.population.generation)
            if span <= 0:
                return "limit"
        if self.solved:
            return "solved"
        pop, done, solved, trace = engine.run_span(
            self.population, p, self.spec, self.rng, span
        )
        base = self.population.generation
        self.trace.extend((base + 1 + i, int(trace[i])) for i in range(done))
        self.population = pop
        self.evaluations += done * (p.population_size - p.elite_size)
        at_boundary = pop.generation % p.migration_period == 0 and done == span
        if at_boundary:
            self.population, received, discarded = migrate_exchange(
                self.population, p, self.spec, self.transport, self.rng
            )
            self.migrations_sent += 1
            self.migrations_received += int(received)
            self.migrations_discarded += int(discarded)
            if not solved:
                solved = self.population.best_fitness >= self.spec.max_fitness
        if solved:
            self.solved = True
            return "solved"
        if p.max_generations is not None and pop.generation >= p.max_generations:
            return "limit"
        return "migrated"

    def report(self, wall_clock_seconds: float) -> IslandReport:
        return IslandReport(
            solved=self.solved,
            generations=self.population.generation,
            evaluations=self.evaluations,
            migrations_sent=self.migrations_sent,
            migrations_received=self.migrations_received,
            migrations_discarded=self.migrations_discarded,
            wall_clock_seconds=wall_clock_seconds,
            best_fitness=self.population.best_fitness,
            seed=self.seed,
            best_fitness_trace=self.trace,
        )


def run_island(
    params: EAParams,
    spec: TrapSpec,
    transport: MigrationTransport,
    seed: int,
) -> IslandReport:
    """Run one island to the solution (or max_generations)."""
    t0 = time.perf_counter()
    runner = IslandRunner(params, spec, transport, seed)
    while True:
        status = runner.run_cycle()
        if status != "migrated":
            break
    return runner.report(time.perf_counter() - t0)
