#!/usr/bin/env python3
"""Generate the cross-language fixtures the frontend tests check against.

Writes JSON files under frontend/test/fixtures/.  Run after any change
to the RNG, the engine's draw addressing, or the island semantics;
tests/test_frontend_fixtures.py fails when the files go stale.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from evopool.engine import (  # noqa: E402
    EAParams,
    new_random_population,
    step_generation,
)
from evopool.island import run_island  # noqa: E402
from evopool.rng import Rng, unit_from_word, word_at  # noqa: E402
from evopool.transport import NullTransport  # noqa: E402
from evopool.trap import TrapSpec, bits_to_string  # noqa: E402

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "frontend", "test", "fixtures")

EQUIVALENCE_SEED = 4
EQUIVALENCE_SPEC = TrapSpec(4, 10)


def hex64(v: int) -> str:
    return f"{v:016x}"


def rng_vectors() -> dict:
    r = Rng(42)
    seq = [hex64(r.u64()) for _ in range(8)]
    addressed = []
    key = 0x123456789ABCDEF0
    for purpose, gen, idx in [
        (1, 0, 0),
        (1, 0, 7),
        (2, 1, 0),
        (2, 123, 456),
        (3, 1, 2),
        (4, 99, (3 << 20) | 11),
        (5, 20000, (250 << 16) | 3),
        (6, 4095, 0),
    ]:
        addr = (purpose << 56) | (gen << 32) | idx
        w = word_at(key, addr)
        addressed.append(
            {
                "purpose": purpose,
                "gen": gen,
                "idx": idx,
                "word": hex64(w),
                "unit": unit_from_word(w),
            }
        )
    return {"seed42_sequence": seq, "key": hex64(key), "addressed": addressed}


def small_engine_trace() -> dict:
    # tiny instance, full population dump: pins every engine detail
    spec = TrapSpec(3, 4)
    params = EAParams(
        population_size=8, elite_size=2, tournament_size=2,
        crossover_rate=0.9, migration_period=100,
    )
    rng = Rng(7)
    pop = new_random_population(params, spec, rng)
    gens = []
    for _ in range(30):
        pop = step_generation(pop, params, spec, rng)
        gens.append(pop.best_fitness)
    return {
        "seed": 7,
        "trapLength": spec.trap_length,
        "trapCount": spec.trap_count,
        "population": params.population_size,
        "elite": params.elite_size,
        "tournament": params.tournament_size,
        "crossoverRate": params.crossover_rate,
        "bestPerGeneration": gens,
        "finalPopulation": [bits_to_string(m.bits) for m in pop.members()],
        "finalFitness": [m.fitness for m in pop.members()],
    }


def island_trace() -> dict:
    params = EAParams(max_generations=20_000)
    report = run_island(params, EQUIVALENCE_SPEC, NullTransport(), EQUIVALENCE_SEED)
    return {
        "seed": EQUIVALENCE_SEED,
        "trapLength": EQUIVALENCE_SPEC.trap_length,
        "trapCount": EQUIVALENCE_SPEC.trap_count,
        "population": params.population_size,
        "elite": params.elite_size,
        "tournament": params.tournament_size,
        "crossoverRate": params.crossover_rate,
        "migrationPeriod": params.migration_period,
        "solved": report.solved,
        "generations": report.generations,
        "migrationsSent": report.migrations_sent,
        "trace": [[g, f] for g, f in report.best_fitness_trace],
    }


def fixtures() -> dict[str, dict]:
    return {
        "rng_vectors.json": rng_vectors(),
        "engine_small.json": small_engine_trace(),
        "island_trace.json": island_trace(),
    }


def main() -> int:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, data in fixtures().items():
        path = os.path.join(OUT_DIR, name)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
