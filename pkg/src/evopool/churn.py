"""Deterministic virtual-time simulator of a volunteer population.

Volunteers join spread over a window, contribute a power-law number of
migration cycles each, and pace those cycles with heavy-tailed
log-normal intervals.  Between PUTs every participant runs a real
island engine against an in-process pool with the exact server
semantics, so the synthetic logs are valid analyzer input and the
island trajectories are bit-identical to standalone runs.

Everything is driven by one seed and a virtual clock; hour-scale
experiments replay in seconds and reproduce byte-for-byte.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .engine import EAParams
from .island import IslandRunner
from .pool import Experiment, LogEvent
from .rng import Rng
from .transport import PoolTransport
from .trap import TrapSpec

#: Cycles contributed by the top-ranked volunteer (the observed scale:
#: the busiest client manages on the order of a hundred PUTs).
RANK1_CYCLES = 100

#: Trap geometry the simulator defaults to.  Deliberately harder than the
#: interactive default (8-bit traps instead of 4-bit): volunteer-behavior
#: statistics need runs where contribution quotas, not an early solution,
#: end the experiment.
SIM_DEFAULT_SPEC = TrapSpec(trap_length=8, trap_count=30)


@dataclass(frozen=True)
class ChurnProfile:
    """Generative model of who shows up and how they behave."""

    participant_min: int = 6
    participant_max: int = 28
    zipf_exponent: float = 1.0
    interval_mu: float = 0.712  # ln(4) - 0.674 * sigma: 75% of cycles < 4 s
    interval_sigma: float = 1.0
    join_spread: float = 5400.0  # seconds over which volunteers arrive
    seed: int = 0

    def __post_init__(self):
        if self.participant_min < 1:
            raise ValueError("participant_min must be >= 1")
        if self.participant_max < self.participant_min:
            raise ValueError("participant_max must be >= participant_min")
        if self.zipf_exponent <= 0:
            raise ValueError("zipf_exponent must be positive")
        if self.interval_sigma <= 0:
            raise ValueError("interval_sigma must be positive")
        if self.join_spread < 0:
            raise ValueError("join_spread must be >= 0")

    def to_obj(self) -> dict:
        return {
            "participant_min": self.participant_min,
            "participant_max": self.participant_max,
            "zipf_exponent": self.zipf_exponent,
            "interval_mu": self.interval_mu,
            "interval_sigma": self.interval_sigma,
            "join_spread": self.join_spread,
            "seed": self.seed,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ChurnProfile":
        return cls(**{k: obj[k] for k in cls.__dataclass_fields__ if k in obj})


@dataclass
class SimulationReport:
    profile: ChurnProfile
    participants: int
    quotas: list[int]
    per_client_puts: dict[str, int]
    solved_at_seconds: float | None
    total_virtual_seconds: float
    total_puts: int
    experiment_seed: int = 0
    island_seeds: list[int] = field(default_factory=list)
    log: list[LogEvent] = field(repr=False, default_factory=list)

    def to_obj(self) -> dict:
        return {
            "profile": self.profile.to_obj(),
            "participants": self.participants,
            "quotas": self.quotas,
            "per_client_puts": dict(sorted(self.per_client_puts.items())),
            "solved_at_seconds": self.solved_at_seconds,
            "total_virtual_seconds": self.total_virtual_seconds,
            "total_puts": self.total_puts,
            "experiment_seed": self.experiment_seed,
            "island_seeds": self.island_seeds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2, sort_keys=True) + "\n"


def sample_participant_count(profile: ChurnProfile, rng: Rng) -> int:
    """Uniform draw over the inclusive participant range."""
    return rng.randint(profile.participant_min, profile.participant_max)


def contribution_quotas(n: int, zipf_exponent: float) -> list[int]:
    """Cycle quota per rank: max(1, round(RANK1 * r**-e)), r = 1..n."""
    if n < 1:
        raise ValueError("need at least one participant")
    return [
        max(1, round(RANK1_CYCLES * (r ** -zipf_exponent)))
        for r in range(1, n + 1)
    ]


def sample_cycle_interval(profile: ChurnProfile, rng: Rng) -> float:
    """Seconds one migration cycle takes for a volunteer (log-normal)."""
    return rng.lognormal(profile.interval_mu, profile.interval_sigma)


class _VirtualClock:
    def __init__(self):
        self.now = 0.0

    def ms(self) -> int:
        return int(round(self.now * 1000))


def run_simulation(
    profile: ChurnProfile,
    params: EAParams | None = None,
    spec: TrapSpec | None = None,
) -> SimulationReport:
    """Event loop in virtual time; ends at the first solution or when
    every participant has exhausted its quota."""
    params = params or EAParams()
    spec = spec or SIM_DEFAULT_SPEC
    root = Rng(profile.seed)
    meta_rng = root.spawn()
    n = sample_participant_count(profile, meta_rng)
    quotas = contribution_quotas(n, profile.zipf_exponent)
    clock = _VirtualClock()
    experiment_seed = root.u64()
    experiment = Experiment(spec, seed_count=0, capacity=None, seed=experiment_seed, clock=clock.ms)

    runners: list[IslandRunner] = []
    interval_rngs: list[Rng] = []
    client_ids: list[str] = []
    heap: list[tuple[float, int, int]] = []  # (time, client, cycle#)
    island_seeds = []
    for r in range(n):
        client_rng = root.spawn()
        address = f"volunteer-{r + 1}"
        transport = PoolTransport(experiment, address)
        island_seeds.append(client_rng.u64())
        runners.append(IslandRunner(params, spec, transport, island_seeds[-1]))
        ivr = client_rng.spawn()
        join = meta_rng.uniform(0.0, profile.join_spread)
        interval_rngs.append(ivr)
        client_ids.append(address)
        heapq.heappush(heap, (join + sample_cycle_interval(profile, ivr), r, 1))

    puts_by_client: dict[str, int] = {}
    solved_at = None
    last_time = 0.0
    while heap:
        t, r, cycle = heapq.heappop(heap)
        clock.now = t
        last_time = t
        before = runners[r].migrations_sent
        status = runners[r].run_cycle()
        if runners[r].migrations_sent > before:
            ident = experiment.client_id(client_ids[r])
            puts_by_client[ident] = puts_by_client.get(ident, 0) + 1
        if status == "solved":
            solved_at = t
            break
        if cycle < quotas[r]:
            heapq.heappush(
                heap, (t + sample_cycle_interval(profile, interval_rngs[r]), r, cycle + 1)
            )

    log = experiment.log_snapshot()
    return SimulationReport(
        profile=profile,
        participants=n,
        quotas=quotas,
        per_client_puts=puts_by_client,
        solved_at_seconds=solved_at,
        total_virtual_seconds=last_time,
        total_puts=sum(puts_by_client.values()),
        experiment_seed=experiment_seed,
        island_seeds=island_seeds,
        log=log,
    )
