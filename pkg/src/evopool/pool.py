"""Chromosome pool, event log and experiment state.

One Experiment holds everything a deployment serves: an append-only
array of chromosomes, an anonymized event log, and the trap geometry
used to validate and score incoming individuals.  The same object backs
the HTTP server (real clock, file-persisted log) and the churn
simulator (virtual clock, in-memory log); all mutations are serialized
through one lock so invariants hold under any request interleaving.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass

from .rng import Rng
from .trap import TrapSpec, bits_from_string, evaluate

OP_PUT = "PUT"
OP_GET = "GET"


class ValidationError(ValueError):
    """Malformed chromosome or request payload."""


@dataclass
class LogEvent:
    t: int  # milliseconds
    ip: str  # anonymized client id, "10.A.B.C"
    op: str  # OP_PUT | OP_GET
    fitness: int | None

    def to_obj(self) -> dict:
        return {"t": self.t, "ip": self.ip, "op": self.op, "fitness": self.fitness}

    def to_line(self) -> str:
        return json.dumps(self.to_obj(), separators=(",", ":"))

    @classmethod
    def from_obj(cls, obj: dict) -> "LogEvent":
        t = obj["t"]
        ip = obj["ip"]
        op = obj["op"]
        fitness = obj.get("fitness")
        if not isinstance(t, int) or isinstance(t, bool):
            raise ValidationError("t must be an integer millisecond timestamp")
        if not isinstance(ip, str) or not ip:
            raise ValidationError("ip must be a non-empty string")
        if op not in (OP_PUT, OP_GET):
            raise ValidationError(f"op must be PUT or GET, got {op!r}")
        if fitness is not None and not isinstance(fitness, (int, float)):
            raise ValidationError("fitness must be a number or null")
        return cls(t=t, ip=ip, op=op, fitness=fitness)


class Anonymizer:
    """Deterministic keyed mapping from client addresses to "10.A.B.C" ids.

    Distinct addresses always get distinct ids (collisions are resolved
    by deterministic probing, in first-seen order), and an id never
    equals the raw address it was derived from.
    """

    def __init__(self, key: int):
        self._key = key.to_bytes(8, "little", signed=False)
        self._by_address: dict[str, str] = {}
        self._used: set[str] = set()

    def _candidate(self, address: str, attempt: int) -> str:
        h = hashlib.blake2b(
            address.encode("utf-8") + b"\x00" + attempt.to_bytes(4, "little"),
            key=self._key,
            digest_size=3,
        ).digest()
        return f"10.{h[0]}.{h[1]}.{h[2]}"

    def ident(self, address: str) -> str:
        known = self._by_address.get(address)
        if known is not None:
            return known
        attempt = 0
        while True:
            cand = self._candidate(address, attempt)
            if cand not in self._used and cand != address:
                break
            attempt += 1
        self._by_address[address] = cand
        self._used.add(cand)
        return cand


class LogFileSink:
    """Newline-delimited JSON log persistence with rotation on reset."""

    def __init__(self, path: str):
        self.path = path
        self._fh = open(path, "a", encoding="utf-8")

    def append(self, event: LogEvent) -> None:
        self._fh.write(event.to_line() + "\n")
        self._fh.flush()

    def rotate(self) -> str | None:
        """Close and rename the current file; start a fresh one."""
        self._fh.close()
        rotated = None
        if os.path.getsize(self.path) > 0:
            n = 1
            while os.path.exists(f"{self.path}.{n}"):
                n += 1
            rotated = f"{self.path}.{n}"
            os.rename(self.path, rotated)
        self._fh = open(self.path, "a", encoding="utf-8")
        return rotated

    def close(self) -> None:
        self._fh.close()


def _real_clock_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass
class GetResult:
    chromosome: str | None
    event: LogEvent
    log_index: int


@dataclass
class PutResult:
    size: int
    event: LogEvent
    log_index: int


class Experiment:
    """Single-experiment pool service state (one instance per deployment)."""

    def __init__(
        self,
        spec: TrapSpec,
        seed_count: int = 0,
        capacity: int | None = None,
        seed: int = 0,
        clock=None,
        sink: LogFileSink | None = None,
    ):
        if seed_count < 0:
            raise ValueError("seed_count must be >= 0")
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1 when set")
        self.spec = spec
        self.capacity = capacity
        self.seed_count = seed_count
        self._seed = seed
        self._clock = clock or _real_clock_ms
        self._sink = sink
        self._lock = threading.Lock()
        self._last_ts = 0
        self.malformed_count = 0
        self.started_at = self._clock()
        self.entries: list[str] = []
        self.log: list[LogEvent] = []
        self._anonymizer = Anonymizer(Rng(seed ^ 0xA17).u64())
        self._init_pool(seed)

    def _init_pool(self, seed: int) -> None:
        self.entries = []
        rng = Rng(seed)
        for _ in range(self.seed_count):
            bits = "".join("1" if rng.unit() < 0.5 else "0" for _ in range(self.spec.length))
            self.entries.append(bits)
        self._sample_rng = Rng(rng.u64() if self.seed_count else seed + 1)

    def _now(self) -> int:
        t = int(self._clock())
        if t < self._last_ts:
            t = self._last_ts  # log timestamps never go backward
        self._last_ts = t
        return t

    def _append(self, event: LogEvent) -> int:
        self.log.append(event)
        if self._sink is not None:
            self._sink.append(event)
        return len(self.log) - 1

    @property
    def size(self) -> int:
        with self._lock:
            return len(self.entries)

    def get_random(self, client_address: str) -> GetResult:
        """Uniform sample from the pool (kept in place); logs a GET event."""
        with self._lock:
            if self.entries:
                chromosome = self.entries[self._sample_rng.below(len(self.entries))]
                fitness = int(evaluate(bits_from_string(chromosome), self.spec))
            else:
                chromosome = None
                fitness = None
            event = LogEvent(self._now(), self._anonymizer.ident(client_address), OP_GET, fitness)
            idx = self._append(event)
            return GetResult(chromosome, event, idx)

    def put_one(self, client_address: str, chromosome: str) -> PutResult:
        """Append a chromosome; validates length and alphabet first.

        Raises ValidationError on bad input; nothing is logged and the
        malformed-request counter increments.
        """
        try:
            if not isinstance(chromosome, str):
                raise ValidationError("chromosome must be a string")
            bits = bits_from_string(chromosome, self.spec)
        except (ValueError, TypeError) as exc:
            with self._lock:
                self.malformed_count += 1
            raise ValidationError(str(exc)) from exc
        fitness = int(evaluate(bits, self.spec))
        with self._lock:
            self.entries.append(chromosome)
            if self.capacity is not None:
                while len(self.entries) > self.capacity:
                    self.entries.pop(0)  # FIFO eviction
            event = LogEvent(self._now(), self._anonymizer.ident(client_address), OP_PUT, fitness)
            idx = self._append(event)
            return PutResult(len(self.entries), event, idx)

    def client_id(self, address: str) -> str:
        """Anonymized id this experiment uses for a client address."""
        with self._lock:
            return self._anonymizer.ident(address)

    def log_snapshot(self) -> list[LogEvent]:
        with self._lock:
            return list(self.log)

    def pool_snapshot(self) -> list[str]:
        with self._lock:
            return list(self.entries)

    def reset(
        self,
        seed_count: int | None = None,
        capacity: int | None = None,
        seed: int | None = None,
    ) -> list[LogEvent]:
        """Restart the experiment; returns (and rotates out) the old log."""
        with self._lock:
            old_log = self.log
            if seed_count is not None:
                if seed_count < 0:
                    raise ValueError("seed_count must be >= 0")
                self.seed_count = seed_count
            if capacity is not None:
                if capacity < 1:
                    raise ValueError("capacity must be >= 1 when set")
                self.capacity = capacity
            if seed is not None:
                self._seed = seed
            self.log = []
            self.malformed_count = 0
            self._init_pool(self._seed)
            self._anonymizer = Anonymizer(Rng(self._seed ^ 0xA17).u64())
            if self._sink is not None:
                self._sink.rotate()
            self.started_at = self._now()
            return old_log
