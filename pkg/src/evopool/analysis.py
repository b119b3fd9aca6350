"""Recompute experiment statistics from pool-server logs.

Pure functions over event sequences: distinct clients, ranked per-client
PUT counts with a power-law fit over the head of the ranking, experiment
duration (last PUT minus first PUT), and a histogram of the gaps between
consecutive PUTs in log10(seconds) bins of width 0.5.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .pool import OP_PUT, LogEvent

BIN_WIDTH = 0.5  # log10 seconds


class LogFormatError(ValueError):
    """Input does not look like a pool-server log."""


class PowerLawFitError(ValueError):
    """Not enough usable ranks to fit a power law."""


@dataclass
class ParseResult:
    events: list[LogEvent]
    skipped: int


def parse_log(raw: bytes | str) -> ParseResult:
    """Parse newline-delimited JSON events (or a JSON array from /log).

    Malformed lines are skipped and counted; more than 10% bad lines is
    treated as the wrong file and raises LogFormatError.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    text = raw.strip()
    if not text:
        return ParseResult([], 0)
    if text.startswith("["):
        try:
            objs = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"invalid JSON array: {exc}") from exc
        if not isinstance(objs, list):
            raise LogFormatError("expected a JSON array of events")
        events = []
        skipped = 0
        for obj in objs:
            try:
                events.append(LogEvent.from_obj(obj))
            except (ValueError, KeyError, TypeError):
                skipped += 1
        _check_skip_ratio(skipped, len(objs))
        return ParseResult(events, skipped)
    events = []
    skipped = 0
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for line in lines:
        try:
            events.append(LogEvent.from_obj(json.loads(line)))
        except (ValueError, KeyError, TypeError):
            skipped += 1
    _check_skip_ratio(skipped, len(lines))
    return ParseResult(events, skipped)


def _check_skip_ratio(skipped: int, total: int) -> None:
    if total > 0 and skipped / total > 0.10:
        raise LogFormatError(
            f"{skipped}/{total} lines malformed; this does not look like a pool-server log"
        )


def read_log(path: str) -> ParseResult:
    with open(path, "rb") as fh:
        return parse_log(fh.read())


@dataclass
class ExperimentStats:
    distinct_clients: int
    ranked_put_counts: list[tuple[str, int]]  # (client id, count), count desc
    duration_seconds: float
    interval_histogram: list[tuple[float, int]]  # (log10 bin low edge, count)
    power_law_slope: float | None
    power_law_stderr: float | None
    median_interval_seconds: float | None
    total_puts: int
    total_events: int
    intervals_seconds: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def fraction_under(self, seconds: float) -> float:
        """Share of consecutive-PUT gaps strictly below `seconds`."""
        if self.intervals_seconds.size == 0:
            return 0.0
        return float(np.mean(self.intervals_seconds < seconds))


def put_intervals_seconds(events: list[LogEvent]) -> np.ndarray:
    """Gaps between consecutive PUT events, in seconds."""
    puts = sorted(e.t for e in events if e.op == OP_PUT)
    if len(puts) < 2:
        return np.empty(0)
    return np.diff(np.asarray(puts, dtype=np.float64)) / 1000.0


def interval_histogram(intervals: np.ndarray) -> list[tuple[float, int]]:
    """Counts per log10(seconds) bin of width 0.5, edges at multiples of 0.5.

    Zero-length gaps cannot sit on a log axis; they are binned at the
    log's native resolution (one millisecond).  Total mass always equals
    the number of gaps.
    """
    if intervals.size == 0:
        return []
    clamped = np.maximum(intervals, 0.001)
    ks = np.floor(np.log10(clamped) / BIN_WIDTH).astype(int)
    return [
        (k * BIN_WIDTH, int(np.sum(ks == k)))
        for k in range(int(ks.min()), int(ks.max()) + 1)
    ]


def fit_power_law(counts: list[int]) -> tuple[float, float]:
    """OLS of log10(count) on log10(rank) over the head of the ranking.

    The head is the ranks with count > 1; the tail flattens once
    contributions bottom out and is excluded from the fit.  Raises
    PowerLawFitError with fewer than 3 usable points.
    """
    head = [c for c in counts if c > 1]
    if len(head) < 3:
        raise PowerLawFitError(f"need >= 3 ranks with count > 1, got {len(head)}")
    x = np.log10(np.arange(1, len(head) + 1, dtype=np.float64))
    y = np.log10(np.asarray(head, dtype=np.float64))
    xm = x - x.mean()
    sxx = float(np.sum(xm * xm))
    slope = float(np.sum(xm * (y - y.mean())) / sxx)
    resid = y - (y.mean() + slope * xm)
    dof = len(head) - 2
    stderr = math.sqrt(float(np.sum(resid * resid)) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def compute_stats(events: list[LogEvent]) -> ExperimentStats:
    """All Figure-style statistics for one experiment log."""
    events = sorted(events, key=lambda e: e.t)
    puts = [e for e in events if e.op == OP_PUT]
    counts: dict[str, int] = {}
    for e in puts:
        counts[e.ip] = counts.get(e.ip, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    duration = (puts[-1].t - puts[0].t) / 1000.0 if len(puts) >= 2 else 0.0
    intervals = put_intervals_seconds(events)
    slope = stderr = None
    try:
        slope, stderr = fit_power_law([c for _, c in ranked])
    except PowerLawFitError:
        pass
    distinct = len({e.ip for e in events})
    return ExperimentStats(
        distinct_clients=distinct,
        ranked_put_counts=ranked,
        duration_seconds=duration,
        interval_histogram=interval_histogram(intervals),
        power_law_slope=slope,
        power_law_stderr=stderr,
        median_interval_seconds=float(np.median(intervals)) if intervals.size else None,
        total_puts=len(puts),
        total_events=len(events),
        intervals_seconds=intervals,
    )


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_csv(stats: ExperimentStats, out_dir: str) -> dict[str, str]:
    """Write ranked_puts.csv, intervals.csv and summary.csv into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    path = os.path.join(out_dir, "ranked_puts.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("rank,client_id,count\n")
        for rank, (ident, count) in enumerate(stats.ranked_put_counts, start=1):
            fh.write(f"{rank},{ident},{count}\n")
    paths["ranked_puts"] = path

    path = os.path.join(out_dir, "intervals.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("log10_bin_low,count\n")
        for edge, count in stats.interval_histogram:
            fh.write(f"{_cell(edge)},{count}\n")
    paths["intervals"] = path

    path = os.path.join(out_dir, "summary.csv")
    fields = [
        ("distinct_clients", stats.distinct_clients),
        ("total_puts", stats.total_puts),
        ("total_events", stats.total_events),
        ("duration_seconds", stats.duration_seconds),
        ("median_interval_seconds", stats.median_interval_seconds),
        ("fraction_under_4s", stats.fraction_under(4.0)),
        ("power_law_slope", stats.power_law_slope),
        ("power_law_stderr", stats.power_law_stderr),
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(name for name, _ in fields) + "\n")
        fh.write(",".join(_cell(v) for _, v in fields) + "\n")
    paths["summary"] = path
    return paths


def read_summary(path: str) -> dict[str, float | None]:
    """Round-trip reader for summary.csv."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        row = fh.readline().strip().split(",")
    out: dict[str, float | None] = {}
    for name, cell in zip(header, row):
        out[name] = None if cell == "" else float(cell)
    return out
