import json
import threading

import numpy as np
import pytest

from evopool.pool import (
    Anonymizer,
    Experiment,
    LogEvent,
    LogFileSink,
    OP_GET,
    OP_PUT,
    ValidationError,
)
from evopool.rng import Rng
from evopool.trap import TrapSpec

SPEC = TrapSpec(2, 2)  # 4-bit chromosomes keep fixtures readable


class FakeClock:
    def __init__(self, start=1000):
        self.t = start

    def __call__(self):
        self.t += 1
        return self.t


def make_exp(**kw):
    kw.setdefault("clock", FakeClock())
    return Experiment(SPEC, **kw)


def test_put_appends_and_returns_size():
    exp = make_exp()
    r1 = exp.put_one("1.2.3.4", "0110")
    assert r1.size == 1
    r2 = exp.put_one("1.2.3.4", "1111")
    assert r2.size == 2
    assert exp.pool_snapshot() == ["0110", "1111"]


def test_get_random_singleton_and_membership():
    exp = make_exp()
    exp.put_one("a", "0110")
    got = exp.get_random("b")
    assert got.chromosome == "0110"
    assert exp.pool_snapshot() == ["0110"]  # sampling never removes


def test_get_random_empty_pool_logs_event():
    exp = make_exp()
    got = exp.get_random("a")
    assert got.chromosome is None
    log = exp.log_snapshot()
    assert len(log) == 1
    assert log[0].op == OP_GET
    assert log[0].fitness is None


def test_get_random_is_uniform():
    exp = make_exp(seed=5)
    chromos = ["0000", "0110", "1111"]
    for c in chromos:
        exp.put_one("a", c)
    n = 30_000
    counts = {c: 0 for c in chromos}
    for _ in range(n):
        counts[exp.get_random("b").chromosome] += 1
    for c in chromos:
        assert abs(counts[c] / n - 1 / 3) < 0.02


def test_capacity_fifo_eviction():
    exp = make_exp(capacity=2)
    exp.put_one("a", "0000")
    exp.put_one("a", "0101")
    r = exp.put_one("a", "1111")
    assert r.size == 2
    assert exp.pool_snapshot() == ["0101", "1111"]


@pytest.mark.parametrize("bad", ["01x0", "010", "01101", "", 42, None, "01é0"])
def test_put_rejects_malformed(bad):
    exp = make_exp()
    with pytest.raises(ValidationError):
        exp.put_one("a", bad)
    assert exp.pool_snapshot() == []
    assert exp.log_snapshot() == []  # rejected PUTs are never logged
    assert exp.malformed_count == 1


def test_put_logs_fitness():
    exp = make_exp()
    r = exp.put_one("a", "1111")
    assert r.event.op == OP_PUT
    assert r.event.fitness == 4  # two all-ones 2-traps
    r2 = exp.put_one("a", "0000")
    assert r2.event.fitness == 2  # two all-zeros blocks at l-1 each


def test_log_order_and_accounting():
    exp = make_exp()
    seq = ["put", "get", "put", "get", "get", "put"]
    for i, op in enumerate(seq):
        if op == "put":
            exp.put_one(f"client-{i % 2}", "0110")
        else:
            exp.get_random(f"client-{i % 2}")
    log = exp.log_snapshot()
    assert len(log) == len(seq)  # every accepted PUT and answered GET
    assert [e.op for e in log] == [OP_PUT if s == "put" else OP_GET for s in seq]
    ts = [e.t for e in log]
    assert ts == sorted(ts)


def test_log_snapshot_does_not_mutate():
    exp = make_exp()
    exp.put_one("a", "0110")
    before = [e.to_line() for e in exp.log_snapshot()]
    exp.log_snapshot().append("junk")
    assert [e.to_line() for e in exp.log_snapshot()] == before


def test_seeded_pool_deterministic():
    e1 = Experiment(SPEC, seed_count=10, seed=42, clock=FakeClock())
    e2 = Experiment(SPEC, seed_count=10, seed=42, clock=FakeClock())
    assert e1.pool_snapshot() == e2.pool_snapshot()
    assert len(e1.pool_snapshot()) == 10
    assert all(len(c) == SPEC.length and set(c) <= {"0", "1"} for c in e1.pool_snapshot())


def test_reset_clears_and_reseeds():
    exp = make_exp()
    exp.put_one("a", "0110")
    exp.get_random("a")
    old = exp.reset(seed_count=3, seed=7)
    assert len(old) == 2
    assert len(exp.pool_snapshot()) == 3
    assert exp.log_snapshot() == []
    # reset with no seeding gives an empty pool and empty log
    exp.reset(seed_count=0)
    assert exp.pool_snapshot() == []
    assert exp.log_snapshot() == []


def test_reset_identical_seeds_identical_pools():
    exp = make_exp()
    exp.reset(seed_count=5, seed=9)
    first = exp.pool_snapshot()
    exp.put_one("x", "1010")
    exp.reset(seed=9)
    assert exp.pool_snapshot() == first


def test_anonymizer_properties():
    anon = Anonymizer(Rng(3).u64())
    a = anon.ident("192.168.1.77")
    assert a == anon.ident("192.168.1.77")
    assert a.startswith("10.")
    parts = a.split(".")
    assert len(parts) == 4 and all(0 <= int(p) <= 255 for p in parts[1:])
    b = anon.ident("192.168.1.78")
    assert a != b


def test_anonymizer_no_collisions_at_scale():
    anon = Anonymizer(Rng(4).u64())
    ids = {anon.ident(f"198.51.{i // 256}.{i % 256}") for i in range(10_000)}
    assert len(ids) == 10_000


def test_anonymizer_never_echoes_address():
    anon = Anonymizer(Rng(5).u64())
    for i in range(2000):
        addr = f"10.{(i * 7) % 256}.{(i * 13) % 256}.{i % 256}"
        assert anon.ident(addr) != addr


def test_timestamps_never_go_backward():
    class JumpyClock:
        def __init__(self):
            self.vals = [100, 200, 150, 300, 250, 400]

        def __call__(self):
            return self.vals.pop(0) if self.vals else 500

    exp = Experiment(SPEC, clock=JumpyClock())
    for _ in range(4):
        exp.get_random("a")
    ts = [e.t for e in exp.log_snapshot()]
    assert ts == sorted(ts)


def test_concurrent_interleaving_invariants():
    exp = make_exp(seed=11)
    exp.put_one("seed", "0110")
    errors = []

    def worker(tid):
        rng = Rng(tid)
        try:
            for i in range(200):
                if rng.unit() < 0.5:
                    exp.put_one(f"w{tid}", "1111" if i % 2 else "0000")
                else:
                    got = exp.get_random(f"w{tid}")
                    assert got.chromosome is not None
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(t,)) for t in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    log = exp.log_snapshot()
    puts = [e for e in log if e.op == OP_PUT]
    gets = [e for e in log if e.op == OP_GET]
    assert len(log) == len(puts) + len(gets) == 8 * 200 + 1
    assert len(exp.pool_snapshot()) == len(puts)  # size grows only on PUT
    ts = [e.t for e in log]
    assert ts == sorted(ts)


def test_membership_of_get_results_under_interleaving():
    # replaying the log prefix at each GET: the returned chromosome must
    # already be in the pool at response time
    exp = make_exp(seed=13)
    rng = Rng(31)
    puts_so_far = []
    chromos = ["0000", "0001", "0011", "0111", "1111"]
    for step in range(500):
        if not puts_so_far or rng.unit() < 0.5:
            c = chromos[rng.below(len(chromos))]
            exp.put_one("w", c)
            puts_so_far.append(c)
        else:
            got = exp.get_random("w")
            assert got.chromosome in puts_so_far


def test_log_event_json_roundtrip():
    e = LogEvent(t=123, ip="10.1.2.3", op=OP_PUT, fitness=7)
    assert LogEvent.from_obj(json.loads(e.to_line())) == e
    e2 = LogEvent(t=124, ip="10.1.2.4", op=OP_GET, fitness=None)
    assert LogEvent.from_obj(json.loads(e2.to_line())) == e2
    with pytest.raises(ValidationError):
        LogEvent.from_obj({"t": "nope", "ip": "10.0.0.1", "op": "PUT"})
    with pytest.raises(ValidationError):
        LogEvent.from_obj({"t": 1, "ip": "10.0.0.1", "op": "DELETE"})


def test_log_file_sink_persistence_and_rotation(tmp_path):
    path = tmp_path / "events.ndjson"
    sink = LogFileSink(str(path))
    exp = Experiment(SPEC, clock=FakeClock(), sink=sink)
    exp.put_one("a", "0110")
    exp.get_random("a")
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["op"] == OP_PUT
    exp.reset()
    rotated = tmp_path / "events.ndjson.1"
    assert rotated.exists()
    assert len(rotated.read_text().strip().splitlines()) == 2
    assert path.read_text() == ""
    exp.put_one("a", "1111")
    assert len(path.read_text().strip().splitlines()) == 1
    sink.close()
