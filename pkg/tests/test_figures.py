import numpy as np

from evopool import figures
from evopool.analysis import compute_stats
from evopool.pool import LogEvent, OP_PUT

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def sample_stats():
    events = []
    t = 0
    for c, n in (("10.0.0.1", 40), ("10.0.0.2", 20), ("10.0.0.3", 13), ("10.0.0.4", 5)):
        for i in range(n):
            t += 1500
            events.append(LogEvent(t=t, ip=c, op=OP_PUT, fitness=10))
    return compute_stats(sorted(events, key=lambda e: e.t))


def assert_png(path):
    with open(path, "rb") as fh:
        assert fh.read(8) == PNG_MAGIC


def test_render_single_produces_pngs(tmp_path):
    paths = figures.render_single(sample_stats(), str(tmp_path))
    assert len(paths) == 2
    for p in paths:
        assert_png(p)


def test_render_batch_produces_pngs(tmp_path):
    stats = [sample_stats() for _ in range(3)]
    paths = figures.render_batch(stats, str(tmp_path))
    assert len(paths) == 2
    for p in paths:
        assert_png(p)


def test_render_tolerates_empty_stats(tmp_path):
    empty = compute_stats([])
    for p in figures.render_single(empty, str(tmp_path)):
        assert_png(p)
