import json
import os
import threading

import pytest
import requests

from evopool.pool import Experiment, LogEvent, LogFileSink
from evopool.server import PoolServer
from evopool.transport import HttpTransport, put_one_body
from evopool.trap import TrapSpec

SPEC = TrapSpec(2, 2)
FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures", "wire_format.json")


@pytest.fixture()
def wire():
    with open(FIXTURES, encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture()
def server(tmp_path):
    sink = LogFileSink(str(tmp_path / "pool_log.ndjson"))
    exp = Experiment(SPEC, seed=3, sink=sink)
    with PoolServer(exp, admin_enabled=True) as srv:
        srv.log_path = str(tmp_path / "pool_log.ndjson")
        yield srv
    sink.close()


def test_put_then_random_wire_exact(server, wire):
    put = wire["requests"]["put_one"]
    r = requests.put(
        server.url + put["path"],
        data=put["body"].encode(),
        headers={"Content-Type": put["content_type"]},
    )
    assert r.status_code == wire["responses"]["put_ok"]["status"]
    assert r.content == wire["responses"]["put_ok"]["body"].encode()
    assert r.headers["Content-Type"] == "application/json"

    g = requests.get(server.url + wire["requests"]["get_random"]["path"])
    assert g.status_code == wire["responses"]["random_ok"]["status"]
    assert g.content == wire["responses"]["random_ok"]["body"].encode()


def test_empty_pool_random_is_204_no_body(server, wire):
    g = requests.get(server.url + "/random")
    assert g.status_code == 204
    assert g.content == b""


def test_put_validation_failures(server):
    for bad in ('{"chromosome":"01x0"}', '{"chromosome":"011"}', '{"nope":1}', "not json"):
        r = requests.put(server.url + "/one", data=bad.encode())
        assert r.status_code == 400
        assert "error" in r.json()
    # pool unchanged
    assert requests.get(server.url + "/random").status_code == 204


def test_log_endpoint_order_and_shape(server):
    requests.put(server.url + "/one", data=put_one_body("0110"))
    requests.get(server.url + "/random")
    requests.put(server.url + "/one", data=put_one_body("1111"))
    log = requests.get(server.url + "/log").json()
    assert [e["op"] for e in log] == ["PUT", "GET", "PUT"]
    assert all(e["ip"].startswith("10.") for e in log)
    assert [e["t"] for e in log] == sorted(e["t"] for e in log)
    assert log[0]["fitness"] == 0  # "0110": blocks "01" and "10" are one-bit traps
    # reading the log twice changes nothing
    again = requests.get(server.url + "/log").json()
    assert again == log


def test_log_event_serialization_matches_fixture(wire):
    e = LogEvent(t=1001, ip="10.20.30.40", op="PUT", fitness=3)
    assert e.to_line() == wire["responses"]["log_event_put"]["line"]
    g = LogEvent(t=1002, ip="10.20.30.40", op="GET", fitness=None)
    assert g.to_line() == wire["responses"]["log_event_get_empty"]["line"]


def test_put_body_construction_matches_fixture(wire):
    assert put_one_body("0110") == wire["requests"]["put_one"]["body"].encode()


def test_http_transport_roundtrip(server):
    t = HttpTransport(server.url)
    assert t.fetch_random() is None  # empty pool -> absent, not an error
    t.send_one("0110")
    assert t.fetch_random() == "0110"
    t.close()


def test_http_transport_never_raises_against_dead_server():
    t = HttpTransport("http://127.0.0.1:9", timeout=0.3)  # discard port, refused
    t.send_one("0110")  # must not raise
    assert t.fetch_random() is None
    t.close()


def test_log_file_persists_every_event(server):
    requests.put(server.url + "/one", data=put_one_body("0110"))
    requests.get(server.url + "/random")
    lines = open(server.log_path, encoding="utf-8").read().strip().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["op"] == "PUT"


def test_admin_reset_rotates_log(server):
    requests.put(server.url + "/one", data=put_one_body("0110"))
    r = requests.post(server.url + "/admin/reset", json={"seed_count": 4})
    assert r.status_code == 200
    assert r.json()["size"] == 4
    assert requests.get(server.url + "/log").json() == []
    assert os.path.exists(server.log_path + ".1")


def test_admin_reset_refused_when_disabled(tmp_path):
    exp = Experiment(SPEC, seed=3)
    with PoolServer(exp, admin_enabled=False) as srv:
        r = requests.post(srv.url + "/admin/reset", json={})
        assert r.status_code == 403


def test_unknown_paths_404(server):
    assert requests.get(server.url + "/nope").status_code == 404
    assert requests.put(server.url + "/nope", data=b"{}").status_code == 404
    assert requests.post(server.url + "/one", data=b"{}").status_code == 404


def test_static_route_serves_files(tmp_path):
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html>island</html>")
    (static / "app.js").write_text("export {}")
    exp = Experiment(SPEC, seed=1)
    with PoolServer(exp, static_dir=str(static)) as srv:
        r = requests.get(srv.url + "/")
        assert r.status_code == 200 and b"island" in r.content
        r = requests.get(srv.url + "/app.js")
        assert r.status_code == 200
        assert "javascript" in r.headers["Content-Type"]
        assert requests.get(srv.url + "/../secret").status_code in (400, 404)


def test_concurrent_requests_hold_invariants(server):
    errors = []

    def storm(tid):
        try:
            s = requests.Session()
            for i in range(40):
                if i % 2 == tid % 2:
                    r = s.put(server.url + "/one", data=put_one_body("0110"))
                    assert r.status_code == 200
                else:
                    r = s.get(server.url + "/random")
                    assert r.status_code in (200, 204)
            s.close()
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=storm, args=(t,)) for t in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    log = requests.get(server.url + "/log").json()
    puts = [e for e in log if e["op"] == "PUT"]
    gets = [e for e in log if e["op"] == "GET"]
    assert len(puts) == 120
    assert len(puts) + len(gets) == len(log)
    ts = [e["t"] for e in log]
    assert ts == sorted(ts)
    # pool size grew by exactly one per accepted PUT
    r = requests.put(server.url + "/one", data=put_one_body("0110"))
    assert r.json()["size"] == 121


def test_http_transport_backs_off_while_dead_and_recovers(server):
    dead = HttpTransport("http://127.0.0.1:9", timeout=0.3)
    for _ in range(40):
        dead.fetch_random()
    # attempts thin out: far fewer real tries than calls
    assert dead._failures < 12
    dead.close()
    # recovery: a working server resets the backoff immediately
    t = HttpTransport(server.url, timeout=1.0)
    t._failures = 10
    t._skip = 0
    t.send_one("0110")
    assert t._failures == 0
    assert t.fetch_random() == "0110"
    t.close()
