"""HTTP front of the chromosome pool: three operations, fixed paths.

    GET /random   -> 200 {"chromosome": "<bits>"} | 204 when the pool is empty
    PUT /one      -> 200 {"size": <int>} | 400 on validation failure
    GET /log      -> 200 [{"t":..,"ip":..,"op":..,"fitness":..}, ...]

Plus a static route (serves the browser island bundle when configured)
and, behind an opt-in flag, POST /admin/reset accepted from loopback
only.  Requests are handled by threads; the Experiment serializes all
state mutations internally.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .pool import Experiment, ValidationError

MAX_BODY = 1 << 20


class PoolRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "evopool"

    @property
    def experiment(self) -> Experiment:
        return self.server.experiment  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _client_address(self) -> str:
        # islands sharing one host address stay distinguishable by token
        ip = self.client_address[0]
        token = self.headers.get("X-Island-Id")
        return f"{ip}#{token}" if token else ip

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload, separators=(",", ":")).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_empty(self, status: int) -> None:
        self.send_response(status)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length < 0 or length > MAX_BODY:
            raise ValidationError("unreasonable request body size")
        return self.rfile.read(length)

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/random":
            result = self.experiment.get_random(self._client_address())
            if result.chromosome is None:
                self._send_empty(204)
            else:
                self._send_json(200, {"chromosome": result.chromosome})
        elif path == "/log":
            events = self.experiment.log_snapshot()
            self._send_json(200, [e.to_obj() for e in events])
        else:
            self._serve_static(path)

    def do_PUT(self):
        path = self.path.split("?", 1)[0]
        if path != "/one":
            self._send_json(404, {"error": "unknown path"})
            return
        try:
            body = json.loads(self._read_body().decode("utf-8"))
            if not isinstance(body, dict) or "chromosome" not in body:
                raise ValidationError('body must be {"chromosome": "<bits>"}')
            result = self.experiment.put_one(self._client_address(), body["chromosome"])
        except (ValidationError, ValueError, UnicodeDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, {"size": result.size})

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path != "/admin/reset":
            self._send_json(404, {"error": "unknown path"})
            return
        if not getattr(self.server, "admin_enabled", False):
            self._send_json(403, {"error": "admin operations disabled"})
            return
        if self.client_address[0] not in ("127.0.0.1", "::1"):
            self._send_json(403, {"error": "admin operations are local-only"})
            return
        try:
            raw = self._read_body()
            body = json.loads(raw.decode("utf-8")) if raw else {}
            if not isinstance(body, dict):
                raise ValidationError("reset body must be a JSON object")
            self.experiment.reset(
                seed_count=body.get("seed_count"),
                capacity=body.get("capacity"),
                seed=body.get("seed"),
            )
        except (ValidationError, ValueError, UnicodeDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, {"size": len(self.experiment.pool_snapshot())})

    def _serve_static(self, path: str) -> None:
        static_dir = getattr(self.server, "static_dir", None)
        if static_dir is None:
            self._send_json(404, {"error": "unknown path"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(static_dir, rel))
        root = os.path.realpath(static_dir)
        if not full.startswith(root + os.sep) and full != root:
            self._send_json(404, {"error": "unknown path"})
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            self._send_json(404, {"error": "unknown path"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class PoolServer:
    """Owns the HTTP server and its experiment; usable as a context manager."""

    def __init__(
        self,
        experiment: Experiment,
        host: str = "127.0.0.1",
        port: int = 0,
        static_dir: str | None = None,
        admin_enabled: bool = False,
        verbose: bool = False,
    ):
        self.experiment = experiment
        self.httpd = ThreadingHTTPServer((host, port), PoolRequestHandler)
        self.httpd.experiment = experiment  # type: ignore[attr-defined]
        self.httpd.static_dir = static_dir  # type: ignore[attr-defined]
        self.httpd.admin_enabled = admin_enabled  # type: ignore[attr-defined]
        self.httpd.verbose = verbose  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def start_background(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "PoolServer":
        self.start_background()
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()
