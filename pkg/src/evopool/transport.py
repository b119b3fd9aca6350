"""Migration transports: how an island reaches the pool.

Every transport honors the fire-and-forget contract: neither operation
ever raises into the GA loop, and failures or timeouts resolve to a
dropped send or an absent fetch within a bounded time budget.
"""

from __future__ import annotations

import json
from typing import Protocol

import requests

from .pool import Experiment, ValidationError

DEFAULT_TIMEOUT = 2.0


def put_one_body(chromosome: str) -> bytes:
    """Canonical PUT /one payload; byte-identical across all clients."""
    return json.dumps({"chromosome": chromosome}, separators=(",", ":")).encode("ascii")


class MigrationTransport(Protocol):
    def send_one(self, chromosome: str) -> None: ...

    def fetch_random(self) -> str | None: ...


class NullTransport:
    """No server at all: sends vanish, fetches come back empty."""

    def send_one(self, chromosome: str) -> None:
        pass

    def fetch_random(self) -> str | None:
        return None


class HttpTransport:
    """Fire-and-forget HTTP client for the pool server wire format.

    `client_token`, when set, rides along as an X-Island-Id header so
    that several islands behind one address (threads, processes on one
    host, NAT) remain distinguishable in the server log.

    After repeated failures the transport thins its attempts (skipping
    exponentially many operations between tries, capped) so a dead
    server costs the GA loop almost nothing; one success resets it.
    """

    _BACKOFF_AFTER = 3
    _BACKOFF_CAP = 64

    def __init__(
        self,
        base_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        client_token: str | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()
        if client_token:
            self._session.headers["X-Island-Id"] = client_token
        self._failures = 0
        self._skip = 0

    def _should_skip(self) -> bool:
        if self._skip > 0:
            self._skip -= 1
            return True
        return False

    def _failed(self) -> None:
        self._failures += 1
        over = self._failures - self._BACKOFF_AFTER
        if over >= 0:
            self._skip = min(2**over, self._BACKOFF_CAP)

    def _succeeded(self) -> None:
        self._failures = 0
        self._skip = 0

    def send_one(self, chromosome: str) -> None:
        if self._should_skip():
            return
        try:
            self._session.put(
                f"{self.base_url}/one",
                data=put_one_body(chromosome),
                headers={"Content-Type": "application/json"},
                timeout=self.timeout,
            )
            self._succeeded()
        except Exception:
            self._failed()  # fire and forget

    def fetch_random(self) -> str | None:
        if self._should_skip():
            return None
        try:
            resp = self._session.get(f"{self.base_url}/random", timeout=self.timeout)
        except Exception:
            self._failed()
            return None
        self._succeeded()
        try:
            if resp.status_code != 200 or not resp.content:
                return None
            body = resp.json()
            chromosome = body.get("chromosome")
            return chromosome if isinstance(chromosome, str) else None
        except Exception:
            return None

    def close(self) -> None:
        self._session.close()


class PoolTransport:
    """In-process transport against an Experiment; same semantics as HTTP."""

    def __init__(self, experiment: Experiment, client_address: str):
        self.experiment = experiment
        self.client_address = client_address

    def send_one(self, chromosome: str) -> None:
        try:
            self.experiment.put_one(self.client_address, chromosome)
        except ValidationError:
            pass

    def fetch_random(self) -> str | None:
        return self.experiment.get_random(self.client_address).chromosome
