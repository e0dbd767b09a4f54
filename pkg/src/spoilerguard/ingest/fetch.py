"""Polite HTTP fetching with a per-host rate cap, retries and a byte cache."""
from __future__ import annotations

import hashlib
import logging
import threading
import time
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

log = logging.getLogger(__name__)

Transport = Callable[[str], "tuple[int, bytes]"]


class FetchError(Exception):
    pass


class HttpError(FetchError):
    def __init__(self, status: int, uri: str):
        super().__init__(f"HTTP {status} for {uri}")
        self.status = status
        self.uri = uri


class NetworkError(FetchError):
    pass


class RateLimiter:
    """At most ``rate`` request starts per second for each host."""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.interval = 1.0 / rate
        self.clock = clock
        self.sleep = sleep
        self._next: dict[str, float] = {}
        self._lock = threading.Lock()

    def acquire(self, host: str) -> None:
        with self._lock:
            now = self.clock()
            slot = max(now, self._next.get(host, now))
            self._next[host] = slot + self.interval
        if slot > now:
            self.sleep(slot - now)


def requests_transport(timeout: float = 60.0) -> Transport:
    import requests

    session = requests.Session()
    session.headers["User-Agent"] = "spoilerguard/0.1 (research; polite)"

    def get(uri: str) -> tuple[int, bytes]:
        try:
            resp = session.get(uri, timeout=timeout)
        except requests.RequestException as exc:
            raise NetworkError(f"{uri}: {exc}") from exc
        return resp.status_code, resp.content

    return get


class Fetcher:
    def __init__(self, transport: Transport | None = None, rate: float = 1.0,
                 retries: int = 3, backoff: float = 1.0,
                 cache_dir: str | Path | None = None, limiter: RateLimiter | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.transport = transport or requests_transport()
        self.limiter = limiter or RateLimiter(rate, sleep=sleep)
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep
        self.cache_dir = Path(cache_dir) if cache_dir else None

    def _cache_path(self, uri: str) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / hashlib.sha256(uri.encode("utf-8")).hexdigest()

    def fetch(self, uri: str) -> bytes:
        """Body of a 2xx response. 5xx responses are retried with backoff."""
        parts = urlsplit(uri)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"not an absolute http(s) URI: {uri}")
        cached = self._cache_path(uri)
        if cached is not None and cached.exists():
            return cached.read_bytes()
        attempt = 0
        while True:
            self.limiter.acquire(parts.netloc)
            status, body = self.transport(uri)
            if 200 <= status < 300:
                break
            if status < 500 or attempt >= self.retries:
                if status == 503:
                    log.warning("503 from %s after %d attempts", uri, attempt + 1)
                raise HttpError(status, uri)
            self.sleep(self.backoff * 2 ** attempt)
            attempt += 1
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            tmp = cached.with_suffix(".tmp")
            tmp.write_bytes(body)
            tmp.replace(cached)
        return body
