"""Transport between agents: a tiny JSON-over-POST network abstraction.

Agents talk HTTP. In tests and the default demo, the whole mesh runs
in-process: every agent's ASGI app is registered under its endpoint URL
and requests are dispatched directly, no sockets involved. The same code
paths serve real HTTP when agents run in separate servers.
"""

from __future__ import annotations

import threading
import warnings
from typing import Protocol


class TransportError(Exception):
    """Delivery failed (unreachable peer, non-success status, bad body)."""

    def __init__(self, message: str, status: int | None = None, detail=None):
        super().__init__(message)
        self.status = status
        self.detail = detail


class Network(Protocol):
    def post_json(self, url: str, payload: dict) -> dict: ...

    def get_json(self, url: str) -> dict: ...


class InMemoryNetwork:
    """Routes URLs to locally registered ASGI apps."""

    def __init__(self):
        self._apps: dict[str, object] = {}
        self._clients: dict[str, object] = {}
        self._lock = threading.Lock()

    def register(self, base_url: str, app) -> None:
        with self._lock:
            base = base_url.rstrip("/")
            self._apps[base] = app
            self._clients.pop(base, None)

    def _client_for(self, url: str):
        with warnings.catch_warnings():
            # Some starlette releases warn about their httpx-backed test
            # client on import; the in-process transport works fine and the
            # warning would pollute scenario output.
            warnings.simplefilter("ignore")
            from starlette.testclient import TestClient

        with self._lock:
            match = None
            for base in self._apps:
                if url.startswith(base) and (match is None or len(base) > len(match)):
                    match = base
            if match is None:
                raise TransportError(f"no route to {url}")
            if match not in self._clients:
                self._clients[match] = TestClient(
                    self._apps[match], base_url=match, raise_server_exceptions=False
                )
            return self._clients[match]

    def post_json(self, url: str, payload: dict) -> dict:
        response = self._client_for(url).post(url, json=payload)
        return _digest_response(url, response.status_code, response)

    def get_json(self, url: str) -> dict:
        response = self._client_for(url).get(url)
        return _digest_response(url, response.status_code, response)


class HttpNetwork:
    """Real HTTP transport."""

    def __init__(self, timeout: float = 10.0):
        import httpx

        self._client = httpx.Client(timeout=timeout)

    def post_json(self, url: str, payload: dict) -> dict:
        import httpx

        try:
            response = self._client.post(url, json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"POST {url} failed: {exc}") from exc
        return _digest_response(url, response.status_code, response)

    def get_json(self, url: str) -> dict:
        import httpx

        try:
            response = self._client.get(url)
        except httpx.HTTPError as exc:
            raise TransportError(f"GET {url} failed: {exc}") from exc
        return _digest_response(url, response.status_code, response)

    def close(self) -> None:
        self._client.close()


class RecordingNetwork:
    """Wraps another network and records every payload that crosses it."""

    def __init__(self, inner):
        self.inner = inner
        self.posts: list[tuple[str, dict]] = []
        self._lock = threading.Lock()

    def register(self, base_url: str, app) -> None:
        self.inner.register(base_url, app)

    def post_json(self, url: str, payload: dict) -> dict:
        with self._lock:
            self.posts.append((url, payload))
        return self.inner.post_json(url, payload)

    def get_json(self, url: str) -> dict:
        return self.inner.get_json(url)


def _digest_response(url: str, status: int, response) -> dict:
    try:
        body = response.json()
    except ValueError:
        body = None
    if not 200 <= status < 300:
        detail = body.get("detail") if isinstance(body, dict) else None
        raise TransportError(
            f"{url} returned {status}: {detail or getattr(response, 'text', '')!r}",
            status=status,
            detail=detail,
        )
    if not isinstance(body, dict):
        raise TransportError(f"{url} returned non-object JSON", status=status)
    return body
