"""HTTP plumbing shared by the chat, embedding and detector clients.

One Endpoint wraps one remote service: it owns the connection pool, the
per-endpoint in-flight cap (a semaphore, so the cap holds across threads),
and the retry loop. Policy: transport errors, 429 and 5xx are retried with
exponential backoff plus seeded jitter; any other 4xx fails immediately.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from dataclasses import dataclass

import httpx

from .errors import EndpointError, ProtocolError

log = logging.getLogger(__name__)

BACKOFF_BASE_S = 0.5


@dataclass
class EndpointConfig:
    base_url: str
    model: str = ""
    token_env: str = ""
    timeout_s: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    temperature: float = 0.0

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


class Endpoint:
    """POSTs JSON to one service with admission control and retries.

    ``transport`` is handed straight to httpx, which is how tests plug in
    in-process mock services. ``sleeper`` and ``jitter_rng`` are injectable
    so the retry schedule is deterministic under test.
    """

    def __init__(
        self,
        cfg: EndpointConfig,
        transport: httpx.BaseTransport | None = None,
        sleeper=time.sleep,
        jitter_rng: random.Random | None = None,
    ):
        self.cfg = cfg
        self._client = httpx.Client(transport=transport, timeout=cfg.timeout_s)
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)
        self._sleep = sleeper
        self._jitter = jitter_rng or random.Random()
        self._lock = threading.Lock()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.cfg.token_env:
            token = os.environ.get(self.cfg.token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def post_json(self, payload: dict, context: str = "") -> dict:
        """POST ``payload`` to the endpoint URL, returning the parsed JSON body."""
        attempts = 0
        last_error = ""
        while attempts <= self.cfg.max_retries:
            attempts += 1
            try:
                with self._slots:
                    response = self._client.post(
                        self.cfg.base_url, json=payload, headers=self._headers()
                    )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                if attempts <= self.cfg.max_retries:
                    self._backoff(attempts, last_error, context)
                    continue
                break

            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                if attempts <= self.cfg.max_retries:
                    self._backoff(attempts, last_error, context)
                    continue
                break
            if response.status_code >= 400:
                raise EndpointError(
                    f"{context or self.cfg.base_url}: HTTP {response.status_code}: "
                    f"{_error_message(response)}",
                    attempts=attempts,
                    status=response.status_code,
                )
            try:
                body = response.json()
            except ValueError as exc:
                raise ProtocolError(
                    f"{context or self.cfg.base_url}: response is not JSON "
                    f"({response.text[:200]!r})"
                ) from exc
            if not isinstance(body, dict):
                raise ProtocolError(
                    f"{context or self.cfg.base_url}: expected JSON object, "
                    f"got {type(body).__name__}"
                )
            if attempts > 1:
                log.info("%s: succeeded after %d attempts", context or self.cfg.base_url, attempts)
            return body

        raise EndpointError(
            f"{context or self.cfg.base_url}: giving up after {attempts} attempts ({last_error})",
            attempts=attempts,
        )

    def _backoff(self, attempt: int, reason: str, context: str) -> None:
        delay = BACKOFF_BASE_S * (2 ** (attempt - 1)) + self._jitter.uniform(0, BACKOFF_BASE_S)
        log.warning("%s: %s, retrying in %.2fs", context or self.cfg.base_url, reason, delay)
        self._sleep(delay)

    def close(self) -> None:
        self._client.close()


def _error_message(response: httpx.Response) -> str:
    try:
        body = response.json()
        return str(body["error"]["message"])
    except Exception:
        return response.text[:200]
