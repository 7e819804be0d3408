"""Chat-completion transports: real HTTP client plus test doubles.

A transport is anything with send(request, *, seed=None) -> str. The HTTP
client speaks the common chat-completion JSON shape; ScriptedTransport
replays canned replies for tests and records what it saw.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from typing import Protocol, runtime_checkable
from urllib.parse import urlparse

import httpx

from .errors import ConfigError, TransportError
from .prompts import ChatRequest

API_KEY_ENV = "LPPA_API_KEY"


@runtime_checkable
class Transport(Protocol):
    def send(self, request: ChatRequest, *, seed: int | None = None) -> str: ...


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    timeout: float = 60.0
    api_key_env: str = API_KEY_ENV

    def __post_init__(self) -> None:
        if not self.base_url:
            raise ConfigError("endpoint base_url must be non-empty")
        if self.timeout <= 0:
            raise ConfigError("endpoint timeout must be > 0")


class HttpTransport:
    """POSTs to {base_url}/chat/completions; key read from the environment only."""

    def __init__(self, config: EndpointConfig, *, client: httpx.Client | None = None):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)

    @property
    def host(self) -> str:
        return urlparse(self.config.base_url).hostname or self.config.base_url

    def send(self, request: ChatRequest, *, seed: int | None = None) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {
            "model": request.model or self.config.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        if seed is not None:
            body["seed"] = seed
        try:
            response = self._client.post(url, json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"request to {self.host} failed: {exc}") from None
        if response.status_code // 100 != 2:
            raise TransportError(f"HTTP {response.status_code} from {self.host}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError):
            raise TransportError(f"malformed completion payload from {self.host}") from None
        if not isinstance(content, str):
            raise TransportError(f"non-string completion content from {self.host}")
        return content


class ScriptedTransport:
    """Replays a fixed reply sequence; entries may be exceptions to raise.

    Thread-safe; tracks the high-water mark of concurrent send() calls so
    tests can assert parallelism caps.
    """

    host = "scripted"

    def __init__(self, replies: list[str | Exception], *, delay: float = 0.0):
        self._replies = list(replies)
        self._delay = delay
        self._lock = threading.Lock()
        self._next = 0
        self._in_flight = 0
        self.max_in_flight = 0
        self.requests: list[ChatRequest] = []
        self.seeds: list[int | None] = []

    def send(self, request: ChatRequest, *, seed: int | None = None) -> str:
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            self.requests.append(request)
            self.seeds.append(seed)
            index = self._next
            self._next += 1
        try:
            if self._delay:
                time.sleep(self._delay)
            if index >= len(self._replies):
                raise TransportError("scripted transport exhausted")
            reply = self._replies[index]
            if isinstance(reply, Exception):
                raise reply
            return reply
        finally:
            with self._lock:
                self._in_flight -= 1


def build_transport(
    endpoint: str | EndpointConfig | Transport,
    *,
    model: str = "",
    timeout: float = 60.0,
) -> Transport:
    """Resolve an endpoint argument: URL, "mock:<seed>", config, or transport."""
    if isinstance(endpoint, EndpointConfig):
        return HttpTransport(endpoint)
    if not isinstance(endpoint, str):
        return endpoint
    if endpoint.startswith("mock:") or endpoint == "mock":
        from .mocktransport import TemplateTransport  # avoids an import cycle

        _, _, tail = endpoint.partition(":")
        try:
            seed = int(tail) if tail else 0
        except ValueError:
            raise ConfigError(f"bad mock endpoint seed: {tail!r}") from None
        return TemplateTransport(seed=seed)
    if endpoint.startswith(("http://", "https://")):
        return HttpTransport(EndpointConfig(endpoint, model=model, timeout=timeout))
    raise ConfigError(f"unrecognized endpoint: {endpoint!r}")
