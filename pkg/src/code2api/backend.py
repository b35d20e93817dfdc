"""Chat-completion backends: a live HTTPS client and a deterministic mock.

Both expose a single `complete(request)` call so the rest of the pipeline
never knows which one it is talking to.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass

import httpx

from .errors import (
    AuthFailure,
    BackendError,
    NotFound,
    OverTokenLimit,
    RateLimited,
    TransportError,
)
from .prompts import estimate_tokens

DEFAULT_MODEL = "gpt-3.5-turbo"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MAX_TOKENS = 4096
DEFAULT_CONCURRENCY = 4

# retry policy: attempts, base delay seconds, backoff factor
RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.5
RETRY_FACTOR = 2.0


@dataclass
class CompletionRequest:
    model_name: str
    prompt_text: str
    temperature: float = 0.0
    max_output_tokens: int = 700
    # lets the mock route fixtures and the cache build stable keys
    answer_id: int | None = None


@dataclass
class CompletionResponse:
    raw_text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0
    provider_id: str = ""
    truncated: bool = False
    retries: int = 0


@dataclass
class BackendConfig:
    api_key: str = ""
    model: str = DEFAULT_MODEL
    base_url: str = DEFAULT_BASE_URL
    max_tokens: int = DEFAULT_MAX_TOKENS
    concurrency: int = DEFAULT_CONCURRENCY
    requests_per_minute: float = 60.0
    timeout: float = 60.0


def load_config() -> BackendConfig:
    """Build a config from CODE2API_* environment variables."""
    return BackendConfig(
        api_key=os.environ.get("CODE2API_API_KEY", ""),
        model=os.environ.get("CODE2API_MODEL", DEFAULT_MODEL),
        base_url=os.environ.get("CODE2API_BASE_URL", DEFAULT_BASE_URL),
        max_tokens=int(os.environ.get("CODE2API_MAX_TOKENS", DEFAULT_MAX_TOKENS)),
        concurrency=int(os.environ.get("CODE2API_CONCURRENCY", DEFAULT_CONCURRENCY)),
    )


def _run_with_retries(once, sleep=time.sleep):
    """Run `once` with the module retry policy.

    Retries transport-level failures and rate limits only; auth and content
    errors surface immediately. Returns (result, retries_used).
    """
    delay = RETRY_BASE_DELAY
    last_error: BackendError | None = None
    for attempt in range(RETRY_ATTEMPTS):
        try:
            return once(), attempt
        except (TransportError, RateLimited) as exc:
            last_error = exc
            if attempt == RETRY_ATTEMPTS - 1:
                break
            wait = delay
            if isinstance(exc, RateLimited) and exc.retry_after is not None:
                wait = max(wait, exc.retry_after)
            sleep(wait)
            delay *= RETRY_FACTOR
    assert last_error is not None
    raise last_error


class _TokenBucket:
    """Requests-per-minute limiter shared across worker threads."""

    def __init__(self, rate_per_minute: float, clock=time.monotonic, sleep=time.sleep):
        self.rate = rate_per_minute / 60.0
        self.capacity = max(1.0, rate_per_minute / 60.0)
        self.tokens = self.capacity
        self.updated = clock()
        self.clock = clock
        self.sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(
                    self.capacity, self.tokens + (now - self.updated) * self.rate
                )
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                needed = (1.0 - self.tokens) / self.rate
            self.sleep(needed)


class LiveBackend:
    """Chat-completions client with bearer auth, retries, a rate limiter
    and a hard bound on in-flight requests.
    """

    def __init__(
        self,
        config: BackendConfig | None = None,
        client: httpx.Client | None = None,
        sleep=time.sleep,
    ):
        self.config = config or load_config()
        self._client = client or httpx.Client(timeout=self.config.timeout)
        self._sleep = sleep
        self._inflight = threading.BoundedSemaphore(self.config.concurrency)
        self._bucket = _TokenBucket(self.config.requests_per_minute, sleep=sleep)

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        if not self.config.api_key:
            raise AuthFailure("CODE2API_API_KEY is not set")
        estimate = estimate_tokens(req.prompt_text) + req.max_output_tokens
        if estimate > self.config.max_tokens:
            raise OverTokenLimit(
                f"estimated {estimate} tokens exceeds limit {self.config.max_tokens}"
            )
        response, retries = _run_with_retries(
            lambda: self._complete_once(req), sleep=self._sleep
        )
        response.retries = retries
        return response

    def _complete_once(self, req: CompletionRequest) -> CompletionResponse:
        payload = {
            "model": req.model_name,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
            "messages": [{"role": "user", "content": req.prompt_text}],
        }
        started = time.monotonic()
        self._bucket.acquire()
        with self._inflight:
            try:
                http_response = self._client.post(
                    f"{self.config.base_url.rstrip('/')}/chat/completions",
                    json=payload,
                    headers={"Authorization": f"Bearer {self.config.api_key}"},
                )
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc
        latency_ms = int((time.monotonic() - started) * 1000)
        if http_response.status_code in (401, 403):
            raise AuthFailure(f"provider rejected credentials ({http_response.status_code})")
        if http_response.status_code == 429:
            retry_after = http_response.headers.get("Retry-After")
            raise RateLimited(retry_after=float(retry_after) if retry_after else None)
        if http_response.status_code >= 500:
            raise TransportError(f"provider error {http_response.status_code}")
        if http_response.status_code == 400:
            detail = http_response.text
            if "token" in detail.lower():
                raise OverTokenLimit(detail)
            raise BackendError(f"provider rejected request: {detail}")
        try:
            body = http_response.json()
            choice = body["choices"][0]
            text = choice["message"]["content"]
        except (ValueError, KeyError, IndexError) as exc:
            raise BackendError(f"malformed provider response: {exc}") from exc
        usage = body.get("usage", {})
        return CompletionResponse(
            raw_text=text,
            prompt_tokens=usage.get("prompt_tokens", 0),
            completion_tokens=usage.get("completion_tokens", 0),
            latency_ms=latency_ms,
            provider_id=f"live:{req.model_name}",
            truncated=choice.get("finish_reason") == "length",
        )


class MockBackend:
    """Deterministic fixture-backed backend.

    fixture_map values are either a canned response text or a schedule
    list whose entries are texts or BackendError instances; each call for
    that answer_id consumes the next entry (the last one repeats).
    """

    def __init__(self, fixture_map: dict[int, str | list]):
        self.fixture_map = dict(fixture_map)
        self._cursor: dict[int, int] = {}
        self._lock = threading.Lock()
        self.call_count = 0

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        response, retries = _run_with_retries(
            lambda: self._complete_once(req), sleep=lambda _ignored: None
        )
        response.retries = retries
        return response

    def _complete_once(self, req: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.call_count += 1
            key = req.answer_id
            if key is None or key not in self.fixture_map:
                raise NotFound(f"no fixture for answer_id {key}")
            entry = self.fixture_map[key]
            if isinstance(entry, list):
                index = self._cursor.get(key, 0)
                self._cursor[key] = index + 1
                entry = entry[min(index, len(entry) - 1)]
        if isinstance(entry, BackendError):
            raise entry
        if isinstance(entry, Exception):  # pragma: no cover - defensive
            raise BackendError(str(entry))
        return CompletionResponse(
            raw_text=entry,
            prompt_tokens=estimate_tokens(req.prompt_text),
            completion_tokens=estimate_tokens(entry),
            latency_ms=0,
            provider_id="mock",
        )


def mock_backend(fixture_map: dict[int, str | list]) -> MockBackend:
    return MockBackend(fixture_map)


def load_fixtures(path: str | os.PathLike) -> dict[int, str]:
    """Read a fixture file: a JSON object mapping answer_id to text."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return {int(key): value for key, value in raw.items()}
