"""Model access with deterministic record and replay.

Every call is keyed by a stable hash of provider id, model, prompt bytes
and decoding parameters. Live calls can be recorded to a JSONL trace;
replaying the trace answers the same requests without any network. A
recorded run replayed in strict mode therefore never misses, as long as
prompts render byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

import requests

from .core import TokenUsage

log = logging.getLogger(__name__)

DEFAULT_MAX_TOKENS = 512
DEFAULT_RPM = 60
MAX_RETRIES = 3


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 0.0
    max_tokens: int = DEFAULT_MAX_TOKENS
    stop: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Completion:
    text: str
    usage: TokenUsage


class GatewayError(Exception):
    pass


class ProviderError(GatewayError):
    """The provider kept failing after all retries."""

    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


class ReplayMiss(GatewayError):
    """Strict replay was asked for a request that was never recorded."""

    def __init__(self, key: str, prompt_sha256: str):
        super().__init__("no trace record for request key %s" % key)
        self.key = key
        self.prompt_sha256 = prompt_sha256


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def request_key(provider_id: str, model: str, prompt: str, params: DecodingParams) -> str:
    payload = json.dumps(
        {
            "provider": provider_id,
            "model": model,
            "prompt": prompt,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "stop": list(params.stop),
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def estimate_tokens(text: str) -> int:
    """Rough byte-based token count for providers that omit usage."""
    return math.ceil(len(text.encode("utf-8")) / 4)


# =====================================================================
# Trace storage
# =====================================================================

class TraceStore:
    """In-memory map of request key to recorded completion."""

    def __init__(self) -> None:
        self._records: Dict[str, dict] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key: str) -> bool:
        return key in self._records

    def get(self, key: str) -> Optional[dict]:
        return self._records.get(key)

    def put(self, record: dict) -> None:
        with self._lock:
            self._records[record["key"]] = record

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TraceStore":
        store = cls()
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise GatewayError(
                        "%s:%d: bad trace record: %s" % (path, line_no, exc)
                    ) from None
                store.put(record)
        return store


def make_record(
    key: str,
    prompt: str,
    model: str,
    params: DecodingParams,
    completion: Completion,
) -> dict:
    return {
        "key": key,
        "prompt_sha256": prompt_sha256(prompt),
        "model": model,
        "params": {
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "stop": list(params.stop),
        },
        "text": completion.text,
        "usage": {
            "input": completion.usage.input,
            "output": completion.usage.output,
            "estimated": completion.usage.estimated,
        },
    }


def _completion_from_record(record: dict) -> Completion:
    usage = record.get("usage") or {}
    return Completion(
        record["text"],
        TokenUsage(
            int(usage.get("input", 0)),
            int(usage.get("output", 0)),
            bool(usage.get("estimated", False)),
        ),
    )


# =====================================================================
# Gateways
# =====================================================================

class Gateway:
    provider_id: str = "openai"
    model: str = "unknown"

    def complete(self, prompt: str, params: DecodingParams) -> Completion:
        raise NotImplementedError

    def key_for(self, prompt: str, params: DecodingParams) -> str:
        return request_key(self.provider_id, self.model, prompt, params)


class ReplayGateway(Gateway):
    """Serves recorded completions only; unknown requests are an error."""

    def __init__(self, store: TraceStore, model: str, provider_id: str = "openai"):
        self.store = store
        self.model = model
        self.provider_id = provider_id

    def complete(self, prompt: str, params: DecodingParams) -> Completion:
        key = self.key_for(prompt, params)
        record = self.store.get(key)
        if record is None:
            raise ReplayMiss(key, prompt_sha256(prompt))
        return _completion_from_record(record)


class TokenBucket:
    """Crude requests-per-minute limiter."""

    def __init__(
        self,
        rate_per_min: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.rate = rate_per_min / 60.0
        self.capacity = max(1.0, rate_per_min / 60.0)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self.updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                self.sleep((1.0 - self.tokens) / self.rate)


class LiveGateway(Gateway):
    """Talks to a chat-completions endpoint with retry and rate limiting."""

    def __init__(
        self,
        base_url: str,
        api_key: str,
        model: str,
        provider_id: str = "openai",
        rate_per_min: float = DEFAULT_RPM,
        max_retries: int = MAX_RETRIES,
        backoff: float = 1.0,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.provider_id = provider_id
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()
        self.sleep = sleep
        self.bucket = TokenBucket(rate_per_min, sleep=sleep)

    @classmethod
    def from_env(cls, model: str, **kwargs) -> "LiveGateway":
        base_url = os.environ.get("XOT_BASE_URL", "https://api.openai.com/v1")
        api_key = os.environ.get("XOT_API_KEY", "")
        if not api_key:
            raise GatewayError("XOT_API_KEY is not set")
        return cls(base_url, api_key, model, **kwargs)

    def complete(self, prompt: str, params: DecodingParams) -> Completion:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.stop:
            body["stop"] = list(params.stop)
        last_error = "no attempts made"
        status = None
        for attempt in range(self.max_retries):
            self.bucket.acquire()
            try:
                response = self.session.post(
                    self.base_url + "/chat/completions",
                    json=body,
                    headers={"Authorization": "Bearer %s" % self.api_key},
                    timeout=120,
                )
            except requests.RequestException as exc:
                last_error, status = str(exc), None
            else:
                status = response.status_code
                if status == 200:
                    return self._parse(prompt, response.json())
                last_error = response.text[:500]
                if status not in (429,) and status < 500:
                    raise ProviderError(last_error, status)
            if attempt + 1 < self.max_retries:
                self.sleep(self.backoff * 2**attempt)
        raise ProviderError(last_error, status)

    def _parse(self, prompt: str, payload: dict) -> Completion:
        try:
            choice = payload["choices"][0]
            text = choice["message"]["content"] if "message" in choice else choice["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError("malformed provider response: %s" % exc, 200)
        usage = payload.get("usage")
        if usage and "prompt_tokens" in usage:
            counted = TokenUsage(
                int(usage["prompt_tokens"]), int(usage.get("completion_tokens", 0))
            )
        else:
            counted = TokenUsage(
                estimate_tokens(prompt), estimate_tokens(text), estimated=True
            )
        return Completion(text, counted)


class RecordingGateway(Gateway):
    """Serves from the store when possible, otherwise asks the inner
    gateway and appends the fresh record to the trace file."""

    def __init__(self, inner: Gateway, store: TraceStore, path: Union[str, Path]):
        self.inner = inner
        self.store = store
        self.path = Path(path)
        self.provider_id = inner.provider_id
        self.model = inner.model
        self._lock = threading.Lock()

    def complete(self, prompt: str, params: DecodingParams) -> Completion:
        key = self.key_for(prompt, params)
        record = self.store.get(key)
        if record is not None:
            return _completion_from_record(record)
        completion = self.inner.complete(prompt, params)
        record = make_record(key, prompt, self.model, params, completion)
        self.store.put(record)
        with self._lock, open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return completion


class MeteredGateway(Gateway):
    """Accumulates token usage across every call it forwards."""

    def __init__(self, inner: Gateway):
        self.inner = inner
        self.provider_id = inner.provider_id
        self.model = inner.model
        self.usage = TokenUsage()
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str, params: DecodingParams) -> Completion:
        completion = self.inner.complete(prompt, params)
        with self._lock:
            self.usage = self.usage + completion.usage
            self.calls += 1
        return completion
