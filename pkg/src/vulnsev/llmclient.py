"""Chat-completion client: HTTP provider, offline mocks, replay cache.

Every prompt is hashed together with the model name and sampling
hyperparameters; raw response bodies are cached one file per hash, so a
warm cache replays a run byte-for-byte with zero network traffic.

Two offline providers ship with the package: ``mock-fixed`` always
answers a configured string, ``mock-copy-nearest`` answers with the
severity label of the demonstration block adjacent to the test block
(identical to the most-similar demonstration under the default
similarity ordering). Both synthesize chat-completion response bodies so
the parsing path is shared with the HTTP provider.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import requests

from .corpus import SeverityLevel
from .errors import ProtocolError, ProviderHttpError, TransportError, UsageError
from .prompting import PromptBundle

PROVIDER_KINDS = ("http", "mock-fixed", "mock-copy-nearest")

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}

_LEVEL_WORDS = re.compile(r"\b(critical|high|medium|low)\b", re.IGNORECASE)


@dataclass(frozen=True, slots=True)
class ProviderConfig:
    """Provider selection plus request hyperparameters.

    Sampling defaults are fully deterministic: temperature, frequency
    penalty and presence penalty all zero.
    """

    kind: str = "mock-copy-nearest"
    base_url: str = ""
    model: str = "mock"
    api_key_env: str = "VULNSEV_API_KEY"
    temperature: float = 0.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    max_concurrent_requests: int = 4
    answer: str = ""
    retry_invalid: bool = False
    backoff_base: float = 0.5

    @classmethod
    def from_spec(cls, spec: str) -> "ProviderConfig":
        """Parse a CLI provider spec like ``mock-fixed:High`` or ``http``."""
        kind, _, arg = spec.partition(":")
        if kind == "mock-fixed":
            if not arg:
                raise UsageError("mock-fixed provider needs an answer: mock-fixed:High")
            return cls(kind="mock-fixed", answer=arg)
        if kind == "mock-copy-nearest":
            return cls(kind="mock-copy-nearest")
        if kind == "http":
            return cls(kind="http")
        raise UsageError(f"unknown provider {spec!r}; expected one of {PROVIDER_KINDS}")

    @classmethod
    def from_json_dict(cls, raw: dict) -> "ProviderConfig":
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise UsageError(f"unknown provider config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        if cfg.kind not in PROVIDER_KINDS:
            raise UsageError(f"unknown provider kind {cfg.kind!r}")
        return cfg


@dataclass(frozen=True, slots=True)
class AssessmentResult:
    """One model verdict for one target; ``predicted`` is None when the
    response named zero or several levels (the raw text is kept for audit)."""

    target_id: str
    truth: SeverityLevel
    predicted: Optional[SeverityLevel]
    raw_text: str
    prompt_hash: str
    from_cache: bool
    latency: float
    retries: int = 0

    @property
    def is_invalid(self) -> bool:
        return self.predicted is None

    @property
    def is_correct(self) -> bool:
        return self.predicted is self.truth


def parse_severity(raw: str) -> Optional[SeverityLevel]:
    """Whole-word, case-insensitive scan for exactly one distinct level."""
    found = {match.lower() for match in _LEVEL_WORDS.findall(raw)}
    if len(found) != 1:
        return None
    return SeverityLevel.from_label(found.pop())


def prompt_digest(cfg: ProviderConfig, full_text: str) -> str:
    """Content hash of everything that determines a provider answer."""
    payload = json.dumps(
        {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "frequency_penalty": cfg.frequency_penalty,
            "presence_penalty": cfg.presence_penalty,
            "prompt": full_text,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed raw response bodies, one file per prompt hash."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, digest: str) -> Path:
        return self.directory / f"{digest}.resp"

    def get(self, digest: str) -> Optional[str]:
        path = self._path(digest)
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")

    def put(self, digest: str, body: str) -> None:
        with self._lock:
            tmp = self._path(digest).with_suffix(".tmp")
            tmp.write_text(body, encoding="utf-8")
            os.replace(tmp, self._path(digest))


def extract_content(body: str) -> str:
    """Pull the first choice's message content out of a response body."""
    try:
        payload = json.loads(body)
        content = payload["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"response body is not a chat completion: {exc}") from None
    if not isinstance(content, str):
        raise ProtocolError("message content is not text")
    return content


def _completion_body(content: str) -> str:
    return json.dumps(
        {"choices": [{"message": {"role": "assistant", "content": content}}]},
        sort_keys=True,
        ensure_ascii=False,
    )


class MockProvider:
    """Base for offline providers; instruments concurrency for tests."""

    def __init__(self):
        self.calls = 0
        self.max_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    def _answer(self, prompt_text: str) -> str:
        raise NotImplementedError

    def complete(self, prompt_text: str) -> Tuple[str, int]:
        with self._lock:
            self.calls += 1
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            return _completion_body(self._answer(prompt_text)), 0
        finally:
            with self._lock:
                self._in_flight -= 1


class FixedAnswerProvider(MockProvider):
    def __init__(self, answer: str):
        super().__init__()
        self.answer = answer

    def _answer(self, prompt_text: str) -> str:
        return self.answer


_DEMO_OUTPUT = re.compile(r"^\[Output\]: (.+)$", re.MULTILINE)


class CopyNearestProvider(MockProvider):
    """Answers with the label of the demo block adjacent to the test block."""

    def _answer(self, prompt_text: str) -> str:
        head = prompt_text.split("\nTest 1:\n", 1)[0]
        labels = _DEMO_OUTPUT.findall(head)
        if not labels:
            return "no demonstrations available"
        return labels[-1]


class HttpProvider:
    """POSTs to ``{base_url}/chat/completions`` with retry and backoff."""

    def __init__(self, cfg: ProviderConfig):
        if not cfg.base_url:
            raise UsageError("http provider requires a base_url")
        self.cfg = cfg
        self._session = requests.Session()
        self._jitter = random.Random()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def complete(self, prompt_text: str) -> Tuple[str, int]:
        cfg = self.cfg
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt_text}],
            "temperature": cfg.temperature,
            "frequency_penalty": cfg.frequency_penalty,
            "presence_penalty": cfg.presence_penalty,
        }
        last_error: Optional[Exception] = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = cfg.backoff_base * (2 ** (attempt - 1))
                time.sleep(delay + self._jitter.uniform(0, cfg.backoff_base / 4))
            try:
                response = self._session.post(
                    url, json=body, headers=self._headers(), timeout=cfg.timeout
                )
            except requests.RequestException as exc:
                last_error = TransportError(f"request failed: {exc}")
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = ProviderHttpError(response.status_code, response.text)
                continue
            if not 200 <= response.status_code < 300:
                raise ProviderHttpError(response.status_code, response.text)
            return response.text, attempt
        if isinstance(last_error, ProviderHttpError):
            raise last_error
        raise last_error or TransportError("request failed with no attempts made")


def make_provider(cfg: ProviderConfig):
    if cfg.kind == "mock-fixed":
        return FixedAnswerProvider(cfg.answer)
    if cfg.kind == "mock-copy-nearest":
        return CopyNearestProvider()
    if cfg.kind == "http":
        return HttpProvider(cfg)
    raise UsageError(f"unknown provider kind {cfg.kind!r}")


class LlmClient:
    """Shared, thread-safe assessment client with bounded concurrency."""

    def __init__(self, cfg: ProviderConfig, cache: ResponseCache, provider=None):
        self.cfg = cfg
        self.cache = cache
        self.provider = provider if provider is not None else make_provider(cfg)
        self._semaphore = threading.BoundedSemaphore(max(1, cfg.max_concurrent_requests))

    def _fetch(self, full_text: str, digest: str) -> Tuple[str, int]:
        with self._semaphore:
            body, retries = self.provider.complete(full_text)
        self.cache.put(digest, body)
        return body, retries

    def assess(
        self, prompt: PromptBundle, *, target_id: str, truth: SeverityLevel
    ) -> AssessmentResult:
        started = time.monotonic()
        digest = prompt_digest(self.cfg, prompt.full_text)
        body = self.cache.get(digest)
        from_cache = body is not None
        retries = 0
        if body is None:
            body, retries = self._fetch(prompt.full_text, digest)
        content = extract_content(body)
        predicted = parse_severity(content)
        if predicted is None and self.cfg.retry_invalid:
            body, more = self._fetch(prompt.full_text, digest)
            retries += more
            from_cache = False
            content = extract_content(body)
            predicted = parse_severity(content)
        return AssessmentResult(
            target_id=target_id,
            truth=truth,
            predicted=predicted,
            raw_text=content,
            prompt_hash=digest,
            from_cache=from_cache,
            latency=time.monotonic() - started,
            retries=retries,
        )


def assess(
    prompt: PromptBundle,
    cfg: ProviderConfig,
    cache: ResponseCache,
    *,
    target_id: str,
    truth: SeverityLevel,
) -> AssessmentResult:
    """One-shot assessment; prefer :class:`LlmClient` for batched runs."""
    return LlmClient(cfg, cache).assess(prompt, target_id=target_id, truth=truth)
