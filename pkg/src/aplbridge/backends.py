"""Chat-completion and embedding providers behind one small interface.

Three generation backends: an HTTP chat endpoint, a deterministic
scripted mock, and a record/replay cache, so every pipeline path runs
offline.  Chat-template rendering into a provider wire format is the
backend's job; callers only emit role-tagged messages.

Secrets come from the APLBRIDGE_API_KEY environment variable, never
from config files.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import httpx

ROLES = ("system", "user", "assistant")
DEFAULT_MAX_OUTPUT_TOKENS = 2048  # matches the fine-tuning/inference sequence budget
API_KEY_ENV = "APLBRIDGE_API_KEY"


class BackendError(RuntimeError):
    pass


class TransportError(BackendError):
    pass


class RateLimitError(BackendError):
    pass


class ContextOverflowError(BackendError):
    pass


class CacheMissError(BackendError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class GenerationRequest:
    messages: tuple[ChatMessage, ...]
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    temperature: float = 0.0  # deterministic by default; decoding params are unreported upstream
    model: str = "default"

    def __post_init__(self):
        if not self.messages:
            raise ValueError("empty message list")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        roles = [m.role for m in self.messages]
        if "system" in roles and roles[0] != "system":
            raise ValueError("system message must come first")

    def digest(self) -> str:
        """Stable across processes: canonical JSON then sha256."""
        payload = {
            "messages": [[m.role, m.content] for m in self.messages],
            "max_output_tokens": self.max_output_tokens,
            "temperature": self.temperature,
            "model": self.model,
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def to_json(self) -> dict:
        return {
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "max_output_tokens": self.max_output_tokens,
            "temperature": self.temperature,
            "model": self.model,
        }


def request(messages: Sequence[ChatMessage | tuple[str, str]], **kwargs) -> GenerationRequest:
    msgs = tuple(m if isinstance(m, ChatMessage) else ChatMessage(*m) for m in messages)
    return GenerationRequest(messages=msgs, **kwargs)


class ScriptedMockBackend:
    """Deterministic stand-in for a model endpoint.

    Two modes, combinable: substring rules (first match wins over the
    concatenated message text) and a response script consumed one call
    at a time.  The script takes precedence when non-empty.
    """

    deterministic_summary = True

    def __init__(self, rules: Sequence[tuple[str, str]] = (), script: Sequence[str] = (),
                 default: str | None = None):
        self.rules = list(rules)
        self.script = list(script)
        self.default = default
        self.calls: list[GenerationRequest] = []

    def generate(self, req: GenerationRequest) -> str:
        self.calls.append(req)
        if self.script:
            return self.script.pop(0)
        text = "\n".join(m.content for m in req.messages)
        for pattern, response in self.rules:
            if pattern in text:
                return response
        if self.default is not None:
            return self.default
        raise BackendError("scripted mock has no rule for this request")


class ReplayBackend:
    """On-disk record/replay cache keyed by request digest.

    With an inner backend it records misses; without one, a miss is a
    distinct CacheMissError.
    """

    def __init__(self, cache_dir, inner=None):
        self.cache_dir = str(cache_dir)
        self.inner = inner
        os.makedirs(self.cache_dir, exist_ok=True)

    def _path(self, digest: str) -> str:
        return os.path.join(self.cache_dir, digest + ".json")

    def generate(self, req: GenerationRequest) -> str:
        path = self._path(req.digest())
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                return json.load(f)["response"]
        if self.inner is None:
            raise CacheMissError(f"no cached response for digest {req.digest()}")
        response = self.inner.generate(req)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump({"request": req.to_json(), "response": response}, f, ensure_ascii=False)
        os.replace(tmp, path)
        return response


RETRYABLE = (TransportError, RateLimitError)
MAX_RETRIES = 3


def _with_retries(fn: Callable[[], str]) -> str:
    delay = 0.5
    for attempt in range(MAX_RETRIES + 1):
        try:
            return fn()
        except RETRYABLE:
            if attempt == MAX_RETRIES:
                raise
            time.sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")


class HttpChatBackend:
    """OpenAI-style chat-completions endpoint."""

    def __init__(self, endpoint: str, model: str, timeout: float = 120.0,
                 api_key: str | None = None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)

    def generate(self, req: GenerationRequest) -> str:
        def call() -> str:
            headers = {"Content-Type": "application/json"}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"
            body = {
                "model": self.model,
                "messages": [{"role": m.role, "content": m.content} for m in req.messages],
                "max_tokens": req.max_output_tokens,
                "temperature": req.temperature,
            }
            try:
                resp = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc
            if resp.status_code == 429:
                raise RateLimitError(resp.text)
            if resp.status_code == 400 and "context" in resp.text.lower():
                raise ContextOverflowError(resp.text)
            if resp.status_code >= 500:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text}")
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text}")
            return resp.json()["choices"][0]["message"]["content"]

        return _with_retries(call)


# --- embeddings ----------------------------------------------------------------

EMBED_DIM = 512


class HashedNgramEmbedder:
    """Deterministic local embedding fallback: hashed character-n-gram
    frequency vector, L2-normalized.  No ML runtime required."""

    def __init__(self, dim: int = EMBED_DIM, n: int = 3):
        self.dim = dim
        self.n = n

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValueError("cannot embed empty text")
        counts = [0.0] * self.dim
        padded = f"\x02{text}\x03"
        grams = max(1, len(padded) - self.n + 1)
        for i in range(grams):
            gram = padded[i : i + self.n]
            h = int.from_bytes(hashlib.sha256(gram.encode("utf-8")).digest()[:8], "big")
            counts[h % self.dim] += 1.0
        norm = sum(c * c for c in counts) ** 0.5
        return [c / norm for c in counts]


class HttpEmbeddingBackend:
    """OpenAI-style /embeddings endpoint; unit-normalizes the response."""

    def __init__(self, endpoint: str, model: str, timeout: float = 60.0,
                 api_key: str | None = None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValueError("cannot embed empty text")

        def call() -> list[float]:
            headers = {"Content-Type": "application/json"}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"
            try:
                resp = httpx.post(
                    self.endpoint,
                    json={"model": self.model, "input": text},
                    headers=headers,
                    timeout=self.timeout,
                )
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc
            if resp.status_code == 429:
                raise RateLimitError(resp.text)
            if resp.status_code != 200:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text}")
            vec = resp.json()["data"][0]["embedding"]
            norm = sum(x * x for x in vec) ** 0.5 or 1.0
            return [x / norm for x in vec]

        return _with_retries(call)
