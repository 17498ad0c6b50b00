"""Chat-completion backends behind a single ``complete(prompt, params)`` call.

Two implementations: an HTTP backend speaking the OpenAI-compatible
chat-completions JSON (endpoint, key, and model taken from the
``REQ2LTL_LLM_*`` environment variables), and a scripted stub that replays a
transcript of matcher/response pairs so the whole pipeline runs offline and
deterministically in tests.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

__all__ = [
    "GenerationParams",
    "LlmBackend",
    "BackendError",
    "HttpBackend",
    "ScriptedBackend",
    "SequenceBackend",
    "TranscriptEntry",
    "load_transcript",
    "backend_from_env",
]

ENV_ENDPOINT = "REQ2LTL_LLM_ENDPOINT"
ENV_API_KEY = "REQ2LTL_LLM_API_KEY"
ENV_MODEL = "REQ2LTL_LLM_MODEL"


@dataclass(frozen=True)
class GenerationParams:
    model_name: str = "default"
    max_tokens: int = 1024
    temperature: float = 0.0
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


class BackendError(RuntimeError):
    """kind is one of ``timeout``, ``http``, ``exhausted``."""

    def __init__(self, kind: str, message: str, status: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.status = status


class LlmBackend(Protocol):
    def complete(self, prompt: str, params: GenerationParams) -> str: ...


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Scripted stub


@dataclass
class TranscriptEntry:
    """Matches on a prompt substring or on the prompt digest; a missing
    matcher matches anything."""

    response: str
    match: str | None = None
    digest: str | None = None

    def matches(self, prompt: str) -> bool:
        if self.match is not None and self.match not in prompt:
            return False
        if self.digest is not None and self.digest != prompt_digest(prompt):
            return False
        return True


def load_transcript(path: str | Path) -> list[TranscriptEntry]:
    """JSONL file of ``{"match": .., "digest": .., "response": ..}`` rows;
    object responses are serialized back to JSON text."""
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if "response" not in row:
            raise ValueError(f"{path}:{lineno}: transcript rows need a response")
        response = row["response"]
        if not isinstance(response, str):
            response = json.dumps(response)
        entries.append(TranscriptEntry(response=response, match=row.get("match"), digest=row.get("digest")))
    return entries


@dataclass
class ScriptedBackend:
    """Deterministic offline backend replaying a transcript.

    In ``strict_order`` mode calls must consume entries front to back; a call
    that does not match the head (or arrives after the transcript ran dry)
    fails with ``BackendError('exhausted')``.
    """

    transcript: list[TranscriptEntry]
    strict_order: bool = True
    calls: list[str] = field(default_factory=list)
    _cursor: int = 0

    @classmethod
    def from_file(cls, path: str | Path, strict_order: bool = True) -> "ScriptedBackend":
        return cls(load_transcript(path), strict_order=strict_order)

    def complete(self, prompt: str, params: GenerationParams) -> str:
        self.calls.append(prompt)
        if self.strict_order:
            if self._cursor >= len(self.transcript):
                raise BackendError("exhausted", "transcript exhausted")
            entry = self.transcript[self._cursor]
            if not entry.matches(prompt):
                raise BackendError(
                    "exhausted",
                    f"out-of-order call: entry {self._cursor} does not match the prompt",
                )
            self._cursor += 1
            return entry.response
        for i, entry in enumerate(self.transcript):
            if entry is not None and entry.matches(prompt):
                self.transcript[i] = None  # type: ignore[call-overload]
                return entry.response
        raise BackendError("exhausted", "no transcript entry matches the prompt")


@dataclass
class SequenceBackend:
    """Replays raw responses in order regardless of prompts (trace replay)."""

    responses: list[str]
    _cursor: int = 0

    def complete(self, prompt: str, params: GenerationParams) -> str:
        if self._cursor >= len(self.responses):
            raise BackendError("exhausted", "response sequence exhausted")
        out = self.responses[self._cursor]
        self._cursor += 1
        return out


# ---------------------------------------------------------------------------
# Live backend


class HttpBackend:
    """OpenAI-compatible chat-completions client.

    Transient transport failures are retried up to two times with exponential
    backoff; HTTP error statuses and timeouts surface as
    :class:`BackendError`, never as silent empty strings.
    """

    RETRIES = 2
    BACKOFF = 0.5

    def __init__(self, endpoint: str, api_key: str = "", model: str = "", max_in_flight: int = 4):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.model = model
        self._gate = threading.BoundedSemaphore(max_in_flight)

    def complete(self, prompt: str, params: GenerationParams) -> str:
        payload = {
            "model": self.model or params.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last: Exception | None = None
        for attempt in range(self.RETRIES + 1):
            try:
                with self._gate:
                    resp = requests.post(
                        f"{self.endpoint}/chat/completions",
                        json=payload,
                        headers=headers,
                        timeout=params.timeout,
                    )
            except requests.Timeout as exc:
                raise BackendError("timeout", f"request timed out after {params.timeout}s") from exc
            except requests.RequestException as exc:
                last = exc
                if attempt < self.RETRIES:
                    time.sleep(self.BACKOFF * 2**attempt)
                continue
            if resp.status_code >= 500 and attempt < self.RETRIES:
                time.sleep(self.BACKOFF * 2**attempt)
                continue
            if resp.status_code != 200:
                raise BackendError("http", f"backend returned HTTP {resp.status_code}", resp.status_code)
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError) as exc:
                raise BackendError("http", f"malformed completion payload: {exc}", resp.status_code) from exc
            if not isinstance(text, str) or not text:
                raise BackendError("http", "backend returned an empty completion", resp.status_code)
            return text
        raise BackendError("http", f"transport failed after retries: {last}")


def backend_from_env() -> HttpBackend:
    endpoint = os.environ.get(ENV_ENDPOINT)
    if not endpoint:
        raise BackendError("http", f"{ENV_ENDPOINT} is not set; pass --stub for offline use")
    return HttpBackend(
        endpoint,
        api_key=os.environ.get(ENV_API_KEY, ""),
        model=os.environ.get(ENV_MODEL, ""),
    )
