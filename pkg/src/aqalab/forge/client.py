"""LLM clients and the bounded-parallel generation driver.

The HTTP client speaks a chat-completions wire format. The mock client
serves canned transcripts keyed by caption so the whole pipeline runs
offline. The driver fans captions out over a thread pool, retries transient
failures with exponential backoff, and appends every outcome to a JSONL log
keyed by caption id - re-running skips finished captions, which makes the
pipeline resumable and idempotent.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import requests

from ..errors import ConfigError, MalformedResponse, RateLimited, TransportError
from .templates import PromptTemplate, render_prompt


@dataclass
class ClientConfig:
    endpoint: str = ""
    model: str = "mock"
    auth_env_var: str = "AQALAB_LLM_TOKEN"  # name of the env var holding the token
    max_concurrency: int = 4
    timeout_s: float = 30.0
    max_attempts: int = 3
    backoff_s: float = 0.5

    def validate(self) -> None:
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")


class HttpLLMClient:
    """Minimal chat-completions client over requests."""

    def __init__(self, config: ClientConfig):
        config.validate()
        if not config.endpoint:
            raise ConfigError("HttpLLMClient needs an endpoint URL")
        self.config = config

    def complete(self, system: str, user: str) -> str:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.auth_env_var, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        try:
            resp = requests.post(self.config.endpoint, json=body, headers=headers,
                                 timeout=self.config.timeout_s)
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code == 429:
            raise RateLimited(f"rate limited by {self.config.endpoint}")
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected completion payload: {exc}") from exc
        if not isinstance(text, str) or not text.strip():
            raise MalformedResponse("empty completion text")
        return text


class MockLLMClient:
    """Offline stand-in: maps the caption found in the user message to a
    canned transcript. Scripted exceptions (consumed first) let tests drive
    the retry path; an in-flight counter exposes peak concurrency."""

    def __init__(self, transcripts: dict[str, str],
                 default: str | None = None,
                 scripted_failures: list[Exception] | None = None,
                 latency_s: float = 0.0):
        self.transcripts = dict(transcripts)
        self.default = default
        self.scripted_failures = list(scripted_failures or [])
        self.latency_s = latency_s
        self.calls = 0
        self.peak_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    @staticmethod
    def _caption_from(user: str) -> str:
        for line in user.splitlines():
            if line.startswith("Caption: "):
                return line[len("Caption: "):]
        return ""

    def complete(self, system: str, user: str) -> str:
        with self._lock:
            self.calls += 1
            self._in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self._in_flight)
            failure = self.scripted_failures.pop(0) if self.scripted_failures else None
        try:
            if self.latency_s:
                time.sleep(self.latency_s)
            if failure is not None:
                raise failure
            caption = self._caption_from(user)
            text = self.transcripts.get(caption, self.default)
            if text is None:
                raise MalformedResponse(f"mock has no transcript for {caption!r}")
            return text
        finally:
            with self._lock:
                self._in_flight -= 1


def call_llm(client, system: str, user: str, config: ClientConfig,
             attempt_log: list | None = None) -> str:
    """One completion with retries. Transient failures (transport, rate
    limit) back off exponentially; malformed payloads fail immediately."""
    config.validate()
    last: Exception | None = None
    for attempt in range(config.max_attempts):
        try:
            text = client.complete(system, user)
            if attempt_log is not None:
                attempt_log.append(("ok", attempt + 1))
            return text
        except (TransportError, RateLimited) as exc:
            last = exc
            if attempt_log is not None:
                attempt_log.append(("retryable", attempt + 1))
            if attempt + 1 < config.max_attempts:
                time.sleep(config.backoff_s * (2 ** attempt))
    raise last


@dataclass
class GenerationOutcome:
    caption_id: str
    status: str           # {ok, failed}
    transcript: str = ""
    error: str = ""
    attempts: int = 0


def load_generation_log(log_path: str) -> dict[str, GenerationOutcome]:
    """Latest outcome per caption id from an append-only JSONL log."""
    outcomes: dict[str, GenerationOutcome] = {}
    path = Path(log_path)
    if not path.exists():
        return outcomes
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        outcomes[rec["caption_id"]] = GenerationOutcome(
            caption_id=rec["caption_id"], status=rec["status"],
            transcript=rec.get("transcript", ""), error=rec.get("error", ""),
            attempts=rec.get("attempts", 0))
    return outcomes


def run_generation(captions: list[tuple[str, str]], template: PromptTemplate,
                   client, config: ClientConfig,
                   log_path: str) -> dict[str, GenerationOutcome]:
    """Generate transcripts for (caption_id, caption) pairs.

    Captions already marked ok in the log are not re-queried. Outcomes are
    appended to the log as they finish (single writer, lock-guarded); the
    returned mapping covers every requested caption id.
    """
    config.validate()
    done = load_generation_log(log_path)
    results = {cid: done[cid] for cid, _ in captions
               if cid in done and done[cid].status == "ok"}
    todo = [(cid, text) for cid, text in captions if cid not in results]

    write_lock = threading.Lock()
    log_file = open(log_path, "a", encoding="utf-8")

    def one(cid: str, caption: str) -> GenerationOutcome:
        attempts: list = []
        system, user = render_prompt(template, caption)
        try:
            transcript = call_llm(client, system, user, config, attempts)
            outcome = GenerationOutcome(cid, "ok", transcript=transcript,
                                        attempts=len(attempts))
        except Exception as exc:
            outcome = GenerationOutcome(cid, "failed", error=f"{type(exc).__name__}: {exc}",
                                        attempts=len(attempts))
        with write_lock:
            log_file.write(json.dumps({
                "caption_id": outcome.caption_id, "status": outcome.status,
                "transcript": outcome.transcript, "error": outcome.error,
                "attempts": outcome.attempts,
                "data_type": template.data_type, "kind": template.kind,
            }) + "\n")
            log_file.flush()
        return outcome

    try:
        with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
            for outcome in pool.map(lambda ct: one(*ct), todo):
                results[outcome.caption_id] = outcome
    finally:
        log_file.close()
    return results
