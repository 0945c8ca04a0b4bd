"""Chat-completion client: retries, reasoning capture, tool loops, and record/replay cassettes.

A cassette in Replay mode answers every request from disk and never touches
the transport, which makes whole pipeline runs deterministic and network-free.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

DEFAULT_SYSTEM_TEXT = "You are a helpful assistant"
DEFAULT_MAX_RETRIES = 8
DEFAULT_RETRY_DELAY = 10.0
DEFAULT_MAX_TOOL_CALLS = 8

_TOOL_CALL_RE = re.compile(r"^TOOL:\s*(\S+)\s*$", re.MULTILINE)
TOOL_RESULT_PREFIX = "TOOL_RESULT:"


class RetriesExhausted(RuntimeError):
    def __init__(self, last_error: Exception):
        self.last_error = last_error
        super().__init__(f"gave up after repeated transport errors: {last_error}")


class ReplayMiss(KeyError):
    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(f"no cassette entry for fingerprint {fingerprint}")


class CassetteMode(str, Enum):
    RECORD = "record"
    REPLAY = "replay"
    PASSTHROUGH = "passthrough"


@dataclass(frozen=True)
class TransportReply:
    content: str
    reasoning: str | None = None


@dataclass
class ToolExchange:
    query: str
    result: str


@dataclass
class GenerationRecord:
    prompt: str
    system_text: str
    content: str
    model_id: str
    strategy: str = "Baseline"
    reasoning: str | None = None
    attempt_count: int = 1
    tool_transcript: list[ToolExchange] = field(default_factory=list)
    wall_time: float = 0.0
    tool_budget_exhausted: bool = False


def request_fingerprint(model_id: str, system_text: str, prompt: str, transcript=()) -> str:
    payload = json.dumps(
        {
            "model": model_id,
            "system": system_text,
            "prompt": prompt,
            "transcript": [[t.query, t.result] for t in transcript],
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Cassette:
    """Ordered fingerprint -> reply store; replay consumes FIFO and sticks at the last entry."""

    def __init__(self, mode: CassetteMode = CassetteMode.PASSTHROUGH):
        self.mode = mode
        self._entries: list[tuple[str, dict]] = []
        self._queues: dict[str, deque] = {}
        self._last: dict[str, dict] = {}
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path, mode: CassetteMode = CassetteMode.REPLAY) -> "Cassette":
        cassette = cls(mode)
        with open(path, encoding="utf-8") as fd:
            for line in fd:
                if not line.strip():
                    continue
                obj = json.loads(line)
                cassette._store(obj["fingerprint"], obj["reply"])
        return cassette

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fw:
            for fingerprint, reply in self._entries:
                fw.write(json.dumps({"fingerprint": fingerprint, "reply": reply},
                                    ensure_ascii=False) + "\n")

    def _store(self, fingerprint: str, reply: dict) -> None:
        self._entries.append((fingerprint, reply))
        self._queues.setdefault(fingerprint, deque()).append(reply)
        self._last[fingerprint] = reply

    def record(self, fingerprint: str, reply: dict) -> None:
        with self._lock:
            self._store(fingerprint, reply)

    def replay(self, fingerprint: str) -> dict:
        with self._lock:
            if fingerprint not in self._last:
                raise ReplayMiss(fingerprint)
            queue = self._queues[fingerprint]
            if queue:
                return queue.popleft()
            return self._last[fingerprint]

    def __len__(self) -> int:
        return len(self._entries)


class ScriptedTransport:
    """Test transport: a callable or a fixed queue of replies; raisable entries simulate faults."""

    def __init__(self, replies=None, responder=None):
        self._queue = deque(replies or [])
        self._responder = responder
        self.calls = 0

    def __call__(self, messages, model_id: str) -> TransportReply:
        self.calls += 1
        if self._responder is not None:
            return self._responder(messages, model_id)
        if not self._queue:
            raise RuntimeError("scripted transport has no replies left")
        item = self._queue.popleft()
        if isinstance(item, Exception):
            raise item
        return item


class PanickingTransport:
    """Transport that must never be reached; proves replay runs make no network calls."""

    def __call__(self, messages, model_id: str) -> TransportReply:
        raise AssertionError("transport invoked during replay")


class HttpTransport:
    """Minimal chat-completions client for OpenAI-style endpoints."""

    def __init__(self, base_url: str, api_key_env: str = "OPENAI_API_KEY", timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout = timeout

    def __call__(self, messages, model_id: str) -> TransportReply:
        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        response = requests.post(
            f"{self.base_url}/chat/completions",
            json={"model": model_id, "messages": messages, "stream": False},
            headers=headers,
            timeout=self.timeout,
        )
        response.raise_for_status()
        message = response.json()["choices"][0]["message"]
        return TransportReply(content=message.get("content") or "",
                              reasoning=message.get("reasoning_content"))


class Gateway:
    """Shared entry point for all strategies; per-request state stays local to the call."""

    def __init__(self, transport=None, model_id: str = "deepseek-reasoner",
                 cassette: Cassette | None = None,
                 max_retries: int = DEFAULT_MAX_RETRIES,
                 retry_delay: float = DEFAULT_RETRY_DELAY,
                 sleep=time.sleep):
        self.transport = transport
        self.model_id = model_id
        self.cassette = cassette
        self.max_retries = max_retries
        self.retry_delay = retry_delay
        self._sleep = sleep

    @property
    def replaying(self) -> bool:
        return self.cassette is not None and self.cassette.mode == CassetteMode.REPLAY

    def _turn(self, messages, fingerprint: str) -> dict:
        if self.replaying:
            return self.cassette.replay(fingerprint)
        if self.transport is None:
            raise ValueError("no transport configured and cassette is not in replay mode")
        attempts = 0
        while True:
            attempts += 1
            started = time.monotonic()
            try:
                reply = self.transport(messages, self.model_id)
            except Exception as exc:  # noqa: BLE001 - any transport/API error is retryable
                if attempts > self.max_retries:
                    raise RetriesExhausted(exc) from exc
                self._sleep(self.retry_delay)
                continue
            turn = {
                "content": reply.content,
                "reasoning": reply.reasoning,
                "attempt_count": attempts,
                "wall_time": time.monotonic() - started,
            }
            if self.cassette is not None and self.cassette.mode == CassetteMode.RECORD:
                self.cassette.record(fingerprint, turn)
            return turn

    def complete(self, prompt: str, system_text: str = DEFAULT_SYSTEM_TEXT,
                 strategy: str = "Baseline") -> GenerationRecord:
        """Single request/response exchange carrying both answer and reasoning channels."""
        messages = [
            {"role": "system", "content": system_text},
            {"role": "user", "content": prompt},
        ]
        fingerprint = request_fingerprint(self.model_id, system_text, prompt)
        turn = self._turn(messages, fingerprint)
        return GenerationRecord(
            prompt=prompt,
            system_text=system_text,
            content=turn["content"],
            model_id=self.model_id,
            strategy=strategy,
            reasoning=turn.get("reasoning"),
            attempt_count=turn.get("attempt_count", 1),
            wall_time=turn.get("wall_time", 0.0),
        )

    def complete_with_tools(self, prompt: str, tool_handler,
                            system_text: str = DEFAULT_SYSTEM_TEXT,
                            strategy: str = "ToolCalling",
                            max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS) -> GenerationRecord:
        """Alternate model turns and tool turns until the model stops asking or the budget ends.

        Tool requests are a single line ``TOOL: <name>``; the reply is injected
        as a user turn prefixed ``TOOL_RESULT:``.  Exceeding the budget flags
        the record instead of failing it.
        """
        messages = [
            {"role": "system", "content": system_text},
            {"role": "user", "content": prompt},
        ]
        transcript: list[ToolExchange] = []
        budget_exhausted = False
        attempts = 1
        wall_time = 0.0
        while True:
            fingerprint = request_fingerprint(self.model_id, system_text, prompt, transcript)
            turn = self._turn(messages, fingerprint)
            attempts = turn.get("attempt_count", 1)
            wall_time += turn.get("wall_time", 0.0)
            content = turn["content"]
            call = _TOOL_CALL_RE.search(content)
            if call is None:
                break
            if len(transcript) >= max_tool_calls:
                budget_exhausted = True
                break
            name = call.group(1)
            result = tool_handler(name)
            transcript.append(ToolExchange(name, result))
            messages.append({"role": "assistant", "content": content})
            messages.append({"role": "user", "content": f"{TOOL_RESULT_PREFIX} {result}"})
        return GenerationRecord(
            prompt=prompt,
            system_text=system_text,
            content=content,
            model_id=self.model_id,
            strategy=strategy,
            reasoning=turn.get("reasoning"),
            attempt_count=attempts,
            tool_transcript=transcript,
            wall_time=wall_time,
            tool_budget_exhausted=budget_exhausted,
        )
