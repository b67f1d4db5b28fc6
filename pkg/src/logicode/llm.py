"""Chat-completion backends: live HTTP, cassette replay, and an oracle stub.

Requests serialize canonically (sorted keys) so their hash is stable; a
cassette maps request hashes to recorded responses, consumed in order when
the same request repeats. Replay never falls through to the network.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import LogicodeError

ENV_API_KEY = "LOGICODE_API_KEY"
ENV_API_BASE = "LOGICODE_API_BASE"

_JUDGE_MARKER = "must be exactly MATCH or MISMATCH"


class TransportError(LogicodeError):
    """Network failure after retries."""


class AuthError(LogicodeError):
    """The endpoint rejected the credential."""


class CassetteMiss(LogicodeError):
    """Replay saw a request that was never recorded (or is exhausted)."""

    def __init__(self, request_hash: str):
        super().__init__(f"no recorded response for request {request_hash}")
        self.request_hash = request_hash


@dataclass(frozen=True)
class LlmRequest:
    model: str
    messages: tuple[dict, ...]
    temperature: float = 0.0
    max_tokens: int = 2048

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "messages": [dict(m) for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class LlmResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "content": self.content,
            "finish_reason": self.finish_reason,
            "usage": dict(self.usage),
        }


def user_request(prompt: str, model: str, temperature: float, max_tokens: int = 2048) -> LlmRequest:
    return LlmRequest(
        model=model,
        messages=({"role": "user", "content": prompt},),
        temperature=temperature,
        max_tokens=max_tokens,
    )


def canonical_request(request: LlmRequest) -> str:
    return json.dumps(request.to_dict(), sort_keys=True, separators=(",", ":"))


def request_hash(request: LlmRequest) -> str:
    return hashlib.sha256(canonical_request(request).encode("utf-8")).hexdigest()


def load_cassette(path: str | Path) -> dict[str, list[dict]]:
    entries: dict[str, list[dict]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogicodeError(f"{path}:{lineno}: invalid cassette line ({exc})") from exc
        entries.setdefault(doc["hash"], []).append(doc["response"])
    return entries


def append_cassette(path: str | Path, request: LlmRequest, response: LlmResponse) -> None:
    line = json.dumps(
        {
            "hash": request_hash(request),
            "request": request.to_dict(),
            "response": response.to_dict(),
        },
        sort_keys=True,
    )
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")


class ReplayBackend:
    """Fully offline: answers only from a recorded cassette."""

    def __init__(self, cassette_path: str | Path):
        path = Path(cassette_path)
        if not path.is_file():
            raise CassetteMiss(f"<cassette file missing: {path}>")
        self._entries = load_cassette(path)
        self._lock = threading.Lock()
        self.backend_id = f"replay:{_file_digest(path)}"

    def complete(self, request: LlmRequest) -> LlmResponse:
        h = request_hash(request)
        with self._lock:
            queue = self._entries.get(h)
            if not queue:
                raise CassetteMiss(h)
            doc = queue.pop(0)
        return LlmResponse(
            content=doc["content"],
            finish_reason=doc.get("finish_reason", "stop"),
            usage=doc.get("usage", {}),
        )


class OracleStubBackend:
    """Answers generation requests with the deterministic rule compiler's
    program, and judge requests by exact reason-set comparison."""

    backend_id = "oracle"

    def __init__(self, ruleset=None):
        self._program_text = None
        if ruleset is not None:
            from .checklang import compile_reference, pretty_print

            self._program_text = pretty_print(compile_reference(ruleset))

    def complete(self, request: LlmRequest) -> LlmResponse:
        prompt = request.messages[-1].get("content", "") if request.messages else ""
        if _JUDGE_MARKER in prompt:
            return LlmResponse(content=_judge_stub_verdict(prompt))
        if self._program_text is None:
            raise LogicodeError("oracle stub was configured without a rule set")
        return LlmResponse(content=f"```\n{self._program_text}```\n")


def _judge_stub_verdict(prompt: str) -> str:
    predicted = _bullet_section(prompt, "Predicted reasons:")
    truth = _bullet_section(prompt, "Ground-truth reasons:")
    return "MATCH" if sorted(predicted) == sorted(truth) else "MISMATCH"


def _bullet_section(prompt: str, heading: str) -> list[str]:
    lines = prompt.splitlines()
    items: list[str] = []
    try:
        start = lines.index(heading) + 1
    except ValueError:
        return items
    for line in lines[start:]:
        if line.startswith("- "):
            items.append(line[2:])
        elif line.strip() == "":
            break
        else:
            break
    return [i for i in items if i != "(none)"]


class LiveBackend:
    """OpenAI-compatible chat-completions client with retry and recording."""

    def __init__(
        self,
        base_url: str,
        api_key: str,
        record_path: str | Path | None = None,
        max_in_flight: int = 4,
        timeout: float = 60.0,
        max_attempts: int = 3,
    ):
        self.base_url = base_url.rstrip("/")
        self._api_key = api_key
        self._record_path = Path(record_path) if record_path else None
        self._semaphore = threading.Semaphore(max_in_flight)
        self._record_lock = threading.Lock()
        self._timeout = timeout
        self._max_attempts = max_attempts
        self.backend_id = "live"

    def complete(self, request: LlmRequest) -> LlmResponse:
        import requests

        url = f"{self.base_url}/chat/completions"
        headers = {
            "Authorization": f"Bearer {self._api_key}",
            "Content-Type": "application/json",
        }
        last_error: Exception | None = None
        for attempt in range(self._max_attempts):
            if attempt:
                time.sleep(0.5 * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    resp = requests.post(
                        url, headers=headers, json=request.to_dict(), timeout=self._timeout
                    )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credential (HTTP {resp.status_code})")
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            if resp.status_code != 200:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                doc = resp.json()
                choice = doc["choices"][0]
                response = LlmResponse(
                    content=choice["message"]["content"],
                    finish_reason=choice.get("finish_reason", "stop"),
                    usage=doc.get("usage", {}),
                )
            except (KeyError, IndexError, ValueError) as exc:
                raise TransportError(f"malformed completion payload: {exc}") from exc
            if self._record_path is not None:
                with self._record_lock:
                    append_cassette(self._record_path, request, response)
            return response
        raise TransportError(f"request failed after {self._max_attempts} attempts: {last_error}")


def live_backend_from_env(record_path: str | Path | None = None) -> LiveBackend:
    api_key = os.environ.get(ENV_API_KEY)
    base = os.environ.get(ENV_API_BASE, "https://api.openai.com/v1")
    if not api_key:
        raise AuthError(f"{ENV_API_KEY} is not set")
    return LiveBackend(base_url=base, api_key=api_key, record_path=record_path)


def complete(backend, request: LlmRequest) -> LlmResponse:
    """Single entry point used by generation and judging."""
    return backend.complete(request)


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:12]
