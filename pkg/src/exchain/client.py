"""Chat-completion client with content-addressed record/replay cassettes.

Requests are keyed by a digest of their canonical serialization, so a
cassette replays byte-identical responses across processes and platforms.
Replay modes perform no network I/O at all; live access reads the endpoint
base URL and credential from the environment, never from files.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .errors import EndpointError, ReplayMiss, TransportError

ENV_API_BASE = "EXCHAIN_API_BASE"
ENV_API_KEY = "EXCHAIN_API_KEY"
ENV_MODEL = "EXCHAIN_MODEL"

DEFAULT_MODEL = "gpt-3.5-turbo"

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a request needs at least one message")
        for prev, cur in zip(self.messages, self.messages[1:]):
            if prev.role == "assistant" and cur.role == "assistant":
                raise ValueError("two consecutive assistant messages")
        object.__setattr__(self, "temperature", float(self.temperature))

    @classmethod
    def from_pairs(cls, messages: Iterable[tuple[str, str]], **kwargs) -> "ChatRequest":
        return cls(tuple(ChatMessage(role, content) for role, content in messages), **kwargs)


def canonical_key(request: ChatRequest) -> str:
    """Stable digest of the request content; timestamps play no part."""
    payload = {
        "model": request.model,
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CassetteEntry:
    key: str
    request: ChatRequest
    response: str
    recorded_at: str

    def to_line(self) -> str:
        # Field order is fixed so cassette diffs stay byte-stable.
        doc = {
            "key": self.key,
            "recorded_at": self.recorded_at,
            "request": {
                "model": self.request.model,
                "temperature": self.request.temperature,
                "max_tokens": self.request.max_tokens,
                "messages": [
                    {"role": m.role, "content": m.content} for m in self.request.messages
                ],
            },
            "response": self.response,
        }
        return json.dumps(doc, ensure_ascii=False)

    @classmethod
    def from_line(cls, line: str) -> "CassetteEntry":
        doc = json.loads(line)
        request = ChatRequest(
            messages=tuple(
                ChatMessage(m["role"], m["content"]) for m in doc["request"]["messages"]
            ),
            model=doc["request"]["model"],
            temperature=doc["request"]["temperature"],
            max_tokens=doc["request"].get("max_tokens"),
        )
        return cls(
            key=doc["key"],
            request=request,
            response=doc["response"],
            recorded_at=doc.get("recorded_at", ""),
        )


class Cassette:
    """Append-only store of request/response pairs, one JSON record per line.

    Appends are serialized through a lock; lookups read an immutable snapshot
    that is swapped after each append. On duplicate keys the latest record
    wins, so re-recording refreshes a response without rewriting history.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: tuple[CassetteEntry, ...] = ()
        self._index: dict[str, CassetteEntry] = {}
        if self.path.exists():
            entries = [
                CassetteEntry.from_line(line)
                for line in self.path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
            self._entries = tuple(entries)
            self._index = {e.key: e for e in entries}

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[CassetteEntry, ...]:
        return self._entries

    def get(self, key: str) -> CassetteEntry | None:
        return self._index.get(key)

    def append(self, entry: CassetteEntry) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(entry.to_line() + "\n")
            self._entries = self._entries + (entry,)
            index = dict(self._index)
            index[entry.key] = entry
            self._index = index


class ClientMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"
    REPLAY_STRICT = "replay-strict"


def http_transport(request: ChatRequest) -> str:
    """POST to the configured chat-completion endpoint and return the content."""
    base = os.environ.get(ENV_API_BASE)
    if not base:
        raise TransportError(f"endpoint not configured; set {ENV_API_BASE}")
    import requests  # deferred so replay-only use never needs it

    headers = {"Content-Type": "application/json"}
    credential = os.environ.get(ENV_API_KEY)
    if credential:
        headers["Authorization"] = f"Bearer {credential}"
    payload = {
        "model": request.model,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "temperature": request.temperature,
    }
    if request.max_tokens is not None:
        payload["max_tokens"] = request.max_tokens
    try:
        resp = requests.post(
            base.rstrip("/") + "/chat/completions",
            json=payload, headers=headers, timeout=120,
        )
    except requests.RequestException as err:
        raise TransportError(str(err)) from err
    if resp.status_code >= 400:
        raise EndpointError(resp.status_code, resp.text[:500])
    try:
        return resp.json()["choices"][0]["message"]["content"]
    except (KeyError, IndexError, ValueError) as err:
        raise EndpointError(resp.status_code, f"malformed body: {resp.text[:200]}") from err


class LlmClient:
    """Uniform chat client; the mode decides between endpoint and cassette.

    Safe to share across concurrent chains: cassette appends are serialized
    and replay lookups are reads of an immutable snapshot.
    """

    def __init__(
        self,
        mode: ClientMode | str = ClientMode.REPLAY_STRICT,
        cassette: Cassette | str | Path | None = None,
        transport: Callable[[ChatRequest], str] | None = None,
        model: str | None = None,
        temperature: float = 0.0,
        max_tokens: int | None = None,
        fall_through: bool = False,
        max_retries: int = 3,
        retry_delay: float = 0.25,
    ):
        self.mode = ClientMode(mode)
        if cassette is not None and not isinstance(cassette, Cassette):
            cassette = Cassette(cassette)
        self.cassette = cassette
        self.transport = transport
        self.model = model or os.environ.get(ENV_MODEL, DEFAULT_MODEL)
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.fall_through = fall_through
        self.max_retries = max_retries
        self.retry_delay = retry_delay

    def chat(self, messages: Iterable[tuple[str, str]]) -> str:
        """Complete a conversation given (role, content) pairs."""
        request = ChatRequest.from_pairs(
            messages, model=self.model,
            temperature=self.temperature, max_tokens=self.max_tokens,
        )
        return self.complete(request)

    def complete(self, request: ChatRequest) -> str:
        key = canonical_key(request)
        if self.mode in (ClientMode.REPLAY, ClientMode.REPLAY_STRICT):
            hit = self.cassette.get(key) if self.cassette is not None else None
            if hit is not None:
                return hit.response
            if self.mode is ClientMode.REPLAY_STRICT or not self.fall_through:
                raise ReplayMiss(key)
            return self._live(request)
        response = self._live(request)
        if self.mode is ClientMode.RECORD:
            if self.cassette is None:
                raise TransportError("record mode requires a cassette path")
            stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            self.cassette.append(CassetteEntry(key, request, response, stamp))
        return response

    def _live(self, request: ChatRequest) -> str:
        transport = self.transport or http_transport
        attempts = 0
        while True:
            try:
                return transport(request)
            except TransportError as err:
                attempts += 1
                if attempts > self.max_retries:
                    raise TransportError(
                        f"giving up after {attempts} attempts: {err}", retries=attempts
                    ) from err
            except EndpointError as err:
                if err.status not in (429,) and err.status < 500:
                    raise
                attempts += 1
                if attempts > self.max_retries:
                    raise
            if self.retry_delay:
                time.sleep(min(2.0, self.retry_delay * (2 ** attempts)))
