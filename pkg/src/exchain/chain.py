"""The generate / check / rewrite chain with loop control and transcripts.

One run sends the rephrased task, then alternates checking the returned code
and asking for a rewrite of whatever is still unhandled, until the check is
clean, the loop cap is hit, or the (code, unhandled set) state repeats.
Conversation history is preserved across loops, and the transcript records
every exchange verbatim.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum

from .analysis import QualityLabel, UnhandledException, classify_quality, collect_unhandled
from .errors import (
    ChainAbort,
    EndpointError,
    NoRelevantApis,
    ParseError,
    ReplayMiss,
    TransportError,
    UnparseableVerdict,
)
from .kb import KnowledgeBase
from .prompts import (
    PromptMode,
    build_check_prompts,
    build_exception_prompt,
    parse_yes_no,
    rephrase_task,
)

_CLIENT_ERRORS = (ReplayMiss, TransportError, EndpointError, UnparseableVerdict)


@dataclass(frozen=True)
class CodingTask:
    id: str
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("task text must be non-empty")


class Termination(str, Enum):
    CONVERGED = "Converged"
    LOOP_CAP_REACHED = "LoopCapReached"
    OSCILLATION = "Oscillation"
    LLM_ERROR = "LlmError"


CHECKER_STATIC = "static"
CHECKER_LLM = "llm"


@dataclass(frozen=True)
class ChainConfig:
    mode: PromptMode = PromptMode.FINE
    max_loops: int = 10
    checker: str = CHECKER_STATIC
    oscillation_detection: bool = True

    def __post_init__(self):
        if self.max_loops < 1:
            raise ValueError("max_loops must be at least 1")
        if self.checker not in (CHECKER_STATIC, CHECKER_LLM):
            raise ValueError(f"unknown checker {self.checker!r}")


@dataclass(frozen=True)
class ChainResult:
    task_id: str
    mode: PromptMode
    final_code: str
    loop_count: int
    unhandled_per_loop: tuple[int, ...]
    termination: Termination
    transcript: tuple[tuple[str, str], ...]
    quality: QualityLabel | None
    error: str | None = None

    def to_record(self, transcript_ref: str | None = None) -> dict:
        record = {
            "id": self.task_id,
            "mode": self.mode.value,
            "loop_count": self.loop_count,
            "unhandled_per_loop": list(self.unhandled_per_loop),
            "termination": self.termination.value,
            "quality": self.quality.value if self.quality else None,
            "final_code": self.final_code,
            "transcript_ref": transcript_ref,
        }
        if self.error:
            record["error"] = self.error
        return record

    def to_json(self) -> str:
        """Canonical serialization of the whole result, transcript included."""
        doc = self.to_record()
        doc["transcript"] = [list(pair) for pair in self.transcript]
        return json.dumps(doc, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_record(cls, record: dict, transcript=()) -> "ChainResult":
        return cls(
            task_id=record["id"],
            mode=PromptMode(record.get("mode", PromptMode.FINE.value)),
            final_code=record.get("final_code", ""),
            loop_count=record["loop_count"],
            unhandled_per_loop=tuple(record["unhandled_per_loop"]),
            termination=Termination(record["termination"]),
            transcript=tuple(tuple(pair) for pair in transcript),
            quality=QualityLabel(record["quality"]) if record.get("quality") else None,
            error=record.get("error"),
        )


_FENCE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\n(.*?)```", re.DOTALL)


def extract_code_block(response: str) -> str:
    """First fenced code block; else the longest brace-balanced region."""
    m = _FENCE.search(response)
    if m:
        return m.group(1).strip("\n")
    best: tuple[int, int] | None = None
    depth = 0
    start = -1
    for j, ch in enumerate(response):
        if ch == "{":
            if depth == 0:
                start = j
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0 and (best is None or j - start > best[1] - best[0]):
                best = (start, j)
    if best is None:
        return response.strip()
    # Pull in the declaration line and any import/package lines right above.
    begin = response.rfind("\n", 0, best[0]) + 1
    lines = response[:begin].splitlines()
    while lines:
        candidate = lines[-1].strip()
        if candidate.startswith(("import ", "package ", "@")) or not candidate:
            begin -= len(lines[-1]) + 1
            lines.pop()
        else:
            break
    return response[begin:best[1] + 1].strip("\n")


def normalize_code(code: str) -> str:
    """Whitespace-collapsed form used by the oscillation check."""
    return " ".join(code.split())


class DeterministicChecker:
    """Checks code with the static analyzer; the reproducible default."""

    name = CHECKER_STATIC

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb

    def check(self, code: str, ask) -> list[UnhandledException]:
        return collect_unhandled(code, self.kb)


class LlmChecker:
    """Checks code by questioning the model, mirroring the original protocol.

    Sends the listing prompt, maps the returned names onto knowledge-base
    entries, then asks one Y/N question per (api, exception) pair. The whole
    exchange reuses the chain's conversation.
    """

    name = CHECKER_LLM

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb

    def check(self, code: str, ask) -> list[UnhandledException]:
        listing_prompt, _ = build_check_prompts([], self.kb)
        listing = ask(listing_prompt)
        apis = [fqn for fqn in self.kb.entries if fqn in listing]
        pairs = [(fqn, spec) for fqn in apis for spec in self.kb.lookup(fqn)]
        _, questions = build_check_prompts(apis, self.kb)
        items = []
        for (fqn, spec), question in zip(pairs, questions):
            answer = ask(question)
            if not parse_yes_no(answer):
                items.append(UnhandledException(fqn, spec.exception, spec.condition))
        return items


def _make_checker(config: ChainConfig, kb: KnowledgeBase):
    if config.checker == CHECKER_LLM:
        return LlmChecker(kb)
    return DeterministicChecker(kb)


def run_chain(task: CodingTask, kb: KnowledgeBase, client, config: ChainConfig | None = None) -> ChainResult:
    """Run one full chain for a task and return its result.

    Loop accounting: one loop is one check pass plus, when needed, one
    rewrite. A clean first check yields loop_count 1. Client failures
    terminate the run with LlmError; a code sample the static checker cannot
    parse aborts with ChainAbort, transcript retained.
    """
    config = config or ChainConfig()
    checker = _make_checker(config, kb)
    transcript: list[tuple[str, str]] = []
    messages: list[tuple[str, str]] = []

    def ask(prompt: str) -> str:
        messages.append(("user", prompt))
        response = client.chat(messages)
        messages.append(("assistant", response))
        transcript.append((prompt, response))
        return response

    def finish(code, upl, termination, error=None):
        quality = None
        if code and termination is not Termination.LLM_ERROR:
            try:
                quality = classify_quality(code, kb)
            except (NoRelevantApis, ParseError):
                quality = None
        return ChainResult(
            task_id=task.id,
            mode=config.mode,
            final_code=code,
            loop_count=len(upl),
            unhandled_per_loop=tuple(upl),
            termination=termination,
            transcript=tuple(transcript),
            quality=quality,
            error=error,
        )

    try:
        first_response = ask(rephrase_task(task))
    except _CLIENT_ERRORS as err:
        return finish("", [], Termination.LLM_ERROR, error=f"generation: {err}")
    code = extract_code_block(first_response)

    unhandled_per_loop: list[int] = []
    seen_states: set[tuple[str, frozenset]] = set()
    # The rewrite prompt needs exception items, so a direct-mode run cannot
    # rewrite; it performs the single check and stops.
    max_loops = 1 if config.mode is PromptMode.DIRECT else config.max_loops

    for loop in range(1, max_loops + 1):
        try:
            items = checker.check(code, ask)
        except ParseError as err:
            raise ChainAbort(
                f"checker could not parse generated code in loop {loop}: {err}",
                transcript=transcript, code=code, loop_index=loop,
            ) from err
        except _CLIENT_ERRORS as err:
            return finish(code, unhandled_per_loop, Termination.LLM_ERROR,
                          error=f"check in loop {loop}: {err}")
        unhandled_per_loop.append(len(items))
        if not items:
            return finish(code, unhandled_per_loop, Termination.CONVERGED)
        if config.oscillation_detection:
            state = (normalize_code(code),
                     frozenset((it.fqn, it.exception) for it in items))
            if state in seen_states:
                return finish(code, unhandled_per_loop, Termination.OSCILLATION)
            seen_states.add(state)
        if loop == max_loops:
            return finish(code, unhandled_per_loop, Termination.LOOP_CAP_REACHED)
        rewrite_prompt = build_exception_prompt(config.mode, items)
        try:
            response = ask(rewrite_prompt)
        except _CLIENT_ERRORS as err:
            return finish(code, unhandled_per_loop, Termination.LLM_ERROR,
                          error=f"rewrite in loop {loop}: {err}")
        code = extract_code_block(response)

    raise AssertionError("unreachable: loop always terminates inside the for body")
