#!/usr/bin/env python3
"""Regenerate the checked-in walkthrough cassette.

Drives a full chain run plus one quality-matrix pass per prompt mode against
a scripted transport, so the cassette holds every request the test suite
replays. Timestamps are pinned and duplicate keys dropped to keep the file
byte-stable. Run from the repository root:

    python scripts/record_fixture_cassettes.py
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from exchain import (  # noqa: E402
    CassetteEntry,
    Cassette,
    ChainConfig,
    ClientMode,
    CodingTask,
    LlmClient,
    PromptMode,
    build_knowledge_base,
    parse_api_page,
    quality_matrix,
    run_chain,
)
from exchain.prompts import GENERAL_EXCEPTION_PROMPT  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
CASSETTE_PATH = FIXTURES / "cassettes" / "walkthrough.jsonl"
PINNED_STAMP = "2026-08-10T00:00:00Z"

TASK = CodingTask(id="swap-vector", text="How to swap two elements in a vector")


def _wrap(prose: str, code_name: str) -> str:
    code = (FIXTURES / "java" / code_name).read_text(encoding="utf-8").rstrip("\n")
    return f"{prose}\n\n```java\n{code}\n```\n"


RESPONSES = {
    "generate": _wrap(
        "Here is a Java method that swaps two elements in a vector:",
        "swap_unhandled.java",
    ),
    "general": _wrap(
        "Good point. Here is a version that handles potential exceptions:",
        "swap_catch_supertype.java",
    ),
    "coarse": _wrap(
        "Here is the method with ArrayIndexOutOfBoundsException handled:",
        "swap_catch_exact.java",
    ),
    "fine": _wrap(
        "Here is the method with the index conditions checked explicitly:",
        "swap_guarded.java",
    ),
}


def scripted_transport(request) -> str:
    last = request.messages[-1].content
    if last.startswith("Please write a Java method to swap"):
        return RESPONSES["generate"]
    if last == GENERAL_EXCEPTION_PROMPT:
        return RESPONSES["general"]
    if last.startswith("Please pay attention to ArrayIndexOutOfBoundsException"):
        return RESPONSES["coarse"]
    if last.startswith("Please check if the index is out of range"):
        return RESPONSES["fine"]
    raise AssertionError(f"no scripted response for prompt: {last[:100]!r}")


def build_kb():
    pages_dir = FIXTURES / "pages"
    pages = []
    for path in sorted(pages_dir.iterdir()):
        if path.suffix == ".json":
            continue
        pages.append((path.name, parse_api_page(path.read_text(encoding="utf-8"), path.name)))
    return build_knowledge_base(pages)


def main():
    kb = build_kb()
    scratch = CASSETTE_PATH.with_suffix(".tmp.jsonl")
    if scratch.exists():
        scratch.unlink()
    client = LlmClient(mode=ClientMode.RECORD, cassette=scratch, transport=scripted_transport)

    result = run_chain(TASK, kb, client, ChainConfig(mode=PromptMode.FINE))
    assert result.loop_count == 2, result
    assert result.unhandled_per_loop == (2, 0), result

    matrix = quality_matrix([TASK], kb, client, list(PromptMode))
    print("matrix:", {m.value: dict(c) for m, c in matrix.counts.items()})

    recorded = Cassette(scratch)
    seen = set()
    lines = []
    for entry in recorded.entries:
        if entry.key in seen:
            continue
        seen.add(entry.key)
        pinned = CassetteEntry(entry.key, entry.request, entry.response, PINNED_STAMP)
        lines.append(pinned.to_line())
    CASSETTE_PATH.write_text("\n".join(lines) + "\n", encoding="utf-8")
    scratch.unlink()
    print(f"wrote {CASSETTE_PATH} with {len(lines)} entries")


if __name__ == "__main__":
    main()
