"""Shared fixtures: the fixture knowledge base, replay clients, and a
transport that trips on any attempted network call."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from exchain import (
    ClientMode,
    CodingTask,
    LlmClient,
    build_knowledge_base,
    parse_api_page,
)

FIXTURES = Path(__file__).parent / "fixtures"
PAGES_DIR = FIXTURES / "pages"
JAVA_DIR = FIXTURES / "java"
CASSETTES_DIR = FIXTURES / "cassettes"
CORPUS_PATH = FIXTURES / "corpus" / "tasks.jsonl"

WALKTHROUGH_TASK = CodingTask(id="swap-vector", text="How to swap two elements in a vector")


@pytest.fixture(autouse=True)
def _no_ambient_endpoint(monkeypatch):
    """Tests must never pick up a live endpoint from the environment."""
    for var in ("EXCHAIN_API_BASE", "EXCHAIN_API_KEY", "EXCHAIN_MODEL"):
        monkeypatch.delenv(var, raising=False)


def fail_transport(request):
    raise AssertionError(f"network call attempted for model {request.model!r}")


@pytest.fixture
def failing_transport():
    return fail_transport


def load_fixture_pages():
    pages = []
    for path in sorted(PAGES_DIR.iterdir()):
        if path.suffix == ".json":
            continue
        pages.append((path.name, parse_api_page(path.read_text(encoding="utf-8"), path.name)))
    return pages


@pytest.fixture(scope="session")
def kb():
    return build_knowledge_base(load_fixture_pages())


@pytest.fixture(scope="session")
def kb_file(tmp_path_factory):
    from exchain import kb_save

    path = tmp_path_factory.mktemp("kb") / "kb.json"
    kb_save(build_knowledge_base(load_fixture_pages()), path)
    return path


@pytest.fixture
def replay_client():
    return LlmClient(
        mode=ClientMode.REPLAY_STRICT,
        cassette=CASSETTES_DIR / "walkthrough.jsonl",
        transport=fail_transport,
    )


def java_fixture(name: str) -> str:
    return (JAVA_DIR / name).read_text(encoding="utf-8")
