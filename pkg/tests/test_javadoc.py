"""Throws-clause and documentation-page parsing."""

import json

import pytest

from exchain import parse_api_page, parse_throws_clause
from exchain.errors import MalformedClause, PageStructureError

from conftest import PAGES_DIR

VECTOR_CONDITION = "if the index is out of range (index < 0 || index >= size())"


class TestParseThrowsClause:
    def test_full_clause(self):
        spec = parse_throws_clause(
            "Throws: ArrayIndexOutOfBoundsException - " + VECTOR_CONDITION
        )
        assert spec.exception == "ArrayIndexOutOfBoundsException"
        assert spec.condition == VECTOR_CONDITION
        assert spec.guardable is True

    def test_missing_condition(self):
        spec = parse_throws_clause("Throws: IOException")
        assert spec.exception == "IOException"
        assert spec.condition == ""
        assert spec.guardable is False

    def test_wrong_clause_kind(self):
        with pytest.raises(MalformedClause):
            parse_throws_clause("Returns: the element")

    def test_missing_exception_token(self):
        with pytest.raises(MalformedClause):
            parse_throws_clause("Throws:   ")
        with pytest.raises(MalformedClause):
            parse_throws_clause("Throws: not a type name - whatever")

    def test_prefix_case_insensitive_with_leading_whitespace(self):
        spec = parse_throws_clause("   throws: EmptyStackException - if this stack is empty")
        assert spec.exception == "EmptyStackException"

    def test_single_trailing_period_removed(self):
        spec = parse_throws_clause("Throws: NumberFormatException - if the string is bad.")
        assert spec.condition == "if the string is bad"
        spec = parse_throws_clause("Throws: NumberFormatException - ends oddly..")
        assert spec.condition == "ends oddly."

    def test_condition_not_starting_with_if_is_not_guardable(self):
        spec = parse_throws_clause("Throws: IOException - when the stream is closed")
        assert spec.guardable is False


def _as_dicts(entries):
    return [
        {
            "fqn": e.fqn,
            "specs": [
                {"exception": s.exception, "condition": s.condition, "guardable": s.guardable}
                for s in e.specs
            ],
        }
        for e in entries
    ]


def sidecar_pages():
    for page_path in sorted(PAGES_DIR.iterdir()):
        if page_path.suffix == ".json":
            continue
        sidecar = PAGES_DIR / (page_path.name.rsplit(".", 1)[0] + ".expected.json")
        yield page_path, sidecar


class TestParseApiPage:
    @pytest.mark.parametrize(
        "page_path,sidecar", list(sidecar_pages()), ids=lambda p: p.name
    )
    def test_matches_hand_labeled_sidecar(self, page_path, sidecar):
        entries = parse_api_page(page_path.read_text(encoding="utf-8"), page_path.name)
        assert _as_dicts(entries) == json.loads(sidecar.read_text(encoding="utf-8"))

    def test_vector_entry(self):
        page = (PAGES_DIR / "vector.txt").read_text(encoding="utf-8")
        entries = parse_api_page(page, "vector.txt")
        by_fqn = {e.fqn: e for e in entries}
        entry = by_fqn["java.util.Vector.get(int index)"]
        assert entry.simple_name == "get"
        assert entry.arity == 1
        assert entry.declaring_type == "java.util.Vector"
        assert entry.specs[0].exception == "ArrayIndexOutOfBoundsException"
        assert entry.specs[0].condition == VECTOR_CONDITION

    def test_methods_without_throws_are_dropped(self):
        page = (PAGES_DIR / "math.txt").read_text(encoding="utf-8")
        assert parse_api_page(page, "math.txt") == []

    def test_specs_attach_by_proximity(self):
        page = (PAGES_DIR / "stack.txt").read_text(encoding="utf-8")
        entries = parse_api_page(page, "stack.txt")
        assert [e.fqn for e in entries] == [
            "java.util.Stack.pop()",
            "java.util.Stack.peek()",
        ]
        for e in entries:
            assert [s.exception for s in e.specs] == ["EmptyStackException"]

    def test_page_without_declarations_raises(self):
        with pytest.raises(PageStructureError):
            parse_api_page("Just prose about nothing in particular.\nMore prose.\n", "prose")

    def test_markup_page_matches_text_page(self):
        html_entries = parse_api_page(
            (PAGES_DIR / "vector_markup.html").read_text(encoding="utf-8"), "html"
        )
        text_entries = parse_api_page(
            (PAGES_DIR / "vector.txt").read_text(encoding="utf-8"), "text"
        )
        assert _as_dicts(html_entries) == _as_dicts(text_entries)[:2]

    def test_deterministic(self):
        page = (PAGES_DIR / "scanner.txt").read_text(encoding="utf-8")
        assert _as_dicts(parse_api_page(page)) == _as_dicts(parse_api_page(page))

    def test_inline_throws_form(self):
        page = (
            "java.util.Example\n\n"
            "work\n"
            "public void work(int n)\n"
            "Throws: IllegalStateException - if closed\n"
        )
        entries = parse_api_page(page, "inline")
        assert len(entries) == 1
        assert entries[0].specs[0].exception == "IllegalStateException"
        assert entries[0].specs[0].condition == "if closed"

    def test_bare_exception_clause_without_condition(self):
        page = (
            "java.io.Example\n\n"
            "read\n"
            "public int read()\n"
            "Throws:\n"
            "IOException\n"
        )
        entries = parse_api_page(page, "bare")
        assert entries[0].specs[0].exception == "IOException"
        assert entries[0].specs[0].guardable is False

    def test_duplicate_clause_on_one_method_deduped(self):
        page = (
            "java.util.Example\n\n"
            "work\n"
            "public void work(int n)\n"
            "Throws:\n"
            "IllegalStateException - if closed\n"
            "IllegalStateException - if closed\n"
        )
        entries = parse_api_page(page, "dup")
        assert len(entries) == 1
        assert len(entries[0].specs) == 1
