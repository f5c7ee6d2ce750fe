"""Prompt templates must reproduce the documented wording byte-for-byte."""

import pytest

from exchain import (
    GENERAL_EXCEPTION_PROMPT,
    PromptMode,
    UnhandledException,
    build_check_prompts,
    build_exception_prompt,
    rephrase_task,
)
from exchain.errors import EmptyItems, UnparseableVerdict
from exchain.prompts import good_practice_prompt, parse_yes_no

GET_FQN = "java.util.Vector.get(int index)"
SET_FQN = "java.util.Vector.set(int index, E element)"
CONDITION = "if the index is out of range (index < 0 || index >= size())"

VECTOR_ITEMS = [
    UnhandledException(GET_FQN, "java.lang.ArrayIndexOutOfBoundsException", CONDITION),
    UnhandledException(SET_FQN, "java.lang.ArrayIndexOutOfBoundsException", CONDITION),
]

FINE_GOLDEN = (
    "Please check if the index is out of range (index < 0 || index >= size()) "
    "for java.util.Vector.get(int index), otherwise throw ArrayIndexOutOfBoundsException. "
    "Please check if the index is out of range (index < 0 || index >= size()) "
    "for java.util.Vector.set(int index, E element), otherwise throw ArrayIndexOutOfBoundsException"
)


class TestRephraseTask:
    def test_how_to_form(self):
        assert rephrase_task("How to swap two elements in a vector") == (
            "Please write a Java method to swap two elements in a vector"
        )

    def test_template_form_unchanged(self):
        text = "Please write a Java method to X"
        assert rephrase_task(text) == text

    def test_plain_description_prefixed(self):
        assert rephrase_task(
            "removes the char at the specified position in this sequence"
        ) == (
            "Please write a Java method that removes the char at the "
            "specified position in this sequence"
        )

    def test_case_insensitive_how_to(self):
        assert rephrase_task("how TO reverse a string") == (
            "Please write a Java method to reverse a string"
        )


class TestBuildExceptionPrompt:
    def test_general_verbatim(self):
        assert build_exception_prompt(PromptMode.GENERAL, []) == (
            "Please pay attention to potential exceptions."
        )
        assert GENERAL_EXCEPTION_PROMPT == "Please pay attention to potential exceptions."

    def test_coarse_single_exception(self):
        prompt = build_exception_prompt(PromptMode.COARSE, VECTOR_ITEMS[:1])
        assert prompt == "Please pay attention to ArrayIndexOutOfBoundsException."

    def test_coarse_distinct_exceptions_once_each(self):
        items = VECTOR_ITEMS + [
            UnhandledException("java.util.Stack.pop()", "java.util.EmptyStackException",
                               "if this stack is empty"),
        ]
        prompt = build_exception_prompt(PromptMode.COARSE, items)
        assert prompt == (
            "Please pay attention to ArrayIndexOutOfBoundsException. "
            "Please pay attention to EmptyStackException."
        )

    def test_fine_golden_bytes(self):
        assert build_exception_prompt(PromptMode.FINE, VECTOR_ITEMS) == FINE_GOLDEN

    def test_fine_preserves_input_order(self):
        flipped = build_exception_prompt(PromptMode.FINE, VECTOR_ITEMS[::-1])
        assert flipped.startswith(
            "Please check if the index is out of range (index < 0 || index >= size()) "
            "for java.util.Vector.set(int index, E element)"
        )

    def test_empty_items_rejected_for_coarse_and_fine(self):
        for mode in (PromptMode.COARSE, PromptMode.FINE):
            with pytest.raises(EmptyItems):
                build_exception_prompt(mode, [])

    def test_direct_mode_invalid(self):
        with pytest.raises(ValueError):
            build_exception_prompt(PromptMode.DIRECT, VECTOR_ITEMS)


class TestBuildCheckPrompts:
    def test_listing_prompt_verbatim(self, kb):
        listing, _ = build_check_prompts([], kb)
        assert listing == (
            "What Java SDK & JDK methods are used in the method you provided? "
            "Please list the fully qualified names of the methods."
        )

    def test_vector_pair_questions(self, kb):
        _, questions = build_check_prompts([GET_FQN, SET_FQN], kb)
        assert questions == [
            "Is the ArrayIndexOutOfBoundsException handled for "
            "java.util.Vector.get(int index) in the code snippets? (Y/N)",
            "Is the ArrayIndexOutOfBoundsException handled for "
            "java.util.Vector.set(int index, E element) in the code snippets? (Y/N)",
        ]

    def test_empty_api_list(self, kb):
        listing, questions = build_check_prompts([], kb)
        assert listing
        assert questions == []

    def test_api_with_three_specs_gets_three_questions(self, kb):
        _, questions = build_check_prompts(["java.util.Scanner.nextInt()"], kb)
        assert len(questions) == 3
        assert questions[0].startswith("Is the InputMismatchException handled")


class TestVerdicts:
    def test_good_practice_prompt_carries_verbatim_question(self):
        prompt = good_practice_prompt("class X {}")
        assert prompt.endswith("Can the code handle all exceptions in good practice? (Y/N)?")
        assert "class X {}" in prompt

    @pytest.mark.parametrize("text,expected", [
        ("Y", True),
        ("Yes, it handles everything.", True),
        ("  yes", True),
        ("N", False),
        ("No, the IndexOutOfBoundsException is not handled.", False),
        ("no.", False),
    ])
    def test_parse_yes_no(self, text, expected):
        assert parse_yes_no(text) is expected

    def test_unparseable_verdict(self):
        with pytest.raises(UnparseableVerdict):
            parse_yes_no("It depends.")
        with pytest.raises(UnparseableVerdict):
            parse_yes_no("42")
