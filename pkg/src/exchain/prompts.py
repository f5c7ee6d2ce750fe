"""Prompt templates and instantiation for the generate/check/rewrite chain.

Every string an orchestrated run sends to the model is built here, from
fixed templates plus knowledge-base data, so prompt output is reproducible
and testable against golden strings.
"""

from __future__ import annotations

import re
from enum import Enum

from .errors import EmptyItems, UnparseableVerdict
from .kb import KnowledgeBase, simple_type_name


class PromptMode(str, Enum):
    DIRECT = "direct"      # plain generation, no exception prompt
    GENERAL = "general"    # generic warning
    COARSE = "coarse"      # exception types only
    FINE = "fine"          # exception types plus triggering conditions


TASK_TEMPLATE_PREFIX = "Please write a Java method"

GENERAL_EXCEPTION_PROMPT = "Please pay attention to potential exceptions."
COARSE_TEMPLATE = "Please pay attention to {exception}."
FINE_TEMPLATE = "Please check {condition} for {api}, otherwise throw {exception}"

LISTING_PROMPT = (
    "What Java SDK & JDK methods are used in the method you provided? "
    "Please list the fully qualified names of the methods."
)
CHECK_TEMPLATE = "Is the {exception} handled for {api} in the code snippets? (Y/N)"

GOOD_PRACTICE_PROMPT = "Can the code handle all exceptions in good practice? (Y/N)?"

_HOW_TO = re.compile(r"^\s*how\s+to\s+(.*)$", re.IGNORECASE | re.DOTALL)


def rephrase_task(task) -> str:
    """Turn a task description into the generation prompt.

    'How to X' becomes 'Please write a Java method to X'; text already in
    template form passes through; anything else is prefixed with
    'Please write a Java method that '.
    """
    text = getattr(task, "text", task)
    m = _HOW_TO.match(text)
    if m:
        return f"Please write a Java method to {m.group(1)}"
    if text.lstrip().lower().startswith(TASK_TEMPLATE_PREFIX.lower()):
        return text
    return f"Please write a Java method that {text}"


def build_exception_prompt(mode: PromptMode, items) -> str:
    """Instantiate the rewrite prompt for a granularity mode.

    General ignores the items. Coarse names each distinct exception once, in
    first-appearance order. Fine renders one sentence per item, in input
    order, with the condition text verbatim from the knowledge base; the
    sentences are chained with '. ' and the final period is omitted, matching
    the instantiated template form exactly.
    """
    if mode is PromptMode.GENERAL:
        return GENERAL_EXCEPTION_PROMPT
    if mode not in (PromptMode.COARSE, PromptMode.FINE):
        raise ValueError(f"no exception prompt exists for mode {mode!r}")
    items = list(items)
    if not items:
        raise EmptyItems(f"{mode.value} prompt requires at least one unhandled item")
    if mode is PromptMode.COARSE:
        names: list[str] = []
        for item in items:
            name = simple_type_name(item.exception)
            if name not in names:
                names.append(name)
        return " ".join(COARSE_TEMPLATE.format(exception=n) for n in names)
    sentences = [
        FINE_TEMPLATE.format(
            condition=item.condition,
            api=item.fqn,
            exception=simple_type_name(item.exception),
        )
        for item in items
    ]
    return ". ".join(sentences)


def build_check_prompts(apis, kb: KnowledgeBase) -> tuple[str, list[str]]:
    """The fixed listing prompt plus one Y/N prompt per (api, exception) pair."""
    questions = [
        CHECK_TEMPLATE.format(exception=simple_type_name(spec.exception), api=fqn)
        for fqn in apis
        for spec in kb.lookup(fqn)
    ]
    return LISTING_PROMPT, questions


def good_practice_prompt(code: str) -> str:
    """The yes/no good-practice question, attached to the code under review."""
    return f"```java\n{code}\n```\n\n{GOOD_PRACTICE_PROMPT}"


def parse_yes_no(text: str) -> bool:
    """Binarize a free-form answer on its first alphabetic token."""
    m = re.search(r"[A-Za-z]+", text)
    token = m.group(0).casefold() if m else ""
    if token in ("y", "yes"):
        return True
    if token in ("n", "no"):
        return False
    raise UnparseableVerdict(f"neither affirmative nor negative: {text[:80]!r}")
