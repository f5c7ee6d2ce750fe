"""Desk-scale measurement machinery: loop statistics, quality matrices,
good-practice questioning, and the statistical sampling helper.

Every statistic here is a pure function of persisted result records, so a
report can always be recomputed offline from what a corpus run wrote out.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import QualityLabel, classify_quality, collect_unhandled
from .chain import ChainResult, CodingTask, Termination, extract_code_block
from .errors import EmptyResults, ExchainError
from .kb import KnowledgeBase
from .prompts import (
    GENERAL_EXCEPTION_PROMPT,
    PromptMode,
    build_exception_prompt,
    good_practice_prompt,
    parse_yes_no,
    rephrase_task,
)

# Sample size giving a 5% error margin at the 95% confidence level for a
# large population; used when thinning a corpus for expensive evaluations.
DEFAULT_SAMPLE_SIZE = 384


@dataclass(frozen=True)
class LoopStats:
    """Distribution of checking-rewriting loops over converged runs."""

    histogram: dict[int, int]
    completed: int
    total: int
    avg_unhandled_by_loop: dict[int, float]

    def within_k(self, k: int) -> float:
        """Fraction of converged runs finishing in at most k loops."""
        if not self.completed:
            return 0.0
        return sum(c for loops, c in self.histogram.items() if loops <= k) / self.completed


def loop_stats(results: Sequence[ChainResult]) -> LoopStats:
    """Histogram, within-k fractions, and per-group unhandled averages.

    Groups runs by their completion loop count; a group's average is the mean
    unhandled count per loop across every run completing in that many loops.
    """
    results = list(results)
    if not results:
        raise EmptyResults("loop statistics need at least one result")
    converged = [r for r in results if r.termination is Termination.CONVERGED]
    histogram = dict(sorted(Counter(r.loop_count for r in converged).items()))
    averages: dict[int, float] = {}
    for loops in histogram:
        group = [r for r in converged if r.loop_count == loops]
        total_unhandled = sum(sum(r.unhandled_per_loop) for r in group)
        averages[loops] = total_unhandled / (loops * len(group))
    return LoopStats(
        histogram=histogram,
        completed=len(converged),
        total=len(results),
        avg_unhandled_by_loop=averages,
    )


@dataclass
class QualityMatrix:
    """Counts per quality label per prompt mode, plus an errored bucket."""

    counts: dict[PromptMode, Counter] = field(default_factory=dict)
    errored: dict[PromptMode, int] = field(default_factory=dict)
    tasks: int = 0

    def modes(self) -> list[PromptMode]:
        return list(self.counts)

    def add(self, mode: PromptMode, label: QualityLabel | None):
        self.counts.setdefault(mode, Counter())
        self.errored.setdefault(mode, 0)
        if label is None:
            self.errored[mode] += 1
        else:
            self.counts[mode][label] += 1

    def count(self, mode: PromptMode, label: QualityLabel) -> int:
        return self.counts.get(mode, Counter()).get(label, 0)

    @classmethod
    def from_results(cls, results: Iterable[ChainResult]) -> "QualityMatrix":
        matrix = cls()
        for r in results:
            matrix.add(r.mode, r.quality)
            matrix.tasks += 1
        return matrix


def _single_round(task: CodingTask, mode: PromptMode, kb: KnowledgeBase, client) -> QualityLabel:
    """Generation plus at most one exception-prompt round, then classification."""
    messages = [("user", rephrase_task(task))]
    response = client.chat(messages)
    messages.append(("assistant", response))
    code = extract_code_block(response)
    prompt = None
    if mode is PromptMode.GENERAL:
        prompt = GENERAL_EXCEPTION_PROMPT
    elif mode in (PromptMode.COARSE, PromptMode.FINE):
        items = collect_unhandled(code, kb)
        if items:
            prompt = build_exception_prompt(mode, items)
    if prompt is not None:
        messages.append(("user", prompt))
        response = client.chat(messages)
        code = extract_code_block(response)
    return classify_quality(code, kb)


def quality_matrix(
    corpus: Sequence[CodingTask],
    kb: KnowledgeBase,
    client,
    modes: Sequence[PromptMode],
) -> QualityMatrix:
    """Classify each task once per mode; per-task failures land in errored."""
    matrix = QualityMatrix(tasks=len(corpus))
    for mode in modes:
        for task in corpus:
            try:
                matrix.add(mode, _single_round(task, mode, kb, client))
            except ExchainError:
                matrix.add(mode, None)
    return matrix


def llm_eva(code: str, client) -> bool:
    """Ask whether the code handles all exceptions in good practice.

    The answer is binarized on its first alphabetic token; anything neither
    affirmative nor negative raises UnparseableVerdict.
    """
    response = client.chat([("user", good_practice_prompt(code))])
    return parse_yes_no(response)


def sample_tasks(
    corpus: Sequence[CodingTask],
    n: int = DEFAULT_SAMPLE_SIZE,
    seed: int = 0,
) -> list[CodingTask]:
    """Reproducible random sample of a corpus (whole corpus when small)."""
    corpus = list(corpus)
    if len(corpus) <= n:
        return corpus
    return random.Random(seed).sample(corpus, n)


# --- corpus and result files ---------------------------------------------------


def load_corpus(path: str | Path) -> list[CodingTask]:
    """Read a line-delimited task corpus of {id, text} records."""
    tasks = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        tasks.append(CodingTask(id=str(record["id"]), text=record["text"]))
    return tasks


def read_result_records(results_dir: str | Path) -> list[ChainResult]:
    """Load every result record found under a directory (transcripts omitted)."""
    results = []
    root = Path(results_dir)
    for path in sorted(root.glob("*.jsonl")):
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "loop_count" not in record:
                continue  # error records carry no statistics
            results.append(ChainResult.from_record(record))
    return results
