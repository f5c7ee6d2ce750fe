"""Report emitters: text tables, delimited files, and rendered figures.

The report path mirrors the measurement layout used throughout: a loop
histogram, per-group unhandled averages, and a quality table whose rows are
the four labels and whose columns are the prompt modes present.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .analysis import QualityLabel
from .evaluation import LoopStats, QualityMatrix
from .prompts import PromptMode

LABEL_ORDER = (
    QualityLabel.INCOMPLETE,
    QualityLabel.INCORRECT,
    QualityLabel.ABUSE,
    QualityLabel.GOOD,
)

MODE_ORDER = (PromptMode.DIRECT, PromptMode.GENERAL, PromptMode.COARSE, PromptMode.FINE)


def loop_histogram_rows(stats: LoopStats) -> list[tuple[int, int]]:
    """(loop_count, task count) pairs, ready for plotting or CSV export."""
    return sorted(stats.histogram.items())


def render_loop_stats(stats: LoopStats) -> str:
    lines = ["Checking-rewriting loops (converged runs)"]
    for loops, count in loop_histogram_rows(stats):
        avg = stats.avg_unhandled_by_loop.get(loops, 0.0)
        lines.append(f"  {loops:>3} loops: {count:>5} tasks   avg unhandled/loop {avg:.2f}")
    lines.append(f"  converged {stats.completed} of {stats.total} runs")
    if stats.completed:
        lines.append(f"  within 10 loops: {stats.within_k(10):.2%}")
    return "\n".join(lines)


def _ordered_modes(matrix: QualityMatrix) -> list[PromptMode]:
    present = set(matrix.modes())
    ordered = [m for m in MODE_ORDER if m in present]
    return ordered + [m for m in matrix.modes() if m not in MODE_ORDER]


def render_quality_table(matrix: QualityMatrix) -> str:
    """Quality labels as rows, prompt modes as columns."""
    modes = _ordered_modes(matrix)
    if not modes:
        return "Quality of code: no runs"
    header = ["Quality of code"] + [m.value for m in modes]
    rows = [header]
    for label in LABEL_ORDER:
        rows.append([label.value] + [str(matrix.count(m, label)) for m in modes])
    if any(matrix.errored.get(m, 0) for m in modes):
        rows.append(["Errored"] + [str(matrix.errored.get(m, 0)) for m in modes])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    out = []
    for i, row in enumerate(rows):
        out.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            out.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    return "\n".join(out)


def write_loop_histogram_csv(stats: LoopStats, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["loop_count", "tasks"])
        writer.writerows(loop_histogram_rows(stats))
    return path


def write_unhandled_csv(stats: LoopStats, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["loop_count", "avg_unhandled_per_loop"])
        for loops, avg in sorted(stats.avg_unhandled_by_loop.items()):
            writer.writerow([loops, f"{avg:.4f}"])
    return path


def write_quality_csv(matrix: QualityMatrix, path: str | Path) -> Path:
    path = Path(path)
    modes = _ordered_modes(matrix)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quality"] + [m.value for m in modes])
        for label in LABEL_ORDER:
            writer.writerow([label.value] + [matrix.count(m, label) for m in modes])
        writer.writerow(["Errored"] + [matrix.errored.get(m, 0) for m in modes])
    return path


def save_report_figures(stats: LoopStats, out_dir: str | Path) -> list[Path]:
    """Render the loop histogram and per-loop unhandled averages to PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    rows = loop_histogram_rows(stats)
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows:
        ax.bar([r[0] for r in rows], [r[1] for r in rows], color="#4878a8")
    ax.set_xlabel("checking-rewriting loops")
    ax.set_ylabel("tasks")
    ax.set_title("Distribution of checking-rewriting loops")
    fig.tight_layout()
    path = out_dir / "loop_histogram.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    avgs = sorted(stats.avg_unhandled_by_loop.items())
    fig, ax = plt.subplots(figsize=(6, 4))
    if avgs:
        ax.bar([a[0] for a in avgs], [a[1] for a in avgs], color="#a85448")
    ax.set_xlabel("loops to completion")
    ax.set_ylabel("avg unhandled exceptions per loop")
    ax.set_title("Distribution of unhandled exceptions")
    fig.tight_layout()
    path = out_dir / "unhandled_by_loop.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written


def write_report(results: Sequence, out_dir: str | Path) -> dict:
    """Full report for a result set: text, CSVs, and figures.

    Returns the rendered text plus the paths written, so callers can echo
    and script against them.
    """
    from .evaluation import loop_stats

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    stats = loop_stats(results)
    matrix = QualityMatrix.from_results(results)
    text = render_loop_stats(stats) + "\n\n" + render_quality_table(matrix) + "\n"

    paths = [
        write_loop_histogram_csv(stats, out_dir / "loop_histogram.csv"),
        write_unhandled_csv(stats, out_dir / "unhandled_by_loop.csv"),
        write_quality_csv(matrix, out_dir / "quality_matrix.csv"),
    ]
    paths.extend(save_report_figures(stats, out_dir))
    report_path = out_dir / "report.txt"
    report_path.write_text(text, encoding="utf-8")
    paths.append(report_path)
    return {"text": text, "paths": paths, "stats": stats, "matrix": matrix}
