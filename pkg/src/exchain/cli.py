"""Command-line interface: build/inspect the KB, check code, run chains, report.

Exit codes are a stable contract for CI use: 0 success, 1 domain-level
negative outcome (bad practice found, task failures), 2 usage or
environment errors.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import __version__
from .analysis import QualityLabel, analyze_source
from .chain import ChainAbort, ChainConfig, ChainResult, CodingTask, Termination, run_chain
from .client import ENV_API_BASE, ENV_API_KEY, ENV_MODEL, ClientMode, LlmClient
from .errors import ExchainError, PageStructureError, ParseError
from .evaluation import load_corpus, read_result_records, sample_tasks
from .javadoc import parse_api_page
from .kb import build_knowledge_base, kb_load, kb_save
from .prompts import PromptMode
from .report import write_report

_ENV_HELP = (
    f"Live and record modes read the endpoint from ${ENV_API_BASE}, the "
    f"credential from ${ENV_API_KEY}, and the default model from ${ENV_MODEL}."
)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@click.group(epilog=_ENV_HELP)
@click.version_option(version=__version__, prog_name="exchain")
def main():
    """Exception-handling knowledge base, checker, and repair-chain runner."""


@main.group()
def kb():
    """Build and inspect knowledge-base files."""


@kb.command("build")
@click.argument("pages_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", "-o", "out_path", required=True, type=click.Path(path_type=Path),
              help="Where to write the knowledge-base file.")
def kb_build(pages_dir: Path, out_path: Path):
    """Parse a directory of documentation pages into a knowledge base."""
    pages = []
    failures = []
    try:
        files = sorted(
            p for p in pages_dir.iterdir()
            if p.is_file() and not p.name.startswith(".") and p.suffix != ".json"
        )
    except OSError as err:
        click.echo(f"error: cannot read {pages_dir}: {err}", err=True)
        sys.exit(2)
    for page_path in files:
        try:
            entries = parse_api_page(page_path.read_text(encoding="utf-8"), page_path.name)
        except (PageStructureError, ExchainError, OSError) as err:
            failures.append((page_path.name, str(err)))
            continue
        pages.append((page_path.name, entries))

    knowledge = build_knowledge_base(pages)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    kb_save(knowledge, out_path)

    if not files:
        click.echo(f"warning: no page files in {pages_dir}; wrote an empty knowledge base")
    click.echo(
        f"wrote {out_path}: {len(knowledge)} entries, {knowledge.spec_count()} specs "
        f"from {len(pages)} pages"
    )
    by_page: dict[str, int] = {}
    for notes in knowledge.provenance.values():
        for note in notes:
            if not note.startswith(("ambiguous", "duplicate")):
                by_page[note] = by_page.get(note, 0) + 1
    for page_name, count in sorted(by_page.items()):
        click.echo(f"  {page_name}: {count} entries")
    for name, message in failures:
        click.echo(f"error: {name}: {message}", err=True)
    sys.exit(1 if failures else 0)


@kb.command("lookup")
@click.argument("fqn")
@click.option("--kb", "kb_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def kb_lookup_cmd(fqn: str, kb_path: Path):
    """Print the exception specs recorded for a fully-qualified method."""
    knowledge = kb_load(kb_path)
    specs = knowledge.lookup(fqn)
    if not specs:
        click.echo(f"{fqn}: no specs")
        return
    for spec in specs:
        guard = "guardable" if spec.guardable else "not guardable"
        condition = spec.condition or "(no condition)"
        click.echo(f"{spec.exception} - {condition} [{guard}]")


@main.command()
@click.argument("code_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--kb", "kb_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def check(code_path: Path, kb_path: Path):
    """Analyze a Java file; exit 0 only on good practice."""
    knowledge = kb_load(kb_path)
    source = code_path.read_text(encoding="utf-8")
    try:
        report = analyze_source(source, knowledge)
    except ParseError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    click.echo(json.dumps(report.to_dict(), indent=2))
    sys.exit(0 if report.label is QualityLabel.GOOD else 1)


def _client_from_flags(client_mode: str, cassette: Path | None, model: str | None) -> LlmClient:
    mode = ClientMode(client_mode)
    if mode in (ClientMode.REPLAY, ClientMode.REPLAY_STRICT, ClientMode.RECORD) and cassette is None:
        raise click.UsageError(f"--cassette is required for client mode {client_mode!r}")
    return LlmClient(mode=mode, cassette=cassette, model=model)


@main.command()
@click.argument("task_text", required=False)
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Line-delimited {id, text} task records.")
@click.option("--kb", "kb_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--cassette", type=click.Path(path_type=Path), help="Record/replay store.")
@click.option("--client", "client_mode", default="replay",
              type=click.Choice([m.value for m in ClientMode]), show_default=True)
@click.option("--mode", default="fine",
              type=click.Choice([m.value for m in PromptMode]), show_default=True)
@click.option("--checker", default="static", type=click.Choice(["static", "llm"]),
              show_default=True)
@click.option("--max-loops", default=10, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Seed for --sample.")
@click.option("--sample", "sample_n", default=0,
              help="Randomly thin the corpus to N tasks (seeded).")
@click.option("--model", default=None, help=f"Model name (default from ${ENV_MODEL}).")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("chain-out"),
              show_default=True)
def chain(task_text, corpus, kb_path, cassette, client_mode, mode, checker,
          max_loops, workers, seed, sample_n, model, out_dir):
    """Run the generate/check/rewrite chain for one task or a corpus."""
    if bool(task_text) == bool(corpus):
        raise click.UsageError("provide exactly one of TASK_TEXT or --corpus")
    tasks = (
        [CodingTask(id="task-1", text=task_text)] if task_text else load_corpus(corpus)
    )
    if sample_n:
        tasks = sample_tasks(tasks, n=sample_n, seed=seed)

    knowledge = kb_load(kb_path)
    client = _client_from_flags(client_mode, cassette, model)
    config = ChainConfig(mode=PromptMode(mode), max_loops=max_loops, checker=checker)

    def run_one(task: CodingTask):
        try:
            return task, run_chain(task, knowledge, client, config), None
        except ChainAbort as err:
            return task, None, f"aborted: {err}"
        except ExchainError as err:
            return task, None, str(err)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]

    out_dir = Path(out_dir)
    transcripts_dir = out_dir / "transcripts"
    lines = []
    failed = 0
    for task, result, error in outcomes:
        if result is None:
            failed += 1
            lines.append(json.dumps({"id": task.id, "error": error}, ensure_ascii=False))
            click.echo(f"{task.id} error={error}")
            continue
        if result.termination is Termination.LLM_ERROR:
            failed += 1
        ref = f"transcripts/{task.id}.json"
        _atomic_write(
            transcripts_dir / f"{task.id}.json",
            json.dumps([list(p) for p in result.transcript], indent=2, ensure_ascii=False) + "\n",
        )
        lines.append(json.dumps(result.to_record(transcript_ref=ref), ensure_ascii=False))
        quality = result.quality.value if result.quality else "n/a"
        click.echo(
            f"{task.id} loops={result.loop_count} "
            f"termination={result.termination.value} quality={quality}"
        )
    _atomic_write(out_dir / "results.jsonl", "\n".join(lines) + "\n")
    sys.exit(1 if failed else 0)


@main.command()
@click.argument("results_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Report directory [default: RESULTS_DIR/report].")
def report(results_dir: Path, out_dir: Path | None):
    """Render loop statistics and the quality matrix for stored results."""
    results = read_result_records(results_dir)
    if not results:
        click.echo(f"error: no result records under {results_dir}", err=True)
        sys.exit(2)
    out_dir = out_dir or results_dir / "report"
    rendered = write_report(results, out_dir)
    click.echo(rendered["text"], nl=False)
    click.echo(f"\nwrote {len(rendered['paths'])} files under {out_dir}")


if __name__ == "__main__":
    main()
