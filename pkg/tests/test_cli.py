"""End-to-end CLI behavior and the exit-code contract."""

import json

import pytest
from click.testing import CliRunner

from exchain import kb_load
from exchain.cli import main

from conftest import CASSETTES_DIR, JAVA_DIR, PAGES_DIR

WALKTHROUGH_CASSETTE = CASSETTES_DIR / "walkthrough.jsonl"


@pytest.fixture
def runner():
    return CliRunner()


class TestKbBuild:
    def test_fixture_pages_build_cleanly(self, runner, tmp_path):
        out = tmp_path / "kb.json"
        result = runner.invoke(main, ["kb", "build", str(PAGES_DIR), "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert "entries" in result.output
        knowledge = kb_load(out)
        assert knowledge.lookup("java.util.Vector.get(int index)")

    def test_empty_dir_warns_but_succeeds(self, runner, tmp_path):
        pages = tmp_path / "pages"
        pages.mkdir()
        out = tmp_path / "kb.json"
        result = runner.invoke(main, ["kb", "build", str(pages), "-o", str(out)])
        assert result.exit_code == 0
        assert "warning" in result.output
        assert len(kb_load(out)) == 0

    def test_missing_dir_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main, ["kb", "build", str(tmp_path / "nope"), "-o", str(tmp_path / "kb.json")]
        )
        assert result.exit_code == 2

    def test_bad_page_gets_diagnostic_and_exit_1(self, runner, tmp_path):
        pages = tmp_path / "pages"
        pages.mkdir()
        (pages / "good.txt").write_text(
            (PAGES_DIR / "vector.txt").read_text(encoding="utf-8"), encoding="utf-8"
        )
        (pages / "prose.txt").write_text("Nothing declarative here.\n", encoding="utf-8")
        out = tmp_path / "kb.json"
        result = runner.invoke(main, ["kb", "build", str(pages), "-o", str(out)])
        assert result.exit_code == 1
        assert "prose.txt" in result.output
        assert kb_load(out).lookup("java.util.Vector.get(int index)")


class TestKbLookup:
    def test_prints_specs(self, runner, kb_file):
        result = runner.invoke(main, [
            "kb", "lookup", "java.util.Vector.get(int index)", "--kb", str(kb_file),
        ])
        assert result.exit_code == 0
        assert "java.lang.ArrayIndexOutOfBoundsException" in result.output
        assert "guardable" in result.output

    def test_absent_fqn(self, runner, kb_file):
        result = runner.invoke(main, [
            "kb", "lookup", "com.example.Nothing.none()", "--kb", str(kb_file),
        ])
        assert result.exit_code == 0
        assert "no specs" in result.output


class TestCheck:
    def test_good_practice_exits_0(self, runner, kb_file):
        result = runner.invoke(main, [
            "check", str(JAVA_DIR / "swap_guarded.java"), "--kb", str(kb_file),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["label"] == "GoodPractice"
        assert report["unhandled"] == []

    def test_incomplete_exits_1_listing_unhandled(self, runner, kb_file):
        result = runner.invoke(main, [
            "check", str(JAVA_DIR / "swap_unhandled.java"), "--kb", str(kb_file),
        ])
        assert result.exit_code == 1
        report = json.loads(result.output)
        assert report["label"] == "IncompleteExceptionHandling"
        assert len(report["unhandled"]) == 2
        assert {u["fqn"] for u in report["unhandled"]} == {
            "java.util.Vector.get(int index)",
            "java.util.Vector.set(int index, E element)",
        }

    def test_malformed_source_exits_2(self, runner, kb_file):
        result = runner.invoke(main, [
            "check", str(JAVA_DIR / "parse_error.java"), "--kb", str(kb_file),
        ])
        assert result.exit_code == 2


class TestChain:
    def test_single_task_replay(self, runner, kb_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "chain", "How to swap two elements in a vector",
            "--kb", str(kb_file),
            "--cassette", str(WALKTHROUGH_CASSETTE),
            "--client", "replay-strict",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "loops=2 termination=Converged quality=GoodPractice" in result.output
        records = [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
        assert records[0]["unhandled_per_loop"] == [2, 0]
        transcript_path = out / records[0]["transcript_ref"]
        assert transcript_path.exists()
        transcript = json.loads(transcript_path.read_text())
        assert transcript[0][0] == "Please write a Java method to swap two elements in a vector"

    def test_corpus_with_one_failure_exits_1(self, runner, kb_file, tmp_path):
        corpus = tmp_path / "tasks.jsonl"
        corpus.write_text(
            '{"id": "a", "text": "How to swap two elements in a vector"}\n'
            '{"id": "b", "text": "How to swap two elements in a vector"}\n'
            '{"id": "ghost", "text": "How to do an unrecorded thing"}\n'
        )
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "chain", "--corpus", str(corpus),
            "--kb", str(kb_file),
            "--cassette", str(WALKTHROUGH_CASSETTE),
            "--client", "replay-strict",
            "--out", str(out),
        ])
        assert result.exit_code == 1
        records = [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
        ok = [r for r in records if not r.get("error")]
        errored = [r for r in records if r.get("error")]
        assert len(ok) == 2 and len(errored) == 1
        assert errored[0]["id"] == "ghost"

    def test_max_loops_1_reports_cap(self, runner, kb_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "chain", "How to swap two elements in a vector",
            "--kb", str(kb_file),
            "--cassette", str(WALKTHROUGH_CASSETTE),
            "--client", "replay-strict",
            "--max-loops", "1",
            "--out", str(out),
        ])
        assert result.exit_code == 0
        assert "termination=LoopCapReached" in result.output

    def test_replay_runs_are_idempotent(self, runner, kb_file, tmp_path):
        outputs = []
        for sub in ("one", "two"):
            out = tmp_path / sub
            result = runner.invoke(main, [
                "chain", "How to swap two elements in a vector",
                "--kb", str(kb_file),
                "--cassette", str(WALKTHROUGH_CASSETTE),
                "--client", "replay-strict",
                "--out", str(out),
            ])
            assert result.exit_code == 0
            outputs.append((out / "results.jsonl").read_bytes())
        assert outputs[0] == outputs[1]

    def test_workers_flag_preserves_output_order(self, runner, kb_file, tmp_path):
        corpus = tmp_path / "tasks.jsonl"
        corpus.write_text(
            '{"id": "a", "text": "How to swap two elements in a vector"}\n'
            '{"id": "b", "text": "How to swap two elements in a vector"}\n'
        )
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "chain", "--corpus", str(corpus),
            "--kb", str(kb_file),
            "--cassette", str(WALKTHROUGH_CASSETTE),
            "--client", "replay-strict",
            "--workers", "2",
            "--out", str(out),
        ])
        assert result.exit_code == 0
        records = [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
        assert [r["id"] for r in records] == ["a", "b"]

    def test_task_and_corpus_are_mutually_exclusive(self, runner, kb_file):
        result = runner.invoke(main, ["chain", "--kb", str(kb_file)])
        assert result.exit_code == 2

    def test_sample_thins_the_corpus_reproducibly(self, runner, kb_file, tmp_path):
        corpus = tmp_path / "tasks.jsonl"
        corpus.write_text("".join(
            f'{{"id": "t{i}", "text": "How to swap two elements in a vector"}}\n'
            for i in range(8)
        ))
        picked = []
        for sub in ("s1", "s2"):
            out = tmp_path / sub
            result = runner.invoke(main, [
                "chain", "--corpus", str(corpus),
                "--kb", str(kb_file),
                "--cassette", str(WALKTHROUGH_CASSETTE),
                "--client", "replay-strict",
                "--sample", "3", "--seed", "11",
                "--out", str(out),
            ])
            assert result.exit_code == 0
            records = [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
            picked.append([r["id"] for r in records])
        assert picked[0] == picked[1]
        assert len(picked[0]) == 3


def test_version_flag(runner=None):
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "exchain" in result.output


class TestReport:
    def _run_chain(self, runner, kb_file, out):
        result = runner.invoke(main, [
            "chain", "How to swap two elements in a vector",
            "--kb", str(kb_file),
            "--cassette", str(WALKTHROUGH_CASSETTE),
            "--client", "replay-strict",
            "--out", str(out),
        ])
        assert result.exit_code == 0

    def test_walkthrough_results_render(self, runner, kb_file, tmp_path):
        out = tmp_path / "out"
        self._run_chain(runner, kb_file, out)
        result = runner.invoke(main, ["report", str(out)])
        assert result.exit_code == 0, result.output
        assert "2 loops:     1 tasks" in result.output
        assert "GoodPractice" in result.output
        report_dir = out / "report"
        for name in ("loop_histogram.csv", "loop_histogram.png",
                     "unhandled_by_loop.png", "quality_matrix.csv", "report.txt"):
            assert (report_dir / name).exists()

    def test_empty_dir_exits_2(self, runner, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        result = runner.invoke(main, ["report", str(empty)])
        assert result.exit_code == 2

    def test_report_is_idempotent_to_the_byte(self, runner, kb_file, tmp_path):
        out = tmp_path / "out"
        self._run_chain(runner, kb_file, out)
        digests = []
        for sub in ("r1", "r2"):
            report_dir = tmp_path / sub
            result = runner.invoke(main, ["report", str(out), "--out", str(report_dir)])
            assert result.exit_code == 0
            digests.append({
                p.name: p.read_bytes() for p in sorted(report_dir.iterdir())
            })
        assert digests[0] == digests[1]

    def test_mixed_mode_results_get_one_column_per_mode(self, runner, kb_file, tmp_path):
        out = tmp_path / "out"
        record_fine = {
            "id": "a", "mode": "fine", "loop_count": 2, "unhandled_per_loop": [2, 0],
            "termination": "Converged", "quality": "GoodPractice",
            "final_code": "class X {}", "transcript_ref": None,
        }
        record_direct = dict(record_fine, id="b", mode="direct",
                             quality="IncompleteExceptionHandling")
        out.mkdir()
        (out / "results.jsonl").write_text(
            json.dumps(record_fine) + "\n" + json.dumps(record_direct) + "\n"
        )
        result = runner.invoke(main, ["report", str(out)])
        assert result.exit_code == 0
        header = [l for l in result.output.splitlines() if l.startswith("Quality of code")][0]
        assert "direct" in header and "fine" in header
