"""Secondary acceptance: runner conformance behind the pipeline's executor
adapter, oracle agreement on a shared snippet corpus, and the full
judge -> convert -> exec-filter -> consistency-filter chain driven through
the pipeline CLI with this runner doing the real execution."""

import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from toolweave.filtering import Captured, Failed, SubprocessRunnerExecutor, Timeout

from conftest import RUNNER_CMD, invoke_runner, runner_env


def _report(name: str, t0: float) -> None:
    print(f"PASS {name} ({time.perf_counter() - t0:.2f}s)")


class TestSandboxConformance:
    """The executor-adapter contract, end to end through real processes."""

    @pytest.fixture
    def executor(self):
        return SubprocessRunnerExecutor(RUNNER_CMD)

    def test_conformance_criterion(self, executor, monkeypatch):
        monkeypatch.setenv("PYTHONPATH", runner_env()["PYTHONPATH"])
        t0 = time.perf_counter()

        assert executor.run("print(2+3)", timeout=10) == Captured("5")

        assert isinstance(executor.run("1/0", timeout=10), Failed)

        start = time.monotonic()
        outcome = executor.run("while True: pass", timeout=1.0)
        elapsed = time.monotonic() - start
        assert isinstance(outcome, Timeout)
        assert elapsed < 1.5, f"kill took {elapsed:.2f}s, over the 500 ms grace"

        assert executor.run("leak = 41", timeout=10) == Captured("")
        assert isinstance(executor.run("print(leak)", timeout=10), Failed)

        _report("sandbox conformance: capture, failure, 1s kill, isolation", t0)


def _snippet_corpus(n=500):
    """Labeled snippets, half trivial by construction, half drawn from the
    known non-trivial shape families."""
    names = ["x", "total", "value_1", "_v"]
    literals = ["5", "3.14", "'hi'", '"a b"', "True", "None", "0", "1e3"]
    corpus = []
    for i in range(n // 2):
        name = names[i % len(names)]
        lit = literals[i % len(literals)]
        if i % 3 == 0:
            printer = f"print({name})"
        elif i % 3 == 1:
            printer = f"print(f'{{{name}}}')"
        else:
            printer = f"print(f'result: {{{name}}}')"
        corpus.append((f"{name} = {lit}\n{printer}", True))
    false_shapes = [
        "x = 5\ny = 6\nprint(x)",
        "x = 2 + {i}\nprint(x)",
        "x = {i}\nprint(y)",
        "x = {i}\nprint(x, x)",
        "x, y = {i}, 6\nprint(x)",
        "x = {i}\nprint(x",
    ]
    for i in range(n // 2):
        corpus.append((false_shapes[i % len(false_shapes)].format(i=i), False))
    return corpus


class TestOracleAgreement:
    def test_runner_matches_labels_and_primary_never_overfilters(self, tmp_path):
        t0 = time.perf_counter()
        corpus = _snippet_corpus(500)

        runner_says = []
        for code, expected in corpus:
            proc = invoke_runner(code, mode="check-trivial")
            assert proc.returncode in (2, 3), proc
            got = proc.returncode == 2
            assert got is expected, f"oracle mislabeled: {code!r}"
            runner_says.append(got)

        # Primary recognizer, consulted through its CLI: one entry per
        # snippet, one filter-trivial run, outcomes read back.
        infile = tmp_path / "snippets.jsonl"
        with open(infile, "w", encoding="utf-8") as fp:
            for i, (code, _) in enumerate(corpus):
                fp.write(json.dumps({
                    "messages": [
                        {"role": "user", "content": "q"},
                        {"role": "assistant", "content": f"<python>{code}</python> ok"}],
                    "entry_id": f"s#{i}"}) + "\n")
        outcomes_path = tmp_path / "outcomes.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "toolweave", "filter-trivial",
             "--in", str(infile), "--out", str(tmp_path / "kept.jsonl"),
             "--outcomes", str(outcomes_path)],
            capture_output=True, text=True, env=runner_env(), timeout=120)
        assert proc.returncode == 0, proc.stderr
        primary_says = {}
        for line in outcomes_path.read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            primary_says[rec["entry_id"]] = rec["outcome"] == "trivial_assign_print"

        for i, ((code, _), oracle) in enumerate(zip(corpus, runner_says)):
            primary = primary_says[f"s#{i}"]
            if primary and not oracle:
                pytest.fail(f"primary over-filters where the oracle says keep: {code!r}")
        _report("oracle agreement on 500 snippets; divergence one-sided", t0)


# ---------------------------------------------------------------------------
# End-to-end chain over a 50-entry corpus with a known kept set of 18.

def _entry_line(i, assistant, user=None):
    return json.dumps({"messages": [
        {"role": "user", "content": user or f"Question {i}?"},
        {"role": "assistant", "content": assistant}],
        "source_id": "syn", "entry_id": f"e#{i}"})


def _converted_line(i, assistant, user=None):
    return json.dumps({"messages": [
        {"role": "user", "content": user or f"Question {i}?"},
        {"role": "assistant", "content": assistant}]})


def build_corpus(tmp_path: Path):
    """50 entries: 10 not valuable, 3 without inserted code, 3 malformed,
    4 trivial, 6 execution-dead, 6 inconsistent, 18 kept."""
    corpus_lines, judge, convert = [], {}, {}
    kept_ids = []

    for i in range(50):
        eid = f"e#{i}"
        if i < 10:
            corpus_lines.append(_entry_line(i, "Plain prose answer."))
            judge[eid] = "No"
            continue
        judge[eid] = "Yes"
        if i < 13:    # converter inserted nothing
            original = f"The answer is {i}."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(i, original)
        elif i < 16:  # missing close token
            original = f"The answer is {i}."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, f"The answer is <python>print(1) {i}.")
        elif i < 20:  # trivial assign+print span
            original = "The value is 5."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, "The value is <python>x = 5\nprint(x)</python> 5.")
        elif i < 26:  # execution fails on the only span
            original = f"The answer is {i}."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, f"The answer is <python>1/0</python> {i}.")
        elif i < 32:  # result disagrees with the following text
            original = f"The answer is {i}."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, f"The answer is <python>print(999)</python> {i}.")
        elif i < 44:  # kept: single arithmetic span, consistent
            original = f"The answer is {i + 1}."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, f"The answer is <python>print({i}+1)</python> {i + 1}.")
            kept_ids.append(eid)
        elif i < 47:  # kept: two spans, math import
            original = "Pi is about 3.14 and the product is 42."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, "Pi is about <python>import math\nprint(round(math.pi, 2))"
                   "</python> 3.14 and the product is <python>print(6*7)</python> 42.")
            kept_ids.append(eid)
        else:         # kept: one dead span plus one live json span
            original = "The list is [1] here."
            corpus_lines.append(_entry_line(i, original))
            convert[eid] = _converted_line(
                i, "The list is <python>1/0</python><python>import json\n"
                   "print(json.dumps([1]))</python> [1] here.")
            kept_ids.append(eid)

    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text("\n".join(corpus_lines) + "\n", encoding="utf-8")
    judge_path = tmp_path / "judge_replies.json"
    judge_path.write_text(json.dumps(judge), encoding="utf-8")
    convert_path = tmp_path / "convert_replies.json"
    convert_path.write_text(json.dumps(convert), encoding="utf-8")
    return corpus, judge_path, convert_path, kept_ids


def _cli(*argv, timeout=300):
    proc = subprocess.run([sys.executable, "-m", "toolweave", *map(str, argv)],
                          capture_output=True, text=True, env=runner_env(),
                          timeout=timeout)
    assert proc.returncode == 0, f"{argv}\nstdout: {proc.stdout}\nstderr: {proc.stderr}"
    return proc


def _count_lines(path):
    return len([l for l in Path(path).read_text(encoding="utf-8").splitlines() if l])


def _ids(path):
    return [json.loads(l)["entry_id"]
            for l in Path(path).read_text(encoding="utf-8").splitlines() if l]


class TestEndToEnd:
    def test_chain_keeps_exactly_the_18_and_stats_match(self, tmp_path):
        t0 = time.perf_counter()
        corpus, judge_replies, convert_replies, kept_ids = build_corpus(tmp_path)
        assert len(kept_ids) == 18
        d = tmp_path

        _cli("judge", "--in", corpus, "--out", d / "valuable.jsonl",
             "--replies", judge_replies)
        assert _count_lines(d / "valuable.jsonl") == 40

        _cli("convert", "--in", d / "valuable.jsonl", "--out", d / "converted.jsonl",
             "--replies", convert_replies, "--outcomes", d / "convert_outcomes.jsonl")
        assert _count_lines(d / "converted.jsonl") == 34

        _cli("filter-trivial", "--in", d / "converted.jsonl",
             "--out", d / "nontrivial.jsonl")
        assert _count_lines(d / "nontrivial.jsonl") == 30

        _cli("exec-filter", "--in", d / "nontrivial.jsonl",
             "--out", d / "executed.jsonl", "--timeout", 10,
             "--runner-cmd", f"{sys.executable} -m snippet_runner")
        assert _count_lines(d / "executed.jsonl") == 24

        _cli("consistency-filter", "--in", d / "executed.jsonl",
             "--out", d / "final.jsonl", "--outcomes", d / "final_outcomes.jsonl")
        assert _ids(d / "final.jsonl") == kept_ids

        _cli("stats", "--in", d / "final.jsonl", "--out", d / "stats.json")
        stats = json.loads((d / "stats.json").read_text(encoding="utf-8"))
        # 12 single-span + 3 double-span + 3 single-surviving-span entries.
        assert stats["sources"]["syn"]["entries"] == 18
        assert stats["sources"]["syn"]["tool_calls"] == 21
        assert stats["sources"]["syn"]["libraries"] == 2
        assert stats["sources"]["syn"]["library_names"] == ["json", "math"]
        assert stats["total"] == {"entries": 18, "tool_calls": 21,
                                  "libraries": 2, "library_names": ["json", "math"]}
        _report("end-to-end chain keeps exactly 18; stats match construction", t0)

    def test_injected_results_present_in_kept_entries(self, tmp_path):
        corpus, judge_replies, convert_replies, _ = build_corpus(tmp_path)
        d = tmp_path
        _cli("judge", "--in", corpus, "--out", d / "v.jsonl", "--replies", judge_replies)
        _cli("convert", "--in", d / "v.jsonl", "--out", d / "c.jsonl",
             "--replies", convert_replies)
        _cli("filter-trivial", "--in", d / "c.jsonl", "--out", d / "nt.jsonl")
        _cli("exec-filter", "--in", d / "nt.jsonl", "--out", d / "x.jsonl",
             "--timeout", 10, "--runner-cmd", f"{sys.executable} -m snippet_runner")
        lines = Path(d / "x.jsonl").read_text(encoding="utf-8")
        assert "<result>3.14</result>" in lines
        assert "<result>42</result>" in lines
        assert "<result>[1]</result>" in lines
        assert "1/0" not in lines  # failed spans are gone entirely
