import ast
import stat
import sys
import textwrap
import time

import pytest

from toolweave.chatml import ToolResult, entry, segment
from toolweave.filtering import (Captured, Failed, ScriptedExecutor,
                                 SubprocessRunnerExecutor, Timeout,
                                 consistency_filter, dataset_stats, entry_is_trivial,
                                 execute_and_inject, imports_of,
                                 is_trivial_assign_print)
from toolweave.rng import SplitMix64

from conftest import simple_entry


def ast_trivial_reference(code: str) -> bool:
    """Test-side syntax-tree oracle: module of exactly two statements, a
    constant assignment to a name, then a print call whose single argument
    is that name directly or as a formatted value."""
    try:
        node = ast.parse(code)
    except SyntaxError:
        return False
    if not (isinstance(node, ast.Module) and len(node.body) == 2
            and isinstance(node.body[0], ast.Assign)
            and isinstance(node.body[1], ast.Expr)):
        return False
    assign, expr = node.body
    if not (isinstance(assign.targets[0], ast.Name)
            and isinstance(assign.value, ast.Constant)):
        return False
    call = expr.value
    if not (isinstance(call, ast.Call) and isinstance(call.func, ast.Name)
            and call.func.id == "print" and len(call.args) == 1):
        return False
    arg = call.args[0]
    if isinstance(arg, ast.Name):
        return arg.id == assign.targets[0].id
    if isinstance(arg, ast.JoinedStr):
        for value in arg.values:
            if (isinstance(value, ast.FormattedValue)
                    and isinstance(value.value, ast.Name)
                    and value.value.id == assign.targets[0].id):
                return True
    return False


class TestTrivialRecognizer:
    @pytest.mark.parametrize("code", [
        "x = 5\nprint(x)",
        "x = 5\nprint(f\"{x}\")",
        "x = 5\nprint(f'value: {x}')",
        "greeting = 'hello'\nprint(greeting)",
        "flag = True\nprint(flag)",
        "nothing = None\nprint(nothing)",
        "pi = 3.14159\nprint(pi)",
        "x = 5; print(x)",
        "  x = 5  \n  print( x )  ",
        "n = 1e6\nprint(n)",
    ])
    def test_trivial_shapes(self, code):
        assert is_trivial_assign_print(code) is True

    @pytest.mark.parametrize("code", [
        "import math\narea = math.pi * 5**2\nprint(area)",  # three statements, computed value
        "x = 5\ny = x\nprint(y)",                            # three statements
        "x = 2 + 3\nprint(x)",                               # computed value
        "x = 5\nprint(y)",                                   # different name
        "x = 5\nprint(x, x)",                                # two arguments
        "x = 5\nprint()",                                    # no argument
        "x = 5\nshow(x)",                                    # not print
        "x = 5",                                             # one statement
        "print(x)",                                          # one statement
        "x = -5\nprint(x)",                                  # unary minus is not a constant node
        "x, y = 5, 6\nprint(x)",                             # tuple target
        "x = 5\nprint(f'{x} and {y}')",                      # extra interpolation (primary scope)
        "def f():\n    pass",                                # unparseable as the pattern
        "",                                                  # empty
    ])
    def test_non_trivial_shapes(self, code):
        assert is_trivial_assign_print(code) is False

    def test_never_true_where_reference_false(self):
        # 500 generated snippets: the conservative recognizer may miss
        # trivial shapes the syntax-tree oracle flags, never the reverse.
        rng = SplitMix64(2024)
        names = ["x", "value", "result_1", "_tmp"]
        literals = ["5", "3.14", "'hi'", '"a b"', "True", "None", "1e3", "-2",
                    "(5)", "[1]", "2+2"]
        printers = ["print({n})", "print(f'{{{n}}}')", "print(f'v: {{{n}}}')",
                    "print({n}, 2)", "print(str({n}))", "print(y)", "show({n})"]
        extras = ["", "\nz = 1", "import os\n"]
        agree = diverge = 0
        for _ in range(500):
            n = rng.choice(names)
            lit = rng.choice(literals)
            pr = rng.choice(printers).format(n=n)
            head = rng.choice(extras)
            code = f"{head}{n} = {lit}\n{pr}"
            primary = is_trivial_assign_print(code)
            oracle = ast_trivial_reference(code)
            if primary and not oracle:
                pytest.fail(f"over-filtering divergence on: {code!r}")
            if primary == oracle:
                agree += 1
            else:
                diverge += 1
        assert agree > diverge  # sanity: they mostly agree

    def test_entry_level_gate(self):
        trivial = entry(("user", "q"), ("assistant", "<python>x = 5\nprint(x)</python> 5"))
        mixed = entry(("user", "q"),
                      ("assistant", "<python>x = 5\nprint(x)</python>"
                                    "<python>print(2+3)</python> 5"))
        no_code = entry(("user", "q"), ("assistant", "plain"))
        assert entry_is_trivial(trivial) is True
        assert entry_is_trivial(mixed) is False   # one real span saves the entry
        assert entry_is_trivial(no_code) is False


class TestExecuteAndInject:
    def test_success_injects_result(self, local_executor):
        e = entry(("user", "2+3?"), ("assistant", "It is <python>print(2+3)</python>."))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert kept is True
        assert out.messages[1].content == \
            "It is <python>print(2+3)</python><result>5</result>."

    def test_failure_removes_span(self, local_executor):
        e = entry(("user", "q"), ("assistant", "Broken: <python>1/0</python> sorry."))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert kept is False
        assert out.messages[1].content == "Broken:  sorry."

    def test_mixed_spans(self, local_executor):
        e = entry(("user", "q"),
                  ("assistant", "a <python>1/0</python> b <python>print('ok')</python> c"))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert kept is True
        assert out.messages[1].content == \
            "a  b <python>print('ok')</python><result>ok</result> c"

    def test_text_segments_byte_identical(self, local_executor):
        e = entry(("user", "q"),
                  ("assistant", "  leading <python>print(1)</python>\ttrailing\n"))
        out, _ = execute_and_inject(e, local_executor, timeout=2)
        assert out.messages[1].content.startswith("  leading <python>")
        assert out.messages[1].content.endswith("\ttrailing\n")

    def test_output_trimmed_before_injection(self, local_executor):
        e = entry(("user", "q"), ("assistant", "<python>print('  padded  ')</python>"))
        out, _ = execute_and_inject(e, local_executor, timeout=2)
        assert "<result>padded</result>" in out.messages[1].content

    def test_empty_capture_counts_as_success(self, local_executor):
        e = entry(("user", "q"), ("assistant", "<python>x = 1</python> quiet"))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert kept is True
        assert "<result></result>" in out.messages[1].content

    def test_blank_snippet_dropped_without_executor_call(self, local_executor):
        e = entry(("user", "q"), ("assistant", "a <python>   </python> b"))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert local_executor.calls == []
        assert kept is False
        assert out.messages[1].content == "a  b"

    def test_kept_false_implies_no_result_spans(self, local_executor):
        e = entry(("user", "q"), ("assistant", "<python>raise ValueError</python>"))
        out, kept = execute_and_inject(e, local_executor, timeout=2)
        assert kept is False
        assert all(not isinstance(s, ToolResult)
                   for m in out.assistant_messages() for s in segment(m.content))

    def test_timeout_outcome_removes_span(self):
        ex = ScriptedExecutor({"spin()": Timeout()})
        e = entry(("user", "q"), ("assistant", "x <python>spin()</python> y"))
        out, kept = execute_and_inject(e, ex, timeout=1)
        assert kept is False
        assert out.messages[1].content == "x  y"


class TestConsistencyFilter:
    def test_result_quoted_later_is_kept(self):
        e = entry(("user", "sin 40 + cos 31?"),
                  ("assistant", "<python>print(round(0.6428+0.8572, 3))</python>"
                                "<result>1.500</result> So sin 40 + cos 31 = 1.500."))
        assert consistency_filter(e) is True

    def test_circle_area_kept(self):
        e = entry(("user", "area?"),
                  ("assistant", "The area <python>print(78.54)</python>"
                                "<result>78.54</result> is 78.54."))
        assert consistency_filter(e) is True

    def test_absent_substring_dropped(self):
        e = entry(("user", "q"),
                  ("assistant", "<python>print(7)</python><result>7</result> "
                                "the answer is 8"))
        assert consistency_filter(e) is False

    def test_later_assistant_message_counts(self):
        e = entry(("user", "q"),
                  ("assistant", "<python>print(42)</python><result>42</result>"),
                  ("user", "and?"),
                  ("assistant", "So the value is 42."))
        assert consistency_filter(e) is True

    def test_earlier_text_does_not_count(self):
        e = entry(("user", "q"),
                  ("assistant", "42 came up before. <python>print(42)</python>"
                                "<result>42</result>"))
        assert consistency_filter(e) is False

    def test_no_result_spans_kept(self):
        assert consistency_filter(simple_entry()) is True

    def test_monotone_appending_result_text(self, rng):
        # Appending the result text to the trailing message can only turn
        # dropped into kept, never the reverse.
        for i in range(100):
            token = f"value{rng.randint(100, 999)}"
            tail = "nothing relevant" if rng.randint(0, 1) else f"answer {token} given"
            e = entry(("user", "q"),
                      ("assistant", f"<python>print('{token}')</python>"
                                    f"<result>{token}</result> {tail}"))
            before = consistency_filter(e)
            appended = e.with_messages([
                e.messages[0],
                entry(("assistant", e.messages[1].content + f" {token}"),).messages[0]])
            assert consistency_filter(appended) is True
            if before:
                assert consistency_filter(appended) is True


class TestDatasetStats:
    def test_tool_call_counting(self):
        entries = [
            entry(("user", "q"), ("assistant", "<python>a=1</python> x"), source_id="s1"),
            entry(("user", "q"), ("assistant", "<python>a=1</python><python>b=2</python>"),
                  source_id="s1"),
            entry(("user", "q"), ("assistant", "<python>c=3</python>"), source_id="s2"),
        ]
        report = dataset_stats(entries)
        assert report.total_tool_calls == 4
        assert report.per_source["s1"].tool_calls == 3
        assert report.per_source["s2"].entries == 1

    def test_distinct_imports(self):
        entries = [
            entry(("user", "q"),
                  ("assistant", "<python>import math\nprint(math.pi)</python>"
                                "<python>import math\nprint(1)</python>"
                                "<python>import datetime\nprint(2)</python>"),
                  source_id="s"),
        ]
        report = dataset_stats(entries)
        assert report.per_source["s"].libraries == {"math", "datetime"}

    def test_imports_of_variants(self):
        assert imports_of("import os, sys\nprint(1)") == {"os", "sys"}
        assert imports_of("from collections import Counter") == {"collections"}
        assert imports_of("import numpy as np") == {"numpy"}
        assert imports_of("from os.path import join") == {"os"}
        assert imports_of("x = 'import fake'") == set()

    def test_fixture_with_known_composition(self):
        # 100 synthetic entries: 60 from a (1 span each, math), 40 from b
        # (2 spans each, datetime+json on even indexes only).
        entries = []
        for i in range(60):
            entries.append(entry(("user", "q"),
                                 ("assistant", "<python>import math\nprint(1)</python> 1"),
                                 source_id="a", entry_id=f"a#{i}"))
        for i in range(40):
            libs = "import datetime, json\n" if i % 2 == 0 else ""
            entries.append(entry(
                ("user", "q"),
                ("assistant", f"<python>{libs}print(1)</python><python>print(2)</python> 1 2"),
                source_id="b", entry_id=f"b#{i}"))
        report = dataset_stats(entries)
        assert report.per_source["a"].entries == 60
        assert report.per_source["a"].tool_calls == 60
        assert report.per_source["a"].libraries == {"math"}
        assert report.per_source["b"].entries == 40
        assert report.per_source["b"].tool_calls == 80
        assert report.per_source["b"].libraries == {"datetime", "json"}
        assert report.total_entries == 100
        assert report.total_tool_calls == 140
        assert report.all_libraries == {"math", "datetime", "json"}


FAKE_RUNNER = textwrap.dedent("""\
    #!/usr/bin/env python3
    # Minimal stand-in implementing the runner protocol for adapter tests.
    import sys, time
    code = sys.stdin.read()
    if "SLEEP" in code:
        time.sleep(30)
    if "BOOM" in code:
        sys.exit(1)
    sys.stdout.write("ran:" + code.strip())
    sys.exit(0)
""")


class TestSubprocessRunnerExecutor:
    @pytest.fixture
    def fake_runner(self, tmp_path):
        path = tmp_path / "fake_runner.py"
        path.write_text(FAKE_RUNNER, encoding="utf-8")
        path.chmod(path.stat().st_mode | stat.S_IEXEC)
        return [sys.executable, str(path)]

    def test_success_maps_to_captured(self, fake_runner):
        ex = SubprocessRunnerExecutor(fake_runner)
        outcome = ex.run("print(2+3)", timeout=10)
        assert outcome == Captured("ran:print(2+3)")

    def test_nonzero_exit_maps_to_failed(self, fake_runner):
        ex = SubprocessRunnerExecutor(fake_runner)
        assert isinstance(ex.run("BOOM", timeout=10), Failed)

    def test_overrun_maps_to_timeout(self, fake_runner):
        ex = SubprocessRunnerExecutor(fake_runner)
        start = time.monotonic()
        outcome = ex.run("SLEEP", timeout=1.0)
        elapsed = time.monotonic() - start
        assert isinstance(outcome, Timeout)
        assert elapsed < 3.0

    def test_unspawnable_command_fails(self):
        ex = SubprocessRunnerExecutor(["/nonexistent/runner"])
        assert isinstance(ex.run("x", timeout=1), Failed)


class TestScriptedExecutor:
    def test_table_lookup_and_call_log(self):
        ex = ScriptedExecutor({"print(1)": Captured("1"), "bad": Failed()})
        assert ex.run("print(1)", 1) == Captured("1")
        assert isinstance(ex.run("unknown", 1), Failed)
        assert ex.calls == ["print(1)", "unknown"]

    def test_from_json(self, tmp_path):
        path = tmp_path / "script.json"
        path.write_text(
            '{"print(5)": {"status": "captured", "output": "5"},'
            ' "1/0": {"status": "failed"},'
            ' "loop": {"status": "timeout"}}', encoding="utf-8")
        ex = ScriptedExecutor.from_json(path)
        assert ex.run("print(5)", 1) == Captured("5")
        assert isinstance(ex.run("1/0", 1), Failed)
        assert isinstance(ex.run("loop", 1), Timeout)
