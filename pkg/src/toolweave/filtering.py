"""Post-conversion filtering against an abstract snippet executor.

Three gates, applied in order after conversion is validated:

1. trivial-code rejection: drop entries whose inserted code only assigns a
   literal and prints it back;
2. execution filtering: run every code span, inject the captured output as
   a result span, delete spans that fail or time out, and drop entries
   where nothing succeeded;
3. consistency validation: drop entries whose injected output string never
   shows up in the text that follows it.

The executor abstraction keeps this module free of any real interpreter;
the subprocess adapter at the bottom speaks the runner protocol (code on
stdin, capture on stdout, outcome as exit status).
"""

from __future__ import annotations

import json
import re
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .chatml import (DEFAULT_TOKENS, Entry, Message, SpecialTokens, Text,
                     ToolCode, ToolResult, render, segment)

CodeSnippet = str


@dataclass(frozen=True)
class Captured:
    """Snippet ran; output is the trimmed standard-output capture (may be
    empty: printing nothing is still success)."""
    output: str


@dataclass(frozen=True)
class Failed:
    reason: str = ""


@dataclass(frozen=True)
class Timeout:
    pass


ExecOutcome = Captured | Failed | Timeout


class Executor(Protocol):
    """Runs one snippet in isolation; must return within timeout plus a
    bounded grace, and no run may observe state from a previous one."""

    def run(self, code: CodeSnippet, timeout: float) -> ExecOutcome: ...


# --------------------------------------------------------------------------
# Trivial-code recognizer
#
# Conservative two-statement grammar: a name assigned one literal constant,
# then a print of that same name (bare, or as the only interpolated value
# of an f-string). Anything it cannot positively recognize is not trivial;
# the full syntax-tree oracle lives in the runner component and may flag
# more shapes, never fewer on these.

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_LITERAL = (r"(?:\d+(?:\.\d*)?(?:[eE][+-]?\d+)?"
            r"|\.\d+(?:[eE][+-]?\d+)?"
            r"|'[^'\\\n]*'"
            r'|"[^"\\\n]*"'
            r"|True|False|None)")
_ASSIGN_RE = re.compile(rf"^({_NAME})\s*=\s*{_LITERAL}$")
_PRINT_NAME_RE = re.compile(rf"^print\(\s*({_NAME})\s*\)$")
_PRINT_FSTRING_RE = re.compile(
    rf"^print\(\s*f(['\"])([^'\"{{}}\\]*)\{{\s*({_NAME})\s*\}}([^'\"{{}}\\]*)\1\s*\)$")


def _logical_statements(code: str) -> list[str]:
    parts: list[str] = []
    for line in code.split("\n"):
        for piece in line.split(";"):
            piece = piece.strip()
            if piece:
                parts.append(piece)
    return parts


def is_trivial_assign_print(code: CodeSnippet) -> bool:
    """True iff the snippet is exactly: literal assignment, then a print of
    the assigned name. Unparseable or unusual snippets are not trivial."""
    stmts = _logical_statements(code)
    if len(stmts) != 2:
        return False
    assign = _ASSIGN_RE.match(stmts[0])
    if not assign:
        return False
    name = assign.group(1)
    direct = _PRINT_NAME_RE.match(stmts[1])
    if direct:
        return direct.group(1) == name
    fstring = _PRINT_FSTRING_RE.match(stmts[1])
    return bool(fstring) and fstring.group(3) == name


def entry_is_trivial(e: Entry, toks: SpecialTokens = DEFAULT_TOKENS) -> bool:
    """Entry-level gate: at least one code span and every span trivial."""
    spans = [s.source for m in e.assistant_messages()
             for s in segment(m.content, toks) if isinstance(s, ToolCode)]
    return bool(spans) and all(is_trivial_assign_print(c) for c in spans)


# --------------------------------------------------------------------------
# Execution filtering

def execute_and_inject(e: Entry, ex: Executor, timeout: float = 30.0,
                       toks: SpecialTokens = DEFAULT_TOKENS) -> tuple[Entry, bool]:
    """Run every code span in order; success appends a result span right
    after it, failure/timeout deletes the span entirely.

    Returns the rewritten entry and kept=True iff at least one span
    succeeded. Text segments pass through byte-for-byte. Spans that are
    blank after trimming never reach the executor and count as failed.
    """
    kept = False
    out_messages: list[Message] = []
    for m in e.messages:
        if m.role != "assistant":
            out_messages.append(m)
            continue
        out_segs: list[Text | ToolCode | ToolResult] = []
        for seg in segment(m.content, toks):
            if not isinstance(seg, ToolCode):
                out_segs.append(seg)
                continue
            if not seg.source.strip():
                continue
            outcome = ex.run(seg.source, timeout)
            if isinstance(outcome, Captured):
                out_segs.append(seg)
                out_segs.append(ToolResult(outcome.output.strip()))
                kept = True
            # Failed/Timeout: span removed, delimiters included.
        out_messages.append(Message(m.role, render(out_segs, toks)))
    return e.with_messages(out_messages), kept


def consistency_filter(e: Entry, toks: SpecialTokens = DEFAULT_TOKENS) -> bool:
    """Kept iff every injected result string occurs in the text after its
    span: the rest of the same message, then every later assistant message."""
    assistants = [(i, m) for i, m in enumerate(e.messages) if m.role == "assistant"]
    for pos, (i, m) in enumerate(assistants):
        segs = segment(m.content, toks)
        later = "\n".join(msg.content for _, msg in assistants[pos + 1:])
        for k, seg in enumerate(segs):
            if isinstance(seg, ToolResult):
                needle = seg.output.strip()
                haystack = render(segs[k + 1:], toks) + "\n" + later
                if needle not in haystack:
                    return False
    return True


# --------------------------------------------------------------------------
# Dataset statistics

_IMPORT_RE = re.compile(r"^\s*import\s+(.+)$")
_FROM_RE = re.compile(r"^\s*from\s+([A-Za-z_][A-Za-z0-9_.]*)\s+import\b")


def imports_of(code: CodeSnippet) -> set[str]:
    """Root module names pulled from import lines of a snippet."""
    roots: set[str] = set()
    for line in code.split("\n"):
        m = _FROM_RE.match(line)
        if m:
            roots.add(m.group(1).split(".")[0])
            continue
        m = _IMPORT_RE.match(line)
        if m:
            for part in m.group(1).split(","):
                name = part.strip().split(" as ")[0].strip().split(".")[0]
                if name.isidentifier():
                    roots.add(name)
    return roots


@dataclass
class SourceStats:
    entries: int = 0
    tool_calls: int = 0
    libraries: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {"entries": self.entries, "tool_calls": self.tool_calls,
                "libraries": len(self.libraries),
                "library_names": sorted(self.libraries)}


@dataclass
class StatsReport:
    per_source: dict[str, SourceStats]

    @property
    def total_entries(self) -> int:
        return sum(s.entries for s in self.per_source.values())

    @property
    def total_tool_calls(self) -> int:
        return sum(s.tool_calls for s in self.per_source.values())

    @property
    def all_libraries(self) -> set[str]:
        out: set[str] = set()
        for s in self.per_source.values():
            out |= s.libraries
        return out

    def to_dict(self) -> dict:
        return {
            "sources": {sid: s.to_dict() for sid, s in sorted(self.per_source.items())},
            "total": {"entries": self.total_entries,
                      "tool_calls": self.total_tool_calls,
                      "libraries": len(self.all_libraries),
                      "library_names": sorted(self.all_libraries)},
        }


def dataset_stats(entries: Iterable[Entry],
                  toks: SpecialTokens = DEFAULT_TOKENS) -> StatsReport:
    """Per-source entry, tool-call, and distinct-import counts."""
    per_source: dict[str, SourceStats] = {}
    for e in entries:
        sid = e.source_id or "unknown"
        stats = per_source.setdefault(sid, SourceStats())
        stats.entries += 1
        for m in e.assistant_messages():
            for seg in segment(m.content, toks):
                if isinstance(seg, ToolCode):
                    stats.tool_calls += 1
                    stats.libraries |= imports_of(seg.source)
    return StatsReport(per_source=per_source)


# --------------------------------------------------------------------------
# Executor implementations

class SubprocessRunnerExecutor:
    """Adapter over the external runner protocol.

    Spawns `cmd --mode exec` per snippet, feeds the code on stdin, and maps
    exit status to an outcome: 0 -> Captured(stdout), 1 -> Failed, wall
    clock overrun -> Timeout (process killed). Fresh process per call, so
    isolation comes for free.
    """

    def __init__(self, cmd: Sequence[str]):
        if not cmd:
            raise ValueError("runner command must be non-empty")
        self.cmd = list(cmd)

    def run(self, code: CodeSnippet, timeout: float) -> ExecOutcome:
        try:
            proc = subprocess.run(
                self.cmd + ["--mode", "exec"], input=code, capture_output=True,
                text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return Timeout()
        except OSError as exc:
            return Failed(f"cannot spawn runner: {exc}")
        if proc.returncode == 0:
            return Captured(proc.stdout)
        return Failed(f"runner exit {proc.returncode}")


class ScriptedExecutor:
    """Table-driven executor for tests and offline runs: trimmed snippet
    text -> outcome. Unknown snippets fail."""

    def __init__(self, outcomes: dict[str, ExecOutcome]):
        self.outcomes = {k.strip(): v for k, v in outcomes.items()}
        self.calls: list[str] = []

    def run(self, code: CodeSnippet, timeout: float) -> ExecOutcome:
        self.calls.append(code)
        return self.outcomes.get(code.strip(), Failed("not scripted"))

    @classmethod
    def from_json(cls, path: str | Path) -> "ScriptedExecutor":
        """JSON map: snippet -> {"status": "captured", "output": ...} |
        {"status": "failed"} | {"status": "timeout"}."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        table: dict[str, ExecOutcome] = {}
        for code, spec in raw.items():
            status = spec.get("status")
            if status == "captured":
                table[code] = Captured(str(spec.get("output", "")))
            elif status == "timeout":
                table[code] = Timeout()
            else:
                table[code] = Failed(str(spec.get("reason", "")))
        return cls(table)
