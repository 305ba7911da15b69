"""ChatML data model, JSONL (de)serialization, and the tool-span parser.

Every pipeline stage moves `Entry` values around: ordered role-tagged
messages whose assistant contents may embed tool-invocation spans

    <python>code</python><result>captured output</result>

`segment`/`render` are exact inverses on balanced content; `strip_tool_spans`
deletes the spans (delimiters included) and is what derives the
no-tool-call baseline dataset.

All types here are immutable values; the functions are pure and safe to
call from any number of workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Iterator, TextIO

from .errors import MalformedJson, MissingField, UnbalancedTokens, UnknownRole

ROLES = ("user", "assistant", "system")


@dataclass(frozen=True)
class SpecialTokens:
    """The five reserved delimiter strings.

    Matched as literal substrings, not tokenizer ids, so the parser stays
    model-agnostic. All five must be distinct, non-empty, and none may be
    a substring of another (otherwise scanning is ambiguous).
    """

    code_open: str = "<python>"
    code_close: str = "</python>"
    result_open: str = "<result>"
    result_close: str = "</result>"
    end_of_text: str = "<|end_of_text|>"

    def __post_init__(self) -> None:
        toks = (self.code_open, self.code_close, self.result_open,
                self.result_close, self.end_of_text)
        if any(not t for t in toks):
            raise ValueError("special tokens must be non-empty")
        for i, a in enumerate(toks):
            for j, b in enumerate(toks):
                if i != j and a in b:
                    raise ValueError(f"token {a!r} is a substring of {b!r}")

    @property
    def span_tokens(self) -> tuple[str, str, str, str]:
        return (self.code_open, self.code_close, self.result_open, self.result_close)


DEFAULT_TOKENS = SpecialTokens()


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise UnknownRole(self.role)


@dataclass(frozen=True)
class Entry:
    """One conversation; the unit flowing through every pipeline stage."""

    messages: tuple[Message, ...]
    source_id: str | None = None
    entry_id: str | None = None
    # Unknown top-level JSON keys, preserved verbatim for round-tripping.
    extra: tuple[tuple[str, Any], ...] = field(default=())

    def assistant_messages(self) -> list[Message]:
        return [m for m in self.messages if m.role == "assistant"]

    def with_messages(self, messages: Iterable[Message]) -> "Entry":
        return replace(self, messages=tuple(messages))


def entry(*messages: tuple[str, str], source_id: str | None = None,
          entry_id: str | None = None) -> Entry:
    """Small constructor helper: entry(("user", "hi"), ("assistant", "hello"))."""
    return Entry(messages=tuple(Message(r, c) for r, c in messages),
                 source_id=source_id, entry_id=entry_id)


# --------------------------------------------------------------------------
# JSONL (de)serialization

_KNOWN_KEYS = ("messages", "source_id", "entry_id")


def parse_entry(line: str) -> Entry:
    """Parse one JSONL line into an Entry.

    Raises MalformedJson, MissingField, or UnknownRole. Unknown top-level
    keys are preserved so serialize_entry(parse_entry(line)) round-trips.
    """
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedJson("top level is not a JSON object")
    return entry_from_dict(obj)


def entry_from_dict(obj: dict[str, Any]) -> Entry:
    raw_messages = obj.get("messages")
    if not isinstance(raw_messages, list) or not raw_messages:
        raise MissingField("messages", "must be a non-empty list")
    messages: list[Message] = []
    for m in raw_messages:
        if not isinstance(m, dict):
            raise MissingField("messages", "message is not an object")
        if "role" not in m or not isinstance(m["role"], str):
            raise MissingField("role")
        if "content" not in m or not isinstance(m["content"], str):
            raise MissingField("content")
        messages.append(Message(m["role"], m["content"]))
    source_id = obj.get("source_id")
    entry_id = obj.get("entry_id")
    if source_id is not None and not isinstance(source_id, str):
        raise MissingField("source_id", "must be a string")
    if entry_id is not None and not isinstance(entry_id, str):
        raise MissingField("entry_id", "must be a string")
    extra = tuple((k, v) for k, v in obj.items() if k not in _KNOWN_KEYS)
    return Entry(messages=tuple(messages), source_id=source_id,
                 entry_id=entry_id, extra=extra)


def entry_to_dict(e: Entry) -> dict[str, Any]:
    obj: dict[str, Any] = {"messages": [{"role": m.role, "content": m.content}
                                        for m in e.messages]}
    if e.source_id is not None:
        obj["source_id"] = e.source_id
    if e.entry_id is not None:
        obj["entry_id"] = e.entry_id
    obj.update(dict(e.extra))
    return obj


def serialize_entry(e: Entry) -> str:
    """One line of JSON, UTF-8, no embedded newlines; inverse of parse_entry."""
    return json.dumps(entry_to_dict(e), ensure_ascii=False, separators=(",", ":"))


def to_prompt_json(e: Entry) -> str:
    """The bare {"messages": [...]} form injected into prompt placeholders
    (provenance keys stay out of the model's view)."""
    return json.dumps(
        {"messages": [{"role": m.role, "content": m.content} for m in e.messages]},
        ensure_ascii=False,
    )


def read_entries(fp: TextIO) -> Iterator[Entry]:
    for line in fp:
        line = line.strip()
        if line:
            yield parse_entry(line)


def write_entries(fp: TextIO, entries: Iterable[Entry]) -> int:
    n = 0
    for e in entries:
        fp.write(serialize_entry(e) + "\n")
        n += 1
    return n


# --------------------------------------------------------------------------
# Tool-span segmentation

@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class ToolCode:
    source: str


@dataclass(frozen=True)
class ToolResult:
    output: str


Segment = Text | ToolCode | ToolResult


def _find_next_token(content: str, pos: int, toks: SpecialTokens) -> tuple[int, str] | None:
    """Earliest occurrence of any span delimiter at or after pos."""
    best: tuple[int, str] | None = None
    for tok in toks.span_tokens:
        i = content.find(tok, pos)
        if i != -1 and (best is None or i < best[0]):
            best = (i, tok)
    return best


def segment(content: str, toks: SpecialTokens = DEFAULT_TOKENS) -> list[Segment]:
    """Split content at span-delimiter boundaries.

    ToolCode/ToolResult hold the text strictly between their delimiters;
    concatenating rendered segments reproduces the input byte-for-byte.
    Raises UnbalancedTokens for a close without an open, an open without a
    close, or any delimiter nested inside an open span.
    """
    segs: list[Segment] = []
    pos = 0
    n = len(content)
    while pos < n:
        hit = _find_next_token(content, pos, toks)
        if hit is None:
            segs.append(Text(content[pos:]))
            break
        i, tok = hit
        if i > pos:
            segs.append(Text(content[pos:i]))
        if tok in (toks.code_close, toks.result_close):
            raise UnbalancedTokens(f"close token {tok!r} without a matching open")
        open_tok = tok
        close_tok = toks.code_close if tok == toks.code_open else toks.result_close
        body_start = i + len(open_tok)
        inner = _find_next_token(content, body_start, toks)
        if inner is None:
            raise UnbalancedTokens(f"open token {open_tok!r} without a matching close")
        j, inner_tok = inner
        if inner_tok != close_tok:
            # Another delimiter before the close: nesting or interleaving.
            raise UnbalancedTokens(
                f"{inner_tok!r} inside a {open_tok!r} span before its close")
        body = content[body_start:j]
        segs.append(ToolCode(body) if open_tok == toks.code_open else ToolResult(body))
        pos = j + len(close_tok)
    return segs


def render(segs: Iterable[Segment], toks: SpecialTokens = DEFAULT_TOKENS) -> str:
    """Exact inverse of segment."""
    parts: list[str] = []
    for s in segs:
        if isinstance(s, Text):
            parts.append(s.text)
        elif isinstance(s, ToolCode):
            parts.append(f"{toks.code_open}{s.source}{toks.code_close}")
        elif isinstance(s, ToolResult):
            parts.append(f"{toks.result_open}{s.output}{toks.result_close}")
        else:
            raise TypeError(f"not a segment: {s!r}")
    return "".join(parts)


def code_spans(content: str, toks: SpecialTokens = DEFAULT_TOKENS) -> list[str]:
    """The ToolCode bodies of content, in order."""
    return [s.source for s in segment(content, toks) if isinstance(s, ToolCode)]


def strip_content(content: str, toks: SpecialTokens = DEFAULT_TOKENS) -> str:
    """Delete every tool span (delimiters included); whitespace around the
    spans is preserved verbatim."""
    return "".join(s.text for s in segment(content, toks) if isinstance(s, Text))


def strip_tool_spans(e: Entry, toks: SpecialTokens = DEFAULT_TOKENS) -> Entry:
    """Remove all tool-invocation spans from assistant messages.

    Used to derive the no-tool-call baseline dataset and inside conversion
    validation. UnbalancedTokens propagates from assistant contents.
    """
    out: list[Message] = []
    for m in e.messages:
        if m.role == "assistant":
            out.append(Message(m.role, strip_content(m.content, toks)))
        else:
            out.append(m)
    return e.with_messages(out)


def orphan_result_lint(content: str, toks: SpecialTokens = DEFAULT_TOKENS) -> list[str]:
    """Warnings for ToolResult spans not immediately following a code close.

    The format always adjoins result spans to their code span; a detached
    result is suspicious but not a parse error.
    """
    warnings: list[str] = []
    segs = segment(content, toks)
    for idx, s in enumerate(segs):
        if isinstance(s, ToolResult) and (idx == 0 or not isinstance(segs[idx - 1], ToolCode)):
            warnings.append(f"result span at segment {idx} does not follow a code span")
    return warnings
