"""LLM-backed judging and conversion, plus strict structural validation.

The judge asks a chat endpoint whether an entry would benefit from tool
assistance (bare Yes/No reply); the converter asks a (usually different)
endpoint to weave tool-code spans into the assistant text. Replies are
never trusted: `validate_conversion` re-parses them and maps every failure
mode onto the rejection taxonomy, and `rejection_report` aggregates the
outcomes.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from importlib.resources import files
from typing import Callable, Iterable, Protocol

import requests

from .chatml import (DEFAULT_TOKENS, Entry, SpecialTokens, ToolCode, parse_entry,
                     segment, strip_tool_spans, to_prompt_json)
from .errors import ContextTooLong, DataError, RequestFailed

PLACEHOLDER = "PLACEHOLDER"


class RejectReason(str, enum.Enum):
    """Why a converted entry was dropped; every dropped entry carries
    exactly one of these."""

    NoCodeInserted = "no_code_inserted"
    ParseFailure = "parse_failure"
    RequestFailed = "request_failed"
    TrivialAssignPrint = "trivial_assign_print"
    ExecFailedAll = "exec_failed_all"
    Inconsistent = "inconsistent"


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class PromptTemplate:
    kind: str  # "judge" | "convert"
    body: str

    def __post_init__(self) -> None:
        if self.body.count(PLACEHOLDER) != 1:
            raise ValueError(f"{self.kind} template must contain exactly one {PLACEHOLDER}")

    def fill(self, e: Entry) -> str:
        return self.body.replace(PLACEHOLDER, to_prompt_json(e))


def load_template(kind: str) -> PromptTemplate:
    """Load the packaged judge/convert prompt text asset."""
    if kind not in ("judge", "convert"):
        raise ValueError(f"unknown template kind {kind!r}")
    body = (files(__package__) / "prompts" / f"{kind}.txt").read_text(encoding="utf-8")
    return PromptTemplate(kind=kind, body=body)


# --------------------------------------------------------------------------
# Chat endpoint

class ChatClient(Protocol):
    def complete(self, messages: list[dict[str, str]]) -> str: ...


@dataclass
class ChatEndpoint:
    """Minimal chat-completion HTTP client.

    POSTs {model, messages, temperature} to base_url and reads the first
    choice's message content. Retries only transport errors and 5xx
    responses; a 4xx or a malformed body fails immediately.
    """

    base_url: str
    model_name: str
    timeout: float = 60.0
    max_retries: int = 2
    temperature: float = 0.0
    backoff: float = 0.5
    api_key: str | None = None
    max_prompt_chars: int | None = None
    _session: requests.Session = field(default_factory=requests.Session, repr=False)

    def complete(self, messages: list[dict[str, str]]) -> str:
        if self.max_prompt_chars is not None:
            total = sum(len(m.get("content", "")) for m in messages)
            if total > self.max_prompt_chars:
                raise ContextTooLong(f"prompt is {total} chars, limit {self.max_prompt_chars}")
        payload = {"model": self.model_name, "messages": messages,
                   "temperature": self.temperature}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_err: str = "no attempt made"
        for attempt in range(self.max_retries + 1):
            if attempt and self.backoff:
                time.sleep(self.backoff * attempt)
            try:
                resp = self._session.post(self.base_url, json=payload,
                                          headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_err = f"transport error: {exc}"
                continue
            if 500 <= resp.status_code < 600:
                last_err = f"server error {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise RequestFailed(f"endpoint returned {resp.status_code}: {resp.text[:200]}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise RequestFailed(f"malformed completion body: {exc}") from exc
            if not isinstance(content, str):
                raise RequestFailed("completion content is not text")
            return content
        raise RequestFailed(f"gave up after {self.max_retries + 1} attempts: {last_err}")


# --------------------------------------------------------------------------
# Judging

def parse_verdict(reply: str) -> Verdict:
    """First whitespace token, shorn of surrounding quotes/punctuation,
    compared case-insensitively; anything but yes/no is ambiguous."""
    tokens = reply.split()
    if not tokens:
        return Verdict.AMBIGUOUS
    word = tokens[0].strip("\"'`.,:;!?()[]").lower()
    if word == "yes":
        return Verdict.YES
    if word == "no":
        return Verdict.NO
    return Verdict.AMBIGUOUS


def judge_valuable(e: Entry, ep: ChatClient,
                   template: PromptTemplate | None = None) -> bool:
    """True iff the judge's reply starts with yes.

    An ambiguous verdict counts as not valuable (the prompt demands a bare
    Yes/No, and conservative filtering only shrinks the valuable set).
    RequestFailed propagates after the endpoint's retries.
    """
    return judge_verdict(e, ep, template) is Verdict.YES


def judge_verdict(e: Entry, ep: ChatClient,
                  template: PromptTemplate | None = None) -> Verdict:
    template = template or load_template("judge")
    reply = ep.complete([{"role": "user", "content": template.fill(e)}])
    return parse_verdict(reply)


def convert_entry(e: Entry, ep: ChatClient,
                  template: PromptTemplate | None = None) -> str:
    """Raw converter reply text, unparsed; validation happens downstream."""
    template = template or load_template("convert")
    return ep.complete([{"role": "user", "content": template.fill(e)}])


# --------------------------------------------------------------------------
# Validation

def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def validate_conversion(original: Entry, reply: str,
                        toks: SpecialTokens = DEFAULT_TOKENS) -> Entry | RejectReason:
    """Accept a converter reply or name the rejection.

    Accepts iff the reply parses as an entry, every assistant content
    segments cleanly, at least one code span was inserted, non-assistant
    messages are byte-identical, and deleting the spans reproduces the
    original assistant text up to whitespace collapsing (span insertion
    legitimately introduces adjacent spaces). Never raises.
    """
    try:
        parsed = parse_entry(reply.strip())
    except DataError:
        return RejectReason.ParseFailure

    try:
        span_count = 0
        for m in parsed.messages:
            if m.role == "assistant":
                span_count += sum(isinstance(s, ToolCode) for s in segment(m.content, toks))
    except DataError:
        return RejectReason.ParseFailure
    if span_count == 0:
        return RejectReason.NoCodeInserted

    if len(parsed.messages) != len(original.messages):
        return RejectReason.ParseFailure
    stripped = strip_tool_spans(parsed, toks)
    for got, want in zip(stripped.messages, original.messages):
        if got.role != want.role:
            return RejectReason.ParseFailure
        if want.role == "assistant":
            if _collapse_ws(got.content) != _collapse_ws(want.content):
                return RejectReason.ParseFailure
        elif got.content != want.content:
            return RejectReason.ParseFailure
    return replace(parsed, source_id=original.source_id, entry_id=original.entry_id)


# --------------------------------------------------------------------------
# Outcome accounting

@dataclass
class RejectionReport:
    total: int
    kept: int
    counts: dict[RejectReason, int]

    @property
    def kept_fraction(self) -> float:
        return self.kept / self.total if self.total else 0.0

    def fraction(self, reason: RejectReason) -> float:
        return self.counts.get(reason, 0) / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": {"count": self.kept, "fraction": self.kept_fraction},
            "rejected": {
                r.value: {"count": self.counts.get(r, 0), "fraction": self.fraction(r)}
                for r in RejectReason
            },
        }


def rejection_report(outcomes: Iterable[RejectReason | None]) -> RejectionReport:
    """Histogram over a stream of outcomes; None means the entry was kept.
    Kept fraction plus the per-reason fractions always sum to 1."""
    total = kept = 0
    counts: dict[RejectReason, int] = {}
    for o in outcomes:
        total += 1
        if o is None:
            kept += 1
        else:
            counts[o] = counts.get(o, 0) + 1
    return RejectionReport(total=total, kept=kept, counts=counts)


# Backend: Entry -> raw reply text. Lets the pipeline and CLI swap the live
# endpoint for scripted replies without touching stage logic.
ReplyBackend = Callable[[Entry], str]


def endpoint_backend(ep: ChatClient, template: PromptTemplate) -> ReplyBackend:
    def backend(e: Entry) -> str:
        return ep.complete([{"role": "user", "content": template.fill(e)}])
    return backend


def scripted_backend(replies: dict[str, str], default: str | None = None) -> ReplyBackend:
    """Replies keyed by entry_id; entries without a scripted reply get the
    default or a RequestFailed."""
    def backend(e: Entry) -> str:
        key = e.entry_id or ""
        if key in replies:
            return replies[key]
        if default is not None:
            return default
        raise RequestFailed(f"no scripted reply for {key!r}")
    return backend
