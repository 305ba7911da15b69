"""Shared test helpers: seeded fuzzers for balanced content, synthetic
span insertion, and a small in-process executor used as the independent
oracle for execution-dependent expectations."""

from __future__ import annotations

import contextlib
import io

import pytest

from toolweave.chatml import DEFAULT_TOKENS, Entry, Message, entry
from toolweave.filtering import Captured, Failed
from toolweave.rng import SplitMix64

# Safe text alphabet: no angle brackets, so concatenation can never form a
# special token by accident.
SAFE_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,:;!?()+-*/='\"\n_"


def random_text(rng: SplitMix64, lo: int = 0, hi: int = 30) -> str:
    return "".join(SAFE_CHARS[rng.randint(0, len(SAFE_CHARS) - 1)]
                   for _ in range(rng.randint(lo, hi)))


def balanced_content(rng: SplitMix64, max_parts: int = 6) -> tuple[str, int]:
    """A random well-formed content string; returns (content, code_span_count)."""
    toks = DEFAULT_TOKENS
    parts: list[str] = []
    spans = 0
    for _ in range(rng.randint(1, max_parts)):
        kind = rng.randint(0, 3)
        if kind == 0:
            parts.append(random_text(rng))
        elif kind == 1:
            parts.append(f"{toks.code_open}{random_text(rng, 1, 40)}{toks.code_close}")
            spans += 1
        elif kind == 2:
            parts.append(f"{toks.result_open}{random_text(rng, 0, 20)}{toks.result_close}")
        else:
            body = random_text(rng, 1, 40)
            parts.append(f"{toks.code_open}{body}{toks.code_close}"
                         f"{toks.result_open}{random_text(rng, 0, 20)}{toks.result_close}")
            spans += 1
    return "".join(parts), spans


def simple_entry(user: str = "What is 2+3?", assistant: str = "The answer is 5.",
                 entry_id: str | None = "e0") -> Entry:
    return entry(("user", user), ("assistant", assistant), entry_id=entry_id)


def insert_code_span(e: Entry, rng: SplitMix64, code: str | None = None) -> Entry:
    """Drop one well-formed code span at a random point of the last
    assistant message; the result must always pass conversion validation."""
    toks = DEFAULT_TOKENS
    code = code if code is not None else random_text(rng, 1, 30)
    messages = list(e.messages)
    for i in range(len(messages) - 1, -1, -1):
        if messages[i].role == "assistant":
            content = messages[i].content
            cut = rng.randint(0, len(content))
            new = f"{content[:cut]}{toks.code_open}{code}{toks.code_close}{content[cut:]}"
            messages[i] = Message("assistant", new)
            break
    return e.with_messages(messages)


class LocalExecutor:
    """In-process executor used as the test oracle for captured outputs.

    Runs trusted test snippets only; the timeout parameter is accepted but
    unused because every oracle snippet is instantaneous.
    """

    def __init__(self):
        self.calls: list[str] = []

    def run(self, code: str, timeout: float):
        self.calls.append(code)
        buf = io.StringIO()
        try:
            with contextlib.redirect_stdout(buf):
                exec(code, {"__name__": "__main__"})
        except Exception as exc:
            return Failed(str(exc))
        return Captured(buf.getvalue().strip())


@pytest.fixture
def rng() -> SplitMix64:
    return SplitMix64(12345)


@pytest.fixture
def local_executor() -> LocalExecutor:
    return LocalExecutor()
