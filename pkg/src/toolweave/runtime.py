"""Inference-time special-token interpreter.

Watches a token stream for code-span delimiters: on a close it extracts
the enclosed text, hands it to the executor, and either appends the
captured output wrapped in result delimiters (so the generation context
matches the training format) or excises the whole failed span from the
conditioned context before the next token is requested.

The state machine is exposed as a pure `step` on an immutable session
state; `run_inference` is just the fold with stop conditions. One session
is single-threaded by contract; run as many sessions concurrently as you
like with independent executors.
"""

from __future__ import annotations

import enum
import json
import logging
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

from .annotate import ChatClient
from .chatml import DEFAULT_TOKENS, SpecialTokens
from .filtering import Captured, Executor

logger = logging.getLogger(__name__)


class TokenSource(Protocol):
    def next(self, context: list[str]) -> str:
        """Next token given the full conditioned context; return the
        end-of-text token to stop."""
        ...


@dataclass(frozen=True)
class GenConfig:
    max_new_tokens: int = 512
    temperature: float = 0.0
    timeout: float = 30.0


class Mode(enum.Enum):
    PLAIN = "plain"
    IN_CODE = "in_code"


@dataclass(frozen=True)
class SessionState:
    """inputs is always the prompt followed by outputs; appends and
    excisions keep the two in lockstep."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...] = ()
    mode: Mode = Mode.PLAIN
    code_start: int | None = None  # index of the open token in outputs
    emitted: int = 0               # tokens appended to outputs, injections included
    stray_closes: int = 0


def step(state: SessionState, token: str, ex: Executor,
         cfg: GenConfig = GenConfig(),
         toks: SpecialTokens = DEFAULT_TOKENS) -> SessionState:
    """One transition: append the token, then react to delimiters.

    A close in plain mode degrades to plain text (lint-logged); an open
    inside a code span stays part of the snippet text. Code extraction is
    the concatenated text strictly between the delimiter tokens, so token
    granularity never matters.
    """
    close_idx = len(state.outputs)
    outputs = state.outputs + (token,)
    inputs = state.inputs + (token,)
    emitted = state.emitted + 1

    if token == toks.code_open and state.mode is Mode.PLAIN:
        return replace(state, inputs=inputs, outputs=outputs, emitted=emitted,
                       mode=Mode.IN_CODE, code_start=close_idx)

    if token == toks.code_close:
        if state.mode is Mode.PLAIN:
            logger.warning("stray close token treated as plain text")
            return replace(state, inputs=inputs, outputs=outputs, emitted=emitted,
                           stray_closes=state.stray_closes + 1)
        assert state.code_start is not None
        snippet = "".join(outputs[state.code_start + 1:close_idx])
        outcome = ex.run(snippet, cfg.timeout)
        if isinstance(outcome, Captured):
            injected = (toks.result_open, outcome.output.strip(), toks.result_close)
            return replace(state, inputs=inputs + injected, outputs=outputs + injected,
                           emitted=emitted + len(injected),
                           mode=Mode.PLAIN, code_start=None)
        # Failed/Timeout: drop the whole span (open through close) from the
        # conditioned context so later generation never sees it.
        span_len = len(outputs) - state.code_start
        return replace(state, inputs=inputs[:len(inputs) - span_len],
                       outputs=outputs[:state.code_start], emitted=emitted,
                       mode=Mode.PLAIN, code_start=None)

    return replace(state, inputs=inputs, outputs=outputs, emitted=emitted)


@dataclass
class InferenceResult:
    outputs: list[str]
    stop_reason: str            # "end_of_text" | "budget"
    abandoned_span: bool = False  # budget ran out mid-code-span
    stray_closes: int = 0

    @property
    def text(self) -> str:
        return "".join(self.outputs)


def run_inference(prompt: Sequence[str], src: TokenSource, ex: Executor,
                  cfg: GenConfig = GenConfig(),
                  toks: SpecialTokens = DEFAULT_TOKENS) -> InferenceResult:
    """Generate until the end-of-text token or the token budget.

    The budget counts every token appended to outputs, injected result
    tokens included; excised failed spans are not refunded. When the
    budget lands mid-code-span the span is abandoned unexecuted and the
    partial output is returned flagged.
    """
    if not prompt:
        raise ValueError("prompt must be non-empty")
    state = SessionState(inputs=tuple(prompt))
    stop = "budget"
    while state.emitted < cfg.max_new_tokens:
        token = src.next(list(state.inputs))
        state = step(state, token, ex, cfg, toks)
        if state.outputs and state.outputs[-1] == toks.end_of_text:
            stop = "end_of_text"
            break
    return InferenceResult(outputs=list(state.outputs), stop_reason=stop,
                           abandoned_span=(stop == "budget" and state.mode is Mode.IN_CODE),
                           stray_closes=state.stray_closes)


# --------------------------------------------------------------------------
# Token sources

class ScriptSource:
    """Deterministic scripted stream for tests and offline runs; yields the
    script in order, then the end-of-text token forever. Use a fresh
    instance per replay."""

    def __init__(self, script: Sequence[str],
                 toks: SpecialTokens = DEFAULT_TOKENS):
        self.script = list(script)
        self._i = 0
        self._eot = toks.end_of_text

    def next(self, context: list[str]) -> str:
        if self._i < len(self.script):
            tok = self.script[self._i]
            self._i += 1
            return tok
        return self._eot

    @classmethod
    def from_json(cls, path: str | Path,
                  toks: SpecialTokens = DEFAULT_TOKENS) -> "ScriptSource":
        script = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(script, list) or not all(isinstance(t, str) for t in script):
            raise ValueError(f"{path}: script file must be a JSON list of strings")
        return cls(script, toks)


def _split_on_tokens(text: str, toks: SpecialTokens) -> list[str]:
    """Split text into plain chunks and delimiter tokens (delimiters kept
    as their own items)."""
    markers = toks.span_tokens + (toks.end_of_text,)
    out: list[str] = []
    pos = 0
    while pos < len(text):
        best: tuple[int, str] | None = None
        for tok in markers:
            i = text.find(tok, pos)
            if i != -1 and (best is None or i < best[0]):
                best = (i, tok)
        if best is None:
            out.append(text[pos:])
            break
        i, tok = best
        if i > pos:
            out.append(text[pos:i])
        out.append(tok)
        pos = i + len(tok)
    return out


class EndpointTokenSource:
    """Adapts a chat endpoint to incremental decoding.

    Each request completes from the current context; the reply is split at
    delimiter boundaries and replayed as tokens, but only up to the first
    code close: everything after it was generated without the execution
    result, so the source re-requests once the interpreter has injected
    it. A reply with no code spans ends the stream.
    """

    def __init__(self, client: ChatClient, toks: SpecialTokens = DEFAULT_TOKENS):
        self.client = client
        self.toks = toks
        self._pending: deque[str] = deque()

    def next(self, context: list[str]) -> str:
        if not self._pending:
            reply = self.client.complete([{"role": "user", "content": "".join(context)}])
            pieces = _split_on_tokens(reply, self.toks)
            queue: list[str] = []
            saw_close = False
            for piece in pieces:
                queue.append(piece)
                if piece == self.toks.code_close:
                    saw_close = True
                    break
            if not saw_close and (not queue or queue[-1] != self.toks.end_of_text):
                queue.append(self.toks.end_of_text)
            self._pending.extend(queue)
        return self._pending.popleft()
