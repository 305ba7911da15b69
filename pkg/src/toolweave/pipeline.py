"""In-process pipeline stages: judge -> convert -> trivial -> execute ->
consistency.

Each stage takes and returns plain entry lists so the CLI subcommands and
library callers compose the same code paths (their kept sets must agree).
Endpoint-facing stages run under a bounded worker pool and can journal
outcomes for resumable runs; order of results always follows input order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .annotate import (RejectReason, ReplyBackend, Verdict, parse_verdict,
                       rejection_report, validate_conversion)
from .chatml import Entry, parse_entry, serialize_entry
from .errors import RequestFailed
from .filtering import Executor, consistency_filter, entry_is_trivial, execute_and_inject
from .journal import Journal

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 8


def _pooled(items: Sequence, fn, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def judge_entries(entries: Sequence[Entry], backend: ReplyBackend,
                  workers: int = DEFAULT_WORKERS,
                  journal: Journal | None = None) -> list[tuple[Entry, Verdict]]:
    """Verdict per entry; request failures are logged and count as NO so a
    flaky endpoint can only shrink the valuable set."""
    done = journal.load() if journal else {}

    def one(e: Entry) -> tuple[Entry, Verdict]:
        if e.entry_id and e.entry_id in done:
            return e, Verdict(done[e.entry_id]["outcome"])
        try:
            verdict = parse_verdict(backend(e))
        except RequestFailed as exc:
            logger.warning("judge request failed for %s: %s", e.entry_id, exc)
            verdict = Verdict.NO
        if journal and e.entry_id:
            journal.append(e.entry_id, verdict.value)
        return e, verdict

    return _pooled(entries, one, workers)


def convert_entries(entries: Sequence[Entry], backend: ReplyBackend,
                    workers: int = DEFAULT_WORKERS,
                    journal: Journal | None = None
                    ) -> list[tuple[Entry, Entry | RejectReason]]:
    """Request a conversion per entry and validate the reply."""
    done = journal.load() if journal else {}

    def one(e: Entry) -> tuple[Entry, Entry | RejectReason]:
        if e.entry_id and e.entry_id in done:
            rec = done[e.entry_id]
            if rec["outcome"] == "kept":
                return e, parse_entry(rec["entry"])
            return e, RejectReason(rec["outcome"])
        if not e.assistant_messages():
            # Conversion needs assistant text to weave spans into; nothing
            # the converter returns could validate against this entry.
            logger.warning("entry %s has no assistant message", e.entry_id)
            return e, RejectReason.ParseFailure
        try:
            reply = backend(e)
        except RequestFailed:
            result: Entry | RejectReason = RejectReason.RequestFailed
        else:
            result = validate_conversion(e, reply)
        if journal and e.entry_id:
            if isinstance(result, Entry):
                journal.append(e.entry_id, "kept", entry=serialize_entry(result))
            else:
                journal.append(e.entry_id, result.value)
        return e, result

    return _pooled(entries, one, workers)


def filter_trivial(entries: Sequence[Entry]) -> list[tuple[Entry, RejectReason | None]]:
    return [(e, RejectReason.TrivialAssignPrint if entry_is_trivial(e) else None)
            for e in entries]


def exec_filter(entries: Sequence[Entry], executor: Executor,
                timeout: float = 30.0, workers: int = 1,
                journal: Journal | None = None
                ) -> list[tuple[Entry, RejectReason | None]]:
    """Inject execution results; entries where no span succeeded are
    rejected. The returned entry is the rewritten one."""
    done = journal.load() if journal else {}

    def one(e: Entry) -> tuple[Entry, RejectReason | None]:
        if e.entry_id and e.entry_id in done:
            rec = done[e.entry_id]
            if rec["outcome"] == "kept":
                return parse_entry(rec["entry"]), None
            return e, RejectReason(rec["outcome"])
        rewritten, kept = execute_and_inject(e, executor, timeout)
        outcome = None if kept else RejectReason.ExecFailedAll
        if journal and e.entry_id:
            if kept:
                journal.append(e.entry_id, "kept", entry=serialize_entry(rewritten))
            else:
                journal.append(e.entry_id, RejectReason.ExecFailedAll.value)
        return (rewritten if kept else e), outcome

    return _pooled(entries, one, workers)


def consistency_stage(entries: Sequence[Entry]) -> list[tuple[Entry, RejectReason | None]]:
    return [(e, None if consistency_filter(e) else RejectReason.Inconsistent)
            for e in entries]


@dataclass
class PipelineResult:
    kept: list[Entry] = field(default_factory=list)
    # entry_id -> None (kept) or the single reason it was dropped; only
    # entries judged valuable appear here (the conversion taxonomy).
    outcomes: dict[str, RejectReason | None] = field(default_factory=dict)
    not_valuable: list[str] = field(default_factory=list)

    def report(self):
        return rejection_report(self.outcomes.values())


def run_pipeline(entries: Sequence[Entry], judge_backend: ReplyBackend,
                 convert_backend: ReplyBackend, executor: Executor,
                 timeout: float = 30.0, workers: int = DEFAULT_WORKERS) -> PipelineResult:
    """The whole conversion chain over already-selected entries."""
    result = PipelineResult()
    valuable: list[Entry] = []
    for e, verdict in judge_entries(entries, judge_backend, workers):
        if verdict is Verdict.YES:
            valuable.append(e)
        else:
            result.not_valuable.append(e.entry_id or "")

    def record(e: Entry, outcome: RejectReason | None) -> None:
        result.outcomes[e.entry_id or ""] = outcome

    converted: list[Entry] = []
    for e, outcome in convert_entries(valuable, convert_backend, workers):
        if isinstance(outcome, RejectReason):
            record(e, outcome)
        else:
            converted.append(outcome)

    survivors: list[Entry] = []
    for e, reject in filter_trivial(converted):
        if reject:
            record(e, reject)
        else:
            survivors.append(e)

    executed: list[Entry] = []
    for e, reject in exec_filter(survivors, executor, timeout, workers):
        if reject:
            record(e, reject)
        else:
            executed.append(e)

    for e, reject in consistency_stage(executed):
        record(e, reject)
        if reject is None:
            result.kept.append(e)
    return result
