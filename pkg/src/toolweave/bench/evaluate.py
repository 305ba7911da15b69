"""Accuracy evaluation: one zero-shot session per question.

A session is any callable taking the question text (the sole user
message) and returning the model's full reply text. Per-question failures
are recorded as unmatched and never abort the run.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .answers import GoldAnswer, answer_to_dict
from .matching import answer_match

logger = logging.getLogger(__name__)

Session = Callable[[str], str]


@dataclass
class EvalRecord:
    question: str
    gold: GoldAnswer
    predicted_text: str
    matched: bool
    template_id: int | None = None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"question": self.question,
                             "gold": answer_to_dict(self.gold),
                             "predicted_text": self.predicted_text,
                             "matched": self.matched}
        if self.template_id is not None:
            d["template_id"] = self.template_id
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class EvalReport:
    records: list[EvalRecord] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def matched(self) -> int:
        return sum(r.matched for r in self.records)

    @property
    def accuracy(self) -> float:
        return self.matched / self.total if self.total else 0.0

    def per_template(self) -> dict[int, dict[str, float]]:
        buckets: dict[int, list[EvalRecord]] = {}
        for r in self.records:
            if r.template_id is not None:
                buckets.setdefault(r.template_id, []).append(r)
        return {
            tid: {"total": len(rs), "matched": sum(r.matched for r in rs),
                  "accuracy": sum(r.matched for r in rs) / len(rs)}
            for tid, rs in sorted(buckets.items())
        }

    def to_dict(self) -> dict[str, Any]:
        return {"accuracy": self.accuracy, "total": self.total,
                "matched": self.matched, "per_template": self.per_template(),
                "records": [r.to_dict() for r in self.records]}


def evaluate(pairs: Sequence[Any], session: Session, workers: int = 1) -> EvalReport:
    """Run one session per pair (anything with .question and .answer) and
    score with answer_match."""

    def run_one(pair: Any) -> EvalRecord:
        question, gold = pair.question, pair.answer
        template_id = getattr(pair, "template_id", None)
        try:
            predicted = session(question)
        except Exception as exc:
            logger.warning("session failed for %r: %s", question[:60], exc)
            return EvalRecord(question=question, gold=gold, predicted_text="",
                              matched=False, template_id=template_id, error=str(exc))
        return EvalRecord(question=question, gold=gold, predicted_text=predicted,
                          matched=answer_match(predicted, gold),
                          template_id=template_id)

    if workers <= 1 or len(pairs) <= 1:
        records = [run_one(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_one, pairs))
    return EvalReport(records=records)
