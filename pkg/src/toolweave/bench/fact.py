"""Factual-retrieval benchmark plumbing.

The construction prompts are emitted for an external model; the drafted
pairs then go through human verification by hand, so this module only
emits the prompts and loads a verified {question, answer} JSONL file for
evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .answers import TextAnswer

FACT_TOPICS = (
    "Geography",
    "History",
    "Science",
    "Technology",
    "Mathematics",
    "Culture and Arts",
    "Sports",
    "Politics",
    "Language and Grammar",
    "Current Affairs",
    "Entertainment",
    "Medicine and Health",
    "Economics and Business",
    "Religion and Mythology",
    "General Knowledge",
)

_PROMPT_FORMAT = (
    "Generate 100 Q&A pairs for LLM factual retrieval testing. "
    "The question topic should be related with {topic}. "
    "Return them as a Python dictionary, with concise answers (3-5 words)."
)


def emit_fact_prompts() -> list[str]:
    """The 15 construction prompts, one per topic, byte-stable."""
    return [_PROMPT_FORMAT.format(topic=t) for t in FACT_TOPICS]


@dataclass(frozen=True)
class FactPair:
    question: str
    answer: TextAnswer


def load_fact_pairs(path: str | Path) -> list[FactPair]:
    """Verified pair file: one {"question": ..., "answer": ...} per line."""
    pairs: list[FactPair] = []
    with open(path, "r", encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "question" not in rec or "answer" not in rec:
                raise ValueError(f"{path} line {line_no}: need question and answer")
            pairs.append(FactPair(question=str(rec["question"]),
                                  answer=TextAnswer(str(rec["answer"]))))
    return pairs
