"""Dataset pool: ingest heterogeneous SFT sources, normalize to ChatML,
estimate per-source value/quality ratios, and run the greedy selection.

A source is scored by W (fraction of sampled entries an LLM judge deems
suitable for tool assistance) and Q (fraction of sampled entries a human
review marked clean). Selection sorts sources by Q*W descending and takes
whole datasets in order, truncating the one that crosses the budget so the
total hits the budget exactly.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .chatml import Entry, Message, entry_from_dict
from .errors import AdapterMismatch, ConfigError, EmptySample
from .rng import SplitMix64

logger = logging.getLogger(__name__)

ADAPTERS = ("chatml", "instruction_io", "conversations", "qa_pair")

# Default sample size per source for W/Q estimation; configurable everywhere
# it is used.
DEFAULT_SAMPLE_N = 500


@dataclass(frozen=True)
class SourceDescriptor:
    source_id: str
    adapter: str
    path: str
    entry_count: int = 0

    def __post_init__(self) -> None:
        if self.adapter not in ADAPTERS:
            raise ConfigError(f"unknown adapter {self.adapter!r} for {self.source_id}")


@dataclass(frozen=True)
class PoolStats:
    source_id: str
    sample_size: int
    valuable_count: int
    clean_count: int

    @property
    def w(self) -> float:
        return self.valuable_count / self.sample_size

    @property
    def q(self) -> float:
        return self.clean_count / self.sample_size

    @property
    def qw(self) -> float:
        return self.q * self.w


@dataclass(frozen=True)
class SelectionBudget:
    target_entries: int = 10_000_000

    def __post_init__(self) -> None:
        if self.target_entries < 1:
            raise ConfigError("budget must be >= 1")


# --------------------------------------------------------------------------
# Adapters: one raw record -> list of (role, content)

def _adapt_chatml(rec: dict) -> list[tuple[str, str]]:
    e = entry_from_dict(rec)
    return [(m.role, m.content) for m in e.messages]


def _adapt_instruction_io(rec: dict) -> list[tuple[str, str]]:
    if "instruction" not in rec or "output" not in rec:
        raise KeyError("instruction/output")
    user = str(rec["instruction"])
    extra_input = rec.get("input")
    if extra_input:
        user = f"{user}\n{extra_input}"
    return [("user", user), ("assistant", str(rec["output"]))]


_CONV_ROLE = {"human": "user", "user": "user", "gpt": "assistant",
              "assistant": "assistant", "system": "system"}


def _adapt_conversations(rec: dict) -> list[tuple[str, str]]:
    turns = rec.get("conversations")
    if not isinstance(turns, list) or not turns:
        raise KeyError("conversations")
    out: list[tuple[str, str]] = []
    for t in turns:
        speaker = t.get("from", t.get("role"))
        value = t.get("value", t.get("content"))
        if speaker not in _CONV_ROLE or not isinstance(value, str):
            raise KeyError("conversations turn")
        out.append((_CONV_ROLE[speaker], value))
    return out


def _adapt_qa_pair(rec: dict) -> list[tuple[str, str]]:
    if "question" not in rec or "answer" not in rec:
        raise KeyError("question/answer")
    return [("user", str(rec["question"])), ("assistant", str(rec["answer"]))]


_ADAPTER_FN = {
    "chatml": _adapt_chatml,
    "instruction_io": _adapt_instruction_io,
    "conversations": _adapt_conversations,
    "qa_pair": _adapt_qa_pair,
}


def normalize_source(desc: SourceDescriptor, *, skip_bad: bool = False) -> Iterator[Entry]:
    """Stream a raw JSONL source as normalized entries tagged with source_id.

    Raises AdapterMismatch with the offending line number, or logs and
    skips the record when skip_bad is set. The chatml adapter is lossless.
    """
    fn = _ADAPTER_FN[desc.adapter]
    with open(desc.path, "r", encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise KeyError("record is not an object")
                pairs = fn(rec)
                messages = tuple(Message(r, c) for r, c in pairs)
            except Exception as exc:
                if skip_bad:
                    logger.warning("%s line %d skipped: %s", desc.source_id, line_no, exc)
                    continue
                raise AdapterMismatch(line_no, f"{desc.source_id}: {exc}") from exc
            yield Entry(messages=messages, source_id=desc.source_id,
                        entry_id=f"{desc.source_id}#{line_no - 1}")


def sample_entries(source: Iterable[Entry], n: int, seed: int) -> list[Entry]:
    """Uniform sample without replacement via single-pass reservoir.

    Deterministic per seed. A source smaller than n returns everything
    with a warning instead of failing.
    """
    if n < 1:
        raise ConfigError("sample size must be >= 1")
    rng = SplitMix64(seed)
    reservoir: list[Entry] = []
    seen = 0
    for e in source:
        seen += 1
        if len(reservoir) < n:
            reservoir.append(e)
        else:
            j = rng.randint(0, seen - 1)
            if j < n:
                reservoir[j] = e
    if seen < n:
        logger.warning("source yielded %d entries, fewer than requested %d", seen, n)
    return reservoir


def compute_stats(judgements: Sequence[bool], clean_labels: Sequence[bool],
                  source_id: str = "") -> PoolStats:
    """Exact W/Q ratios over one source's sample."""
    if not judgements or not clean_labels:
        raise EmptySample("stats need at least one sample")
    if len(judgements) != len(clean_labels):
        raise ValueError(
            f"judgements ({len(judgements)}) and labels ({len(clean_labels)}) differ in length")
    return PoolStats(
        source_id=source_id,
        sample_size=len(judgements),
        valuable_count=sum(bool(j) for j in judgements),
        clean_count=sum(bool(c) for c in clean_labels),
    )


def rank_and_select(stats: Sequence[PoolStats], counts: dict[str, int],
                    budget: SelectionBudget) -> list[tuple[str, int]]:
    """Greedy selection: sources in descending Q*W order, whole datasets in
    sequence, boundary dataset truncated so the total equals the budget.

    Ties on Q*W break by source_id ascending. A pool smaller than the
    budget is taken in full. Sources contributing zero entries are omitted.
    """
    for s in stats:
        if s.source_id not in counts:
            raise ConfigError(f"no entry count for source {s.source_id}")
    ranked = sorted(stats, key=lambda s: (-s.qw, s.source_id))
    remaining = budget.target_entries
    out: list[tuple[str, int]] = []
    for s in ranked:
        if remaining <= 0:
            break
        take = min(counts[s.source_id], remaining)
        if take > 0:
            out.append((s.source_id, take))
            remaining -= take
    return out


# --------------------------------------------------------------------------
# Manifest / labels files

def load_manifest(path: str | Path) -> list[SourceDescriptor]:
    """Manifest JSON: {"sources": [{"source_id", "adapter", "path"}, ...]}.
    Relative source paths resolve against the manifest's directory."""
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    sources = obj.get("sources")
    if not isinstance(sources, list) or not sources:
        raise ConfigError("manifest has no sources")
    out: list[SourceDescriptor] = []
    for rec in sources:
        try:
            src_path = Path(rec["path"])
            if not src_path.is_absolute():
                src_path = p.parent / src_path
            out.append(SourceDescriptor(
                source_id=rec["source_id"], adapter=rec["adapter"],
                path=str(src_path), entry_count=int(rec.get("entry_count", 0))))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad manifest record {rec!r}: {exc}") from exc
    ids = [s.source_id for s in out]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate source_id in manifest")
    return out


def load_clean_labels(path: str | Path) -> dict[str, dict[int, bool]]:
    """Labels CSV `source_id,entry_index,clean` where entry_index addresses
    the seeded sample (the rows a reviewer actually saw), clean in {0,1}."""
    labels: dict[str, dict[int, bool]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fp:
        for row_no, row in enumerate(csv.reader(fp), start=1):
            if not row or row[0] == "source_id":
                continue
            if len(row) != 3 or row[2] not in ("0", "1"):
                raise ConfigError(f"labels row {row_no} malformed: {row!r}")
            labels.setdefault(row[0], {})[int(row[1])] = row[2] == "1"
    return labels
