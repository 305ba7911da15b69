"""Append-only run journal so interrupted batch stages resume cleanly.

One JSONL line per decided entry: {"entry_id": ..., "outcome": ...} plus
stage-specific payload. A single writer serializes appends; readers load
the whole file up front.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any


class Journal:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._fp = None

    def load(self) -> dict[str, dict[str, Any]]:
        """entry_id -> last recorded record (later lines win)."""
        done: dict[str, dict[str, Any]] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fp:
                for line in fp:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    if rec.get("entry_id"):
                        done[rec["entry_id"]] = rec
        return done

    def append(self, entry_id: str, outcome: str, **payload: Any) -> None:
        rec = {"entry_id": entry_id, "outcome": outcome, **payload}
        line = json.dumps(rec, ensure_ascii=False)
        with self._lock:
            if self._fp is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._fp = open(self.path, "a", encoding="utf-8")
            self._fp.write(line + "\n")
            self._fp.flush()

    def close(self) -> None:
        with self._lock:
            if self._fp is not None:
                self._fp.close()
                self._fp = None

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
