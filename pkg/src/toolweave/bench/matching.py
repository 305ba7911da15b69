"""Match free-form predicted text against a typed gold answer.

The rules are a fixed contract, not heuristics to tune: numbers read the
last number in the text, lists and matrices read the last bracketed
literal, text matches as a case-insensitive substring. Decimal comparisons
allow 0.005 absolute slack, honoring the questions' two-decimal rounding.
Unparseable predictions never raise; they just fail to match.
"""

from __future__ import annotations

import ast
import math
import re

from .answers import (DecimalAnswer, DecimalListAnswer, GoldAnswer, IntegerAnswer,
                      IntListAnswer, MatrixAnswer, SpecialAnswer, TextAnswer)

DECIMAL_TOLERANCE = 0.005

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


def _numbers(text: str) -> list[str]:
    return _NUMBER_RE.findall(text)


def _is_integer_literal(tok: str) -> bool:
    return re.fullmatch(r"-?\d+", tok) is not None


def _bracketed_regions(text: str) -> list[str]:
    """Top-level balanced [...] regions, left to right."""
    regions: list[str] = []
    depth = 0
    start = -1
    for i, ch in enumerate(text):
        if ch == "[":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "]" and depth > 0:
            depth -= 1
            if depth == 0:
                regions.append(text[start:i + 1])
    return regions


def _last_literal_list(text: str) -> list | None:
    regions = _bracketed_regions(text)
    for region in reversed(regions):
        try:
            value = ast.literal_eval(region)
        except (ValueError, SyntaxError):
            continue
        if isinstance(value, list):
            return value
    return None


def _num_eq(predicted: object, gold: float, tolerance: float) -> bool:
    if not isinstance(predicted, (int, float)) or isinstance(predicted, bool):
        return False
    return abs(float(predicted) - gold) <= tolerance


def answer_match(predicted: str, gold: GoldAnswer) -> bool:
    if isinstance(gold, IntegerAnswer):
        nums = _numbers(predicted)
        if not nums:
            return False
        last = nums[-1]
        if _is_integer_literal(last):
            return int(last) == gold.value
        try:
            return float(last) == float(gold.value)
        except OverflowError:
            return False

    if isinstance(gold, DecimalAnswer):
        nums = _numbers(predicted)
        return bool(nums) and abs(float(nums[-1]) - gold.value) <= DECIMAL_TOLERANCE

    if isinstance(gold, TextAnswer):
        if gold.char_set:
            want = set(gold.value.lower())
            if not want:
                return True
            return any(set(tok.lower()) == want for tok in _TOKEN_RE.findall(predicted))
        return gold.value.lower() in predicted.lower()

    if isinstance(gold, IntListAnswer):
        got = _last_literal_list(predicted)
        if got is None:
            return False
        if not gold.ordered:
            try:
                return {float(x) for x in got} == {float(v) for v in gold.values}
            except (TypeError, ValueError):
                return False
        return (len(got) == len(gold.values)
                and all(_num_eq(p, float(v), 0.0) for p, v in zip(got, gold.values)))

    if isinstance(gold, DecimalListAnswer):
        got = _last_literal_list(predicted)
        return (got is not None and len(got) == len(gold.values)
                and all(_num_eq(p, v, DECIMAL_TOLERANCE) for p, v in zip(got, gold.values)))

    if isinstance(gold, MatrixAnswer):
        got = _last_literal_list(predicted)
        if got is None or len(got) != len(gold.rows):
            return False
        for got_row, want_row in zip(got, gold.rows):
            if not isinstance(got_row, list) or len(got_row) != len(want_row):
                return False
            for p, w in zip(got_row, want_row):
                if not isinstance(p, (int, float)) or isinstance(p, bool):
                    return False
                if not math.isclose(float(p), float(w), rel_tol=1e-6, abs_tol=1e-9):
                    return False
        return True

    if isinstance(gold, SpecialAnswer):
        if isinstance(gold.value, str):
            return gold.value.lower() in predicted.lower()
        nums = _numbers(predicted)
        if len(nums) < 2:
            return False
        p1, p2 = float(nums[-2]), float(nums[-1])
        r1, r2 = gold.value
        close = lambda a, b: abs(a - b) <= DECIMAL_TOLERANCE
        return ((close(p1, r1) and close(p2, r2))
                or (close(p1, r2) and close(p2, r1)))

    raise TypeError(f"not a gold answer: {gold!r}")
