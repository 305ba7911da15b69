"""Typed gold answers and their canonical text/JSON renderings.

Seven answer kinds cover all fifty templates. Decimal answers always carry
the two-decimal rounding the question asked for; set-semantics lists
(ordered=False) and character-set text (char_set=True) mark the templates
whose answers have no inherent order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union


@dataclass(frozen=True)
class IntegerAnswer:
    value: int


@dataclass(frozen=True)
class DecimalAnswer:
    value: float  # already rounded to two decimal places


@dataclass(frozen=True)
class TextAnswer:
    value: str
    char_set: bool = False  # match any permutation of the characters


@dataclass(frozen=True)
class IntListAnswer:
    values: tuple[int, ...]
    ordered: bool = True


@dataclass(frozen=True)
class DecimalListAnswer:
    values: tuple[float, ...]


@dataclass(frozen=True)
class MatrixAnswer:
    rows: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class SpecialAnswer:
    """String verdicts ("not invertible", "no real roots") or a root pair."""
    value: Union[str, tuple[float, float]]


GoldAnswer = Union[IntegerAnswer, DecimalAnswer, TextAnswer, IntListAnswer,
                   DecimalListAnswer, MatrixAnswer, SpecialAnswer]


def answer_to_dict(a: GoldAnswer) -> dict[str, Any]:
    if isinstance(a, IntegerAnswer):
        return {"type": "integer", "value": a.value}
    if isinstance(a, DecimalAnswer):
        return {"type": "decimal", "value": a.value}
    if isinstance(a, TextAnswer):
        d: dict[str, Any] = {"type": "text", "value": a.value}
        if a.char_set:
            d["char_set"] = True
        return d
    if isinstance(a, IntListAnswer):
        d = {"type": "int_list", "value": list(a.values)}
        if not a.ordered:
            d["ordered"] = False
        return d
    if isinstance(a, DecimalListAnswer):
        return {"type": "decimal_list", "value": list(a.values)}
    if isinstance(a, MatrixAnswer):
        return {"type": "matrix", "value": [list(r) for r in a.rows]}
    if isinstance(a, SpecialAnswer):
        value = list(a.value) if isinstance(a.value, tuple) else a.value
        return {"type": "special", "value": value}
    raise TypeError(f"not a gold answer: {a!r}")


def answer_from_dict(d: dict[str, Any]) -> GoldAnswer:
    kind, value = d["type"], d["value"]
    if kind == "integer":
        return IntegerAnswer(int(value))
    if kind == "decimal":
        return DecimalAnswer(float(value))
    if kind == "text":
        return TextAnswer(str(value), char_set=bool(d.get("char_set", False)))
    if kind == "int_list":
        return IntListAnswer(tuple(int(v) for v in value),
                             ordered=bool(d.get("ordered", True)))
    if kind == "decimal_list":
        return DecimalListAnswer(tuple(float(v) for v in value))
    if kind == "matrix":
        return MatrixAnswer(tuple(tuple(x for x in row) for row in value))
    if kind == "special":
        if isinstance(value, list):
            return SpecialAnswer((float(value[0]), float(value[1])))
        return SpecialAnswer(str(value))
    raise ValueError(f"unknown answer type {kind!r}")


def gold_text(a: GoldAnswer) -> str:
    """Canonical text rendering; used by echo sessions and reports."""
    if isinstance(a, (IntegerAnswer, DecimalAnswer)):
        return str(a.value)
    if isinstance(a, TextAnswer):
        return a.value
    if isinstance(a, (IntListAnswer, DecimalListAnswer)):
        return str(list(a.values))
    if isinstance(a, MatrixAnswer):
        return str([list(r) for r in a.rows])
    if isinstance(a, SpecialAnswer):
        return str(a.value) if isinstance(a.value, tuple) else a.value
    raise TypeError(f"not a gold answer: {a!r}")
