"""Check reports and their JSON rendering.

Every verdict produced by the package is a :class:`CheckReport`.  A ``fail``
always carries a witness; a ``pass`` is only ever a statement about the
points or orders that were actually examined, and the ``statement`` field
spells that out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CheckReport:
    check: str
    verdict: str
    statement: str
    margin: float | None = None
    witness: Any = None
    tolerance: float | None = None
    grid: dict | None = None
    evaluation_failures: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FAIL and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "statement": self.statement,
            "margin": self.margin,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "grid": self.grid,
            "evaluation_failures": self.evaluation_failures,
            "details": self.details,
        }


def combine_verdicts(verdicts) -> str:
    """Fail dominates inconclusive, which dominates pass."""
    verdicts = list(verdicts)
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return PASS


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert to plain JSON types.

    Complex numbers become ``{"re": .., "im": ..}``, fractions become
    ``"p/q"`` strings and floats are kept as floats (formatting happens in
    :func:`dumps`).
    """
    if isinstance(obj, CheckReport):
        return to_jsonable(obj.to_dict())
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, int):
        return obj
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return to_jsonable(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys and 17-significant-digit floats."""
    data = to_jsonable(obj)
    # The C encoder formats floats with repr(); go through the pure-Python
    # iterator so the float formatter can be swapped.
    iterencode = json.encoder._make_iterencode(
        {}, _reject, json.encoder.py_encode_basestring_ascii, 2,
        lambda o: fmt_float(o), ": ", ",", True, False, True,
    )
    return "".join(iterencode(data, 0)) + "\n"


def _reject(obj):
    raise TypeError(f"cannot serialise {type(obj).__name__}")
