from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from freeprob.reports import FAIL, INCONCLUSIVE, PASS, CheckReport, combine_verdicts, dumps, fmt_float, to_jsonable


def test_fail_requires_witness():
    with pytest.raises(ValueError):
        CheckReport("x", FAIL, "bad")
    with pytest.raises(ValueError):
        CheckReport("x", "maybe", "?")
    assert CheckReport("x", FAIL, "bad", witness={"point": 1j}).failed


def test_combine_verdicts():
    assert combine_verdicts([PASS, PASS]) == PASS
    assert combine_verdicts([PASS, INCONCLUSIVE]) == INCONCLUSIVE
    assert combine_verdicts([INCONCLUSIVE, FAIL, PASS]) == FAIL


def test_jsonable_conversions():
    out = to_jsonable({"z": 1 - 2j, "q": Fraction(3, 4), "a": np.array([1.5, 2.0]), 2: np.int64(7)})
    assert out == {"z": {"re": 1.0, "im": -2.0}, "q": "3/4", "a": [1.5, 2.0], "2": 7}


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(fmt_float(x)) == x
    assert fmt_float(float("inf")) == "Infinity"


def test_dumps_is_deterministic_and_sorted():
    rep = CheckReport("c", PASS, "ok", margin=-1e-9, details={"b": 1, "a": [0.1, 2j]})
    text = dumps(rep)
    assert text == dumps(rep) and text.endswith("}\n") and not text.endswith("\n\n")
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["margin"] == -1e-9 and doc["details"]["a"][1] == {"re": 0.0, "im": 2.0}


def test_dumps_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps({"x": object()})
