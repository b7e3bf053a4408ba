from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeprob.errors import InvalidMeasureError
from freeprob.levy import (
    FiniteMeasure,
    FreeCharacteristicTriplet,
    GeneratingPair,
    KFunction,
    LevyMeasure,
    NevanlinnaPair,
    check_k_limits,
    dyadic_grid,
    fsd_monotonicity_check,
    k_from_rho,
    levy_khintchine_derivative_eval,
    levy_khintchine_eval,
    nevanlinna_cprime_eval,
    nevanlinna_cumulant_eval,
    pair_from_triplet,
    triplet_from_nevanlinna,
    triplet_from_pair,
    voiculescu_from_pair_eval,
)
from freeprob.measures import catalog_lookup
from freeprob.transforms import free_cumulant_transform_eval

LOWER = [0.3 - 0.7j, -1.2 - 0.4j, 2.0 - 1.5j, -0.05 - 0.2j, 0.8 - 0.01j]


def test_levy_measure_validation():
    with pytest.raises(InvalidMeasureError):
        LevyMeasure(atoms=((0, 1),))
    with pytest.raises(InvalidMeasureError):
        LevyMeasure(atoms=((1, -1),))
    with pytest.raises(InvalidMeasureError):
        FreeCharacteristicTriplet(-1, 0)


def test_semicircle_triplet_gives_w_squared():
    t = catalog_lookup("semicircle", {}).triplet
    for w in LOWER:
        assert levy_khintchine_eval(t, w) == pytest.approx(w * w, abs=1e-14)


def test_free_poisson_triplet_matches_closed_form():
    t = catalog_lookup("free_poisson", {"lambda": 1, "alpha": 1}).triplet
    for w in LOWER:
        assert levy_khintchine_eval(t, w) == pytest.approx(w / (1 - w), abs=1e-12)


_loc = st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda x: x != 0)
_mass = st.fractions(min_value=Fraction(1, 5), max_value=3, max_denominator=5)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=0, max_value=2, max_denominator=5),
       st.fractions(min_value=-2, max_value=2, max_denominator=5),
       st.lists(st.tuples(_loc, _mass), max_size=4, unique_by=lambda p: p[0]))
def test_pair_triplet_roundtrip_is_exact_on_atoms(a, eta, atoms):
    t = FreeCharacteristicTriplet(a, eta, LevyMeasure(atoms=tuple(atoms)))
    back = triplet_from_pair(pair_from_triplet(t))
    assert back.a == a and back.eta == eta
    assert sorted(back.nu.atoms) == sorted(atoms)


@pytest.mark.parametrize("name,params", [
    ("semicircle", {}), ("free_poisson", {"lambda": 1, "alpha": 1}),
    ("free_poisson", {"lambda": 2, "alpha": Fraction(1, 2)}), ("free_gamma", {"c": 1, "alpha": 1}),
])
def test_generating_pair_agrees_with_triplet(name, params):
    t = catalog_lookup(name, params).triplet
    p = pair_from_triplet(t)
    for w in LOWER:
        lk = levy_khintchine_eval(t, w)
        via_pair = w * voiculescu_from_pair_eval(p, 1 / w)
        assert abs(lk - via_pair) < 1e-8


def test_free_gamma_density_pair_roundtrip():
    t = catalog_lookup("free_gamma", {"c": 1, "alpha": 1}).triplet
    back = triplet_from_pair(pair_from_triplet(t))
    assert float(back.eta) == pytest.approx(float(t.eta), abs=1e-10)
    for x in (0.1, 1.0, 3.0):
        assert back.nu.density_at(x) == pytest.approx(t.nu.density_at(x), rel=1e-12)


def test_derivative_matches_difference_quotient():
    t = catalog_lookup("free_gamma", {"c": 1, "alpha": 1}).triplet
    w, h = 0.4 - 0.6j, 1e-5
    num = (levy_khintchine_eval(t, w + h) - levy_khintchine_eval(t, w - h)) / (2 * h)
    assert levy_khintchine_derivative_eval(t, w) == pytest.approx(num, abs=1e-7)


def test_k_from_rho_atoms_exact():
    rho = FiniteMeasure(atoms=((Fraction(1), Fraction(1, 2)), (Fraction(-2), Fraction(1))))
    assert k_from_rho(rho, Fraction(1, 2)) == Fraction(1, 2) * 2
    assert k_from_rho(rho, Fraction(3, 2)) == 0
    assert k_from_rho(rho, Fraction(-1)) == Fraction(5, 4)


def test_k_from_table_matches_quadrature():
    xs = np.linspace(-3, 4, 71)
    rho = FiniteMeasure.from_table(xs, np.exp(-xs ** 2))
    from scipy import integrate

    for x in (0.05, 1.234, -1.7):
        if x > 0:
            ref = integrate.quad(lambda y: (1 + y * y) / y / y * rho.density(y), x, 4, points=list(xs[xs > x]), limit=200)[0]
        else:
            ref = integrate.quad(lambda y: (1 + y * y) / y / y * rho.density(y), -3, x, points=list(xs[xs < x]), limit=200)[0]
        assert k_from_rho(rho, x) == pytest.approx(ref, rel=1e-9)


def test_semicircle_nevanlinna_pair():
    p = NevanlinnaPair(0, FiniteMeasure.point(0, 2))
    t = triplet_from_nevanlinna(p)
    assert t.a == 1 and t.eta == 0 and t.nu.is_zero
    assert nevanlinna_cprime_eval(p, -1j) == pytest.approx(-2j)
    assert nevanlinna_cumulant_eval(p, 0.5 - 0.5j) == pytest.approx((0.5 - 0.5j) ** 2)


def test_nevanlinna_atoms_loop():
    rho = FiniteMeasure(atoms=((0.5, 0.3), (-1.5, 0.2)))
    p = NevanlinnaPair(0.25, rho)
    t = triplet_from_nevanlinna(p)
    for w in LOWER:
        assert levy_khintchine_eval(t, w) == pytest.approx(nevanlinna_cumulant_eval(p, w), abs=1e-9)


@pytest.mark.parametrize("a,b,monotone", [(0, 1, True), (2, 1, True), (2, Fraction(1, 2), False),
                                          (1, Fraction(1, 4), True), (1, Fraction(1, 5), False)])
def test_free_meixner_monotone_k_boundary(a, b, monotone):
    nu = catalog_lookup("free_meixner", {"a": a, "b": b}).triplet.nu
    rep = fsd_monotonicity_check(nu)
    assert rep.passed is monotone
    if not monotone:
        assert rep.witness is not None


def test_atomic_levy_measure_fails_monotonicity():
    rep = fsd_monotonicity_check(catalog_lookup("free_poisson", {}).triplet.nu)
    assert rep.failed and rep.witness is not None


def test_zero_levy_measure_passes():
    assert fsd_monotonicity_check(LevyMeasure()).passed


def test_free_stable_k_is_monotone_and_has_limits():
    nu = catalog_lookup("free_stable", {"alpha": Fraction(1, 2)}).triplet.nu
    assert fsd_monotonicity_check(nu).passed
    lim = check_k_limits(nu.k)
    assert lim["ok"]


def test_dyadic_grid():
    g = dyadic_grid(-2, 2, 4)
    assert g[0] == 0.25 and g[-1] == 4 and len(g) == 17


def test_catalog_triplet_consistent_with_transform():
    m = catalog_lookup("free_poisson", {"lambda": 2, "alpha": Fraction(1, 2)})
    t = m.triplet
    for w in LOWER[:3]:
        assert levy_khintchine_eval(t, w) == pytest.approx(free_cumulant_transform_eval(m, w).value, abs=1e-9)


def test_k_function_rejects_zero():
    k = KFunction(lambda x: 1.0)
    with pytest.raises(ValueError):
        k(0)
    assert math.isclose(LevyMeasure(k=k, support=(0, 1)).density_at(0.5), 2.0)


def test_generating_pair_to_dict():
    p = GeneratingPair(Fraction(1, 2), FiniteMeasure.point(0, 1))
    assert p.to_dict()["gamma"] == Fraction(1, 2)
