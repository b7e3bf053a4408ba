from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeprob.errors import ConvergenceError, InversionUnstableError, ParameterDomainError
from freeprob.measures import catalog_lookup, free_poisson, semicircle
from freeprob.transforms import (
    CLOSED_FORM,
    CONTINUED_FRACTION,
    DEFAULT_OPTIONS,
    NEWTON,
    QUADRATURE,
    ComplexPoint,
    Inverter,
    TransformOptions,
    cauchy_derivative_eval,
    cauchy_eval,
    cauchy_evaluator,
    continued_fraction_eval,
    free_cumulant_transform_derivative_eval,
    free_cumulant_transform_eval,
    invert_reciprocal_cauchy,
    omega_evaluator,
    reciprocal_cauchy_eval,
    stieltjes_inversion,
    voiculescu_eval,
)


def test_complex_point_coercion():
    assert complex(ComplexPoint.of("2j")) == 2j
    assert complex(ComplexPoint.of(1.5)) == 1.5
    with pytest.raises(ParameterDomainError):
        ComplexPoint(float("nan"), 0.0)


def test_semicircle_cauchy_and_inverse():
    m = semicircle()
    g = cauchy_eval(m, 2j).value
    assert g == pytest.approx((1 - math.sqrt(2)) * 1j, abs=1e-14)
    assert reciprocal_cauchy_eval(m, 2j).value == pytest.approx((1 + math.sqrt(2)) * 1j, abs=1e-13)
    assert invert_reciprocal_cauchy(m, 2j) == pytest.approx(1.5j, abs=1e-12)


def test_methods_agree_for_semicircle():
    m = semicircle()
    z = 0.3 + 0.8j
    cf = cauchy_eval(m, z, method=CONTINUED_FRACTION).value
    cl = cauchy_eval(m, z, method=CLOSED_FORM).value
    qd = cauchy_eval(m, z, method=QUADRATURE).value
    assert abs(cf - cl) < 1e-12 and abs(qd - cl) < 1e-9


def test_gaussian_quadrature_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    m = catalog_lookup("gaussian", {})
    z = 0.7 + 0.4j
    ref = mpmath.quad(lambda t: mpmath.npdf(t) / (z - t), [-mpmath.inf, 0, mpmath.inf])
    for method in (QUADRATURE, CLOSED_FORM, CONTINUED_FRACTION):
        assert abs(cauchy_eval(m, z, method=method).value - complex(ref)) < 1e-9


def test_student_t3_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    m = catalog_lookup("student_t3", {})
    f = lambda t: 6 * mpmath.sqrt(3) / (mpmath.pi * (3 + t * t) ** 2)  # noqa: E731
    for z in (2j, 0.5 + 0.3j, -4 + 1j):
        ref = mpmath.quad(lambda t: f(t) / (z - t), [-mpmath.inf, 0, mpmath.inf])
        assert abs(cauchy_eval(m, z).value - complex(ref)) < 1e-8
    assert cauchy_eval(m, 2j).value == pytest.approx(-0.3923048454132639j, abs=1e-10)


def test_cauchy_derivative():
    m = catalog_lookup("gaussian", {})
    z, h = 0.2 + 0.9j, 1e-5
    num = (cauchy_eval(m, z + h).value - cauchy_eval(m, z - h).value) / (2 * h)
    assert cauchy_derivative_eval(m, z).value == pytest.approx(num, abs=1e-8)


def test_continued_fraction_error_estimate_and_cap():
    j = catalog_lookup("gaussian", {}).jacobi
    g, dg, err = continued_fraction_eval(j, 1 + 2j)
    assert err < 1e-12
    with pytest.raises(ConvergenceError):
        continued_fraction_eval(j, 0.1 + 1e-3j, TransformOptions(cf_max_depth=256))


def test_terminating_continued_fraction_is_exact():
    m = catalog_lookup("bernoulli", {})
    g, dg, err = continued_fraction_eval(m.jacobi, 0.5j)
    assert g == pytest.approx(0.5 / (0.5j - 1) + 0.5 / (0.5j + 1))
    assert err == 0


def test_lower_half_plane_rejected_for_cauchy():
    with pytest.raises(ParameterDomainError):
        cauchy_eval(semicircle(), -1j)
    with pytest.raises(ParameterDomainError):
        free_cumulant_transform_eval(semicircle(), 1j)


def test_semicircle_free_cumulant_transform():
    m = semicircle()
    assert free_cumulant_transform_eval(m, -1j).value == pytest.approx(-1, abs=1e-12)
    d = free_cumulant_transform_derivative_eval(m, -1j, validate=True)
    assert d.value == pytest.approx(-2j, abs=1e-10) and d.method == NEWTON
    assert voiculescu_eval(m, 2j).value == pytest.approx(-0.5j, abs=1e-12)


def test_free_poisson_transforms():
    m = free_poisson(1, 1)
    assert free_cumulant_transform_eval(m, -0.5j).value == pytest.approx(-0.2 - 0.4j, abs=1e-12)
    assert free_cumulant_transform_derivative_eval(m, 1.1 - 0.1j).value == pytest.approx(50j, abs=1e-8)
    assert voiculescu_eval(m, 2j).value == pytest.approx(0.8 - 0.4j, abs=1e-12)


_arg = st.floats(min_value=-math.pi + 0.05, max_value=-0.05)
_mod = st.floats(min_value=0.05, max_value=20)


@settings(max_examples=40, deadline=None)
@given(_mod, _arg)
def test_semicircle_cumulant_transform_is_w_squared(r, theta):
    w = cmath.rect(r, theta)
    assert abs(free_cumulant_transform_eval(semicircle(), w).value - w * w) < 1e-10 * max(1, r * r)


@settings(max_examples=25, deadline=None)
@given(_mod, _arg)
def test_inverse_really_inverts(r, theta):
    m = catalog_lookup("gaussian", {})
    z = cmath.rect(r, -theta)  # upper half-plane
    om = invert_reciprocal_cauchy(m, z)
    # omega may lie below the axis, where F is the analytic continuation
    F, _ = omega_evaluator(m, DEFAULT_OPTIONS)[0](om)
    assert abs(F - z) < 1e-9 * (1 + abs(z))


def test_inverter_reuse_along_path():
    m = catalog_lookup("gaussian", {})
    inv = Inverter(m)
    w0, st0 = inv.start(1j)
    st1 = inv.walk(w0, st0, 1j, 32)
    st2 = inv.walk(1j, st1, 0.1 + 0.1j, 16)
    assert abs(st2[1] - (0.1 + 0.1j)) < 1e-10
    assert st2[0] == pytest.approx(invert_reciprocal_cauchy(m, 0.1 + 0.1j), abs=1e-9)


def test_triplet_only_measure_uses_levy_khintchine():
    m = catalog_lookup("free_gamma", {"c": 1, "alpha": 1})
    v = free_cumulant_transform_eval(m, -0.5j)
    assert v.method == "levy-khintchine"


def test_stieltjes_semicircle():
    g = cauchy_evaluator(semicircle())
    assert stieltjes_inversion(g, 0.0).value == pytest.approx(1 / math.pi, abs=1e-10)
    assert stieltjes_inversion(g, 1.0).value == pytest.approx(math.sqrt(3) / (2 * math.pi), abs=1e-6)
    assert abs(stieltjes_inversion(g, 3.0).value) < 1e-8


def test_stieltjes_unstable_raises():
    with pytest.raises(InversionUnstableError):
        stieltjes_inversion(lambda z: 1j * math.log(z.imag) ** 3, 0.0, levels=6)


def test_free_poisson_atom_below_one():
    m = free_poisson(Fraction(1, 2), 1)
    # mass 1/2 at 0 shows up as iy G(iy) -> 1/2
    y = 1e-8
    assert (1j * y * cauchy_eval(m, 1j * y).value).real == pytest.approx(0.5, abs=1e-6)


def test_options_tightened():
    t = TransformOptions().tightened()
    assert t.continuation_steps == 4 * 32 and t.newton_tol == pytest.approx(1e-14)
    with pytest.raises(ParameterDomainError):
        TransformOptions(cf_depth=0)
