from __future__ import annotations

import math

import numpy as np
import pytest

from freeprob.awk import (
    AWKParams,
    ContinuationPath,
    associated_hermite_eval,
    awk_density,
    awk_fsd_verify,
    awk_omega_eval,
    below_axis_rectangle,
    omega_values,
    parabolic_cylinder_D,
    riccati_continue_F,
    riccati_residual,
    riccati_validation,
    riccati_validation_points,
)
from freeprob.errors import LeftOmegaError, ParameterDomainError
from freeprob.measures import awk as awk_measure
from freeprob.transforms import continued_fraction_eval


def test_parameter_domain():
    with pytest.raises(ParameterDomainError):
        AWKParams(-1.5)
    assert AWKParams(-1).is_dirac


def test_parabolic_cylinder_values_at_zero():
    assert parabolic_cylinder_D(1, 0).real == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    assert parabolic_cylinder_D(2, 0).real == pytest.approx(1.0, rel=1e-12)


def test_parabolic_cylinder_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    for c, z in ((0.5, 1.3j), (1.5, 0.7 + 0.2j), (3.0, -1.1j)):
        assert complex(parabolic_cylinder_D(c, z)) == pytest.approx(complex(mpmath.pcfd(-c, z)), rel=1e-9)


def test_associated_hermite_c_zero_is_hermite():
    # P_2 for beta_n = n is the monic Hermite polynomial x^2 - 1
    assert associated_hermite_eval(2, 1.5, 0) == pytest.approx(1.25)


@pytest.mark.parametrize("c,t,expected", [(0, 0.0, 1 / math.sqrt(2 * math.pi)), (1, 0.0, 0.25397)])
def test_density_values(c, t, expected):
    assert awk_density(c, t) == pytest.approx(expected, abs=5e-6)


def test_density_normalised_for_negative_c():
    from scipy import integrate

    mass = integrate.quad(lambda t: awk_density(-0.5, t), -10, 10, limit=100, epsabs=1e-7)[0]
    assert mass == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("c", [-0.99, -0.5, 0, 1, 2])
def test_riccati_residual_small(c):
    assert riccati_validation(c) < 1e-8


def test_validation_points_are_deterministic():
    a, b = riccati_validation_points(), riccati_validation_points()
    assert np.array_equal(a, b) and np.all(a.imag >= 0.5)


@pytest.mark.parametrize("c", [-0.5, 0.0, 1.0])
def test_riccati_path_matches_continued_fraction(c):
    F = riccati_continue_F(c, ContinuationPath(2j, 3j))
    g, _, _ = continued_fraction_eval(awk_measure(c).jacobi, 3j)
    assert abs(F - 1 / g) < 1e-7


def test_omega_values_match_scalar_evaluator():
    pts = np.array([0.3 + 0.2j, -2 + 0.5j, 1 + 3j, 15 + 0.1j])
    F, dF, ok = omega_values(-0.25, pts)
    assert ok.all()
    for p, f, d in zip(pts, F, dF):
        fs, ds = awk_omega_eval(-0.25, p)
        assert abs(f - fs) < 1e-9 and abs(d - ds) < 1e-8
        assert riccati_residual(-0.25, p) < 1e-8 if p.imag >= 1 else True


def test_leaving_the_domain_is_reported():
    # deep below the axis for c close to -1 the path must leave Omega
    with pytest.raises(LeftOmegaError):
        riccati_continue_F(-0.99, ContinuationPath(2 + 2j, 2 - 0.5j))


def test_rectangle_shape():
    xs, ys = below_axis_rectangle()
    assert len(xs) == 61 and len(ys) == 10 and ys[0] == -0.05 and ys[-1] == -0.5


@pytest.mark.parametrize("c", [-1, -0.5, 0])
def test_fsd_verify_passes_in_proven_range(c):
    rep = awk_fsd_verify(c)
    assert rep.passed
    assert rep.details["below_axis"]["coverage"] >= 0.9
    assert not rep.details["exploratory"]


def test_fsd_verify_marks_positive_c_exploratory():
    rep = awk_fsd_verify(1.0)
    assert rep.details["exploratory"] and "exploratory" in rep.statement


def test_term_signs_for_negative_c():
    rep = awk_fsd_verify(-0.5)
    assert rep.details["below_axis"]["terms_nonpositive"]
