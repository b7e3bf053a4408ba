from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from freeprob.checkers import (
    HalfPlaneGrid,
    NevanlinnaConfig,
    fid_grid_check,
    fsd_grid_check,
    fsd_grid_check_with_values,
    fsd_routes,
    invert_on_polar_grid,
    kerov_check,
    loop_test_points,
    nevanlinna_extract,
    nevanlinna_loop_check,
    thread_count,
    ui_class_fsd_check,
    ui_class_fsd_check_measure,
    verdicts_agree,
)
from freeprob.errors import ParameterDomainError
from freeprob.measures import catalog_lookup, semicircle
from freeprob.transforms import DEFAULT_OPTIONS, reciprocal_cauchy_eval

SMALL = dict(r_min=1e-2, r_max=1e2, per_decade=6, n_angles=16)


def test_default_grid_size():
    g = HalfPlaneGrid()
    assert g.shape == (126, 64) and g.count == 8064
    assert np.all(g.points().imag < 0)
    assert np.all(HalfPlaneGrid(half="upper").points().imag > 0)


def test_grid_validation():
    with pytest.raises(ParameterDomainError):
        HalfPlaneGrid(half="left")
    with pytest.raises(ParameterDomainError):
        HalfPlaneGrid(r_min=2, r_max=1)


def test_thread_count_respects_env(monkeypatch):
    monkeypatch.setenv("FREEPROB_THREADS", "1")
    assert thread_count() == 1


def test_polar_inversion_lands_on_targets():
    m = catalog_lookup("gaussian", {})
    g = HalfPlaneGrid(half="upper", **SMALL)
    targets = g.points().reshape(g.shape)
    omega, F, dF, failed, mism = invert_on_polar_grid(m, targets, DEFAULT_OPTIONS)
    ok = ~failed
    assert ok.mean() > 0.99
    assert np.max(np.abs(F[ok] - targets[ok]) / (1 + np.abs(targets[ok]))) < 1e-9


def test_semicircle_grid_checks_pass():
    m = semicircle()
    assert fid_grid_check(m, HalfPlaneGrid(half="upper", **SMALL)).passed
    rep = fsd_grid_check(m, HalfPlaneGrid(**SMALL))
    assert rep.passed and rep.margin <= 1e-8
    assert "evaluated" in rep.statement


def test_free_poisson_fsd_grid_fails_with_witness():
    m = catalog_lookup("free_poisson", {"lambda": 1, "alpha": 1})
    rep, ev = fsd_grid_check_with_values(m, HalfPlaneGrid(**SMALL))
    assert rep.failed and rep.witness is not None
    assert rep.witness["im_value"] > 1e-8
    assert len(list(ev.rows())) == HalfPlaneGrid(**SMALL).count
    assert fid_grid_check(m, HalfPlaneGrid(half="upper", **SMALL)).passed


def test_bernoulli_is_not_fid_on_the_grid():
    m = catalog_lookup("bernoulli", {})
    rep = fid_grid_check(m, HalfPlaneGrid(half="upper", **SMALL))
    assert rep.failed
    assert rep.witness is not None


def test_triplet_only_measure_uses_levy_khintchine_route():
    m = catalog_lookup("free_gamma", {"c": 1, "alpha": 1})
    rep = fsd_grid_check(m, HalfPlaneGrid(**SMALL))
    assert rep.passed


@pytest.mark.parametrize("name,params", [
    ("semicircle", {}), ("free_meixner", {"a": 2, "b": 1}),
    ("free_meixner", {"a": 2, "b": Fraction(1, 2)}), ("free_poisson", {"lambda": 1}),
])
def test_three_routes_agree(name, params):
    routes = fsd_routes(catalog_lookup(name, params), hankel_orders=6, grid=HalfPlaneGrid(**SMALL))
    assert set(routes) == {"grid", "hankel", "levy"}
    assert verdicts_agree(routes), {k: r.verdict for k, r in routes.items()}


def test_ui_class_check_on_semicircle():
    rep = ui_class_fsd_check_measure(semicircle(), HalfPlaneGrid(half="upper", **SMALL))
    assert rep.passed


def test_ui_class_check_reports_failure():
    # F(w) = w + 1/w is not the reciprocal Cauchy transform of anything in the class
    rep = ui_class_fsd_check(lambda w: (w - 1 / w, 1 + 1 / w ** 2), [1 + 1j, 0.5j])
    assert rep.failed and rep.witness["im_value"] > 0


@pytest.mark.parametrize("c", [-0.5, 0.0, 1.0])
def test_kerov_passes(c):
    rep = kerov_check(c, HalfPlaneGrid(half="upper", **SMALL))
    assert rep.passed
    errs = list(rep.details["asymptotic_errors"].values())
    assert errs == sorted(errs, reverse=True) and errs[-1] <= 1e-4


def test_kerov_rejects_dirac_endpoint():
    with pytest.raises(ParameterDomainError):
        kerov_check(-1)


def test_semicircle_nevanlinna_pair():
    est = nevanlinna_extract(semicircle(), NevanlinnaConfig(n_points=201))
    assert est.xi == pytest.approx(0, abs=1e-9)
    assert est.rho_mass == pytest.approx(2, abs=1e-9)
    assert est.atom_at_zero == pytest.approx(2, abs=1e-6)
    assert nevanlinna_loop_check(semicircle(), est).passed


def test_loop_points_lie_below_axis():
    p = loop_test_points()
    assert len(p) == 20 and np.all(p.imag < 0)
    assert np.allclose(p, loop_test_points())


def test_reciprocal_cauchy_sanity_for_grid_points():
    # F(z) - z has nonnegative imaginary part for every probability measure
    m = catalog_lookup("student_t3", {})
    for z in HalfPlaneGrid(half="upper", per_decade=2, n_angles=6).points():
        assert (reciprocal_cauchy_eval(m, complex(z)).value - z).imag >= -1e-12 * (1 + abs(z))


def test_dirac_margin_is_rounding_only():
    rep = fsd_grid_check(catalog_lookup("dirac", {"a": 0}), HalfPlaneGrid(**SMALL))
    assert rep.passed and abs(rep.margin) < 1e-12
