"""Acceptance suite: one test per release criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line (visible with
``pytest -s`` or when this file is run directly) before asserting.
"""

from __future__ import annotations

import cmath
import json
import math
import random
import time
from fractions import Fraction

import pytest

from freeprob.awk import awk_fsd_verify, riccati_validation
from freeprob.checkers import (
    fid_grid_check,
    fsd_grid_check,
    fsd_routes,
    kerov_check,
    nevanlinna_extract,
    nevanlinna_loop_check,
    verdicts_agree,
)
from freeprob.cli import run
from freeprob.cumulants import (
    FreeCumulantSequence,
    fid_cumulant_criterion,
    free_cumulants_from_moments,
    fsd_cumulant_criterion,
    moments_from_free_cumulants,
    nc_partition_oracle,
)
from freeprob.levy import (
    FreeCharacteristicTriplet,
    LevyMeasure,
    fsd_monotonicity_check,
    levy_khintchine_eval,
    pair_from_triplet,
    triplet_from_pair,
    voiculescu_from_pair_eval,
)
from freeprob.measures import MomentSequence, catalog_lookup, semicircle
from freeprob.transforms import (
    CONTINUED_FRACTION,
    NEWTON,
    TransformOptions,
    cauchy_evaluator,
    free_cumulant_transform_eval,
    stieltjes_inversion,
)


def report(n: int, ok: bool, message: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {message}")
    assert ok, message


def test_01_gaussian_is_fsd_on_default_grid(monkeypatch):
    monkeypatch.setenv("FREEPROB_THREADS", "1")
    t0 = time.perf_counter()
    status, text = run(["check", "--fsd", "--catalog", "gaussian"])
    elapsed = time.perf_counter() - t0
    check = json.loads(text)["checks"][0]
    grid = check["grid"]
    ok = (status == 0 and check["verdict"] == "pass" and check["margin"] <= 1e-8
          and grid["count"] == 126 * 64 and elapsed < 60)
    report(1, ok, f"gaussian max Im C'(w) = {check['margin']:.3g} over {grid['count']} points "
                  f"in {elapsed:.1f} s single-threaded")


def test_02_awk_range():
    lines, ok = [], True
    for c in (-1, -0.75, -0.5, -0.25, 0):
        rep = awk_fsd_verify(c)
        below = rep.details["below_axis"]
        ok &= rep.passed and below["coverage"] >= 0.9
        lines.append(f"c={c}: {rep.verdict}, coverage {below['coverage']:.2f} "
                     f"(inside domain {below['omega_fraction']:.2f})")
    residual = max(riccati_validation(c) for c in (-0.99, -0.75, -0.5, -0.25, 0))
    ok &= residual < 1e-8
    report(2, ok, "; ".join(lines) + f"; max riccati residual {residual:.2g}")


def test_03_free_poisson_is_fid_not_fsd():
    m = catalog_lookup("free_poisson", {"lambda": 1, "alpha": 1})
    fsd = fsd_grid_check(m)
    wit = fsd.witness or {}
    near = abs(complex(wit.get("point", 0)) - (1.1 - 0.1j)) < 0.2
    mom = m.moments(16)
    hank = fsd_cumulant_criterion(mom, 2, compact_support=True)
    det = hank.details["hankel"]["leading_minors"][-1]
    fid = fid_grid_check(m)
    fid_cum = all(fid_cumulant_criterion(mom, n, compact_support=True).passed for n in range(1, 9))
    ok = (fsd.failed and wit.get("im_value", 0) > 10 and near and hank.failed and det == -1
          and fid.passed and fid_cum)
    report(3, ok, f"FSD grid fails at {complex(wit.get('point', 0)):.4g} with Im C' = "
                  f"{wit.get('im_value', float('nan')):.4g}; Hankel N=2 determinant {det}; "
                  f"FID grid {fid.verdict}, FID cumulants {'pass' if fid_cum else 'fail'}")


def test_04_free_meixner_boundary():
    got = {}
    for a, b in ((0, 1), (2, 1), (2, Fraction(1, 2))):
        rep = fsd_monotonicity_check(catalog_lookup("free_meixner", {"a": a, "b": b}).triplet.nu)
        got[(a, b)] = rep
    ok = (got[(0, 1)].passed and got[(2, 1)].passed and got[(2, Fraction(1, 2))].failed
          and got[(2, Fraction(1, 2))].witness is not None)
    report(4, ok, ", ".join(f"(a,b)=({a},{b}) {r.verdict}" for (a, b), r in got.items()))


def test_05_cumulant_engine():
    cases = [("semicircle", {}), ("free_poisson", {}), ("gaussian", {}), ("free_meixner", {"a": 1, "b": 1})]
    ok = True
    for name, params in cases:
        mom = catalog_lookup(name, params).moments(10)
        rec = free_cumulants_from_moments(mom).entries
        ok &= list(rec) == [nc_partition_oracle(mom, n) for n in range(1, 11)]
    rng = random.Random(20240611)
    trials = 0
    for _ in range(100):
        order = rng.randint(1, 12)
        tail = [Fraction(rng.randint(-30, 30), rng.randint(1, 12)) for _ in range(order)]
        m = MomentSequence((1, *tail))
        ok &= moments_from_free_cumulants(free_cumulants_from_moments(m)).entries == m.entries
        k = FreeCumulantSequence(tuple(tail))
        ok &= free_cumulants_from_moments(moments_from_free_cumulants(k)).entries == k.entries
        trials += 1
    report(5, ok, f"recursion equals oracle for {len(cases)} measures up to order 10; "
                  f"{trials} random rational roundtrips exact")


def test_06_transform_stack():
    m = semicircle()
    rng = random.Random(7)
    worst = 0.0
    for _ in range(200):
        w = cmath.rect(10 ** rng.uniform(-1.3, 1.3), -rng.uniform(0.01, math.pi - 0.01))
        v = free_cumulant_transform_eval(m, w)
        assert v.method == NEWTON
        worst = max(worst, abs(v.value - w * w))
    g = cauchy_evaluator(m)
    xs = [-2 + 0.2 * k for k in range(21)]
    sc_err = max(abs(stieltjes_inversion(g, x).value - math.sqrt(max(4 - x * x, 0)) / (2 * math.pi))
                 for x in xs)
    gauss = catalog_lookup("gaussian", {})
    exact = 1 / math.sqrt(2 * math.pi)
    g_closed = abs(stieltjes_inversion(cauchy_evaluator(gauss), 0.0).value - exact)
    cf_opts = TransformOptions(cf_adaptive_tol=1e-8, cf_max_depth=2 ** 16)
    g_cf = abs(stieltjes_inversion(cauchy_evaluator(gauss, cf_opts, CONTINUED_FRACTION), 0.0, y0=1.0).value
               - exact)
    ok = worst < 1e-10 and sc_err < 1e-3 and g_closed < 1e-4 and g_cf < 1e-4
    report(6, ok, f"|C(w) - w^2| <= {worst:.2g} on 200 points; semicircle density error {sc_err:.2g}; "
                  f"gaussian density error at 0 {g_closed:.2g} (closed form), {g_cf:.2g} (continued fraction)")


def test_07_representation_consistency():
    pts = [cmath.rect(r, -th) for r in (0.1, 0.5, 1.0, 3.0) for th in (0.1, 0.8, 1.6, 2.4, 3.0)]
    worst = 0.0
    for name, params in (("semicircle", {}), ("free_poisson", {}), ("free_gamma", {"c": 1, "alpha": 1})):
        t = catalog_lookup(name, params).triplet
        p = pair_from_triplet(t)
        for w in pts:
            worst = max(worst, abs(levy_khintchine_eval(t, w) - w * voiculescu_from_pair_eval(p, 1 / w)))
    rng = random.Random(3)
    exact = True
    for _ in range(25):
        locs = rng.sample([Fraction(k, 4) for k in range(-12, 13) if k], rng.randint(0, 4))
        atoms = tuple((x, Fraction(rng.randint(1, 9), rng.randint(1, 5))) for x in locs)
        t = FreeCharacteristicTriplet(Fraction(rng.randint(0, 6), 3), Fraction(rng.randint(-6, 6), 5),
                                      LevyMeasure(atoms=atoms))
        back = triplet_from_pair(pair_from_triplet(t))
        exact &= back.a == t.a and back.eta == t.eta and sorted(back.nu.atoms) == sorted(atoms)
    ok = worst < 1e-8 and exact
    report(7, ok, f"triplet vs generating pair max difference {worst:.2g}; "
                  f"atomic pair/triplet roundtrip {'exact' if exact else 'inexact'}")


def test_08_nevanlinna_loop():
    est = nevanlinna_extract(semicircle())
    sc_ok = abs(est.xi) < 1e-9 and abs(est.rho_mass - 2) < 1e-9
    gauss = catalog_lookup("gaussian", {})
    loop = nevanlinna_loop_check(gauss, nevanlinna_extract(gauss), tol=1e-3)
    ok = sc_ok and loop.passed
    report(8, ok, f"semicircle (xi, rho(R)) = ({est.xi:.3g}, {est.rho_mass:.12g}); "
                  f"gaussian loop max difference {loop.margin:.2g}")


FSD_ROUTE_CASES = [
    ("semicircle", {}), ("semicircle", {"a": 1, "r": 3}),
    ("free_meixner", {"a": 0, "b": 1}), ("free_meixner", {"a": 2, "b": 1}),
    ("free_meixner", {"a": 2, "b": Fraction(1, 2)}), ("free_meixner", {"a": 1, "b": Fraction(1, 4)}),
    ("free_meixner", {"a": 1, "b": Fraction(1, 5)}), ("free_meixner", {"a": 1, "b": 0}),
    ("free_poisson", {"lambda": 1}), ("free_poisson", {"lambda": Fraction(1, 2)}),
    ("free_poisson", {"lambda": 2, "alpha": -1}),
    ("dirac", {"a": 0}), ("dirac", {"a": Fraction(3, 2)}),
]


def test_09_three_routes_agree():
    rows, ok = [], True
    for name, params in FSD_ROUTE_CASES:
        m = catalog_lookup(name, params)
        assert m.compact_support is not None and m.has_moments
        routes = fsd_routes(m)
        agree = set(routes) == {"grid", "hankel", "levy"} and verdicts_agree(routes)
        ok &= agree
        rows.append(f"{name}{dict(params) or ''} -> {routes['grid'].verdict}" + ("" if agree else " (DISAGREE)"))
    report(9, ok, "; ".join(rows))


def test_10_kerov():
    rows, ok = [], True
    for c in (-0.5, 0, 1, 2):
        rep = kerov_check(c)
        ok &= rep.passed
        last = list(rep.details["asymptotic_errors"].values())[-1]
        rows.append(f"c={c}: {rep.verdict} (max Im h {rep.margin:.2g}, |iy h - 1| {last:.1g} at y=1000)")
    report(10, ok, "; ".join(rows))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
