"""Half-plane grid checks for free infinite divisibility and selfdecomposability.

A failing check comes with a witness point where the relevant imaginary part
is positive (or where ``F^{-1}`` is shown not to be single valued).  A
passing check only says that every examined grid point was consistent.

``F^{-1}`` is evaluated on the whole grid by continuation: one walk per ray
from far out, then one walk along every arc.  The two walks must agree at
each grid point; disagreement means the inverse has a branch point inside
the upper half-plane, so it has no analytic extension there.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .errors import (
    ConvergenceError,
    DerivativeSingularityError,
    FreeProbError,
    InversionError,
    InversionUnstableError,
    LeftOmegaError,
    ParameterDomainError,
)
from .levy import (
    FiniteMeasure,
    NevanlinnaPair,
    fsd_monotonicity_check,
    levy_khintchine_derivative_eval,
    levy_khintchine_eval,
    triplet_from_nevanlinna,
)
from .measures import MeasureSpec, awk as awk_measure
from .reports import FAIL, INCONCLUSIVE, PASS, CheckReport, combine_verdicts
from .transforms import (
    DEFAULT_OPTIONS,
    Inverter,
    TransformOptions,
    cprime_from_state,
    free_cumulant_transform_derivative_eval,
    free_cumulant_transform_eval,
    omega_evaluator,
    stieltjes_inversion,
)

DEFAULT_SLACK = 1e-8
MAX_FAILURE_FRACTION = 0.01
BRANCH_TOL = 1e-6


def thread_count() -> int:
    """Worker threads for grid evaluation, capped by ``FREEPROB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("FREEPROB_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Polar grid: log-spaced radii times uniformly spaced angles.

    Angles stay ``theta_min`` away from the real axis.  Points are ordered
    radius-major, which fixes the tie-breaking order of every reduction.
    """

    half: str = "lower"
    r_min: float = 1e-2
    r_max: float = 1e3
    per_decade: int = 25
    n_angles: int = 64
    theta_min: float = 1e-3

    def __post_init__(self):
        if self.half not in ("upper", "lower"):
            raise ParameterDomainError("half must be 'upper' or 'lower'")
        if not 0 < self.r_min < self.r_max:
            raise ParameterDomainError("need 0 < r_min < r_max")
        if self.per_decade < 1 or self.n_angles < 1:
            raise ParameterDomainError("per_decade and n_angles must be positive")
        if not 0 < self.theta_min < math.pi / 2:
            raise ParameterDomainError("theta_min must lie in (0, pi/2)")

    def radii(self) -> np.ndarray:
        decades = math.log10(self.r_max / self.r_min)
        n = int(round(decades * self.per_decade)) + 1
        return np.logspace(math.log10(self.r_min), math.log10(self.r_max), n)

    def angles(self) -> np.ndarray:
        if self.n_angles == 1:
            th = np.array([math.pi / 2])
        else:
            th = np.linspace(self.theta_min, math.pi - self.theta_min, self.n_angles)
        return th if self.half == "upper" else -th

    def points(self) -> np.ndarray:
        return (self.radii()[:, None] * np.exp(1j * self.angles())[None, :]).ravel()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.radii()), self.n_angles

    @property
    def count(self) -> int:
        a, b = self.shape
        return a * b

    def to_dict(self) -> dict:
        return {"half": self.half, "r_min": self.r_min, "r_max": self.r_max,
                "per_decade": self.per_decade, "n_angles": self.n_angles,
                "theta_min": self.theta_min, "count": self.count}


@dataclass
class GridEvaluation:
    """Per-point results of a grid check (``values`` is NaN where evaluation failed)."""

    points: np.ndarray
    values: np.ndarray
    failed: np.ndarray
    mismatches: list = field(default_factory=list)

    def rows(self):
        for z, v, f in zip(self.points, self.values, self.failed):
            yield complex(z), complex(v), bool(f)


# ---------------------------------------------------------------------------
# F^{-1} on a polar grid of targets


def _substeps(w0, w1, h):
    return max(1, math.ceil(abs(math.log(abs(w1 / w0))) / h + abs(np.angle(w1 / w0)) / 0.1))


def _walk_ray(inv: Inverter, targets: np.ndarray, h: float):
    """Solve along one ray; ``targets`` sorted by decreasing modulus.

    Returns a list of states (``None`` where the walk failed).
    """
    out = [None] * len(targets)
    try:
        w_prev, state = inv.start(complex(targets[0]))
    except InversionError:
        return out
    misses = 0
    for k, w in enumerate(targets):
        w = complex(w)
        try:
            state_new = inv.walk(w_prev, state, w, _substeps(w_prev, w, h))
        except InversionError:
            misses += 1
            if misses >= 3:
                break
            continue
        misses = 0
        out[k] = state_new
        w_prev, state = w, state_new
    return out


def _walk_arc(inv: Inverter, targets: np.ndarray, ray_states: list, tol: float):
    """Walk along one arc seeded by the first ray solution and compare.

    Returns the arc states (filling ray gaps) and the indices where the arc
    value and the ray value disagree.
    """
    n = len(targets)
    states = list(ray_states)
    mismatches = []
    start = next((k for k in range(n) if ray_states[k] is not None), None)
    if start is None:
        return states, mismatches
    cur_w, cur = complex(targets[start]), ray_states[start]
    for k in range(start + 1, n):
        w = complex(targets[k])
        try:
            st = inv.walk(cur_w, cur, w, _substeps(cur_w, w, 0.25))
        except InversionError:
            st = None
        ray = ray_states[k]
        if st is None:
            if ray is not None:
                cur_w, cur = w, ray
            continue
        if ray is None:
            states[k] = st
        elif abs(st[0] - ray[0]) > tol * (1 + abs(ray[0])):
            mismatches.append((k, ray[0], st[0]))
            st = ray  # re-seed so each mismatch is a local event
        cur_w, cur = w, st
    return states, mismatches


def invert_on_polar_grid(m: MeasureSpec, targets: np.ndarray, opts: TransformOptions,
                         arc_check: bool = True):
    """``F^{-1}`` at a ``(n_r, n_theta)`` array of upper half-plane targets.

    Returns ``(omega, F, F', failed, mismatches)``; mismatches are
    ``(i, j, ray_value, arc_value)``.
    """
    n_r, n_t = targets.shape
    inv = Inverter(m, opts)
    h = max(0.05, math.log(1e7) / opts.continuation_steps)
    mods = np.abs(targets[:, 0])
    order = np.argsort(-mods, kind="stable")

    def do_ray(j):
        col = targets[order, j]
        states = _walk_ray(inv, col, h)
        res = [None] * n_r
        for pos, idx in enumerate(order):
            res[idx] = states[pos]
        return res

    cols = _map(do_ray, range(n_t))
    states = [[cols[j][i] for j in range(n_t)] for i in range(n_r)]
    mismatches = []
    if arc_check:
        def do_arc(i):
            return _walk_arc(inv, targets[i], states[i], BRANCH_TOL)

        arcs = _map(do_arc, range(n_r))
        for i, (row, mm) in enumerate(arcs):
            states[i] = row
            mismatches.extend((i, j, a, b) for j, a, b in mm)
    omega = np.full(targets.shape, np.nan + 0j)
    F = np.full(targets.shape, np.nan + 0j)
    dF = np.full(targets.shape, np.nan + 0j)
    failed = np.zeros(targets.shape, dtype=bool)
    for i in range(n_r):
        for j in range(n_t):
            st = states[i][j]
            if st is None:
                failed[i, j] = True
            else:
                omega[i, j], F[i, j], dF[i, j] = st[0], st[1], st[2]
    return omega, F, dF, failed, mismatches


# ---------------------------------------------------------------------------
# FID / FSD grid checks


def _fid_value(target, om, F, dF):
    return om - target


def _fsd_value(target, om, F, dF):
    return cprime_from_state(om, F, dF)


def _grid_check(kind: str, m: MeasureSpec, grid: HalfPlaneGrid, slack: float,
                opts: TransformOptions, max_failure_fraction: float):
    pts_grid = grid.points().reshape(grid.shape)
    if kind == "fid":
        targets = pts_grid
        value_fn = _fid_value
        quantity = "Im phi(z)"
    else:
        targets = 1 / pts_grid
        value_fn = _fsd_value
        quantity = "Im C'(w)"
    if m.triplet_only:
        return _triplet_grid_check(kind, m, grid, slack, quantity, max_failure_fraction)

    omega, F, dF, failed, mismatches = invert_on_polar_grid(m, targets, opts)
    vals = np.full(targets.shape, np.nan + 0j)
    for idx in zip(*np.nonzero(~failed)):
        try:
            vals[idx] = value_fn(targets[idx], omega[idx], F[idx], dF[idx])
        except DerivativeSingularityError:
            failed[idx] = True

    # re-check suspicious points and branch mismatches with tighter settings
    tight = opts.tightened()
    tinv = Inverter(m, tight)
    spikes = 0
    im = np.where(failed, -np.inf, vals.imag)
    for idx in zip(*np.nonzero(im > slack)):
        try:
            om, Fv, dFv, _ = tinv.invert(complex(targets[idx]))
            v = value_fn(targets[idx], om, Fv, dFv)
        except (InversionError, DerivativeSingularityError):
            continue
        if v.imag <= slack and abs(om - omega[idx]) > BRANCH_TOL * (1 + abs(om)):
            # a different branch than the grid walk found: keep as mismatch evidence
            mismatches.append((idx[0], idx[1], omega[idx], om))
        elif v.imag <= slack:
            spikes += 1
            vals[idx] = v
    confirmed = []
    for i, j, ray_v, arc_v in mismatches:
        confirmed.append({"point": complex(pts_grid[i, j]), "target": complex(targets[i, j]),
                          "ray_value": complex(ray_v), "arc_value": complex(arc_v),
                          "index": int(i * grid.shape[1] + j)})

    flat_vals = vals.ravel()
    flat_failed = failed.ravel()
    im = np.where(flat_failed, -np.inf, flat_vals.imag)
    n_fail = int(flat_failed.sum())
    k = int(np.argmax(im))
    margin = float(im[k]) if np.isfinite(im[k]) else None
    points = pts_grid.ravel()
    evaluation = GridEvaluation(points, flat_vals, flat_failed, confirmed)

    details = {"quantity": quantity, "suppressed_spikes": spikes,
               "branch_mismatches": len(confirmed), "options": opts.to_dict()}
    witness = None
    if margin is not None and margin > slack:
        verdict = FAIL
        refined = _refine_witness(m, grid, k, value_fn, kind, tight)
        witness = {"point": complex(points[k]), "value": complex(flat_vals[k]), "im_value": margin}
        if refined is not None:
            details["refined_witness"] = refined
        statement = f"{quantity} = {margin:.6g} > {slack:g} at the witness point"
    elif confirmed:
        verdict = FAIL
        c0 = min(confirmed, key=lambda d: d["index"])
        witness = {"point": c0["point"], "kind": "branch-mismatch",
                   "ray_value": c0["ray_value"], "arc_value": c0["arc_value"]}
        statement = ("F^{-1} continued along a ray and along an arc gives two different values: "
                     "it has no single-valued extension to the upper half-plane")
    elif n_fail > max_failure_fraction * len(points):
        verdict = INCONCLUSIVE
        statement = f"{n_fail} of {len(points)} grid points could not be evaluated"
    else:
        verdict = PASS
        statement = (f"{quantity} <= {slack:g} at all {len(points) - n_fail} evaluated grid points "
                     f"({n_fail} not evaluated); consistent with "
                     f"{'free infinite divisibility' if kind == 'fid' else 'free selfdecomposability'} "
                     "on this grid")
    if confirmed:
        details["mismatch_examples"] = confirmed[:5]
    report = CheckReport(f"{kind}_grid", verdict, statement, margin=margin, witness=witness,
                         tolerance=slack, grid=grid.to_dict(), evaluation_failures=n_fail,
                         details=details)
    return report, evaluation


def _refine_witness(m, grid, k, value_fn, kind, opts):
    """Evaluate a 4x denser patch around grid point ``k`` and return the worst point."""
    i, j = divmod(k, grid.shape[1])
    r = grid.radii()[i]
    th = grid.angles()[j]
    dlog = math.log(10) / grid.per_decade / 4
    dth = (math.pi - 2 * grid.theta_min) / max(grid.n_angles - 1, 1) / 4
    inv = Inverter(m, opts)
    best = None
    for a in range(-4, 5):
        for b in range(-4, 5):
            t = th + b * dth
            if not grid.theta_min <= abs(t) <= math.pi - grid.theta_min:
                continue
            p = r * math.exp(a * dlog) * complex(math.cos(t), math.sin(t))
            target = p if kind == "fid" else 1 / p
            try:
                om, F, dF, _ = inv.invert(target)
                v = value_fn(target, om, F, dF)
            except (InversionError, DerivativeSingularityError):
                continue
            if best is None or v.imag > best["im_value"]:
                best = {"point": p, "value": v, "im_value": v.imag}
    return best


def _triplet_grid_check(kind, m, grid, slack, quantity, max_failure_fraction):
    pts = grid.points()
    vals = np.full(pts.shape, np.nan + 0j)
    failed = np.zeros(pts.shape, dtype=bool)

    def one(z):
        try:
            if kind == "fid":
                return z * levy_khintchine_eval(m.triplet, 1 / z)
            return levy_khintchine_derivative_eval(m.triplet, z)
        except (FreeProbError, ArithmeticError):
            return None

    res = _map(one, pts)
    for n, v in enumerate(res):
        if v is None or not np.isfinite(v):
            failed[n] = True
        else:
            vals[n] = v
    im = np.where(failed, -np.inf, vals.imag)
    k = int(np.argmax(im))
    margin = float(im[k])
    n_fail = int(failed.sum())
    witness = None
    if margin > slack:
        verdict = FAIL
        witness = {"point": complex(pts[k]), "value": complex(vals[k]), "im_value": margin}
        statement = f"{quantity} = {margin:.6g} > {slack:g} at the witness point"
    elif n_fail > max_failure_fraction * len(pts):
        verdict = INCONCLUSIVE
        statement = f"{n_fail} of {len(pts)} grid points could not be evaluated"
    else:
        verdict = PASS
        statement = (f"{quantity} <= {slack:g} at all evaluated grid points, from the "
                     "Levy-Khintchine representation")
    report = CheckReport(f"{kind}_grid", verdict, statement, margin=margin, witness=witness,
                         tolerance=slack, grid=grid.to_dict(), evaluation_failures=n_fail,
                         details={"quantity": quantity, "route": "levy-khintchine"})
    return report, GridEvaluation(pts, vals, failed)


def fid_grid_check_with_values(m, grid=None, slack=DEFAULT_SLACK, opts=None,
                               max_failure_fraction=MAX_FAILURE_FRACTION):
    grid = grid or HalfPlaneGrid(half="upper")
    if grid.half != "upper":
        raise ParameterDomainError("the FID check runs on the upper half-plane")
    return _grid_check("fid", m, grid, slack, opts or DEFAULT_OPTIONS, max_failure_fraction)


def fid_grid_check(m: MeasureSpec, grid: HalfPlaneGrid | None = None, slack: float = DEFAULT_SLACK,
                   opts: TransformOptions | None = None,
                   max_failure_fraction: float = MAX_FAILURE_FRACTION) -> CheckReport:
    """``Im phi(z) <= slack`` on an upper half-plane grid (and ``phi`` single valued)."""
    return fid_grid_check_with_values(m, grid, slack, opts, max_failure_fraction)[0]


def fsd_grid_check_with_values(m, grid=None, slack=DEFAULT_SLACK, opts=None,
                               max_failure_fraction=MAX_FAILURE_FRACTION):
    grid = grid or HalfPlaneGrid(half="lower")
    if grid.half != "lower":
        raise ParameterDomainError("the FSD check runs on the lower half-plane")
    return _grid_check("fsd", m, grid, slack, opts or DEFAULT_OPTIONS, max_failure_fraction)


def fsd_grid_check(m: MeasureSpec, grid: HalfPlaneGrid | None = None, slack: float = DEFAULT_SLACK,
                   opts: TransformOptions | None = None,
                   max_failure_fraction: float = MAX_FAILURE_FRACTION) -> CheckReport:
    """``Im C'(w) <= slack`` on a lower half-plane grid, with ``C'(w) = omega - F/F'``."""
    return fsd_grid_check_with_values(m, grid, slack, opts, max_failure_fraction)[0]


# ---------------------------------------------------------------------------
# UI-class criterion and Kerov's theorem


def _as_points(grid) -> np.ndarray:
    if isinstance(grid, HalfPlaneGrid):
        return grid.points()
    return np.asarray(grid, dtype=complex).ravel()


def ui_class_fsd_check(F_evaluator, grid, slack: float = DEFAULT_SLACK,
                       max_failure_fraction: float = MAX_FAILURE_FRACTION) -> CheckReport:
    """``Im(w - F(w)/F'(w)) <= slack`` over the supplied points.

    ``F_evaluator(w)`` returns ``(F(w), F'(w))``; points below the axis are
    only meaningful where the evaluator continues ``F`` into its domain.
    """
    pts = _as_points(grid)
    vals = np.full(pts.shape, np.nan)
    failed = np.zeros(pts.shape, dtype=bool)
    for n, w in enumerate(pts):
        try:
            F, dF = F_evaluator(complex(w))
            v = (w - F / dF).imag
        except (FreeProbError, ZeroDivisionError, OverflowError):
            failed[n] = True
            continue
        if not math.isfinite(v):
            failed[n] = True
        else:
            vals[n] = v
    im = np.where(failed, -np.inf, vals)
    k = int(np.argmax(im))
    margin = float(im[k])
    n_fail = int(failed.sum())
    grid_meta = grid.to_dict() if isinstance(grid, HalfPlaneGrid) else {"count": len(pts)}
    if margin > slack:
        return CheckReport("ui_class_fsd", FAIL, f"Im(w - F/F') = {margin:.6g} > {slack:g}",
                           margin=margin, witness={"point": complex(pts[k]), "im_value": margin},
                           tolerance=slack, grid=grid_meta, evaluation_failures=n_fail)
    if n_fail > max_failure_fraction * len(pts):
        return CheckReport("ui_class_fsd", INCONCLUSIVE,
                           f"{n_fail} of {len(pts)} points could not be evaluated",
                           margin=margin, tolerance=slack, grid=grid_meta, evaluation_failures=n_fail)
    return CheckReport("ui_class_fsd", PASS,
                       f"Im(w - F/F') <= {slack:g} at all {len(pts) - n_fail} evaluated points",
                       margin=margin, tolerance=slack, grid=grid_meta, evaluation_failures=n_fail)


def ui_class_fsd_check_measure(m: MeasureSpec, grid=None, slack: float = DEFAULT_SLACK,
                               opts: TransformOptions | None = None) -> CheckReport:
    ev, _ = omega_evaluator(m, opts or DEFAULT_OPTIONS)
    return ui_class_fsd_check(ev, grid or HalfPlaneGrid(half="upper"), slack)


KEROV_HEIGHTS = (10.0, 100.0, 1000.0)


def kerov_check(c: float, grid: HalfPlaneGrid | None = None, asymptotic_tol: float = 1e-4,
                opts: TransformOptions | None = None) -> CheckReport:
    """``h = -G'/G = F'/F`` for ``mu_c`` must look like a Cauchy transform.

    Checks ``Im h < 0`` at every grid point and that ``|iy h(iy) - 1|``
    decreases along ``y = 10, 100, 1000`` to below ``asymptotic_tol``.
    """
    from .awk import AWKParams, omega_values

    AWKParams(c)
    if c == -1:
        raise ParameterDomainError("Kerov's theorem is stated for c > -1")
    opts = opts or DEFAULT_OPTIONS
    grid = grid or HalfPlaneGrid(half="upper")
    pts = grid.points()
    F, dF, ok = omega_values(c, pts, opts)
    with np.errstate(all="ignore"):
        h = dF / F
    bad = ~ok | ~np.isfinite(h)
    im = np.where(bad, -np.inf, h.imag)
    k = int(np.argmax(im))
    margin = float(im[k])
    ys = np.array(KEROV_HEIGHTS)
    Fy, dFy, _ = omega_values(c, 1j * ys, opts)
    errs = np.abs(1j * ys * dFy / Fy - 1)
    decreasing = bool(np.all(np.diff(errs) < 0))
    small = bool(errs[-1] <= asymptotic_tol)
    n_fail = int(bad.sum())
    details = {"c": c, "asymptotic_errors": dict(zip(map(float, ys), map(float, errs))),
               "asymptotic_decreasing": decreasing, "exploratory": False}
    if margin >= 0:
        return CheckReport("kerov", FAIL, f"Im h = {margin:.6g} >= 0 at the witness",
                           margin=margin, witness={"point": complex(pts[k]), "h": complex(h[k])},
                           tolerance=0.0, grid=grid.to_dict(), evaluation_failures=n_fail,
                           details=details)
    if not (decreasing and small):
        return CheckReport("kerov", FAIL, "iy h(iy) does not approach 1 along the imaginary axis",
                           margin=margin, witness={"heights": list(map(float, ys)),
                                                   "errors": list(map(float, errs))},
                           tolerance=asymptotic_tol, grid=grid.to_dict(),
                           evaluation_failures=n_fail, details=details)
    if n_fail > MAX_FAILURE_FRACTION * len(pts):
        return CheckReport("kerov", INCONCLUSIVE, f"{n_fail} grid points could not be evaluated",
                           margin=margin, tolerance=0.0, grid=grid.to_dict(),
                           evaluation_failures=n_fail, details=details)
    return CheckReport(
        "kerov", PASS,
        f"Im h < 0 at all {len(pts) - n_fail} evaluated grid points and |iy h(iy) - 1| "
        f"decreases to {errs[-1]:.3g} at y = {ys[-1]:g}",
        margin=margin, tolerance=asymptotic_tol, grid=grid.to_dict(),
        evaluation_failures=n_fail, details=details)


# ---------------------------------------------------------------------------
# Nevanlinna pair extraction


@dataclass(frozen=True)
class NevanlinnaConfig:
    """Real grid ``x = scale sinh(u)`` with ``u`` uniform, plus Stieltjes settings."""

    x_max: float = 20.0
    n_points: int = 1201
    scale: float = 0.01
    y0: float = 0.25
    levels: int = 12
    atom_tol: float = 1e-4

    def grid(self) -> np.ndarray:
        u_max = math.asinh(self.x_max / self.scale)
        u = np.linspace(-u_max, u_max, self.n_points)
        x = self.scale * np.sinh(u)
        x[np.abs(x) < 1e-14] = 0.0
        return x


@dataclass(frozen=True)
class NevanlinnaEstimate:
    xi: float
    rho_mass: float
    atom_at_zero: float
    xs: tuple
    density: tuple
    density_errors: tuple
    mass_from_table: float
    pair: NevanlinnaPair

    def to_dict(self) -> dict:
        return {"xi": self.xi, "rho_mass": self.rho_mass, "atom_at_zero": self.atom_at_zero,
                "mass_from_table": self.mass_from_table,
                "xs": list(self.xs), "density": list(self.density),
                "density_errors": list(self.density_errors)}


class _WalkingCPrime:
    """``g(z) = C'(1/z)`` for a sequence of nearby ``z``, reusing the last solution."""

    def __init__(self, m: MeasureSpec, opts: TransformOptions):
        self.inv = Inverter(m, opts)
        self.last = None

    def __call__(self, z: complex) -> complex:
        # C'(1/z) needs omega = F^{-1}(z)
        if self.last is None:
            w0, st = self.inv.start(z)
            st = self.inv.walk(w0, st, z, self.inv.opts.continuation_steps)
        else:
            w0, st0 = self.last
            st = self.inv.walk(w0, st0, z, 8)
        self.last = (z, st)
        return cprime_from_state(st[0], st[1], st[2])


def nevanlinna_extract(m: MeasureSpec, config: NevanlinnaConfig | None = None,
                       opts: TransformOptions | None = None) -> NevanlinnaEstimate:
    """Estimate ``(xi, rho)`` in ``C'(w) = xi + int (x + w)/(1 - x w) rho(dx)``.

    At ``w = -i`` the kernel equals ``-i`` for every ``x``, so
    ``C'(-i) = xi - i rho(R)``.  The density of ``rho`` comes from Stieltjes
    inversion of ``g(z) = C'(1/z) = xi + int (1 + x z)/(z - x) rho(dx)``:
    ``rho'(x) = -Im g(x + i0) / (pi (1 + x^2))``.  The atom at 0 is
    ``lim_{y -> 0} iy g(iy)``.
    """
    config = config or NevanlinnaConfig()
    opts = opts or DEFAULT_OPTIONS
    c = free_cumulant_transform_derivative_eval(m, -1j, opts).value
    xi, mass = c.real, -c.imag

    atom = _atom_at_zero(m, opts)
    if atom <= config.atom_tol * max(1.0, mass):
        atom = 0.0  # iy g(iy) -> 0 slowly (e.g. like y log y) when there is no atom
    xs = config.grid()
    dens, errs = [], []
    for x in xs:
        if m.triplet_only:
            def g(z):
                return levy_khintchine_derivative_eval(m.triplet, 1 / z)
        else:
            g = _WalkingCPrime(m, opts)
        try:
            # start no higher than twice the distance to 0, where rho may be singular
            y0 = min(config.y0, max(2 * abs(float(x)), 1e-6))
            est = stieltjes_inversion(g, float(x), y0=y0, levels=config.levels)
            val, err = est.value / (1 + x * x), est.est_error / (1 + x * x)
        except InversionUnstableError:
            val, err = float("nan"), float("inf")
        if x == 0 and atom > 0:
            val, err = float("nan"), float("inf")
        dens.append(max(val, 0.0) if math.isfinite(val) else val)
        errs.append(err)
    dens_arr = np.array(dens)
    ok = np.isfinite(dens_arr)
    # fill gaps (e.g. the atom location) by linear interpolation
    if not ok.all() and ok.any():
        dens_arr[~ok] = np.interp(xs[~ok], xs[ok], dens_arr[ok])
    atoms = ((0.0, atom),) if atom > 0 else ()
    rho = FiniteMeasure.from_table(list(map(float, xs)), list(map(float, dens_arr)), atoms=atoms)
    table_mass = float(integrate.trapezoid(dens_arr, xs)) + atom
    return NevanlinnaEstimate(
        xi=float(xi), rho_mass=float(mass), atom_at_zero=float(atom),
        xs=tuple(map(float, xs)), density=tuple(map(float, dens_arr)),
        density_errors=tuple(map(float, errs)), mass_from_table=table_mass,
        pair=NevanlinnaPair(float(xi), rho),
    )


def _atom_at_zero(m, opts, levels: int = 12) -> float:
    """``rho({0}) = lim_{y -> 0} iy C'(-i/y)``, Richardson-extrapolated in ``y``."""
    vals = []
    y = 0.25
    g = None if m.triplet_only else _WalkingCPrime(m, opts)
    for _ in range(levels):
        try:
            if g is None:
                v = levy_khintchine_derivative_eval(m.triplet, -1j / y)
            else:
                v = g(1j * y)
        except (FreeProbError, ArithmeticError):
            break
        vals.append((1j * y * v).real)
        y /= 2
    if len(vals) < 2:
        return 0.0
    table = [vals[:1]]
    for k in range(1, len(vals)):
        row = [vals[k]]
        for j in range(1, k + 1):
            row.append((2 ** j * row[j - 1] - table[k - 1][j - 1]) / (2 ** j - 1))
        table.append(row)
    return max(float(table[-1][-1]), 0.0)


def nevanlinna_loop_check(m: MeasureSpec, estimate: NevanlinnaEstimate, points=None,
                          tol: float = 1e-3, opts: TransformOptions | None = None) -> CheckReport:
    """Rebuild the triplet from the estimate and compare ``C`` with the direct transform."""
    pts = np.asarray(points if points is not None else loop_test_points(), dtype=complex)
    triplet = triplet_from_nevanlinna(estimate.pair)
    worst, worst_pt, rows = -1.0, None, []
    for w in pts:
        direct = free_cumulant_transform_eval(m, complex(w), opts).value
        rebuilt = levy_khintchine_eval(triplet, complex(w))
        d = abs(direct - rebuilt)
        rows.append({"w": complex(w), "direct": direct, "rebuilt": rebuilt, "difference": d})
        if d > worst:
            worst, worst_pt = d, complex(w)
    details = {"triplet": triplet.to_dict(), "points": rows}
    if worst > tol:
        return CheckReport("nevanlinna_loop", FAIL,
                           f"rebuilt C differs from the direct transform by {worst:.3g} > {tol:g}",
                           margin=worst, witness={"point": worst_pt, "difference": worst},
                           tolerance=tol, details=details)
    return CheckReport("nevanlinna_loop", PASS,
                       f"rebuilt C matches the direct transform within {worst:.3g} at {len(pts)} points",
                       margin=worst, tolerance=tol, details=details)


def loop_test_points(n: int = 20) -> np.ndarray:
    """``n`` fixed points of the lower half-plane (moduli 0.2..2, varied angles)."""
    k = np.arange(n)
    r = 0.2 * 10 ** (k / (n - 1))
    th = -(0.15 + (math.pi - 0.3) * ((k * 7) % n) / (n - 1))
    return r * np.exp(1j * th)


# ---------------------------------------------------------------------------
# three routes to an FSD verdict


def fsd_routes(m: MeasureSpec, hankel_orders: int = 8, grid: HalfPlaneGrid | None = None,
               opts: TransformOptions | None = None) -> dict:
    """Grid, Hankel and monotone-k verdicts for one measure."""
    from .cumulants import fsd_cumulant_criterion

    out = {"grid": fsd_grid_check(m, grid, opts=opts)}
    if m.has_moments:
        mom = m.moments(2 * hankel_orders)
        reps = [fsd_cumulant_criterion(mom, n, compact_support=m.compact_support is not None)
                for n in range(1, hankel_orders + 1)]
        out["hankel"] = next((r for r in reps if r.failed), reps[-1])
    if m.triplet is not None:
        out["levy"] = fsd_monotonicity_check(m.triplet.nu)
    return out


def verdicts_agree(routes: dict) -> bool:
    return len({r.verdict for r in routes.values()}) == 1


__all__ = [
    "HalfPlaneGrid", "GridEvaluation", "NevanlinnaConfig", "NevanlinnaEstimate",
    "fid_grid_check", "fsd_grid_check", "fid_grid_check_with_values", "fsd_grid_check_with_values",
    "ui_class_fsd_check", "ui_class_fsd_check_measure", "kerov_check", "nevanlinna_extract",
    "nevanlinna_loop_check", "loop_test_points", "fsd_routes", "verdicts_agree",
    "invert_on_polar_grid", "thread_count",
]
