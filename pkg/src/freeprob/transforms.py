"""Cauchy transform, its reciprocal and right inverse, and the free transforms.

Notation: ``G`` is the Cauchy transform, ``F = 1/G``, ``phi(z) = F^{-1}(z) - z``
is the Voiculescu transform and ``C(w) = w F^{-1}(1/w) - 1`` the free
cumulant transform, so that ``C(w) = w phi(1/w)``.

``F^{-1}`` is computed by Newton's method with continuation: start far out on
the ray through the target, where ``F`` is close to the identity, and walk in
towards the target reusing each solution as the next seed.  A walk that
breaks down raises :class:`InversionError`; it never returns a guess.
"""

from __future__ import annotations

import cmath
import math
import weakref
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    ConvergenceError,
    DerivativeSingularityError,
    InversionError,
    InversionUnstableError,
    ParameterDomainError,
    UnsupportedRepresentationError,
)
from .levy import levy_khintchine_derivative_eval, levy_khintchine_eval
from .measures import DensitySpec, JacobiCoefficients, MeasureSpec

CONTINUED_FRACTION = "continued-fraction"
QUADRATURE = "quadrature"
CLOSED_FORM = "closed-form"
NEWTON = "newton-inversion"
RICCATI = "riccati-continuation"
LEVY_KHINTCHINE = "levy-khintchine"
METHODS = (CONTINUED_FRACTION, QUADRATURE, CLOSED_FORM, NEWTON, RICCATI, LEVY_KHINTCHINE)


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ParameterDomainError("complex point must be finite")

    @classmethod
    def of(cls, z) -> "ComplexPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self):
        return complex(self.re, self.im)


def as_complex(z) -> complex:
    if isinstance(z, ComplexPoint):
        return complex(z)
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParameterDomainError(f"non-finite point {z}")
    return z


@dataclass(frozen=True)
class TransformOptions:
    cf_depth: int = 32
    cf_max_depth: int = 2 ** 14
    cf_adaptive_tol: float = 1e-13
    quad_tol: float = 1e-10
    quad_truncation: float = 1e3
    newton_tol: float = 1e-12
    newton_max_iter: int = 40
    continuation_steps: int = 32
    start_radius: float = 1e4
    method: str | None = None

    def __post_init__(self):
        for name in ("cf_adaptive_tol", "quad_tol", "newton_tol"):
            if not getattr(self, name) > 0:
                raise ParameterDomainError(f"{name} must be > 0")
        if self.cf_depth < 1 or self.cf_max_depth < self.cf_depth:
            raise ParameterDomainError("need 1 <= cf_depth <= cf_max_depth")
        if self.newton_max_iter < 1 or self.continuation_steps < 1:
            raise ParameterDomainError("iteration counts must be positive")
        if self.method is not None and self.method not in METHODS:
            raise ParameterDomainError(f"unknown method {self.method!r}")

    def tightened(self) -> "TransformOptions":
        """Settings for re-evaluating a suspicious point: 4x denser walk, stricter Newton."""
        return replace(self, continuation_steps=4 * self.continuation_steps,
                       newton_tol=max(self.newton_tol / 100, 1e-15))

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_OPTIONS = TransformOptions()


@dataclass(frozen=True)
class TransformValue:
    value: complex
    est_error: float
    method: str

    def __post_init__(self):
        if not math.isfinite(self.est_error):
            object.__setattr__(self, "est_error", float("inf"))

    def __complex__(self):
        return complex(self.value)

    def to_dict(self) -> dict:
        return {"value": complex(self.value), "est_error": self.est_error, "method": self.method}


# ---------------------------------------------------------------------------
# continued fraction


def _cf_once(alphas, betas, z, depth):
    """Backward evaluation of ``1/(z - a_0 - b_1/(z - a_1 - ...))`` with zero tail.

    Works for Python complex scalars and numpy arrays alike; returns
    ``(G, G')``.
    """
    u = z - alphas[depth - 1]
    du = 1.0
    for k in range(depth - 2, -1, -1):
        q = betas[k] / u
        du = 1.0 + q * du / u
        u = z - alphas[k] - q
    return 1.0 / u, -du / (u * u)


def continued_fraction_eval(j: JacobiCoefficients, z, opts: TransformOptions = DEFAULT_OPTIONS,
                            need_derivative: bool = True):
    """``(G, G', est_error)`` from Jacobi coefficients, adaptively truncated.

    Depths ``d`` and ``2d`` are compared and ``d`` doubled until they agree
    to ``cf_adaptive_tol`` (relative) or the depth cap is hit.  ``G'``
    converges more slowly than ``G``; it only gates acceptance when
    ``need_derivative`` is set.
    """
    depth = j.depth
    if depth is not None:
        alphas, betas = j.float_arrays(depth)
        g, dg = _cf_once(alphas, betas, z, depth)
        if j.terminates:
            return g, dg, 0.0
        half = max(depth // 2, 1)
        g2, _ = _cf_once(alphas, betas, z, half)
        err = float(np.max(np.abs(g - g2)))
        if err > opts.cf_adaptive_tol * max(float(np.max(np.abs(g))), 1e-300):
            raise ConvergenceError(f"stored recurrence ({depth} levels) too short", g, g2)
        return g, dg, err
    d = opts.cf_depth
    while True:
        alphas, betas = j.float_arrays(2 * d)
        g1, dg1 = _cf_once(alphas, betas, z, d)
        g2, dg2 = _cf_once(alphas, betas, z, 2 * d)
        err = float(np.max(np.abs(g2 - g1)))
        derr = float(np.max(np.abs(dg2 - dg1)))
        scale = max(float(np.max(np.abs(g2))), 1e-300)
        dscale = max(float(np.max(np.abs(dg2))), 1e-300)
        d_ok = not need_derivative or derr <= 10 * opts.cf_adaptive_tol * dscale
        if err <= opts.cf_adaptive_tol * scale and d_ok:
            return g2, dg2, err
        if 4 * d > opts.cf_max_depth:
            raise ConvergenceError(
                f"continued fraction not converged at depth {2 * d} (difference {err:.3g})", g2, g1)
        d *= 2


# ---------------------------------------------------------------------------
# density quadrature


def _quad_c(func, lo, hi, points, tol):
    """Complex quadrature of ``func`` over ``[lo, hi]`` split at ``points``."""
    cuts = sorted({p for p in points if lo < p < hi})
    edges = [lo, *cuts, hi]
    total, err = 0j, 0.0
    for a, b in zip(edges, edges[1:]):
        if a == b:
            continue
        kw = {"epsabs": tol, "epsrel": tol, "limit": 500}
        re, e1 = integrate.quad(lambda t: func(t).real, a, b, **kw)
        im, e2 = integrate.quad(lambda t: func(t).imag, a, b, **kw)
        total += complex(re, im)
        err += e1 + e2
    return total, err


def _tail_correction(coeff, power, T, z, side):
    """``int_T^inf c t^-p/(z - t) dt`` (side=+1) or the mirror on the left, with derivative.

    Series in ``z/t``, valid for ``|z| < T``.
    """
    g, dg = 0j, 0j
    zt = z / T
    term = 1.0 + 0j
    for k in range(0, 80):
        sign = -1.0 if side > 0 else (-1.0) ** k
        c = sign * T ** (-power) / (power + k)
        g += c * term
        if k >= 1:
            dg += c * k * term / z if z != 0 else (c / T if k == 1 else 0)
        term *= zt
        if abs(term) < 1e-18:
            break
    return coeff * g, coeff * dg


def density_cauchy_eval(d: DensitySpec, z: complex, opts: TransformOptions = DEFAULT_OPTIONS):
    """``(G, G', est_error)`` by quadrature; continued below the axis for analytic densities."""
    g = sum(float(p) / (z - float(x)) for x, p in d.atoms)
    dg = -sum(float(p) / (z - float(x)) ** 2 for x, p in d.atoms)
    err = 0.0
    if d.evaluator is not None:
        lo, hi = d.support
        T = opts.quad_truncation
        a, b = max(lo, -T), min(hi, T)
        x, y = z.real, abs(z.imag)
        pts = [*d.breakpoints, x, x - y, x + y, x - 4 * y, x + 4 * y]
        f = d.evaluator
        gi, e1 = _quad_c(lambda t: f(t) / (z - t), a, b, pts, opts.quad_tol)
        dgi, e2 = _quad_c(lambda t: -f(t) / (z - t) ** 2, a, b, pts, opts.quad_tol)
        g += gi
        dg += dgi
        err += e1
        for side, edge, outer in ((1, b, hi), (-1, a, lo)):
            if abs(outer) <= abs(edge):
                continue
            if d.tail is not None and abs(z) < 0.5 * T:
                tg, tdg = _tail_correction(d.tail[0], d.tail[1], T, z, side)
                g += tg
                dg += tdg
            else:
                lims = (edge, outer) if side > 0 else (outer, edge)
                tg, e3 = _quad_c(lambda t: f(t) / (z - t), *lims, (), opts.quad_tol)
                tdg, _ = _quad_c(lambda t: -f(t) / (z - t) ** 2, *lims, (), opts.quad_tol)
                g += tg
                dg += tdg
                err += e3
        if z.imag < 0:
            if not d.analytic:
                raise UnsupportedRepresentationError("density is not analytic; no continuation below the axis")
            fz = d.evaluator(complex(z))
            dfz = d.derivative(complex(z)) if d.derivative else _complex_diff(d.evaluator, z)
            g -= 2j * math.pi * fz
            dg -= 2j * math.pi * dfz
    return complex(g), complex(dg), err


def _complex_diff(f, z, h=1e-5):
    return (f(z + h) - f(z - h)) / (2 * h)


# ---------------------------------------------------------------------------
# Cauchy transform


def _available_methods(m: MeasureSpec) -> list[str]:
    out = []
    if m.closed_form is not None:
        out.append(CLOSED_FORM)
    if m.jacobi is not None:
        out.append(CONTINUED_FRACTION)
    if m.density is not None and (m.density.evaluator is not None or m.density.atoms):
        out.append(QUADRATURE)
    return out


def _eval_method(m: MeasureSpec, z: complex, opts: TransformOptions, method: str,
                 need_derivative: bool = True):
    if method == CLOSED_FORM:
        g, dg = m.closed_form.evaluate(z)
        return complex(g), complex(dg), 0.0
    if method == CONTINUED_FRACTION:
        g, dg, err = continued_fraction_eval(m.jacobi, z, opts, need_derivative)
        return complex(g), complex(dg), err
    if method == QUADRATURE:
        return density_cauchy_eval(m.density, z, opts)
    raise UnsupportedRepresentationError(f"method {method!r} cannot evaluate G")


_SANITY: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _asymptotic_sanity(m: MeasureSpec, opts: TransformOptions, method: str):
    """``z G(z) -> 1`` along ``z = iy``: a cheap guard against a wrong representation."""
    if m in _SANITY:
        return
    y = 1e4
    g, _, _ = _eval_method(m, 1j * y, opts, method, need_derivative=False)
    if not abs(1j * y * g - 1) < 1e-2:
        raise ConvergenceError(f"{m.name}: iy G(iy) = {1j * y * g} is not close to 1 at y = {y:g}")
    _SANITY[m] = True


def _choose_method(m: MeasureSpec, opts: TransformOptions, method: str | None) -> str:
    avail = _available_methods(m)
    if not avail:
        if m.triplet is not None:
            raise UnsupportedRepresentationError(
                f"{m.name} is given by its free characteristic triplet only; G is not available")
        raise UnsupportedRepresentationError(f"{m.name} has no representation that evaluates G")
    method = method or opts.method
    if method is None:
        return avail[0]
    if method not in avail:
        raise UnsupportedRepresentationError(f"{m.name} cannot be evaluated by {method}")
    return method


def cauchy_eval(m: MeasureSpec, z, opts: TransformOptions | None = None,
                method: str | None = None) -> TransformValue:
    """``G(z)`` on the upper half-plane.

    Closed form is preferred, then the Jacobi continued fraction, then
    quadrature of the density; ``method`` forces one of them.
    """
    opts = opts or DEFAULT_OPTIONS
    z = as_complex(z)
    if not z.imag > 0:
        raise ParameterDomainError(f"G is evaluated on the upper half-plane, got {z}")
    method = _choose_method(m, opts, method)
    _asymptotic_sanity(m, opts, method)
    g, _, err = _eval_method(m, z, opts, method, need_derivative=False)
    return TransformValue(g, err, method)


def cauchy_derivative_eval(m: MeasureSpec, z, opts: TransformOptions | None = None,
                           method: str | None = None) -> TransformValue:
    opts = opts or DEFAULT_OPTIONS
    z = as_complex(z)
    if not z.imag > 0:
        raise ParameterDomainError(f"G' is evaluated on the upper half-plane, got {z}")
    method = _choose_method(m, opts, method)
    _, dg, err = _eval_method(m, z, opts, method)
    return TransformValue(dg, err, method)


def reciprocal_cauchy_eval(m: MeasureSpec, z, opts: TransformOptions | None = None,
                           method: str | None = None) -> TransformValue:
    g = cauchy_eval(m, z, opts, method)
    f = 1 / g.value
    return TransformValue(f, g.est_error * abs(f) ** 2, g.method)


# ---------------------------------------------------------------------------
# F on the domain of the inverse (upper half-plane plus continuation)


class _DomainExit(Exception):
    pass


def omega_evaluator(m: MeasureSpec, opts: TransformOptions) -> tuple[Callable, bool]:
    """A function ``z -> (F(z), F'(z))`` valid on the largest domain available.

    The flag says whether points below the real axis can be evaluated (by a
    closed-form continuation, an analytic density, or a Riccati solver).
    """
    if m.closed_form is not None:
        cf = m.closed_form

        def ev(z):
            g, dg = cf.evaluate(z)
            return 1 / g, -dg / (g * g)

        return ev, True
    if m.continuation is not None:
        cont = m.continuation

        def ev(z):
            return cont(z, opts)

        return ev, True
    if m.density is not None and m.density.analytic and m.density.evaluator is not None:
        dens = m.density

        def ev(z):
            g, dg, _ = density_cauchy_eval(dens, z, opts)
            return 1 / g, -dg / (g * g)

        return ev, True
    method = _choose_method(m, opts, None)

    def ev(z):
        if z.imag <= 0:
            raise _DomainExit(z)
        g, dg, _ = _eval_method(m, z, opts, method)
        return 1 / g, -dg / (g * g)

    return ev, False


class Inverter:
    """Newton continuation for ``F^{-1}``, reusable along many paths."""

    def __init__(self, m: MeasureSpec, opts: TransformOptions | None = None,
                 max_halvings: int = 14):
        self.m = m
        self.opts = opts or DEFAULT_OPTIONS
        self.evalF, self.continuable = omega_evaluator(m, self.opts)
        self.max_halvings = max_halvings
        self.shift = 0.0
        if m.has_moments:
            try:
                self.shift = float(m.moments(1)[1])
            except Exception:  # noqa: BLE001 - the shift is only a seed refinement
                self.shift = 0.0

    def newton(self, w: complex, seed: complex, tol: float | None = None):
        """Solve ``F(omega) = w`` from ``seed``; returns ``(omega, F, F', residual)``."""
        tol = self.opts.newton_tol if tol is None else tol
        target = tol * (1 + abs(w))
        om = seed
        try:
            F, dF = self.evalF(om)
        except (_DomainExit, ConvergenceError, ZeroDivisionError, OverflowError):
            return None
        r = F - w
        for _ in range(self.opts.newton_max_iter):
            if not (cmath.isfinite(F) and cmath.isfinite(dF)):
                return None
            if abs(r) <= target:
                return om, F, dF, abs(r)
            if dF == 0:
                return None
            step = r / dF
            for _half in range(8):
                cand = om - step
                try:
                    Fc, dFc = self.evalF(cand)
                except (_DomainExit, ConvergenceError, ZeroDivisionError, OverflowError):
                    step /= 2
                    continue
                rc = Fc - w
                if cmath.isfinite(rc) and abs(rc) < abs(r) or abs(rc) <= target:
                    break
                step /= 2
            else:
                return None
            om, F, dF, r = cand, Fc, dFc, rc
        if abs(r) <= target:
            return om, F, dF, abs(r)
        return None

    def _step(self, w0, om0, dF0, w1, tol):
        pred = om0 + (w1 - w0) / dF0 if dF0 != 0 else om0
        sol = self.newton(w1, pred, tol)
        if sol is None:
            return None
        om1 = sol[0]
        # a corrector far larger than the step means Newton jumped branches
        if abs(om1 - pred) > 0.5 * abs(om1 - om0) + 1e-9 * (1 + abs(om1)):
            return None
        return sol

    def walk(self, w0: complex, state, w1: complex, n_sub: int, tol: float | None = None):
        """Continue a solved state ``(omega, F, F', res)`` at ``w0`` to ``w1``.

        The path is the log-spiral ``w0 (w1/w0)^t``, which stays in the upper
        half-plane when both ends do.  Substeps that fail are halved.
        """
        if w0 == w1:
            return state
        log_ratio = cmath.log(w1 / w0)
        ts = [k / n_sub for k in range(n_sub + 1)]
        cur_t, cur_w, cur = 0.0, w0, state
        stack = list(reversed(ts[1:]))
        depth = {t: 0 for t in ts}
        while stack:
            t = stack[-1]
            wt = w0 * cmath.exp(log_ratio * t) if t < 1 else w1
            sol = self._step(cur_w, cur[0], cur[2], wt, tol)
            if sol is None:
                lvl = depth.get(t, 0)
                if lvl >= self.max_halvings:
                    raise InversionError(
                        f"continuation stalled between {cur_w} and {wt}", position=cur_w, target=w1)
                mid = 0.5 * (cur_t + t)
                depth[mid] = lvl + 1
                depth[t] = lvl + 1
                stack.append(mid)
                continue
            stack.pop()
            cur_t, cur_w, cur = t, wt, sol
        return cur

    def start(self, w: complex):
        """Solve at a far point on the ray through ``w``; returns ``(w_far, state)``."""
        R = max(self.opts.start_radius, 10 * abs(w))
        w_far = w * (R / abs(w))
        seed = w_far + self.shift
        sol = self.newton(w_far, seed, self.opts.newton_tol)
        if sol is None:
            raise InversionError("Newton failed at the starting point", position=None, target=w)
        return w_far, sol

    def invert(self, w: complex):
        """Full single-point continuation; returns ``(omega, F, F', residual)``."""
        w_far, state = self.start(w)
        steps = self.opts.continuation_steps
        return self.walk(w_far, state, w, steps)


def _check_upper(w, what):
    w = as_complex(w)
    if not w.imag > 0:
        raise ParameterDomainError(f"{what} needs a point in the upper half-plane, got {w}")
    return w


def _check_lower(w, what):
    w = as_complex(w)
    if not w.imag < 0:
        raise ParameterDomainError(f"{what} needs a point in the lower half-plane, got {w}")
    return w


def invert_reciprocal_cauchy(m: MeasureSpec, w, opts: TransformOptions | None = None) -> complex:
    """``z`` with ``F(z) = w``, by Newton continuation in from far out on the ray."""
    w = _check_upper(w, "F^{-1}")
    om, _, _, res = Inverter(m, opts).invert(w)
    opts = opts or DEFAULT_OPTIONS
    if res > opts.newton_tol * (1 + abs(w)):
        raise InversionError("final residual above tolerance", position=w, target=w)
    return om


def _triplet_c(m, w):
    return levy_khintchine_eval(m.triplet, w)


def free_cumulant_transform_eval(m: MeasureSpec, w, opts: TransformOptions | None = None) -> TransformValue:
    """``C(w) = w F^{-1}(1/w) - 1`` on the lower half-plane."""
    w = _check_lower(w, "C")
    if m.triplet_only:
        return TransformValue(_triplet_c(m, w), 1e-9 * (1 + abs(w) ** 2), LEVY_KHINTCHINE)
    om, F, dF, res = Inverter(m, opts).invert(1 / w)
    return TransformValue(w * om - 1, abs(w) * res / max(abs(dF), 1e-300), NEWTON)


def cprime_from_state(om, F, dF) -> complex:
    """``C'(w) = omega - F(omega)/F'(omega)`` at ``omega = F^{-1}(1/w)``."""
    if abs(dF) < 1e-12:
        raise DerivativeSingularityError(f"|F'(omega)| = {abs(dF):.3g} at omega = {om}")
    return om - F / dF


def free_cumulant_transform_derivative_eval(m: MeasureSpec, w, opts: TransformOptions | None = None,
                                            validate: bool = False) -> TransformValue:
    """``C'(w)`` through the identity ``C'(w) = omega - F(omega)/F'(omega)``.

    With ``validate`` the value is compared against a central difference of
    ``C`` and a mismatch above 1e-6 raises :class:`ConvergenceError`.
    """
    w = _check_lower(w, "C'")
    if m.triplet_only:
        val = levy_khintchine_derivative_eval(m.triplet, w)
        method, err = LEVY_KHINTCHINE, 1e-9 * (1 + abs(w))
    else:
        om, F, dF, res = Inverter(m, opts).invert(1 / w)
        val = cprime_from_state(om, F, dF)
        method, err = NEWTON, res / max(abs(dF), 1e-300) * (1 + abs(val))
    if validate:
        h = 1e-5 * max(abs(w), 1e-3)
        h = min(h, 0.5 * abs(w.imag))
        num = (free_cumulant_transform_eval(m, w + h, opts).value
               - free_cumulant_transform_eval(m, w - h, opts).value) / (2 * h)
        diff = abs(num - val)
        if diff > 1e-6 * (1 + abs(val)):
            raise ConvergenceError(f"C' identity and central difference disagree by {diff:.3g}", val, num)
        err = max(err, diff)
    return TransformValue(val, err, method)


def voiculescu_eval(m: MeasureSpec, z, opts: TransformOptions | None = None) -> TransformValue:
    """``phi(z) = F^{-1}(z) - z`` on the upper half-plane."""
    z = _check_upper(z, "phi")
    if m.triplet_only:
        return TransformValue(z * _triplet_c(m, 1 / z), 1e-9 * (1 + abs(z)), LEVY_KHINTCHINE)
    om, _, dF, res = Inverter(m, opts).invert(z)
    return TransformValue(om - z, res / max(abs(dF), 1e-300), NEWTON)


# ---------------------------------------------------------------------------
# Stieltjes inversion


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    est_error: float
    levels: int

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        return {"value": self.value, "est_error": self.est_error, "levels": self.levels}


def stieltjes_inversion(g: Callable[[complex], complex], x: float, y0: float = 0.5,
                        levels: int = 24, unstable_tol: float = 1e-2,
                        min_levels: int = 3) -> DensityEstimate:
    """``-(1/pi) lim_{y->0} Im g(x + iy)`` by Richardson extrapolation in ``y``.

    ``y`` runs over ``y0, y0/2, ...``; the sequence stops early if ``g`` can
    no longer be evaluated.  The diagonal of the Richardson table whose
    successive difference is smallest is returned with that difference as
    error estimate.
    """
    samples = []
    y = y0
    for _ in range(levels):
        try:
            val = -complex(g(complex(x, y))).imag / math.pi
        except (ConvergenceError, InversionError, DerivativeSingularityError,
                UnsupportedRepresentationError, ZeroDivisionError, OverflowError):
            break
        if not math.isfinite(val):
            break
        samples.append(val)
        y /= 2
    if len(samples) < min_levels:
        raise InversionUnstableError(
            f"only {len(samples)} levels evaluable at x = {x}; need {min_levels}")
    table = [samples[0:1]]
    for k in range(1, len(samples)):
        row = [samples[k]]
        for j in range(1, k + 1):
            fac = 2.0 ** j
            row.append((fac * row[j - 1] - table[k - 1][j - 1]) / (fac - 1))
        table.append(row)
    diag = [table[k][k] for k in range(len(table))]
    best_k, best_err = None, math.inf
    for k in range(1, len(diag)):
        e = abs(diag[k] - diag[k - 1])
        if e < best_err:
            best_k, best_err = k, e
    # the raw last sample is also a legitimate estimate (limits with sqrt behaviour)
    raw_err = abs(samples[-1] - samples[-2])
    if raw_err < best_err:
        best_k, best_err = None, raw_err
    value = diag[best_k] if best_k is not None else samples[-1]
    if best_err > unstable_tol:
        raise InversionUnstableError(
            f"extrapolation at x = {x} did not settle (difference {best_err:.3g})")
    return DensityEstimate(value, best_err, len(samples))


def cauchy_evaluator(m: MeasureSpec, opts: TransformOptions | None = None,
                     method: str | None = None) -> Callable[[complex], complex]:
    """``z -> G(z)`` as a plain function, e.g. for :func:`stieltjes_inversion`."""
    opts = opts or DEFAULT_OPTIONS

    def g(z):
        return cauchy_eval(m, z, opts, method).value

    return g
