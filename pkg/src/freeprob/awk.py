"""Askey–Wimp–Kerov laws ``mu_c``.

``mu_c`` has Jacobi data ``alpha_n = 0``, ``beta_n = c + n``; ``mu_0`` is the
standard Gaussian and ``mu_{-1}`` the point mass at 0.  Its reciprocal Cauchy
transform satisfies the Riccati equation

    F'(w) = w F(w) - F(w)^2 - c,

which is used here to continue ``F`` towards and below the real axis, where
the continued fraction converges too slowly or not at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, LeftOmegaError, ParameterDomainError
from .measures import JacobiCoefficients, awk as awk_measure
from .reports import FAIL, INCONCLUSIVE, PASS, CheckReport, combine_verdicts
from .transforms import (
    DEFAULT_OPTIONS,
    TransformOptions,
    continued_fraction_eval,
    stieltjes_inversion,
)

#: continued fraction is used at or above this height, Riccati below it
CF_HEIGHT = 1.0
CF_RADIUS = 10.0
#: vertical continuation paths start at this height
START_HEIGHT = 2.0
MAX_DF = 1e-2


@dataclass(frozen=True)
class AWKParams:
    c: float

    def __post_init__(self):
        if not self.c >= -1:
            raise ParameterDomainError(f"AWK parameter must be >= -1, got {self.c}")

    @property
    def is_dirac(self) -> bool:
        return self.c == -1

    def jacobi(self) -> JacobiCoefficients:
        return awk_measure(self.c).jacobi


@dataclass(frozen=True)
class ContinuationPath:
    """Straight path from ``start`` (upper half-plane) to ``end``.

    ``steps`` is the initial RK4 step count; steps are halved while a single
    step moves ``F`` by more than ``max_dF``.
    """

    start: complex
    end: complex
    steps: int = 256
    max_dF: float = MAX_DF
    max_refinements: int = 12

    def __post_init__(self):
        if not complex(self.start).imag > 0:
            raise ParameterDomainError("a continuation path must start in the upper half-plane")
        if self.steps < 1:
            raise ParameterDomainError("steps must be positive")


def associated_hermite_eval(n: int, x, c):
    """``H_n(x; c)`` from ``H_{n+1} = x H_n - (c + n) H_{n-1}``, ``H_0 = 1``, ``H_1 = x``.

    Exact when ``x`` and ``c`` are rational (int or Fraction).
    """
    if n < 0:
        raise ParameterDomainError("n must be >= 0")
    prev, cur = 1, x
    if n == 0:
        return Fraction(1) if isinstance(x, Fraction) else 1
    for k in range(1, n):
        prev, cur = cur, x * cur - (c + k) * prev
    return cur


def _pcd_integral(c: float, z: complex) -> complex:
    """``int_0^inf exp(-z x - x^2/2) x^(c-1) dx``.

    For ``c < 1`` the substitution ``x = u^(1/c)`` removes the endpoint
    singularity (``x^(c-1) dx = du / c``).
    """
    x_max = max(0.0, -z.real) + 40.0
    tol = 1e-13
    if c < 1:
        def f(u):
            x = u ** (1.0 / c)
            return np.exp(-z * x - 0.5 * x * x) / c

        hi = x_max ** c
    else:
        def f(x):
            return np.exp(-z * x - 0.5 * x * x) * x ** (c - 1)

        hi = x_max
    pts = [hi * k / 8 for k in range(1, 8)]
    total = 0j
    edges = [0.0, *pts, hi]
    for a, b in zip(edges, edges[1:]):
        re, _ = integrate.quad(lambda t: f(t).real, a, b, epsabs=tol, epsrel=tol, limit=400)
        im, _ = integrate.quad(lambda t: f(t).imag, a, b, epsabs=tol, epsrel=tol, limit=400)
        total += complex(re, im)
    return total


def parabolic_cylinder_D(c: float, z) -> complex:
    """``D_{-c}(z) = exp(-z^2/4)/Gamma(c) int_0^inf exp(-z x - x^2/2) x^(c-1) dx`` for ``c > 0``."""
    if not c > 0:
        raise ParameterDomainError(f"the integral representation needs c > 0, got {c}")
    z = complex(z)
    return np.exp(-z * z / 4) / math.gamma(c) * _pcd_integral(c, z)


def awk_density(c: float, t: float, opts: TransformOptions | None = None) -> float:
    """Density of ``mu_c`` at ``t``.

    ``c = 0`` is the normal density, ``c > 0`` uses the parabolic cylinder
    function, and ``-1 < c < 0`` goes through Stieltjes inversion of the
    Riccati-continued Cauchy transform.
    """
    if not c > -1:
        raise ParameterDomainError(f"mu_c has a density only for c > -1, got {c}")
    if c == 0:
        return math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    if c > 0:
        # |D_{-c}(it)|^{-2} = exp(-t^2/2) Gamma(c)^2 / |I|^2, avoiding overflow of exp(t^2/4)
        if abs(t) > 1:
            # |I| ~ Gamma(c) |t|^-c for large |t|; far below the float range the
            # density is exactly 0.0 and the oscillatory integral is not worth doing
            approx = -t * t / 2 + 2 * c * math.log(abs(t)) - 0.5 * math.log(2 * math.pi) - math.lgamma(c + 1)
            if approx < -800:
                return 0.0
        integral = _pcd_integral(c, 1j * t)
        log_val = (-t * t / 2 + 2 * math.lgamma(c) - 2 * math.log(abs(integral))
                   - 0.5 * math.log(2 * math.pi) - math.lgamma(c + 1))
        return math.exp(log_val)
    opts = opts or DEFAULT_OPTIONS

    def g(z):
        F, _ = awk_omega_eval(c, z, opts)
        return 1 / F

    return stieltjes_inversion(g, t, y0=0.5, levels=14).value


def _cf_F(c: float, z, opts: TransformOptions):
    g, dg, _ = continued_fraction_eval(awk_measure(c).jacobi, z, opts)
    return 1 / g, -dg / (g * g)


def riccati_residual(c: float, w, opts: TransformOptions | None = None) -> float:
    """``|F'(w) - (w F(w) - F(w)^2 - c)|`` with both ``F`` and ``F'`` from the continued fraction."""
    AWKParams(c)
    opts = opts or DEFAULT_OPTIONS
    w = complex(w)
    if c == -1:
        F, dF = w, 1.0
    else:
        F, dF = _cf_F(c, w, opts)
    return abs(dF - (w * F - F * F - c))


def _rhs(c, w, F):
    return w * F - F * F - c


def _rk4(c, start, end, F0, n):
    """Fixed-step RK4 along ``start -> end`` (arrays allowed).

    Returns the end value, the largest single-step change and the smallest
    ``Im F`` seen at any step.
    """
    h = (end - start) / n
    F = F0
    w = start
    max_dF = np.zeros(np.shape(F0))
    min_im = np.imag(F0)
    for _ in range(n):
        k1 = _rhs(c, w, F)
        k2 = _rhs(c, w + h / 2, F + h / 2 * k1)
        k3 = _rhs(c, w + h / 2, F + h / 2 * k2)
        k4 = _rhs(c, w + h, F + h * k3)
        dF = h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        F = F + dF
        w = w + h
        max_dF = np.maximum(max_dF, np.abs(dF))
        min_im = np.minimum(min_im, np.imag(F))
    return F, max_dF, min_im


def riccati_continue_F(c: float, path: ContinuationPath, opts: TransformOptions | None = None) -> complex:
    """Continue ``F_{mu_c}`` along ``path`` by integrating the Riccati equation.

    The initial value comes from the continued fraction.  A path on which
    ``Im F`` drops to 0 or below has left the domain where ``F`` maps into
    the upper half-plane, and :class:`LeftOmegaError` is raised.
    """
    AWKParams(c)
    start, end = complex(path.start), complex(path.end)
    if c == -1:
        return end
    opts = opts or DEFAULT_OPTIONS
    F0, _ = _cf_F(c, start, opts)
    n = path.steps
    for _ in range(path.max_refinements + 1):
        F, max_dF, min_im = _rk4(c, start, end, F0, n)
        if float(max_dF) <= path.max_dF:
            break
        n *= 2
    else:
        raise ConvergenceError(f"step size underflow on path {start} -> {end}", F, None)
    if not float(min_im) > 0:
        raise LeftOmegaError(f"Im F reached {float(min_im):.3g} on path {start} -> {end}",
                             position=end, value=complex(F))
    return complex(F)


def _riccati_batch(c, starts, ends, F0, n0=256, max_refinements=10):
    """Vectorised :func:`riccati_continue_F`; paths needing smaller steps are redone."""
    F_end = np.empty_like(F0)
    min_im = np.empty(F0.shape)
    todo = np.arange(F0.size)
    n = n0
    ok = np.zeros(F0.shape, dtype=bool)
    for _ in range(max_refinements + 1):
        F, dmax, mim = _rk4(c, starts[todo], ends[todo], F0[todo], n)
        good = dmax <= MAX_DF
        F_end[todo[good]] = F[good]
        min_im[todo[good]] = mim[good]
        ok[todo[good]] = True
        todo = todo[~good]
        if todo.size == 0:
            break
        n *= 2
    return F_end, min_im, ok


def awk_omega_eval(c: float, z, opts: TransformOptions | None = None):
    """``(F(z), F'(z))`` for ``mu_c``, continued below the axis when reachable.

    At height ``CF_HEIGHT`` and above, or beyond modulus ``CF_RADIUS``, the
    continued fraction is used;
    lower points are reached by a vertical Riccati path from
    ``Re z + START_HEIGHT i``.
    """
    z = complex(z)
    if c == -1:
        return z, 1.0 + 0j
    opts = opts or DEFAULT_OPTIONS
    if z.imag >= CF_HEIGHT or (z.imag > 0 and abs(z) >= CF_RADIUS):
        return _cf_F(c, z, opts)
    F = riccati_continue_F(c, ContinuationPath(complex(z.real, START_HEIGHT), z), opts)
    return F, _rhs(c, z, F)


def omega_values(c: float, points: np.ndarray, opts: TransformOptions | None = None):
    """Vectorised ``(F, F', ok)`` on an array of points with ``Im > 0``.

    ``ok`` is False where a Riccati path needed more refinement than allowed.
    """
    opts = opts or DEFAULT_OPTIONS
    pts = np.asarray(points, dtype=complex)
    if c == -1:
        return pts.copy(), np.ones_like(pts), np.ones(pts.shape, dtype=bool)
    F = np.empty_like(pts)
    dF = np.empty_like(pts)
    ok = np.ones(pts.shape, dtype=bool)
    high = (pts.imag >= CF_HEIGHT) | ((pts.imag > 0) & (np.abs(pts) >= CF_RADIUS))
    jac = awk_measure(c).jacobi
    if high.any():
        g, dg, _ = continued_fraction_eval(jac, pts[high], opts)
        F[high] = 1 / g
        dF[high] = -dg / (g * g)
    low = ~high
    if low.any():
        starts = pts[low].real + 1j * START_HEIGHT
        g0, _, _ = continued_fraction_eval(jac, starts, opts)
        Fl, _, okl = _riccati_batch(c, starts, pts[low], 1 / g0)
        F[low] = Fl
        dF[low] = _rhs(c, pts[low], Fl)
        ok[low] = okl
    return F, dF, ok


def riccati_validation_points(n: int = 50, seed: int = 0) -> np.ndarray:
    """Deterministic scatter of ``n`` points in the upper half-plane (Im in [0.5, 5])."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-5, 5, n)
    y = np.exp(rng.uniform(math.log(0.5), math.log(5), n))
    return x + 1j * y


def below_axis_rectangle(nx: int = 61, ny: int = 10, x_range=(-3.0, 3.0), y_range=(-0.5, -0.05)):
    xs = np.linspace(*x_range, nx)
    ys = -np.linspace(-y_range[1], -y_range[0], ny)  # descending from -0.05 to -0.5
    return xs, ys


def _below_axis_sweep(c, xs, ys, opts):
    """Continue vertically down each column and record where ``Im F`` stays positive.

    Returns per-point arrays ``F``, ``inside`` (path never had ``Im F <= 0``)
    and ``failed`` (numerical breakdown).
    """
    nx, ny = len(xs), len(ys)
    F = np.full((nx, ny), np.nan + 0j)
    inside = np.zeros((nx, ny), dtype=bool)
    failed = np.zeros((nx, ny), dtype=bool)
    starts = xs + 1j * START_HEIGHT
    if c == -1:
        W = xs[:, None] + 1j * ys[None, :]
        return W, W.imag > 0, failed
    g0, _, _ = continued_fraction_eval(awk_measure(c).jacobi, starts, opts)
    cur_w = starts.astype(complex)
    cur_F = 1 / g0
    alive = np.ones(nx, dtype=bool)
    for j, y in enumerate(ys):
        target = xs + 1j * y
        Fn, min_im, ok = _riccati_batch(c, cur_w, target, cur_F)
        failed[~ok, j] = True
        alive &= ok & (min_im > 0)
        F[:, j] = Fn
        inside[:, j] = alive
        cur_w, cur_F = target, Fn
    return F, inside, failed


def awk_fsd_verify(c: float, upper_grid=None, rectangle=None, min_coverage: float = 0.9,
                   slack: float = 1e-8, opts: TransformOptions | None = None) -> CheckReport:
    """Two-part check of ``Im(w - F(w)/F'(w)) <= 0`` for ``mu_c``.

    (1) On the upper half-plane grid, ``F/F'`` comes from the continued
    fraction or the Riccati continuation.  (2) Below the axis, columns of the
    rectangle are reached by vertical Riccati paths; where ``Im F > 0``
    persists, ``Im(w - F/F')`` is checked.  The maxima of the three terms
    ``Im w``, ``-Im F`` and ``-c Im(1/F)`` of ``Im(F'/F)`` are reported as
    well: for ``c <= 0`` each is non-positive by itself.

    Coverage is the fraction of rectangle points decided (checked inside the
    domain, or shown outside it by the path leaving) out of all points; the
    fraction actually inside the domain is reported separately.
    """
    from .checkers import HalfPlaneGrid

    params = AWKParams(c)
    opts = opts or DEFAULT_OPTIONS
    exploratory = c > 0
    grid = upper_grid or HalfPlaneGrid(half="upper")
    pts = grid.points()

    # (1) upper half-plane
    F, dF, ok = omega_values(c, pts, opts)
    q = np.where(ok, (pts - F / dF).imag, np.nan)
    upper_fail = int((~ok).sum() + np.isnan(q[ok]).sum())
    q_valid = np.where(np.isfinite(q), q, -np.inf)
    i_up = int(np.argmax(q_valid))
    upper_margin = float(q_valid[i_up])

    # (2) below the axis
    xs, ys = rectangle or below_axis_rectangle()
    if params.is_dirac:
        below = {"note": "F is the identity, whose domain is the upper half-plane; nothing below the axis",
                 "coverage": 1.0, "omega_fraction": 0.0, "checked": 0}
        below_margin, below_witness, below_fail, coverage = -math.inf, None, 0, 1.0
        term_max = {}
    else:
        Fb, inside, failed = _below_axis_sweep(c, xs, ys, opts)
        W = xs[:, None] + 1j * ys[None, :]
        with np.errstate(all="ignore"):
            t1 = W.imag
            t2 = -Fb.imag
            t3 = -c * (1 / Fb).imag
            h = W - Fb - c / Fb  # F'/F from the Riccati equation
            dFb = h * Fb
            q_below = (W - Fb / dFb).imag
        m = inside & ~failed
        total = W.size
        outside = int((~inside & ~failed).sum())
        below_fail = int(failed.sum())
        coverage = (int(m.sum()) + outside) / total
        term_max = {name: float(np.max(t[m])) if m.any() else None
                    for name, t in (("im_w", t1), ("minus_im_F", t2), ("minus_c_im_invF", t3),
                                    ("im_Fprime_over_F", h.imag), ("im_w_minus_F_over_Fprime", q_below))}
        # the verdict uses Im(w - F/F') itself; the term maxima document why it
        # holds for c <= 0 (each term is then non-positive on its own)
        vals = np.where(m, q_below, -np.inf)
        k = int(np.argmax(vals))
        below_margin = float(vals.flat[k])
        below_witness = complex(W.flat[k]) if m.any() else None
        below = {"checked": int(m.sum()), "outside_domain": outside, "failures": below_fail,
                 "coverage": coverage, "omega_fraction": float(m.sum()) / total,
                 "rectangle": {"x": [float(xs[0]), float(xs[-1]), len(xs)],
                               "y": [float(ys[0]), float(ys[-1]), len(ys)]},
                 "term_maxima": term_max,
                 "terms_nonpositive": all(v is None or v <= slack for v in term_max.values())}

    verdicts = []
    witness = None
    if upper_margin > slack:
        verdicts.append(FAIL)
        witness = {"point": complex(pts[i_up]), "im_value": upper_margin, "part": "upper"}
    if below_margin > slack:
        verdicts.append(FAIL)
        witness = witness or {"point": below_witness, "im_value": below_margin, "part": "below-axis"}
    if upper_fail > 0.01 * len(pts) or coverage < min_coverage:
        verdicts.append(INCONCLUSIVE)
    verdict = combine_verdicts(verdicts)
    statement = {
        PASS: f"Im(w - F/F') <= {slack:g} at every upper grid point and every below-axis point "
              f"reached inside the domain (c = {c})",
        FAIL: f"Im(w - F/F') exceeds {slack:g} at the witness (c = {c})",
        INCONCLUSIVE: "too many evaluation failures or coverage below the required fraction",
    }[verdict]
    if exploratory:
        statement += "; exploratory: c > 0 lies outside the proven range"
    res = riccati_validation(c, opts=opts)
    return CheckReport(
        "awk_fsd", verdict, statement,
        margin=max(upper_margin, below_margin), witness=witness, tolerance=slack,
        grid=grid.to_dict(), evaluation_failures=upper_fail + (below_fail if not params.is_dirac else 0),
        details={"c": c, "upper_margin": upper_margin, "below_axis": below,
                 "min_coverage": min_coverage, "riccati_residual_max": res,
                 "exploratory": exploratory},
    )


def riccati_validation(c: float, n: int = 50, opts: TransformOptions | None = None) -> float:
    """Largest Riccati residual over the validation scatter."""
    return max(riccati_residual(c, w, opts) for w in riccati_validation_points(n))


def density_table(c: float, ts) -> list[tuple[float, float]]:
    return [(float(t), awk_density(c, float(t))) for t in ts]
