"""Probability measures on the real line and the example catalog.

A :class:`MeasureSpec` bundles whichever representations of a law are known:
exact moments, Jacobi (three-term recurrence) coefficients, a density, closed
form Cauchy transforms, and the free characteristic triplet.  The catalog
builds the example distributions with the richest set available.

Moments are exact :class:`~fractions.Fraction` values throughout; floats only
appear once a transform is evaluated.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy import special

from .errors import (
    InvalidMeasureError,
    NotAMomentSequenceError,
    ParameterDomainError,
    TruncationError,
    UnknownMeasureError,
    UnsupportedRepresentationError,
)
from .levy import FreeCharacteristicTriplet, KFunction, LevyMeasure, _quad

DEFAULT_MOMENT_ORDER = 16


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class MomentSequence:
    """Exact moments ``m_0 .. m_N`` with ``m_0 = 1``."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(Fraction(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries or entries[0] != 1:
            raise InvalidMeasureError("moment sequence must start with m_0 = 1")

    @property
    def order(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, n):
        return self.entries[n]

    def __len__(self):
        return len(self.entries)

    def truncate(self, order: int) -> "MomentSequence":
        if order > self.order:
            raise TruncationError(f"only {self.order} moments stored, {order} requested")
        return MomentSequence(self.entries[: order + 1])

    def hankel_is_psd(self) -> bool:
        """Moment-sequence validity: the full Hankel matrix is PSD."""
        from .cumulants import is_psd_exact

        n = self.order // 2
        mat = [[self.entries[i + j] for j in range(n + 1)] for i in range(n + 1)]
        return is_psd_exact(mat)

    def to_dict(self) -> dict:
        return {"type": "moments", "entries": list(self.entries)}


@dataclass(frozen=True, eq=False)
class JacobiCoefficients:
    """Recurrence ``P_{n+1} = (x - alpha_n) P_n - beta_n P_{n-1}``.

    ``alpha`` holds ``alpha_0, alpha_1, ...`` and ``beta`` holds
    ``beta_1, beta_2, ...`` (squared off-diagonal entries).  Infinite families
    supply ``alpha_rule`` / ``beta_rule`` for indices past the stored data.
    ``terminates`` marks a finitely supported measure whose continued fraction
    stops after ``len(alpha)`` levels.
    """

    alpha: tuple = ()
    beta: tuple = ()
    alpha_rule: Callable[[int], object] | None = None
    beta_rule: Callable[[int], object] | None = None
    terminates: bool = False

    def __post_init__(self):
        for b in self.beta:
            if b < 0 or (b == 0 and not self.terminates):
                raise InvalidMeasureError(f"beta must be positive, got {b}")

    @property
    def is_infinite(self) -> bool:
        return self.alpha_rule is not None and self.beta_rule is not None

    def alpha_n(self, n: int):
        if n < len(self.alpha):
            return self.alpha[n]
        if self.alpha_rule is not None:
            return self.alpha_rule(n)
        raise TruncationError(f"alpha_{n} not available")

    def beta_n(self, n: int):
        if n < 1:
            raise ValueError("beta is indexed from 1")
        if n - 1 < len(self.beta):
            return self.beta[n - 1]
        if self.beta_rule is not None:
            return self.beta_rule(n)
        raise TruncationError(f"beta_{n} not available")

    @property
    def depth(self) -> int | None:
        """Number of continued-fraction levels, ``None`` if unbounded."""
        if self.is_infinite:
            return None
        if self.terminates:
            return len(self.alpha)
        return min(len(self.alpha), len(self.beta) + 1)

    def float_arrays(self, depth: int) -> tuple[list[float], list[float]]:
        """``alpha_0..alpha_{d-1}`` and ``beta_1..beta_{d-1}`` as floats."""
        alphas = [float(self.alpha_n(n)) for n in range(depth)]
        betas = [float(self.beta_n(n)) for n in range(1, depth)]
        return alphas, betas

    def to_dict(self, n: int = 32) -> dict:
        if self.is_infinite:
            alphas = [self.alpha_n(i) for i in range(n)]
            betas = [self.beta_n(i) for i in range(1, n + 1)]
        else:
            alphas, betas = list(self.alpha), list(self.beta)
        return {"type": "jacobi", "alpha": alphas, "beta": betas,
                "terminates": self.terminates, "truncated_listing": self.is_infinite}


@dataclass(frozen=True, eq=False)
class DensitySpec:
    """Lebesgue density plus atoms.

    ``tail = (coeff, power)`` declares ``f(t) ~ coeff |t|^-power`` beyond the
    truncation radius, used for an analytic tail correction.  ``analytic``
    means ``evaluator`` (and ``derivative``) accept complex arguments, which
    lets the Cauchy transform be continued across the support.
    """

    evaluator: Callable | None
    support: tuple = (-math.inf, math.inf)
    atoms: tuple = ()
    breakpoints: tuple = ()
    tail: tuple | None = None
    analytic: bool = False
    derivative: Callable | None = None

    def __call__(self, t):
        if self.evaluator is None:
            return 0.0
        lo, hi = self.support
        if isinstance(t, complex):
            return self.evaluator(t)
        if t < lo or t > hi:
            return 0.0
        return self.evaluator(t)

    def total_mass(self, truncation: float = 1e3) -> float:
        mass = sum(float(m) for _, m in self.atoms)
        if self.evaluator is None:
            return mass
        lo, hi = self.support
        lo_t, hi_t = max(lo, -truncation), min(hi, truncation)
        mass += _quad(self.evaluator, lo_t, hi_t, (*self.breakpoints, 0.0))
        if self.tail is not None:
            coeff, power = self.tail
            if hi > truncation:
                mass += coeff * truncation ** (1 - power) / (power - 1)
            if lo < -truncation:
                mass += coeff * truncation ** (1 - power) / (power - 1)
        return mass

    def to_dict(self) -> dict:
        return {"type": "density", "support": list(self.support),
                "atoms": [[a, m] for a, m in self.atoms]}


@dataclass(frozen=True, eq=False)
class ClosedFormTransforms:
    """Closed-form ``G`` and ``G'``.

    ``evaluate(z)`` returns ``(G(z), G'(z))``.  For ``Im z >= 0`` that is the
    Cauchy transform; below the axis it returns the analytic continuation of
    ``G`` from the upper half-plane across the support (``continuation`` says
    which kind: ``entire``, ``meromorphic`` or ``second-sheet``).
    """

    evaluate: Callable[[complex], tuple[complex, complex]]
    continuation: str = "entire"
    label: str = ""

    def to_dict(self) -> dict:
        return {"type": "closed_form", "label": self.label, "continuation": self.continuation}


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    name: str
    params: Mapping = field(default_factory=dict)
    moments_data: MomentSequence | None = None
    jacobi: JacobiCoefficients | None = None
    density: DensitySpec | None = None
    closed_form: ClosedFormTransforms | None = None
    triplet: FreeCharacteristicTriplet | None = None
    continuation: Callable | None = None
    compact_support: tuple | None = None

    def __post_init__(self):
        if not any((self.moments_data, self.jacobi, self.density, self.closed_form, self.triplet)):
            raise InvalidMeasureError("a measure needs at least one representation")

    @property
    def representations(self) -> tuple[str, ...]:
        reps = []
        if self.moments_data is not None or self.jacobi is not None:
            reps.append("moments")
        for name, val in (("jacobi", self.jacobi), ("density", self.density),
                          ("closed_form", self.closed_form), ("triplet", self.triplet)):
            if val is not None:
                reps.append(name)
        return tuple(reps)

    @property
    def has_moments(self) -> bool:
        return self.moments_data is not None or self.jacobi is not None

    @property
    def supports_cauchy(self) -> bool:
        return any((self.closed_form, self.jacobi, self.density))

    @property
    def triplet_only(self) -> bool:
        return not self.supports_cauchy and self.triplet is not None

    def moments(self, order: int = DEFAULT_MOMENT_ORDER) -> MomentSequence:
        if self.moments_data is not None and self.moments_data.order >= order:
            return self.moments_data.truncate(order)
        if self.jacobi is not None:
            return moments_from_jacobi(self.jacobi, order)
        if self.moments_data is not None:
            raise TruncationError(f"only {self.moments_data.order} moments known")
        raise UnsupportedRepresentationError(f"{self.name} has no moment data")

    def to_dict(self) -> dict:
        reps = []
        if self.moments_data is not None:
            reps.append(self.moments_data.to_dict())
        if self.jacobi is not None:
            reps.append(self.jacobi.to_dict())
        if self.density is not None:
            reps.append(self.density.to_dict())
        if self.closed_form is not None:
            reps.append(self.closed_form.to_dict())
        if self.triplet is not None:
            reps.append({"type": "triplet", **self.triplet.to_dict()})
        return {"schema": 1, "name": self.name, "params": dict(self.params), "representations": reps}


# ---------------------------------------------------------------------------
# moments <-> Jacobi


def moments_from_jacobi(j: JacobiCoefficients, order: int) -> MomentSequence:
    """Moments ``m_0..m_N`` as the (0,0) entries of powers of the Jacobi matrix.

    Uses the tridiagonal matrix with unit sub-diagonal and ``beta`` on the
    super-diagonal (similar to the symmetric Jacobi matrix), so rational
    coefficients give exact rational moments.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    levels = order // 2 + 1
    need_alpha = (order + 1) // 2
    need_beta = order // 2
    depth = j.depth
    if depth is not None and j.terminates:
        levels = min(levels, depth)
    else:
        try:
            for n in range(need_alpha):
                j.alpha_n(n)
            for n in range(1, need_beta + 1):
                j.beta_n(n)
        except TruncationError as exc:
            raise TruncationError(
                f"order {order} needs alpha_0..alpha_{need_alpha - 1} and beta_1..beta_{need_beta}"
            ) from exc

    def coeff(getter, n):
        # coefficients a path of length <= order can never use are padded with 0
        try:
            return getter(n)
        except TruncationError:
            return 0

    alphas = [coeff(j.alpha_n, n) for n in range(levels)]
    betas = [coeff(j.beta_n, n) for n in range(1, levels)]
    v = [Fraction(0)] * levels
    v[0] = Fraction(1)
    out = [Fraction(1)]
    for _ in range(order):
        nv = []
        for i in range(levels):
            s = alphas[i] * v[i]
            if i > 0:
                s += v[i - 1]
            if i + 1 < levels:
                s += betas[i] * v[i + 1]
            nv.append(s)
        v = nv
        out.append(v[0])
    return MomentSequence(tuple(out))


def jacobi_from_moments(m: MomentSequence) -> JacobiCoefficients:
    """Inverse bridge via the (exact) Chebyshev algorithm.

    From ``m_0..m_N`` one gets ``alpha_0..alpha_{⌈N/2⌉-1}`` and
    ``beta_1..beta_{⌊N/2⌋}``.  A non-positive pivot means the Hankel matrix
    is singular or indefinite.
    """
    mom = list(m.entries)
    n_total = len(mom) - 1
    n_alpha = (n_total + 1) // 2
    n_beta = n_total // 2
    if n_total < 1:
        return JacobiCoefficients()
    # sigma[k][l] for l = k .. N - k
    prev2 = None
    prev = list(mom)  # sigma_{0, l}
    alphas = [prev[1] / prev[0]]
    betas = []
    k = 0
    while True:
        k += 1
        if k > n_beta and k > n_alpha - 1:
            break
        cur = {}
        for l in range(k, n_total - k + 1):
            val = prev[l + 1] - alphas[k - 1] * prev[l]
            if prev2 is not None:
                val -= betas[k - 2] * prev2[l]
            cur[l] = val
        if k > n_beta:
            break
        if cur[k] <= 0:
            raise NotAMomentSequenceError(
                f"Hankel determinant ratio at level {k} is {cur[k]} (must be > 0)"
            )
        betas.append(cur[k] / prev[k - 1])
        if k < n_alpha:
            alphas.append(cur[k + 1] / cur[k] - prev[k] / prev[k - 1])
        prev2 = _shift_to_list(prev, n_total)
        prev = _shift_to_list(cur, n_total)
    return JacobiCoefficients(tuple(alphas), tuple(betas))


def _shift_to_list(d, n_total):
    if isinstance(d, list):
        return d
    out = [None] * (n_total + 1)
    for key, val in d.items():
        out[key] = val
    return out


# ---------------------------------------------------------------------------
# closed-form helpers


def _sheet_sqrt(u: complex, lo: float, hi: float) -> complex:
    """``sqrt((u-lo)(u-hi))`` ~ ``u`` at infinity, cut on ``[lo, hi]``.

    Below the real axis the opposite sheet is returned, i.e. the
    continuation from the upper half-plane through the cut.
    """
    p = cmath.sqrt(u - lo) * cmath.sqrt(u - hi)
    return p if u.imag >= 0 else -p


def _semicircle_cf(a: float, r: float):
    def evaluate(z):
        u = complex(z) - a
        p = _sheet_sqrt(u, -r, r)
        # 2(u - p)/r^2 rationalized: no cancellation for large |z|
        s = u + p
        return 2.0 / s, -2.0 / (s * p)

    return ClosedFormTransforms(evaluate, "second-sheet", f"semicircle(a={a}, r={r})")


def _free_meixner_cf(a: float, b: float, scale: float):
    s = math.sqrt(1 + b)

    def evaluate(z):
        u = complex(z) / scale
        if b == -1:
            # two atoms; the algebraic form has no branch cut left
            g = (u - a) / (u * u - a * u - 1)
            dg = (-(u * u) + 2 * a * u - a * a - 1) / (u * u - a * u - 1) ** 2
            return g / scale, dg / (scale * scale)
        p = _sheet_sqrt(u - a, -2 * s, 2 * s)
        # ((1+2b)u + a - p) / (2(bu^2 + au + 1)) = 2(1+b)/((1+2b)u + a + p)
        den = (1 + 2 * b) * u + a + p
        g = 2 * (1 + b) / den
        dg = -2 * (1 + b) * ((1 + 2 * b) + (u - a) / p) / (den * den)
        return g / scale, dg / (scale * scale)

    return ClosedFormTransforms(evaluate, "second-sheet", f"free_meixner(a={a}, b={b}, scale={scale})")


def _free_poisson_cf(lam: float, alpha: float):
    lo, hi = (1 - math.sqrt(lam)) ** 2, (1 + math.sqrt(lam)) ** 2

    def evaluate(z):
        u = complex(z) / alpha
        p = cmath.sqrt(u - lo) * cmath.sqrt(u - hi)
        # sheet follows the sign of Im z (alpha may be negative)
        if complex(z).imag < 0:
            p = -p
        # (u + 1 - lam - p)/(2u) = 2/(u + 1 - lam + p)
        den = u + 1 - lam + p
        g = 2 / den
        dg = -2 * (1 + (u - 1 - lam) / p) / (den * den)
        return g / alpha, dg / (alpha * alpha)

    return ClosedFormTransforms(evaluate, "second-sheet", f"free_poisson(lambda={lam}, alpha={alpha})")


_SQRT_HALF_PI = math.sqrt(math.pi / 2)


def std_normal_cauchy(u):
    """Cauchy transform of N(0,1) through the Faddeeva function (entire)."""
    return -1j * _SQRT_HALF_PI * special.wofz(np.asarray(u) / math.sqrt(2))


def _gaussian_cf(mean: float, var: float):
    sd = math.sqrt(var)

    def evaluate(z):
        u = (z - mean) / sd
        g = complex(std_normal_cauchy(u))
        dg = 1 - u * g
        return g / sd, dg / var

    return ClosedFormTransforms(evaluate, "entire", f"gaussian(mean={mean}, var={var})")


def _atoms_cf(atoms):
    pts = [(float(x), float(p)) for x, p in atoms]

    def evaluate(z):
        z = complex(z)
        g = sum(p / (z - x) for x, p in pts)
        dg = -sum(p / (z - x) ** 2 for x, p in pts)
        return g, dg

    return ClosedFormTransforms(evaluate, "meromorphic", "atoms")


# ---------------------------------------------------------------------------
# catalog


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x).strip())


def _param(params: Mapping, *names, default=None):
    for n in names:
        if n in params:
            return params[n]
    if default is None:
        raise ParameterDomainError(f"missing parameter {names[0]!r}")
    return default


def _frac_or_float(x):
    """Keep exact values exact where the arithmetic stays rational."""
    try:
        return _exact(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParameterDomainError(f"not a number: {x!r}") from exc


def semicircle(a=0, r=2) -> MeasureSpec:
    a, r = _frac_or_float(a), _frac_or_float(r)
    if r <= 0:
        raise ParameterDomainError(f"semicircle radius must be > 0, got {r}")
    af, rf = float(a), float(r)
    jac = JacobiCoefficients(alpha_rule=lambda n: a, beta_rule=lambda n: r * r / 4)
    dens = DensitySpec(
        lambda t: 2.0 / (math.pi * rf * rf) * math.sqrt(max(rf * rf - (t - af) ** 2, 0.0)),
        support=(af - rf, af + rf),
    )
    return MeasureSpec(
        "semicircle", {"a": a, "r": r}, jacobi=jac, density=dens,
        closed_form=_semicircle_cf(af, rf),
        triplet=FreeCharacteristicTriplet(r * r / 4, a, LevyMeasure()),
        compact_support=(af - rf, af + rf),
    )


def free_meixner(a=0, b=0, scale=1) -> MeasureSpec:
    a, b, c = _frac_or_float(a), _frac_or_float(b), _frac_or_float(scale)
    if b < -1:
        raise ParameterDomainError(f"free Meixner needs b >= -1, got {b}")
    if c <= 0:
        raise ParameterDomainError(f"scale must be > 0, got {c}")
    af, bf, cf = float(a), float(b), float(c)
    if b == -1:
        # two atoms: roots of z^2 - a z - 1 (scaled)
        jac = JacobiCoefficients((Fraction(0), c * a), (c * c,), terminates=True)
    else:
        jac = JacobiCoefficients(
            (Fraction(0),), (c * c,),
            alpha_rule=lambda n: c * a, beta_rule=lambda n: c * c * (1 + b),
        )
    triplet = None
    if b > 0:
        sb = math.sqrt(bf)
        lo, hi = cf * (af - 2 * sb), cf * (af + 2 * sb)

        def nu_density(x):
            q = 4 * bf * cf * cf - (x - cf * af) ** 2
            return math.sqrt(max(q, 0.0)) / (2 * math.pi * bf * x * x)

        k = KFunction(lambda x: abs(x) * nu_density(x), support=(lo, hi),
                      monotone=(4 * b >= a * a))
        nu = LevyMeasure(k=k)
        # mean zero fixes the drift
        eta = -_quad(lambda x: x * nu.density_at(x) if abs(x) > 1 else 0.0, lo, hi, (0.0, -1.0, 1.0))
        triplet = FreeCharacteristicTriplet(0, eta, nu)
    elif b == 0 and a == 0:
        triplet = FreeCharacteristicTriplet(c * c, Fraction(0), LevyMeasure())
    elif b == 0:
        loc = c * a
        eta = -(loc / (a * a)) if abs(loc) > 1 else Fraction(0)
        triplet = FreeCharacteristicTriplet(0, eta, LevyMeasure(atoms=((loc, 1 / (a * a)),)))
    s = math.sqrt(1 + bf)
    support = (cf * (af - 2 * s), cf * (af + 2 * s)) if b >= 0 else None
    return MeasureSpec(
        "free_meixner", {"a": a, "b": b, "scale": c}, jacobi=jac,
        closed_form=_free_meixner_cf(af, bf, cf), triplet=triplet, compact_support=support,
    )


def free_poisson(lam=1, alpha=1) -> MeasureSpec:
    lam, alpha = _frac_or_float(lam), _frac_or_float(alpha)
    if lam <= 0:
        raise ParameterDomainError(f"free Poisson rate must be > 0, got {lam}")
    if alpha == 0:
        raise ParameterDomainError("free Poisson jump size must be non-zero")
    lf, af = float(lam), float(alpha)
    jac = JacobiCoefficients(
        (lam * alpha,), (lam * alpha * alpha,),
        alpha_rule=lambda n: alpha * (1 + lam), beta_rule=lambda n: lam * alpha * alpha,
    )
    lo, hi = sorted((af * (1 - math.sqrt(lf)) ** 2, af * (1 + math.sqrt(lf)) ** 2))

    def dens(t):
        q = 4 * lf * af * af - (t - af * (1 + lf)) ** 2
        if q <= 0 or t == 0:
            return 0.0
        return math.sqrt(q) / (2 * math.pi * abs(af * t))

    atoms = ((Fraction(0), 1 - lam),) if lam < 1 else ()
    eta = lam * alpha if -1 <= alpha <= 1 else Fraction(0)
    return MeasureSpec(
        "free_poisson", {"lambda": lam, "alpha": alpha}, jacobi=jac,
        density=DensitySpec(dens, support=(lo, hi), atoms=atoms),
        closed_form=_free_poisson_cf(lf, af),
        triplet=FreeCharacteristicTriplet(0, eta, LevyMeasure(atoms=((alpha, lam),))),
        compact_support=(min(lo, 0.0) if atoms else lo, hi),
    )


def gaussian(mean=0, var=1) -> MeasureSpec:
    mean, var = _frac_or_float(mean), _frac_or_float(var)
    if var <= 0:
        raise ParameterDomainError(f"variance must be > 0, got {var}")
    mf, vf = float(mean), float(var)
    sd = math.sqrt(vf)
    jac = JacobiCoefficients(alpha_rule=lambda n: mean, beta_rule=lambda n: n * var)

    def dens(t):
        return math.exp(-((t - mf) ** 2) / (2 * vf)) / math.sqrt(2 * math.pi * vf)

    def ddens(t):
        return -(t - mf) / vf * cmath.exp(-((t - mf) ** 2) / (2 * vf)) / math.sqrt(2 * math.pi * vf)

    density = DensitySpec(
        lambda t: cmath.exp(-((t - mf) ** 2) / (2 * vf)) / math.sqrt(2 * math.pi * vf)
        if isinstance(t, complex) else dens(t),
        support=(-math.inf, math.inf), breakpoints=(mf - 5 * sd, mf, mf + 5 * sd),
        analytic=True, derivative=ddens,
    )
    return MeasureSpec("gaussian", {"mean": mean, "var": var}, jacobi=jac, density=density,
                       closed_form=_gaussian_cf(mf, vf))


def dirac(a=0) -> MeasureSpec:
    a = _frac_or_float(a)
    return MeasureSpec(
        "dirac", {"a": a},
        jacobi=JacobiCoefficients((a,), (), terminates=True),
        density=DensitySpec(None, atoms=((a, Fraction(1)),)),
        closed_form=_atoms_cf(((a, 1),)),
        triplet=FreeCharacteristicTriplet(0, a, LevyMeasure()),
        compact_support=(float(a), float(a)),
    )


def bernoulli(p=Fraction(1, 2)) -> MeasureSpec:
    """Two-point law ``(1-p) δ_{-1} + p δ_1``."""
    p = _frac_or_float(p)
    if not 0 < p < 1:
        raise ParameterDomainError(f"p must lie in (0, 1), got {p}")
    a0 = 2 * p - 1
    atoms = ((Fraction(-1), 1 - p), (Fraction(1), p))
    return MeasureSpec(
        "bernoulli", {"p": p},
        jacobi=JacobiCoefficients((a0, -a0), (1 - a0 * a0,), terminates=True),
        density=DensitySpec(None, atoms=atoms),
        closed_form=_atoms_cf(atoms),
        compact_support=(-1.0, 1.0),
    )


def awk(c=0) -> MeasureSpec:
    """Askey–Wimp–Kerov law ``mu_c`` (``c = -1`` is the Dirac mass at 0)."""
    c = _frac_or_float(c)
    if c < -1:
        raise ParameterDomainError(f"AWK parameter must be >= -1, got {c}")
    if c == -1:
        d = dirac(0)
        return MeasureSpec("awk", {"c": c}, jacobi=d.jacobi, density=d.density,
                           closed_form=d.closed_form, triplet=d.triplet,
                           compact_support=(0.0, 0.0))
    jac = JacobiCoefficients(alpha_rule=lambda n: Fraction(0), beta_rule=lambda n: c + n)
    cf_ = float(c)

    def dens(t):
        from .awk import awk_density

        return awk_density(cf_, t)

    def cont(z, opts=None):
        from .awk import awk_omega_eval

        return awk_omega_eval(cf_, z, opts)

    return MeasureSpec("awk", {"c": c}, jacobi=jac,
                       density=DensitySpec(dens, support=(-math.inf, math.inf)),
                       continuation=cont)


def free_gamma(c=1, alpha=1, eta=None) -> MeasureSpec:
    """Bercovici–Pata image of the gamma law: ``nu(dx) = c e^{-alpha x}/x dx`` on x > 0."""
    cf_, af = float(c), float(alpha)
    if cf_ <= 0 or af <= 0:
        raise ParameterDomainError("free gamma needs c > 0 and alpha > 0")
    if eta is None:
        # drift of the classical gamma law in the compensated form
        eta = cf_ * (1 - math.exp(-af)) / af
    k = KFunction(lambda x: cf_ * math.exp(-af * x), support=(0.0, math.inf), monotone=True)
    return MeasureSpec("free_gamma", {"c": c, "alpha": alpha, "eta": eta},
                       triplet=FreeCharacteristicTriplet(0, float(eta), LevyMeasure(k=k)))


def free_stable(alpha=1, c=1, c_neg=0, eta=0) -> MeasureSpec:
    af, cp, cn = float(alpha), float(c), float(c_neg)
    if not 0 < af < 2:
        raise ParameterDomainError(f"stability index must lie in (0, 2), got {alpha}")
    if cp < 0 or cn < 0:
        raise ParameterDomainError("free stable weights must be >= 0")

    def kfun(x):
        return cp * x ** -af if x > 0 else cn * abs(x) ** -af

    lo = -math.inf if cn > 0 else 0.0
    hi = math.inf if cp > 0 else 0.0
    k = KFunction(kfun, support=(lo, hi), monotone=True)
    return MeasureSpec("free_stable", {"alpha": alpha, "c": c, "c_neg": c_neg, "eta": eta},
                       triplet=FreeCharacteristicTriplet(0, float(eta), LevyMeasure(k=k)))


_T3_CONST = 2.0 / (math.pi * math.sqrt(3.0))


def _t3(t):
    return _T3_CONST * (1 + t * t / 3) ** -2


def _t3_prime(t):
    return -_T3_CONST * 4 * t / 3 * (1 + t * t / 3) ** -3


def student_t3() -> MeasureSpec:
    # f(t) ~ 18/(pi sqrt 3) t^-4 for large |t|
    tail = (18.0 / (math.pi * math.sqrt(3.0)), 4)
    dens = DensitySpec(_t3, support=(-math.inf, math.inf), breakpoints=(-3.0, 0.0, 3.0),
                       tail=tail, analytic=True, derivative=_t3_prime)
    return MeasureSpec("student_t3", {}, density=dens)


CATALOG: dict[str, Callable[..., MeasureSpec]] = {
    "semicircle": semicircle,
    "free_meixner": free_meixner,
    "free_poisson": free_poisson,
    "gaussian": gaussian,
    "awk": awk,
    "free_gamma": free_gamma,
    "free_stable": free_stable,
    "student_t3": student_t3,
    "dirac": dirac,
    "bernoulli": bernoulli,
}

_ALIASES = {
    "free_poisson": {"lambda": "lam", "lam": "lam", "alpha": "alpha"},
    "gaussian": {"mean": "mean", "xi": "mean", "var": "var", "sigma2": "var"},
    "free_stable": {"alpha": "alpha", "c": "c", "c_neg": "c_neg", "c_prime": "c_neg", "eta": "eta"},
}


def catalog_lookup(name: str, params: Mapping | None = None) -> MeasureSpec:
    """Build a catalog measure from its name and a parameter record."""
    params = dict(params or {})
    key = name.strip().lower().replace("-", "_")
    if key == "normal":
        key = "gaussian"
    if key not in CATALOG:
        raise UnknownMeasureError(f"unknown distribution {name!r}; known: {sorted(CATALOG)}")
    aliases = _ALIASES.get(key, {})
    kwargs = {}
    for k, v in params.items():
        k = k.replace("-", "_")
        kwargs[aliases.get(k, k)] = v
    try:
        return CATALOG[key](**kwargs)
    except TypeError as exc:
        raise ParameterDomainError(f"bad parameters for {key}: {exc}") from exc


def parse_config(text: str) -> tuple[str, dict]:
    """Read a ``key = value`` record; the ``name`` (or ``catalog``) key selects the family."""
    name = None
    params = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterDomainError(f"expected key=value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in ("name", "catalog", "distribution"):
            name = v
        else:
            params[k] = v
    if name is None:
        raise ParameterDomainError("config record has no 'name' entry")
    return name, params


# ---------------------------------------------------------------------------
# JSON


def measure_from_dict(doc: Mapping) -> MeasureSpec:
    """Rebuild a measure from its JSON document.

    Catalog names are rebuilt from their parameters; anything else must give
    explicit ``moments``, ``jacobi`` or ``atoms`` representations.
    """
    if doc.get("schema", 1) != 1:
        raise InvalidMeasureError(f"unsupported schema {doc.get('schema')!r}")
    name = doc.get("name", "custom")
    params = doc.get("params") or {}
    key = str(name).lower()
    if key in CATALOG:
        return catalog_lookup(key, {k: _from_json_number(v) for k, v in params.items()})
    moments = jacobi = density = closed = support = None
    for rep in doc.get("representations", []):
        kind = rep.get("type")
        if kind == "moments":
            moments = MomentSequence(tuple(_exact(e) for e in rep["entries"]))
        elif kind == "jacobi":
            jacobi = JacobiCoefficients(
                tuple(_exact(a) for a in rep["alpha"]), tuple(_exact(b) for b in rep["beta"]),
                terminates=bool(rep.get("terminates", False)),
            )
        elif kind in ("atoms", "density"):
            atoms = tuple((_exact(x), _exact(p)) for x, p in rep.get("atoms", []))
            if not atoms:
                raise InvalidMeasureError("only atomic densities can be read from JSON")
            total = sum(p for _, p in atoms)
            if total != 1:
                raise InvalidMeasureError(f"atom masses sum to {total}, not 1")
            density = DensitySpec(None, atoms=atoms)
            closed = _atoms_cf(atoms)
            if jacobi is None:
                jacobi = _atoms_jacobi(atoms)
            support = (float(min(x for x, _ in atoms)), float(max(x for x, _ in atoms)))
        else:
            raise InvalidMeasureError(f"unknown representation type {kind!r}")
    # Moments alone stay moments: a truncated recurrence built from them
    # would not be the Cauchy transform of the measure.
    return MeasureSpec(str(name), dict(params), moments_data=moments, jacobi=jacobi,
                       density=density, closed_form=closed, compact_support=support)


def _atoms_jacobi(atoms) -> JacobiCoefficients:
    """Exact terminating recurrence of a finite atomic law (discrete Stieltjes procedure)."""
    merged: dict = {}
    for x, w in atoms:
        if w:
            merged[x] = merged.get(x, 0) + w
    xs, ws = list(merged), list(merged.values())
    alpha, beta = [], []
    prev, cur = [0] * len(xs), [1] * len(xs)
    norm_prev = None
    for _ in range(len(xs)):
        norm = sum(w * p * p for w, p in zip(ws, cur))
        a = sum(w * x * p * p for w, x, p in zip(ws, xs, cur)) / norm
        b = 0 if norm_prev is None else norm / norm_prev
        if norm_prev is not None:
            beta.append(b)
        alpha.append(a)
        prev, cur = cur, [(x - a) * p - b * q for x, p, q in zip(xs, cur, prev)]
        norm_prev = norm
    return JacobiCoefficients(tuple(alpha), tuple(beta), terminates=True)


def _from_json_number(v):
    if isinstance(v, str) and "/" in v:
        return Fraction(v)
    return v


def moments_by_quadrature(d: DensitySpec, order: int, truncation: float = 60.0) -> list[float]:
    """Float moments of a density (plus atoms), for consistency checks."""
    lo, hi = d.support
    lo, hi = max(lo, -truncation), min(hi, truncation)
    out = []
    for n in range(order + 1):
        val = sum(float(p) * float(x) ** n for x, p in d.atoms)
        if d.evaluator is not None:
            val += _quad(lambda t: t ** n * d.evaluator(t), lo, hi, (*d.breakpoints, 0.0))
        out.append(val)
    return out
