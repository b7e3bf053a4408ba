"""Free cumulants and Hankel positivity tests, all in exact arithmetic.

The moment-cumulant relation is computed two ways: a fast recursion and a
brute-force sum over non-crossing partitions (the oracle).  Conditional
positive definiteness of a sequence ``a`` means the Hankel matrices
``(a_{i+j})_{i,j=1..N}`` are positive semidefinite; it is decided exactly by
a symmetric elimination that also produces a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import OrderCapError, TruncationError
from .measures import MomentSequence
from .reports import FAIL, PASS, CheckReport

NC_ORDER_CAP = 12


@dataclass(frozen=True)
class FreeCumulantSequence:
    """``kappa_1 .. kappa_N`` (``entries[0]`` is ``kappa_1``)."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(Fraction(e) for e in self.entries)
        if not entries:
            raise ValueError("a cumulant sequence needs at least kappa_1")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return len(self.entries)

    def kappa(self, n: int) -> Fraction:
        """1-based access: ``kappa(1)`` is the mean."""
        return self.entries[n - 1]

    def weighted(self) -> tuple:
        """The sequence ``n kappa_n``."""
        return tuple(n * k for n, k in enumerate(self.entries, start=1))

    def to_dict(self) -> dict:
        return {"kappa": list(self.entries)}


def _series_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai == 0:
            continue
        for j in range(min(len(b), n + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def free_cumulants_from_moments(m: MomentSequence) -> FreeCumulantSequence:
    """Invert ``m_n = sum_s kappa_s [z^{n-s}] M(z)^s`` with ``M = sum m_i z^i``."""
    n_max = m.order
    if n_max < 1:
        raise TruncationError("need at least m_1")
    mom = list(m.entries)
    powers = [[Fraction(1)] + [Fraction(0)] * n_max]  # M^0
    kappas = []
    for n in range(1, n_max + 1):
        powers.append(_series_mul(powers[-1], mom, n_max))
        # [z^{n-s}] M^s for s < n uses only known kappas
        acc = sum(kappas[s - 1] * powers[s][n - s] for s in range(1, n))
        kappas.append(mom[n] - acc)
    return FreeCumulantSequence(tuple(kappas))


def moments_from_free_cumulants(k: FreeCumulantSequence | Sequence) -> MomentSequence:
    kap = list(k.entries if isinstance(k, FreeCumulantSequence) else (Fraction(x) for x in k))
    n_max = len(kap)
    mom = [Fraction(1)] + [Fraction(0)] * n_max
    # m_n = sum_s kappa_s [z^{n-s}] M^s; M^s only needs m_0..m_{n-s} < n
    for n in range(1, n_max + 1):
        total = Fraction(0)
        power = [Fraction(1)] + [Fraction(0)] * n_max
        for s in range(1, n + 1):
            power = _series_mul(power, mom[:n], n - s)
            total += kap[s - 1] * power[n - s]
        mom[n] = total
    return MomentSequence(tuple(mom))


# ---------------------------------------------------------------------------
# non-crossing partitions


@dataclass(frozen=True)
class NCPartition:
    """Partition of ``{1..n}`` into blocks, each block a sorted tuple."""

    blocks: tuple
    n: int

    def __post_init__(self):
        if not is_noncrossing(self.blocks):
            raise ValueError(f"{self.blocks} is crossing")

    def kreweras(self) -> "NCPartition":
        return NCPartition(kreweras_blocks(self.blocks, self.n), self.n)


def kreweras_blocks(blocks, n: int) -> tuple:
    """Kreweras complement, computed as the cycles of ``pi^{-1} gamma``.

    ``pi`` is read as the permutation cycling each block in increasing order
    and ``gamma`` is the full cycle ``(1 2 .. n)``.
    """
    inv = {}
    for b in blocks:
        for i, x in enumerate(b):
            inv[b[(i + 1) % len(b)]] = x
    seen, out = set(), []
    for start in range(1, n + 1):
        if start in seen:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = inv[x % n + 1]
        out.append(tuple(sorted(cyc)))
    return tuple(sorted(out))


def is_noncrossing(blocks) -> bool:
    owner = {}
    for idx, b in enumerate(blocks):
        for x in b:
            owner[x] = idx
    pts = sorted(owner)
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            if owner[a] == owner[b]:
                continue
            for c in pts:
                if c <= b or owner[c] != owner[a]:
                    continue
                for d in pts:
                    if d > c and owner[d] == owner[b]:
                        return False
    return True


def nc_partitions(n: int) -> Iterator[tuple]:
    """All non-crossing partitions of ``{1..n}`` as tuples of sorted blocks.

    The block containing 1 is chosen first; the gaps it leaves are
    partitioned independently, which is exactly what non-crossing allows.
    """
    yield from _nc_of(tuple(range(1, n + 1)))


def _nc_of(items: tuple) -> Iterator[tuple]:
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    k = len(rest)
    for mask in range(1 << k):
        chosen = [rest[i] for i in range(k) if mask >> i & 1]
        block = (first, *chosen)
        # gaps between consecutive elements of the block (and after the last)
        gaps = []
        positions = [-1] + [i for i in range(k) if mask >> i & 1] + [k]
        for lo, hi in zip(positions, positions[1:]):
            gaps.append(rest[lo + 1: hi])
        yield from _combine(block, gaps)


def _combine(block, gaps):
    def rec(i):
        if i == len(gaps):
            yield ()
            return
        for part in _nc_of(gaps[i]):
            for tail in rec(i + 1):
                yield part + tail

    for parts in rec(0):
        yield tuple(sorted((block, *parts)))


def _catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def nc_mobius_to_top(blocks, n: int) -> int:
    """``mu(pi, 1_n)`` via the Kreweras complement of ``pi``."""
    out = 1
    for b in kreweras_blocks(blocks, n):
        out *= (-1) ** (len(b) - 1) * _catalan(len(b) - 1)
    return out


def nc_partition_oracle(m: MomentSequence, n: int) -> Fraction:
    """``kappa_n = sum_{pi in NC(n)} m_pi mu(pi, 1_n)`` by enumeration."""
    if n > NC_ORDER_CAP:
        raise OrderCapError(f"enumeration is capped at n = {NC_ORDER_CAP}, got {n}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > m.order:
        raise TruncationError(f"need m_{n}")
    total = Fraction(0)
    for blocks in nc_partitions(n):
        prod = Fraction(1)
        for b in blocks:
            prod *= m.entries[len(b)]
            if prod == 0:
                break
        if prod:
            total += prod * nc_mobius_to_top(blocks, n)
    return total


# ---------------------------------------------------------------------------
# Hankel positivity


@dataclass(frozen=True)
class HankelReport:
    """Exact PSD decision for ``(a_{i+j})_{i,j=1..N}``.

    The test is semidefinite: rank-deficient matrices (the semicircle gives
    one) count as positive.  When the matrix is not PSD, ``witness`` is an
    integer vector ``v`` with ``v^T A v = witness_value < 0``; otherwise the
    pivots of an ``L D L^T`` factorization serve as certificate.
    """

    order: int
    matrix: tuple
    psd: bool
    leading_minors: tuple
    rank: int
    witness: tuple | None = None
    witness_value: Fraction | None = None
    failing_minor: int | None = None
    pivots: tuple = ()
    pivot_order: tuple = ()
    min_eigenvalue: float = float("nan")
    test: str = "positive semidefinite"

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "matrix": [list(r) for r in self.matrix],
            "psd": self.psd,
            "test": self.test,
            "leading_minors": list(self.leading_minors),
            "failing_minor": self.failing_minor,
            "rank": self.rank,
            "witness": None if self.witness is None else list(self.witness),
            "witness_value": self.witness_value,
            "certificate": {"pivot_order": list(self.pivot_order), "pivots": list(self.pivots)},
            "min_eigenvalue": self.min_eigenvalue,
        }


def _det_bareiss(mat) -> Fraction:
    a = [list(r) for r in mat]
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _ldl_psd(mat):
    """Symmetric elimination with diagonal pivoting.

    Returns ``(psd, witness, pivots, order)``; the witness is lifted back
    through every Schur complement so it is a vector for the input matrix.
    """
    n = len(mat)
    S = {(i, j): Fraction(mat[i][j]) for i in range(n) for j in range(n)}
    remaining = list(range(n))
    steps = []  # (pivot, pivot row over remaining-after, pivot value)
    pivots, order = [], []
    witness = None
    while remaining:
        neg = next((i for i in remaining if S[i, i] < 0), None)
        if neg is not None:
            witness = {i: Fraction(0) for i in remaining}
            witness[neg] = Fraction(1)
            break
        zero_pair = None
        for i in remaining:
            if S[i, i] != 0:
                continue
            j = next((j for j in remaining if j != i and S[i, j] != 0), None)
            if j is not None:
                zero_pair = (i, j)
                break
        if zero_pair is not None:
            i, j = zero_pair
            t = -(abs(S[j, j]) + 1) / (2 * S[i, j])
            witness = {k: Fraction(0) for k in remaining}
            witness[i], witness[j] = t, Fraction(1)
            break
        p = next((i for i in remaining if S[i, i] > 0), None)
        if p is None:
            break  # the remaining block is identically zero
        rest = [i for i in remaining if i != p]
        piv = S[p, p]
        row = {j: S[p, j] for j in rest}
        for i in rest:
            for j in rest:
                S[i, j] = S[i, j] - S[i, p] * row[j] / piv
        steps.append((p, row, piv))
        pivots.append(piv)
        order.append(p)
        remaining = rest
    if witness is None:
        return True, None, pivots, order
    for p, row, piv in reversed(steps):
        witness[p] = -sum(row[j] * witness[j] for j in row) / piv
    vec = [witness.get(i, Fraction(0)) for i in range(n)]
    scale = 1
    for v in vec:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return False, tuple(int(v * scale) for v in vec), pivots, order


def is_psd_exact(mat) -> bool:
    return _ldl_psd(mat)[0]


def hankel_psd_report(mat) -> HankelReport:
    n = len(mat)
    mat = tuple(tuple(Fraction(x) for x in r) for r in mat)
    minors = tuple(_det_bareiss([r[:k] for r in mat[:k]]) for k in range(1, n + 1))
    psd, witness, pivots, order = _ldl_psd(mat)
    wval = None
    if witness is not None:
        wval = sum(witness[i] * mat[i][j] * witness[j] for i in range(n) for j in range(n))
        assert wval < 0, "witness must certify indefiniteness"
    failing = next((k + 1 for k, d in enumerate(minors) if d < 0), None)
    eig = float(np.linalg.eigvalsh(np.array(mat, dtype=float)).min()) if n else 0.0
    return HankelReport(
        order=n, matrix=mat, psd=psd, leading_minors=minors, rank=len(pivots) if psd else -1,
        witness=witness, witness_value=wval, failing_minor=failing,
        pivots=tuple(pivots), pivot_order=tuple(order), min_eigenvalue=eig,
    )


def is_conditionally_positive_definite(a: Sequence, N: int) -> HankelReport:
    """PSD test of ``(a_{i+j})_{i,j=1..N}``; ``a[0]`` is ``a_1``."""
    a = [Fraction(x) for x in a]
    if len(a) < 2 * N:
        raise TruncationError(f"need a_1..a_{2 * N}, got {len(a)} terms")
    mat = [[a[i + j - 1] for j in range(1, N + 1)] for i in range(1, N + 1)]
    return hankel_psd_report(mat)


def _cumulant_report(check, m, N, weight, what, qualifier):
    if m.order < 2 * N:
        raise TruncationError(f"order {N} needs moments up to m_{2 * N}")
    kap = free_cumulants_from_moments(m.truncate(2 * N))
    seq = kap.weighted() if weight else kap.entries
    rep = is_conditionally_positive_definite(seq, N)
    details = {"kappa": list(kap.entries), "sequence": list(seq), "hankel": rep.to_dict()}
    if rep.psd:
        return CheckReport(
            check, PASS,
            f"Hankel matrix of {what} is positive semidefinite at order {N}: {qualifier}",
            margin=0.0, tolerance=0.0, details=details,
        )
    stmt = f"Hankel matrix of {what} is not positive semidefinite at order {N}"
    return CheckReport(check, FAIL, stmt, margin=rep.min_eigenvalue, tolerance=0.0,
                       witness={"vector": list(rep.witness), "quadratic_form": rep.witness_value,
                                "failing_minor": rep.failing_minor},
                       details=details)


def fsd_cumulant_criterion(m: MomentSequence, N: int, compact_support: bool = False) -> CheckReport:
    """Hankel test of ``{n kappa_n}``.

    Failure rules FSD out.  Success only says the moments are consistent
    with FSD; it is equivalent to FSD (at all orders) for compact support.
    """
    qual = ("consistent with FSD (equivalent to FSD for compactly supported laws "
            "when it holds at every order)" if compact_support else
            "consistent with FSD (support not known to be compact, so no converse)")
    rep = _cumulant_report("fsd_cumulant", m, N, True, "n*kappa_n", qual)
    if rep.failed:
        return CheckReport(rep.check, FAIL, rep.statement + ": the law is not FSD",
                           margin=rep.margin, witness=rep.witness, tolerance=0.0, details=rep.details)
    return rep


def fid_cumulant_criterion(m: MomentSequence, N: int, compact_support: bool = False) -> CheckReport:
    qual = ("consistent with FID (equivalent to FID for compactly supported laws "
            "when it holds at every order)" if compact_support else
            "consistent with FID (support not known to be compact, so no converse)")
    rep = _cumulant_report("fid_cumulant", m, N, False, "kappa_n", qual)
    if rep.failed:
        return CheckReport(rep.check, FAIL, rep.statement + ": the law is not FID",
                           margin=rep.margin, witness=rep.witness, tolerance=0.0, details=rep.details)
    return rep


@dataclass(frozen=True)
class GrowthEstimate:
    """``max_n |kappa_n|^{1/n}`` and where it is attained, plus the prefix profile."""

    estimate: float
    index: int
    profile: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "index": self.index, "profile": list(self.profile)}


def exponential_growth_check(k: FreeCumulantSequence) -> GrowthEstimate:
    """Diagnostic for ``|kappa_n| <= c^n``: no verdict, just the running estimate.

    ``profile[p]`` is the estimate over ``kappa_1..kappa_{p+1}``; a profile
    that keeps climbing hints at non-compact support.
    """
    if k.order < 4:
        raise TruncationError("need at least four cumulants")
    best, idx, profile = 0.0, 1, []
    for n, kap in enumerate(k.entries, start=1):
        val = abs(float(kap)) ** (1.0 / n) if kap else 0.0
        if val > best:
            best, idx = val, n
        profile.append(best)
    return GrowthEstimate(best, idx, tuple(profile))
