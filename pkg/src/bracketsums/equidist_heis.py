"""Equidistribution of (n, floor(n sqrt k), {n sqrt k}) and Heisenberg orbit diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import _accel
from ._accel import njit
from .arcs import smooth_step
from .errors import ArithmeticOverflow, BudgetExceeded, EmptyInterval, EquivalenceViolation
from .expsum import KERNEL_LIMIT, PhaseSpec, _isqrt64, exp_sum, isqrt64_np
from .qfield import KContext, QuadRat, make_quadrat

COUNT_BUDGET = 1 << 28
CELL_BUDGET = 1 << 20


def floor_residue_equiv(x, q: int, r: int, tol: float = 1e-12) -> bool:
    """Check floor(x) = r (mod q) against {x/q} in [r/q, (r+1)/q) and return the common value."""
    if not 0 <= r < q:
        raise ValueError("need 0 <= r < q")
    lhs = math.floor(x) % q == r
    y = x / q
    frac = y - math.floor(y)
    rhs = r / q <= frac < (r + 1) / q
    if lhs != rhs:
        edge = min(_torus_norm(frac - r / q), _torus_norm(frac - (r + 1) / q))
        if edge > tol:
            raise EquivalenceViolation(f"floor side {lhs} disagrees with fractional side at x={x!r}")
    return lhs


@dataclass(frozen=True)
class EquidistCount:
    interval: tuple[int, int]
    q: int
    D: int
    r: int
    s: int
    d: int
    count: int
    deviation: float


@njit(cache=True)
def _cell_counts_numba(lo, hi, q, D, disc, k2):
    counts = np.zeros(q * q * D, dtype=np.int64)
    dd = D * D * disc
    for n in range(lo, hi + 1):
        f = _isqrt64(n * n * disc) // k2
        fd = _isqrt64(n * n * dd) // k2
        d = fd - D * f
        counts[((n % q) * q + f % q) * D + d] += 1
    return counts


def _cell_counts_numpy(lo, hi, q, D, disc, k2):
    counts = np.zeros(q * q * D, dtype=np.int64)
    step = 1 << 20
    for start in range(lo, hi + 1, step):
        n = np.arange(start, min(hi, start + step - 1) + 1, dtype=np.int64)
        f = isqrt64_np(n * n * disc) // k2
        fd = isqrt64_np(n * n * (D * D * disc)) // k2
        idx = ((n % q) * q + f % q) * D + (fd - D * f)
        counts += np.bincount(idx, minlength=q * q * D)
    return counts


def cell_counts(I: tuple[int, int], q: int, D: int, ctx: KContext) -> np.ndarray:
    """Counts as an array indexed [r, s, d]."""
    lo, hi = int(I[0]), int(I[1])
    if hi < lo:
        raise EmptyInterval(f"interval [{lo}, {hi}] is empty")
    if lo < 1:
        raise ValueError("interval must lie in the positive integers")
    if hi - lo + 1 > COUNT_BUDGET or q * q * D > CELL_BUDGET:
        raise BudgetExceeded("interval length or cell count above budget")
    if hi * hi * D * D * ctx.disc >= KERNEL_LIMIT:
        raise ArithmeticOverflow("n^2 D^2 k1 k2 leaves the int64 range")
    kern = _cell_counts_numba if _accel.USE_NUMBA else _cell_counts_numpy
    counts = kern(np.int64(lo), np.int64(hi), np.int64(q), np.int64(D), np.int64(ctx.disc), np.int64(ctx.k2))
    return counts.reshape(q, q, D)


def equidist_counts(I: tuple[int, int], q: int, D: int, ctx: KContext) -> list[EquidistCount]:
    """Exact cell counts of n in I by (n mod q, floor(n sqrt k) mod q, digit of {n sqrt k} base D)."""
    counts = cell_counts(I, q, D, ctx)
    length = int(I[1]) - int(I[0]) + 1
    target = 1.0 / (q * q * D)
    return [
        EquidistCount((int(I[0]), int(I[1])), q, D, r, s, d, int(counts[r, s, d]),
                      int(counts[r, s, d]) / length - target)
        for r in range(q) for s in range(q) for d in range(D)
    ]


def max_deviation(cells: list[EquidistCount]) -> float:
    return max(abs(c.deviation) for c in cells)


# ---- Heisenberg nilmanifold ---------------------------------------------------


@dataclass(frozen=True)
class HeisPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not 0 <= v < 1:
                raise ValueError(f"coordinate {v} outside [0, 1)")


def _floor(v) -> int:
    # math.floor would route mpf values through a lossy float conversion
    if isinstance(v, mpmath.mpf):
        return int(mpmath.floor(v))
    return math.floor(v)


def _frac(v):
    out = v - _floor(v)
    # a tiny negative float can round up to exactly 1
    return out - 1 if out >= 1 else out


def heis_reduce(x, y, z) -> HeisPoint:
    """Fundamental-domain representative ({x}, {y}, {z - x floor(y)}) of (x, y, z) Gamma."""
    return HeisPoint(_frac(x), _frac(y), _frac(z - x * _floor(y)))


def orbit_point(xi, n: int, sqrt_k):
    """psi-coordinates (x, y, z) = (-xi n, sqrt(k) n, 0) of the polynomial orbit at n."""
    return -xi * n, sqrt_k * n, 0 * xi


def orbit_average(xi: float, N: int, ctx: KContext, prec: int = 192) -> complex:
    """E_{n <= N} e(z) along the reduced orbit, in extended precision."""
    with mpmath.workprec(prec):
        sqrt_k = mpmath.sqrt(mpmath.mpf(ctx.k1) / ctx.k2)
        x0 = mpmath.mpf(Fraction(xi).numerator) / Fraction(xi).denominator
        re, im = [], []
        for n in range(1, N + 1):
            p = heis_reduce(*orbit_point(x0, n, sqrt_k))
            ang = 2 * math.pi * float(p.z)
            re.append(math.cos(ang))
            im.append(math.sin(ang))
    return complex(math.fsum(re), math.fsum(im)) / N


def orbit_identity_defect(xi: float, N: int, ctx: KContext) -> float:
    if N < 1:
        raise ValueError("N must be at least 1")
    if N * N * ctx.disc >= KERNEL_LIMIT:
        raise ArithmeticOverflow("N too large for the orbit comparison")
    direct = exp_sum(N, PhaseSpec.from_real(xi), ctx).value
    return abs(direct - orbit_average(xi, N, ctx))


def _torus_norm(v: float) -> float:
    return abs(v - math.floor(v + 0.5))


def _cutoff(u: float, tau: float) -> float:
    # 0 for u <= tau/10, 1 for u >= tau/5
    return float(smooth_step((u - tau / 10) / (tau / 10)))


def _max_step_slope() -> float:
    u = np.linspace(1e-6, 1 - 1e-6, 200001)
    return float(np.max(np.diff(smooth_step(u)) / np.diff(u)))


STEP_SLOPE = _max_step_slope()


def chi_lipschitz_constant() -> float:
    """C with |chi_tau(p) - chi_tau(p')| <= (C/tau) max(||x - x'||, ||y - y'||)."""
    return 20.0 * STEP_SLOPE


def test_function(tau: float, kind: str, p: HeisPoint) -> complex:
    """chi_tau (kind ``"chi_tau"``) or F_tau = e(z) chi_tau (kind ``"F_tau"``) at p."""
    if not 0 < tau < 0.01:
        raise ValueError("tau must lie in (0, 1/100)")
    chi = _cutoff(_torus_norm(p.x), tau) * _cutoff(_torus_norm(p.y), tau)
    if kind == "chi_tau":
        return complex(chi)
    if kind == "F_tau":
        if chi == 0.0:
            return 0j
        ang = 2 * math.pi * p.z
        return complex(math.cos(ang), math.sin(ang)) * chi
    raise ValueError(f"unknown test function kind {kind!r}")


test_function.__test__ = False  # keep pytest from collecting it


# ---- obstruction search -----------------------------------------------------


@dataclass(frozen=True)
class ObstructionWitness:
    l: tuple[int, int, int]
    norm_linear: float
    norm_quadratic: float
    recovered: QuadRat | None
    distance: float | None  # ||xi - recovered center||

    @property
    def score(self) -> float:
        return max(self.norm_linear, self.norm_quadratic)


SCORE_TOL = 1e-9


@njit(cache=True)
def _tnorm(v):
    return abs(v - math.floor(v + 0.5))


@njit(cache=True)
def _obstruction_numba(xi, sk, N, L, budget, tol):
    xs = xi * sk
    best = np.inf
    # pass 1: minimal score within budget
    for l3 in range(-L, L + 1):
        quad = N * N * _tnorm(2.0 * l3 * xs)
        if quad > budget:
            continue
        for l1 in range(-L, L + 1):
            for l2 in range(-L, L + 1):
                if l1 == 0 and l2 == 0 and l3 == 0:
                    continue
                lin = N * _tnorm(-l1 * xi + l2 * sk + l3 * xs)
                sc = max(lin, quad)
                if sc < best:
                    best = sc
    out = np.zeros(3, dtype=np.int64)
    if best > budget:
        return False, out
    # pass 2: canonical choice among near-minimal witnesses
    bk = np.iinfo(np.int64).max
    bk2 = np.iinfo(np.int64).max
    W = L + 1
    for l3 in range(-L, L + 1):
        quad = N * N * _tnorm(2.0 * l3 * xs)
        if quad > best + tol:
            continue
        for l1 in range(-L, L + 1):
            for l2 in range(-L, L + 1):
                if l1 == 0 and l2 == 0 and l3 == 0:
                    continue
                lin = N * _tnorm(-l1 * xi + l2 * sk + l3 * xs)
                if max(lin, quad) > best + tol:
                    continue
                linf = max(abs(l1), abs(l2), abs(l3))
                first = l1 if l1 != 0 else (l2 if l2 != 0 else l3)
                key = (((linf * W + abs(l3)) * W + abs(l2)) * W + abs(l1)) * 2 + (1 if first < 0 else 0)
                key2 = ((l1 + L) * (2 * L + 1) + (l2 + L)) * (2 * L + 1) + (l3 + L)
                if key < bk or (key == bk and key2 < bk2):
                    bk = key
                    bk2 = key2
                    out[0] = l1
                    out[1] = l2
                    out[2] = l3
    return True, out


def _obstruction_numpy(xi, sk, N, L, budget, tol):
    xs = xi * sk
    r = np.arange(-L, L + 1)
    l1, l2 = np.meshgrid(r, r, indexing="ij")
    rows = []
    for l3 in r:
        v = 2.0 * l3 * xs
        quad = N * N * abs(v - math.floor(v + 0.5))
        if quad > budget:
            continue
        u = -l1 * xi + l2 * sk + l3 * xs
        lin = N * np.abs(u - np.floor(u + 0.5))
        sc = np.maximum(lin, quad)
        keep = sc <= budget
        if l3 == 0:
            keep &= ~((l1 == 0) & (l2 == 0))
        for a, b, s in zip(l1[keep], l2[keep], sc[keep]):
            rows.append((float(s), int(a), int(b), int(l3)))
    if not rows:
        return False, np.zeros(3, dtype=np.int64)
    best = min(row[0] for row in rows)
    W = L + 1

    def key(row):
        _, a, b, c = row
        first = a if a != 0 else (b if b != 0 else c)
        return ((max(abs(a), abs(b), abs(c)) * W + abs(c)) * W + abs(b)) * W + abs(a), first < 0, (a, b, c)

    pick = min((row for row in rows if row[0] <= best + tol), key=key)
    return True, np.array(pick[1:], dtype=np.int64)


def recover_center(xi: float, l: tuple[int, int, int], ctx: KContext) -> QuadRat | None:
    """Center (a + b sqrt k)/q implied by a witness l, following the three cases of the search."""
    l1, l2, l3 = l
    sk = ctx.sqrtk
    if l3 != 0:
        m = round(2 * l3 * xi * sk)
        # m/(2 l3 sqrt k) = m k2 sqrt(k) / (2 k1 l3)
        sign = 1 if l3 > 0 else -1
        return make_quadrat(0, sign * m * ctx.k2, 2 * ctx.k1 * abs(l3), ctx)
    if l1 != 0:
        m = round(-l1 * xi + l2 * sk)
        sign = 1 if l1 > 0 else -1
        return make_quadrat(-sign * m, sign * l2, abs(l1), ctx)
    return None


def obstruction_search(xi: float, N: int, L: int, tau_budget: float, ctx: KContext) -> ObstructionWitness | None:
    """Best l with ||l||_inf <= L minimising max(N ||-l1 xi + l2 sqrt k + l3 xi sqrt k||, N^2 ||2 l3 xi sqrt k||).

    Scores within ``SCORE_TOL`` of the minimum tie; ties go to the smallest
    max-norm, then the smallest |l3|, |l2|, |l1|, then a positive leading entry.
    """
    if L < 1 or L > 10_000:
        raise ValueError("L must lie in [1, 10^4]")
    kern = _obstruction_numba if _accel.USE_NUMBA else _obstruction_numpy
    found, l = kern(float(xi), ctx.sqrtk, float(N), int(L), float(tau_budget), SCORE_TOL)
    if not found:
        return None
    l = tuple(int(v) for v in l)
    sk = ctx.sqrtk
    lin = N * _torus_norm(-l[0] * xi + l[1] * sk + l[2] * xi * sk)
    quad = N * N * _torus_norm(2 * l[2] * xi * sk)
    center = recover_center(xi, l, ctx)
    dist = _torus_norm(xi - center.alpha) if center is not None else None
    return ObstructionWitness(l, lin, quad, center, dist)
