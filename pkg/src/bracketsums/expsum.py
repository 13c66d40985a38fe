"""Exponential sums E_n e(xi * n * floor(n sqrt k)) with exact floors.

Phases are split into an exact rational part (a - l q)/q, reduced modulo 1 in
integer arithmetic, and a fixed-point part (b sqrt(k)/q + t) held as a 128-bit
fraction of the circle.  Products with n*floor(n sqrt k) are taken modulo 2**128
with 64-bit limbs, so a term costs a handful of integer operations and one
sincos regardless of N.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _accel
from ._accel import njit, prange
from .errors import ArithmeticOverflow, ContextMismatch, EmptyInterval
from .qfield import KContext, QuadRat, floor_surd, make_quadrat

BLOCK = 1 << 16
WIDE_LIMIT = 1 << 126  # bound on n^2 k1 k2 for the exact integer path
KERNEL_LIMIT = 1 << 62  # bound on n^2 k1 k2 for the int64 kernels
FRAC_BITS = 128
_MASK64 = (1 << 64) - 1


def floor_n_sqrtk(n: int, ctx: KContext) -> int:
    """Exact floor(n * sqrt(k1/k2)) via isqrt(n^2 k1 k2) // k2."""
    m = n * n * ctx.disc
    if m >= WIDE_LIMIT:
        raise ArithmeticOverflow(f"n^2*k1*k2 = {m} exceeds 2^126")
    return math.isqrt(m) // ctx.k2


@dataclass(frozen=True)
class PhaseSpec:
    """A frequency either as center + offset (exact mode) or as a raw real."""

    center: QuadRat | None
    offset_t: Fraction
    as_real: float
    raw: Fraction | None = None

    @classmethod
    def from_center(cls, center: QuadRat, t: float | Fraction = 0) -> "PhaseSpec":
        t = Fraction(t)
        return cls(center, t, center.alpha + float(t), None)

    @classmethod
    def from_real(cls, xi: float | Fraction) -> "PhaseSpec":
        xi = Fraction(xi)
        return cls(None, Fraction(0), float(xi), xi)

    @classmethod
    def from_triple(cls, a: int, b: int, q: int, ctx: KContext, t: float = 0) -> "PhaseSpec":
        return cls.from_center(make_quadrat(a, b, q, ctx), t)

    @property
    def is_center(self) -> bool:
        return self.center is not None

    def negated(self) -> "PhaseSpec":
        if self.center is None:
            return PhaseSpec.from_real(-self.raw)
        c = self.center
        return PhaseSpec.from_center(make_quadrat(-c.a, -c.b, c.q, c.ctx), -self.offset_t)

    def kernel_params(self, ctx: KContext) -> tuple[int, int, int]:
        """(rational numerator mod q, q, 128-bit fixed-point fraction of the rest)."""
        full = 1 << FRAC_BITS
        if self.center is None:
            x = self.raw - math.floor(self.raw)
            return 0, 1, math.floor(x * full) % full
        c = self.center
        if not c.ctx.same_field(ctx):
            raise ContextMismatch("phase center built for another context")
        P = ctx.precision_bits
        beta = 0
        if c.b:
            # floor(b sqrt(k) 2^P / q), exact
            beta = floor_surd(0, c.b, ctx.disc << (2 * P)) // (c.q * ctx.k2)
        beta += math.floor(self.offset_t * (1 << P))
        shift = P - FRAC_BITS
        beta = beta >> shift if shift >= 0 else beta << -shift
        return c.alpha_exact_num % c.q, c.q, beta % full


@dataclass(frozen=True)
class SumResult:
    value: complex
    n_terms: int
    est_phase_error: float
    wall_ns: int


def phase_frac(n: int, xi: PhaseSpec, ctx: KContext) -> float:
    """{xi * n * floor(n sqrt k)} in [0, 1) from exact integer arithmetic."""
    prod = n * floor_n_sqrtk(n, ctx)
    if xi.center is None:
        x = xi.raw * prod
        return float(x - math.floor(x))
    c = xi.center
    P = ctx.precision_bits
    rat = Fraction((c.alpha_exact_num * prod) % c.q, c.q)
    beta_fp = floor_surd(0, c.b, ctx.disc << (2 * P)) // (c.q * ctx.k2) if c.b else 0
    beta_fp += math.floor(xi.offset_t * (1 << P))
    frac = (beta_fp * prod) % (1 << P)
    x = rat + Fraction(frac, 1 << P)
    return float(x - math.floor(x))


def phase_error_bound(n_max: int, ctx: KContext, xi: PhaseSpec) -> float:
    """Per-term phase error bound for terms with n <= n_max."""
    if n_max < 1:
        return 0.0
    prod = n_max * (n_max * ctx.sqrtk + 1.0)
    if xi.center is not None:
        prod *= 1.0 + abs(xi.center.b) / xi.center.q
    return prod * 2.0 ** (2 - FRAC_BITS) + 2.0 ** -50


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _mulhi64(u, v):
    mask = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    u0 = u & mask
    u1 = u >> s32
    v0 = v & mask
    v1 = v >> s32
    t = u0 * v0
    k = t >> s32
    t = u1 * v0 + k
    w1 = t & mask
    w2 = t >> s32
    t = u0 * v1 + w1
    k = t >> s32
    return u1 * v1 + w2 + k


@njit(cache=True)
def _isqrt64(m):
    r = np.int64(math.sqrt(np.float64(m)))
    while r * r > m:
        r -= 1
    while (r + 1) * (r + 1) <= m:
        r += 1
    return r


@njit(cache=True, parallel=True)
def _segment_sums_numba(starts, stops, anum, q, xhi, xlo, disc, k2):
    nseg = starts.shape[0]
    re = np.zeros(nseg)
    im = np.zeros(nseg)
    two_pi = 2.0 * math.pi
    scale = 2.0 ** -53
    sh = np.uint64(11)
    for j in prange(nseg):
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        for n in range(starts[j], stops[j]):
            f = _isqrt64(n * n * disc) // k2
            p = n * f
            x = 0.0
            if q > 1:
                x = ((anum * (p % q)) % q) / q
            pu = np.uint64(p)
            top = _mulhi64(xlo, pu) + xhi * pu
            x += np.float64(np.int64(top >> sh)) * scale
            if x >= 1.0:
                x -= 1.0
            ang = two_pi * x
            # Kahan on both components
            y = math.cos(ang) - cr
            t = sr + y
            cr = (t - sr) - y
            sr = t
            y = math.sin(ang) - ci
            t = si + y
            ci = (t - si) - y
            si = t
        re[j] = sr
        im[j] = si
    return re, im


def _mulhi64_np(u, v):
    mask = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    u0, u1 = u & mask, u >> s32
    v0, v1 = v & mask, v >> s32
    t = u0 * v0
    t = u1 * v0 + (t >> s32)
    w1, w2 = t & mask, t >> s32
    t = u0 * v1 + w1
    return u1 * v1 + w2 + (t >> s32)


def isqrt64_np(m: np.ndarray) -> np.ndarray:
    r = np.sqrt(m.astype(np.float64)).astype(np.int64)
    r -= (r * r > m).astype(np.int64)
    r += ((r + 1) * (r + 1) <= m).astype(np.int64)
    return r


def floor_table_np(n: np.ndarray, disc: int, k2: int) -> np.ndarray:
    return isqrt64_np(n * n * np.int64(disc)) // np.int64(k2)


def _segment_sums_numpy(starts, stops, anum, q, xhi, xlo, disc, k2):
    nseg = starts.shape[0]
    re = np.zeros(nseg)
    im = np.zeros(nseg)
    xhi, xlo = np.uint64(xhi), np.uint64(xlo)
    for j in range(nseg):
        n = np.arange(starts[j], stops[j], dtype=np.int64)
        p = n * floor_table_np(n, disc, k2)
        x = np.zeros(n.shape[0])
        if q > 1:
            x = ((np.int64(anum) * (p % q)) % q) / q
        pu = p.astype(np.uint64)
        with np.errstate(over="ignore"):
            top = _mulhi64_np(np.full_like(pu, xlo), pu) + xhi * pu
        x = x + (top >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        x -= np.floor(x)
        z = np.exp(2j * np.pi * x)
        re[j] = z.real.sum()
        im[j] = z.imag.sum()
    return re, im


def _python_segment(start: int, stop: int, xi: PhaseSpec, ctx: KContext) -> complex:
    """Exact-integer path for n beyond the int64 kernel range."""
    acc = []
    for n in range(start, stop):
        acc.append(np.exp(2j * np.pi * phase_frac(n, xi, ctx)))
    arr = np.array(acc)
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


def segment_sums(starts: np.ndarray, stops: np.ndarray, xi: PhaseSpec, ctx: KContext,
                 backend: str | None = None) -> np.ndarray:
    """Raw (unnormalized) sums of e(phase) over each [starts[j], stops[j])."""
    starts = np.asarray(starts, dtype=np.int64)
    stops = np.asarray(stops, dtype=np.int64)
    if len(stops) and int(stops.max()) > 1:
        top = int(stops.max()) - 1
        if top * top * ctx.disc >= WIDE_LIMIT:
            raise ArithmeticOverflow("n^2*k1*k2 exceeds 2^126")
    anum, q, X = xi.kernel_params(ctx)
    xhi, xlo = X >> 64, X & _MASK64
    fast = [j for j in range(len(starts)) if (int(stops[j]) - 1) ** 2 * ctx.disc < KERNEL_LIMIT]
    out = np.zeros(len(starts), dtype=np.complex128)
    if fast:
        idx = np.array(fast)
        use_numba = _accel.USE_NUMBA if backend is None else backend == "numba"
        kern = _segment_sums_numba if use_numba else _segment_sums_numpy
        args = (starts[idx], stops[idx], np.int64(anum), np.int64(q),
                np.uint64(xhi), np.uint64(xlo), np.int64(ctx.disc), np.int64(ctx.k2))
        re, im = kern(*args)
        out[idx] = re + 1j * im
    for j in set(range(len(starts))) - set(fast):
        out[j] = _python_segment(int(starts[j]), int(stops[j]), xi, ctx)
    return out


class _Neumaier:
    """Ordered compensated accumulator for complex values."""

    def __init__(self):
        self.s = [0.0, 0.0]
        self.c = [0.0, 0.0]

    def add(self, z: complex) -> None:
        for i, v in enumerate((z.real, z.imag)):
            t = self.s[i] + v
            if abs(self.s[i]) >= abs(v):
                self.c[i] += (self.s[i] - t) + v
            else:
                self.c[i] += (v - t) + self.s[i]
            self.s[i] = t

    @property
    def value(self) -> complex:
        return complex(self.s[0] + self.c[0], self.s[1] + self.c[1])


def _block_bounds(lo: int, hi: int, cuts=()) -> tuple[np.ndarray, np.ndarray]:
    """Blocks of size BLOCK starting at lo, additionally split at ``cuts``."""
    edges = set(range(lo, hi + 1, BLOCK)) | {hi + 1}
    edges |= {c + 1 for c in cuts if lo <= c <= hi}
    edges = sorted(edges)
    return np.array(edges[:-1], dtype=np.int64), np.array(edges[1:], dtype=np.int64)


def _interval_sum(lo: int, hi: int, xi: PhaseSpec, ctx: KContext, cuts=(), backend=None):
    starts, stops = _block_bounds(lo, hi, cuts)
    sums = segment_sums(starts, stops, xi, ctx, backend)
    return starts, stops, sums


def exp_sum_interval(I: tuple[int, int], xi: PhaseSpec, ctx: KContext, backend: str | None = None) -> SumResult:
    """Mean of e(xi n floor(n sqrt k)) over the integer interval I = (lo, hi), inclusive."""
    lo, hi = int(I[0]), int(I[1])
    if hi < lo:
        raise EmptyInterval(f"interval [{lo}, {hi}] is empty")
    if lo < 1:
        raise ValueError("interval must lie in the positive integers")
    t0 = time.perf_counter_ns()
    _, _, sums = _interval_sum(lo, hi, xi, ctx, backend=backend)
    acc = _Neumaier()
    for z in sums:
        acc.add(complex(z))
    count = hi - lo + 1
    return SumResult(acc.value / count, count, phase_error_bound(hi, ctx, xi), time.perf_counter_ns() - t0)


def exp_sum(N: float, xi: PhaseSpec, ctx: KContext, backend: str | None = None) -> SumResult:
    """m_N(xi) = (1/floor N) sum_{n <= N} e(xi n floor(n sqrt k))."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return exp_sum_interval((1, math.floor(N)), xi, ctx, backend)


def exp_sum_prefix(Ns, xi: PhaseSpec, ctx: KContext, backend: str | None = None) -> list[SumResult]:
    """m_N(xi) for several N from a single pass over n <= max(Ns)."""
    Ns = sorted({math.floor(N) for N in Ns})
    if not Ns or Ns[0] < 1:
        raise ValueError("all N must be at least 1")
    t0 = time.perf_counter_ns()
    _, stops, sums = _interval_sum(1, Ns[-1], xi, ctx, cuts=Ns, backend=backend)
    out = []
    acc = _Neumaier()
    j = 0
    for N in Ns:
        while j < len(stops) and stops[j] <= N + 1:
            acc.add(complex(sums[j]))
            j += 1
        out.append(SumResult(acc.value / N, N, phase_error_bound(N, ctx, xi), time.perf_counter_ns() - t0))
    return out


def bracket_identity_check(n: int, ctx: KContext) -> float:
    """Defect of n a floor(n a) = ((a n)^2 + floor(a n)^2 - {n a}^2)/2 with a = sqrt k in fixed point."""
    P = ctx.precision_bits
    one = 1 << P
    an = n * ctx.sqrtk_fp  # a*n at scale 2^P
    fl = floor_n_sqrtk(n, ctx)
    fr = an - fl * one  # {a n} at scale 2^P
    lhs = an * fl  # scale 2^P
    # each square rounded back to scale 2^P, as a P-bit evaluation would do
    rhs2 = (an * an >> P) + fl * fl * one - (fr * fr >> P)
    return float(abs(Fraction(2 * lhs - rhs2, 2 * one)))
