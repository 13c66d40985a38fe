"""Arithmetic and oscillatory factors of the major-arc approximation.

The double Gauss sum G_k(a, b, q), the one-variable quadratic Gauss sum
g(a, b, q), the Fresnel factor F(xi) = int_0^1 e(-xi x^2) dx, and its rescaling
V_N(t) = F(-t sqrt(k) N^2) together with the periodised version on the torus.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _accel
from ._accel import njit
from .errors import BudgetExceeded
from .qfield import KContext

DIRECT_CAP = 1 << 13  # largest 2 q k2 for the O((2 q k2)^2) double sum
QUAD_LIMIT = float(1 << 14)  # |xi| above this uses the asymptotic series
SERIES_LIMIT = 4.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class Method(str, enum.Enum):
    DIRECT_SUM = "direct_sum"
    REDUCED_SUM = "reduced_sum"
    QUADRATURE = "quadrature"
    SERIES = "series"


@dataclass(frozen=True)
class FactorValue:
    value: complex
    method: Method
    est_error: float

    def __complex__(self) -> complex:
        return self.value

    def __abs__(self) -> float:
        return abs(self.value)


def _roots(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def gauss_g(a: int, b: int, q: int) -> FactorValue:
    """g(a, b, q) = E_{r in [q]} e((a r^2 + b r)/q), phases reduced mod q exactly."""
    if q < 1:
        raise ValueError("q must be positive")
    r = np.arange(q, dtype=np.int64)
    res = ((a % q) * ((r * r) % q) + (b % q) * r) % q
    counts = np.bincount(res, minlength=q)
    w = _roots(q)
    val = complex(math.fsum(counts * w.real), math.fsum(counts * w.imag)) / q
    return FactorValue(val, Method.DIRECT_SUM, q * 2.0 ** -50)


def gauss_g_many(a: int, bs, q: int) -> np.ndarray:
    """g(a, b, q) for every b in ``bs``, one exact residue table per call."""
    if q < 1:
        raise ValueError("q must be positive")
    bs = np.asarray(bs, dtype=np.int64)
    r = np.arange(q, dtype=np.int64)
    res = ((a % q) * ((r * r) % q) + (bs[:, None] % q) * r[None, :]) % q
    return _roots(q)[res].mean(axis=1)


# ---- double sum ------------------------------------------------------------


@njit(cache=True)
def _double_sum_counts_numba(A, B1, B2, M):
    counts = np.zeros(M, dtype=np.int64)
    for r in range(M):
        base = (B1 * r * r) % M
        ar = (A * r) % M
        for s in range(M):
            counts[(base + ar * s + B2 * s * s) % M] += 1
    return counts


def _double_sum_counts_numpy(A, B1, B2, M):
    counts = np.zeros(M, dtype=np.int64)
    s = np.arange(M, dtype=np.int64)
    tail = (B2 * s * s) % M
    for r in range(M):
        idx = ((B1 * r * r) % M + ((A * r) % M) * s + tail) % M
        counts += np.bincount(idx, minlength=M)
    return counts


def _gauss_G_direct(a: int, b: int, q: int, ctx: KContext) -> FactorValue:
    M = 2 * q * ctx.k2
    if M > DIRECT_CAP:
        raise BudgetExceeded(f"direct double sum needs 2qk2 = {M} > {DIRECT_CAP}")
    A = (2 * ctx.k2 * a) % M
    B1 = (b * ctx.k1) % M
    B2 = (b * ctx.k2) % M
    kern = _double_sum_counts_numba if _accel.USE_NUMBA else _double_sum_counts_numpy
    counts = kern(np.int64(A), np.int64(B1), np.int64(B2), np.int64(M))
    w = _roots(M)
    val = complex(math.fsum(counts * w.real), math.fsum(counts * w.imag)) / (M * M)
    return FactorValue(val, Method.DIRECT_SUM, M * M * 2.0 ** -52)


@njit(cache=True)
def _chirp_rows_numba(c2, c1, M, nrows, wre, wim):
    """sum_r e((c2 r^2 + c1 j r)/M) for j < nrows."""
    out = np.zeros(nrows, dtype=np.complex128)
    for j in range(nrows):
        sr = 0.0
        si = 0.0
        step = (c1 * j) % M
        for r in range(M):
            idx = ((c2 * r * r) % M + step * r) % M
            sr += wre[idx]
            si += wim[idx]
        out[j] = complex(sr, si)
    return out


def _chirp_rows_numpy(c2, c1, M, nrows, wre, wim):
    r = np.arange(M, dtype=np.int64)
    quad = (c2 * r * r) % M
    out = np.zeros(nrows, dtype=np.complex128)
    for j0 in range(0, nrows, 64):
        j = np.arange(j0, min(nrows, j0 + 64), dtype=np.int64)
        idx = (quad[None, :] + ((c1 * j) % M)[:, None] * r[None, :]) % M
        out[j0:j0 + len(j)] = wre[idx].sum(axis=1) + 1j * wim[idx].sum(axis=1)
    return out


def gauss_G_table(b: int, q: int, ctx: KContext) -> np.ndarray:
    """G_k(a, b, q) for every a in {0..q-1} through the single-sum reduction.

    G = (1/M) sum_s e(b s^2/(2q)) g(b k1, 2 k2 a s, M) with M = 2 q k2.  Since
    2 k2 a s mod M only depends on a s mod q, the g values are needed at
    q arguments and the s-sum folds onto residues mod q.
    """
    M = 2 * q * ctx.k2
    w = _roots(M)
    kern = _chirp_rows_numba if _accel.USE_NUMBA else _chirp_rows_numpy
    # H[j] = g(b k1, 2 k2 j, M)
    H = kern(np.int64((b * ctx.k1) % M), np.int64(2 * ctx.k2), np.int64(M), np.int64(q),
             w.real.copy(), w.imag.copy()) / M
    s = np.arange(M, dtype=np.int64)
    chirp = w[((b % M) * ctx.k2 * ((s * s) % M)) % M]
    W = np.bincount(s % q, weights=chirp.real, minlength=q) + 1j * np.bincount(
        s % q, weights=chirp.imag, minlength=q)
    a = np.arange(q, dtype=np.int64)
    return (H[(a[:, None] * a[None, :]) % q] @ W) / M


@functools.lru_cache(maxsize=4096)
def _gauss_G_cached(a: int, b: int, q: int, k1: int, k2: int, method: str, ctx: KContext) -> FactorValue:
    if method == Method.DIRECT_SUM:
        return _gauss_G_direct(a, b, q, ctx)
    M = 2 * q * k2
    val = complex(gauss_G_table(b, q, ctx)[a % q])
    return FactorValue(val, Method.REDUCED_SUM, M * 2.0 ** -50)


def gauss_G(a: int, b: int, q: int, ctx: KContext, method: str | None = None) -> FactorValue:
    """G_k(a, b, q) = E_{r,s in [2 q k2]} e(a r s/q + b (k1 r^2 + k2 s^2)/(2 q k2)).

    ``method`` is ``"direct_sum"``, ``"reduced_sum"`` or None (direct up to the cap).
    """
    if q < 1:
        raise ValueError("q must be positive")
    if method is None:
        method = Method.DIRECT_SUM if 2 * q * ctx.k2 <= DIRECT_CAP else Method.REDUCED_SUM
    method = Method(method)
    return _gauss_G_cached(a % q, b, q, ctx.k1, ctx.k2, method.value, ctx)


def gauss_G_sup(ctx: KContext, q_max: int, b_max: int) -> tuple[float, tuple[int, int, int]]:
    """sup of |G_k(a,b,q)| sqrt(q) over q <= q_max, |b| <= b_max, gcd(a,b,q) = 1."""
    best, arg = 0.0, (0, 0, 1)
    for q in range(1, q_max + 1):
        a = np.arange(q)
        for b in range(0, b_max + 1):
            # G(a, -b, q) = conj G(-a, b, q), so b >= 0 suffices
            vals = np.abs(gauss_G_table(b, q, ctx)) * math.sqrt(q)
            ok = np.gcd(np.gcd(a, b), q) == 1
            if ok.any():
                i = int(np.argmax(np.where(ok, vals, -1.0)))
                if vals[i] > best:
                    best, arg = float(vals[i]), (i, b, q)
    return best, arg


# ---- Fresnel factor --------------------------------------------------------


def _composite_gl(phase_coef: float, length: float, n_sub: int) -> complex:
    """int_0^length e(phase_coef x^2) dx by composite 16-point Gauss-Legendre."""
    total = 0.0 + 0.0j
    chunk = 1 << 14
    h = length / n_sub
    for c0 in range(0, n_sub, chunk):
        left = (np.arange(c0, min(n_sub, c0 + chunk)) * h)[:, None]
        x = left + 0.5 * h * (_GL_NODES[None, :] + 1.0)
        vals = np.exp(2j * np.pi * phase_coef * x * x) @ _GL_WEIGHTS
        total += vals.sum()
    return total * 0.5 * h


def fresnel_quadrature(xi: float) -> complex:
    n_sub = max(64, math.ceil(8 * abs(xi)))
    return complex(_composite_gl(-xi, 1.0, n_sub))


def fresnel_series(xi: float, digits: int = 40) -> complex:
    """Power series sum_m (-2 pi i xi)^m / (m! (2m+1)) in extended precision."""
    with mpmath.workdps(digits):
        z = -2j * mpmath.pi * mpmath.mpf(xi)
        term = mpmath.mpc(1)
        total = mpmath.mpc(1)
        m = 0
        while True:
            m += 1
            term *= z / m
            add = term / (2 * m + 1)
            total += add
            if abs(add) < mpmath.mpf(10) ** (-digits + 5) and m > abs(z):
                break
        return complex(total)


def fresnel_asymptotic(xi: float) -> tuple[complex, float]:
    """Large-|xi| expansion: the full Gaussian integral minus the tail beyond x = 1."""
    if xi < 0:
        v, err = fresnel_asymptotic(-xi)
        return v.conjugate(), err
    w = 2 * math.pi * xi
    full = 0.5 * math.sqrt(math.pi / w) * complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))
    # tail = e^{-iw} sum_m f^(m)(1)/(iw)^(m+1), f(u) = u^{-1/2}/2
    deriv = 0.5
    tail = 0.0 + 0.0j
    inv = 1.0 / (1j * w)
    power = inv
    last = abs(deriv * power)
    for m in range(60):
        term = deriv * power
        if m > 0 and abs(term) > last:
            break
        tail += term
        last = abs(term)
        if last < 1e-18:
            break
        deriv *= -(2 * m + 1) / 2
        power *= inv
    val = full - complex(math.cos(w), -math.sin(w)) * tail
    return val, max(last, 1e-16)


def fresnel_F(xi: float) -> FactorValue:
    """F(xi) = int_0^1 e(-xi x^2) dx."""
    xi = float(xi)
    if xi == 0.0:
        return FactorValue(1.0 + 0.0j, Method.QUADRATURE, 0.0)
    if abs(xi) <= QUAD_LIMIT:
        return FactorValue(fresnel_quadrature(xi), Method.QUADRATURE, 1e-12 * (1 + abs(xi)) ** 0.5)
    val, err = fresnel_asymptotic(xi)
    return FactorValue(val, Method.SERIES, err)


def fresnel_F_many(xis: np.ndarray) -> np.ndarray:
    """Vectorised F over an array; each entry matches :func:`fresnel_F`."""
    xis = np.asarray(xis, dtype=np.float64)
    out = np.empty(xis.shape, dtype=np.complex128)
    flat_in, flat_out = xis.ravel(), out.ravel()
    for i, x in enumerate(flat_in):
        flat_out[i] = fresnel_F(x).value
    return out


# ---- V and its periodisation -----------------------------------------------


def v_factor(N: float, t: float, ctx: KContext) -> FactorValue:
    """V_N(t) = (1/N) int_0^N e(t sqrt(k) x^2) dx, evaluated as F(-t sqrt(k) N^2)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return fresnel_F(-t * ctx.sqrtk * N * N)


def v_factor_direct(N: float, t: float, ctx: KContext) -> FactorValue:
    """V_N(t) straight from its defining integral over [0, N]."""
    coef = t * ctx.sqrtk
    n_sub = max(64, math.ceil(8 * abs(coef) * N * N))
    if n_sub > 1 << 24:
        raise BudgetExceeded("direct V quadrature needs too many subintervals")
    return FactorValue(complex(_composite_gl(coef, N, n_sub)) / N, Method.QUADRATURE, 1e-12)


def torus_center(t: float) -> float:
    """Representative of t mod 1 in [-1/2, 1/2)."""
    return t - math.floor(t + 0.5)


def v_tilde(N: float, t: float, ctx: KContext) -> FactorValue:
    return v_factor(N, torus_center(t), ctx)
