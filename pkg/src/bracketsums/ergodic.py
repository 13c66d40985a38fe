"""Averaging operators A_t f(x) = (1/floor t) sum_{n <= t} f(x - n floor(n sqrt k)) on the integers,
oscillation seminorms along lacunary scales, and the frequency-side approximation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._accel import njit
from .arcs import ArcConfig, approximant_many
from .errors import BudgetExceeded, GridTooSmall, IndexOutOfRange
from .expsum import KERNEL_LIMIT, floor_n_sqrtk, floor_table_np
from .qfield import KContext

SUPPORT_BUDGET = 1 << 27


@dataclass(frozen=True, eq=False)
class Signal:
    """Finitely supported function on Z: values[i] sits at offset + i."""

    offset: int
    values: np.ndarray
    l2_norm: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(np.float64)
        object.__setattr__(self, "values", vals)
        sq = np.abs(vals) ** 2
        object.__setattr__(self, "l2_norm", math.sqrt(math.fsum(sq)))

    @classmethod
    def delta(cls, at: int = 0) -> "Signal":
        return cls(at, np.ones(1))

    @property
    def stop(self) -> int:
        return self.offset + len(self.values)

    def at(self, x: int):
        i = x - self.offset
        return self.values[i] if 0 <= i < len(self.values) else 0.0

    def shifted(self, h: int) -> "Signal":
        return Signal(self.offset + h, self.values.copy())

    def scaled(self, c) -> "Signal":
        return Signal(self.offset, self.values * c)

    def on_window(self, lo: int, hi: int) -> np.ndarray:
        """Values on [lo, hi) with zero padding."""
        out = np.zeros(hi - lo, dtype=self.values.dtype)
        a, b = max(lo, self.offset), min(hi, self.stop)
        if a < b:
            out[a - lo:b - lo] = self.values[a - self.offset:b - self.offset]
        return out


def common_window(signals) -> tuple[int, int]:
    return min(s.offset for s in signals), max(s.stop for s in signals)


def difference_norm(f: Signal, g: Signal) -> float:
    lo, hi = common_window([f, g])
    d = f.on_window(lo, hi) - g.on_window(lo, hi)
    return math.sqrt(math.fsum(np.abs(d) ** 2))


def orbit_shifts(T: int, ctx: KContext) -> np.ndarray:
    """s_m = m floor(m sqrt k) for m = 1..T."""
    if T * T * ctx.disc >= KERNEL_LIMIT:
        raise BudgetExceeded("orbit shifts beyond the int64 range")
    m = np.arange(1, T + 1, dtype=np.int64)
    return m * floor_table_np(m, ctx.disc, ctx.k2)


def average_op(f: Signal, t: float, ctx: KContext, budget: int = SUPPORT_BUDGET) -> Signal:
    if t < 1:
        raise ValueError("t must be at least 1")
    T = math.floor(t)
    s = orbit_shifts(T, ctx)
    W = len(f.values)
    length = W + int(s[-1] - s[0])
    if length > budget:
        raise BudgetExceeded(f"output support {length} exceeds budget {budget}")
    out = np.zeros(length, dtype=f.values.dtype)
    base = int(s[0])
    for sm in s:
        a = int(sm) - base
        out[a:a + W] += f.values
    return Signal(f.offset + base, out / T)


# ---- oscillation --------------------------------------------------------------


@dataclass(frozen=True)
class OscSpec:
    lam: float
    I: tuple[int, ...]

    def __post_init__(self):
        if not 1 < self.lam <= 2:
            raise ValueError("lambda must lie in (1, 2]")
        if len(self.I) < 2 or any(b <= a for a, b in zip(self.I, self.I[1:])):
            raise ValueError("I must be strictly increasing with at least two entries")

    @property
    def J(self) -> int:
        return len(self.I) - 1


def oscillation(family, spec: OscSpec) -> Signal:
    """Pointwise O^2 over blocks [I_j, I_{j+1}) of a family indexed 0..len(family)-1."""
    I = spec.I
    if I[0] < 0 or I[-1] - 1 >= len(family):
        raise IndexOutOfRange(f"I = {I} needs indices up to {I[-1] - 1}, family has {len(family)}")
    lo, hi = common_window(family)
    arr = np.stack([g.on_window(lo, hi) for g in family])
    total = np.zeros(hi - lo)
    for j in range(spec.J):
        base = arr[I[j]]
        block = arr[I[j]:I[j + 1]]
        total += np.max(np.abs(block - base[None, :]) ** 2, axis=0)
    return Signal(lo, np.sqrt(total))


def lacunary_levels(lam: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(floor(lam^n) for n <= n_max, level of each m = 1..floor(lam^n_max))."""
    tops = np.array([math.floor(lam ** n + 1e-9) for n in range(n_max + 1)], dtype=np.int64)
    m = np.arange(1, tops[-1] + 1)
    return tops, np.searchsorted(tops, m, side="left").astype(np.int64)


@njit(cache=True)
def _osc_tables_numba(fre, fim, shifts, level, weights, chunk):
    """Stream x over the support of all A_{lam^n} f and accumulate block tables.

    table[i, e] = sum_x max_{i <= n < e} |a_n(x) - a_i(x)|^2, plus sum_x max_n |a_n|^2
    and sum_x |a_n|^2.
    """
    W = fre.shape[0]
    nl = weights.shape[0]
    T = shifts.shape[0]
    table = np.zeros((nl, nl + 1))
    maxsq = 0.0
    normsq = np.zeros(nl)
    u_lo = shifts[0]
    u_hi = shifts[T - 1] + W
    acc_re = np.zeros((nl, chunk))
    acc_im = np.zeros((nl, chunk))
    touched = np.zeros(chunk, dtype=np.bool_)
    are = np.zeros(nl)
    aim = np.zeros(nl)
    m_lo = 0
    for u0 in range(u_lo, u_hi, chunk):
        u1 = min(u0 + chunk, u_hi)
        while m_lo < T and shifts[m_lo] + W <= u0:
            m_lo += 1
        m = m_lo
        if m >= T or shifts[m] >= u1:
            continue
        while m < T and shifts[m] < u1:
            lv = level[m]
            a = max(u0, shifts[m])
            b = min(u1, shifts[m] + W)
            for u in range(a, b):
                acc_re[lv, u - u0] += fre[u - shifts[m]]
                acc_im[lv, u - u0] += fim[u - shifts[m]]
                touched[u - u0] = True
            m += 1
        for k in range(u1 - u0):
            if not touched[k]:
                continue
            touched[k] = False
            cr = 0.0
            ci = 0.0
            nz = False
            for n in range(nl):
                cr += acc_re[n, k]
                ci += acc_im[n, k]
                acc_re[n, k] = 0.0
                acc_im[n, k] = 0.0
                are[n] = cr * weights[n]
                aim[n] = ci * weights[n]
                if cr != 0.0 or ci != 0.0:
                    nz = True
            if not nz:
                continue
            best = 0.0
            for n in range(nl):
                v = are[n] * are[n] + aim[n] * aim[n]
                normsq[n] += v
                if v > best:
                    best = v
            maxsq += best
            for i in range(nl):
                run = 0.0
                for n in range(i, nl):
                    dr = are[n] - are[i]
                    di = aim[n] - aim[i]
                    v = dr * dr + di * di
                    if v > run:
                        run = v
                    table[i, n + 1] += run
    return table, maxsq, normsq


def _osc_tables_numpy(fre, fim, shifts, level, weights, chunk):
    W = fre.shape[0]
    nl = weights.shape[0]
    T = shifts.shape[0]
    table = np.zeros((nl, nl + 1))
    maxsq = 0.0
    normsq = np.zeros(nl)
    u_lo, u_hi = int(shifts[0]), int(shifts[-1]) + W
    f = fre + 1j * fim
    for u0 in range(u_lo, u_hi, chunk):
        u1 = min(u0 + chunk, u_hi)
        m_a = int(np.searchsorted(shifts, u0 - W, side="right"))
        m_b = int(np.searchsorted(shifts, u1 - 1, side="right"))
        if m_a >= m_b:
            continue
        acc = np.zeros((nl, u1 - u0), dtype=np.complex128)
        for m in range(m_a, m_b):
            a, b = max(u0, int(shifts[m])), min(u1, int(shifts[m]) + W)
            if a < b:
                acc[level[m], a - u0:b - u0] += f[a - int(shifts[m]):b - int(shifts[m])]
        vals = np.cumsum(acc, axis=0) * weights[:, None]
        live = np.any(vals != 0, axis=0)
        vals = vals[:, live]
        sq = np.abs(vals) ** 2
        normsq += sq.sum(axis=1)
        maxsq += sq.max(axis=0).sum()
        for i in range(nl):
            run = np.maximum.accumulate(np.abs(vals[i:] - vals[i]) ** 2, axis=0)
            table[i, i + 1:] += run.sum(axis=1)
    return table, maxsq, normsq


@dataclass(frozen=True)
class OscTables:
    """Everything needed to evaluate ||O^2_I||_2 for any I inside {0..n_max}."""

    table: np.ndarray
    maximal_sq: float
    norms_sq: np.ndarray
    f_norm: float

    def osc_norm(self, I) -> float:
        return math.sqrt(math.fsum(self.table[I[j], I[j + 1]] for j in range(len(I) - 1)))


def osc_tables(f: Signal, lam: float, n_max: int, ctx: KContext, backend: str | None = None,
               budget: int = SUPPORT_BUDGET) -> OscTables:
    tops, level = lacunary_levels(lam, n_max)
    shifts = orbit_shifts(int(tops[-1]), ctx)
    if int(shifts[-1]) > budget:
        raise BudgetExceeded("largest shift exceeds the support budget")
    vals = f.values.astype(np.complex128)
    use_numba = _accel.USE_NUMBA if backend is None else backend == "numba"
    kern = _osc_tables_numba if use_numba else _osc_tables_numpy
    table, maxsq, normsq = kern(np.ascontiguousarray(vals.real), np.ascontiguousarray(vals.imag),
                                shifts, level, 1.0 / tops.astype(np.float64), 1 << 14)
    return OscTables(table, float(maxsq), normsq, f.l2_norm)


def sample_index_sets(n_max: int, trials: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Random increasing I drawn without replacement from {0..n_max}."""
    out = []
    for _ in range(trials):
        size = int(rng.integers(2, n_max + 2))
        out.append(tuple(int(v) for v in np.sort(rng.choice(n_max + 1, size=size, replace=False))))
    return out


@dataclass(frozen=True)
class OscStats:
    max_osc_ratio: float
    maximal_ratio: float
    sup_average_ratio: float
    full_block_ratio: float
    worst_I: tuple[int, ...]
    trials: int


def osc_ratio_experiment(f: Signal, lam: float, n_max: int, trials: int, seed: int, ctx: KContext,
                         backend: str | None = None) -> OscStats:
    """Sampled sup over I of ||O^2_I(A_{lam^n} f)||_2 / ||f||_2 with the maximal-function ratio."""
    if f.l2_norm == 0:
        raise ValueError("f must be nonzero")
    tabs = osc_tables(f, lam, n_max, ctx, backend)
    rng = np.random.default_rng(seed)
    best, worst = -1.0, ()
    for I in sample_index_sets(n_max, trials, rng):
        v = tabs.osc_norm(I)
        if v > best:
            best, worst = v, I
    norm = f.l2_norm
    return OscStats(
        best / norm,
        math.sqrt(tabs.maximal_sq) / norm,
        math.sqrt(float(tabs.norms_sq.max())) / norm,
        tabs.osc_norm((0, n_max + 1)) / norm,
        worst,
        trials,
    )


# ---- frequency-side approximation ----------------------------------------------


def approx_operator(f: Signal, n: int, cfg: ArcConfig, ctx: KContext, grid: int | None = None) -> Signal:
    """T_Z[approximant at scale lambda^n] f on a periodic grid of ``grid`` frequencies."""
    W = len(f.values)
    T = math.floor(cfg.lam ** n + 1e-9)
    reach = W + T * floor_n_sqrtk(T, ctx)
    if grid is None:
        grid = 1 << max(4, math.ceil(math.log2(4 * reach)))
    if grid & (grid - 1) or grid < 4 * reach:
        raise GridTooSmall(f"grid {grid} must be a power of two >= {4 * reach}")
    pad = np.zeros(grid, dtype=np.complex128)
    pad[:W] = f.values
    # fhat(j/G) = sum_k f(k) e(k j/G)
    fhat = np.fft.ifft(pad) * grid
    xi = np.arange(grid) / grid
    xi = np.where(xi >= 0.5, xi - 1.0, xi)
    mult = approximant_many(xi, n, cfg, ctx)
    out = np.fft.fft(mult * fhat) / grid
    # positions y in [-G/4, 3G/4) relative to f.offset
    q = grid // 4
    vals = np.concatenate([out[-q:], out[:grid - q]])
    if not np.iscomplexobj(f.values):
        vals = vals.real if np.abs(vals.imag).max() <= 1e-12 * max(1.0, np.abs(vals).max()) else vals
    return Signal(f.offset - q, vals)


def approx_gap(f: Signal, n: int, cfg: ArcConfig, ctx: KContext, grid: int | None = None) -> float:
    """||A_{lambda^n} f - T_Z[approximant] f||_2 / ||f||_2."""
    exact = average_op(f, cfg.lam ** n + 1e-9, ctx)
    return difference_norm(exact, approx_operator(f, n, cfg, ctx, grid)) / f.l2_norm
