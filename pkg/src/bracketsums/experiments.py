"""Rate sweeps shared by the command line and the acceptance suite."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arcs import ArcConfig, approximant_many, class_members, classify_grid, enumerate_centers, major_coefficient
from .equidist_heis import equidist_counts, max_deviation
from .expsum import PhaseSpec, exp_sum_prefix
from .factors import v_factor
from .fitting import FitResult, fit_geometric_decay, fit_power_law
from .qfield import KContext, iter_triples, make_quadrat

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def canonical_triples(q_max: int, b_max: int):
    """(a, b, q) with q <= q_max, |b| <= b_max, 0 <= a < q and gcd(a, b, q) = 1."""
    return list(iter_triples(q_max, b_max))


def major_shape(q: int, b: int, size: int) -> float:
    return q * q * (1 + abs(b)) * (1 + math.log(size)) / math.sqrt(size)


@dataclass(frozen=True)
class MajorSweep:
    rows: tuple[dict, ...]
    fit: FitResult
    constant: float
    constant_early: float
    constant_late: float


def major_sweep(ctx: KContext, q_max: int = 4, b_max: int = 4, js=range(10, 21), backend=None) -> MajorSweep:
    """Errors |E_{n<=2^j} e(alpha n floor(n sqrt k)) - G F(b/2q)| over all small centers."""
    js = list(js)
    Ns = [1 << j for j in js]
    rows = []
    for a, b, q in canonical_triples(q_max, b_max):
        c = make_quadrat(a, b, q, ctx)
        coef = major_coefficient(c)
        res = exp_sum_prefix(Ns, PhaseSpec.from_center(c), ctx, backend)
        for j, r in zip(js, res):
            err = abs(r.value - coef)
            shape = major_shape(q, b, r.n_terms)
            rows.append({"a": a, "b": b, "q": q, "j": j, "error": err, "shape": shape, "ratio": err / shape})
    worst = [max(r["error"] for r in rows if r["j"] == j) for j in js]
    fit = fit_power_law(Ns, worst)
    half = js[len(js) // 2]
    early = max(r["ratio"] for r in rows if r["j"] < half)
    late = max(r["ratio"] for r in rows if r["j"] >= half)
    return MajorSweep(tuple(rows), fit, max(early, late), early, late)


def perturbed_sweep(ctx: KContext, centers, ts, Ns, kappas=(0.25, 0.5, 0.75), backend=None) -> list[dict]:
    """|m_N(alpha + t) - G F(b/2q) V_N(t)| against the three-term shape at each kappa."""
    rows = []
    for a, b, q in centers:
        c = make_quadrat(a, b, q, ctx)
        coef = major_coefficient(c)
        for t in ts:
            res = exp_sum_prefix(Ns, PhaseSpec.from_center(c, t), ctx, backend)
            for r in res:
                N = r.n_terms
                err = abs(r.value - coef * v_factor(N, t, ctx).value)
                shapes = {f"shape_k{kap}": N ** (kap - 1) + abs(t) * N ** (1 + kap)
                          + q * q * (1 + abs(b)) * (1 + math.log(N)) * N ** (-kap / 2) for kap in kappas}
                rows.append({"a": a, "b": b, "q": q, "t": t, "N": N, "error": err,
                             "best_shape": min(shapes.values()), **shapes})
    return rows


def running_sup(values) -> list[float]:
    """out[i] = max(values[i:])."""
    out, cur = [], -math.inf
    for v in reversed(list(values)):
        cur = max(cur, v)
        out.append(cur)
    return out[::-1]


@dataclass(frozen=True)
class MinorScan:
    xis: tuple[float, ...]
    sup_by_j: tuple[float, ...]
    running: tuple[float, ...]
    fit: FitResult
    js: tuple[int, ...]


def sample_minor(n_samples: int, js, cfg: ArcConfig, ctx: KContext, rng: np.random.Generator) -> np.ndarray:
    """Uniform frequencies that avoid the major arcs at every scale 2^j."""
    kept: list[float] = []
    while len(kept) < n_samples:
        cand = rng.uniform(-0.5, 0.5, size=2 * n_samples)
        ok = np.ones(cand.shape, dtype=bool)
        for j in js:
            kind, _, _, _ = classify_grid(cand, float(1 << j), cfg, ctx)
            ok &= kind != 0
        kept.extend(float(x) for x in cand[ok])
    return np.array(kept[:n_samples])


def minor_scan(ctx: KContext, cfg: ArcConfig, n_samples: int = 200, js=range(10, 23), seed: int = 0,
               backend=None) -> MinorScan:
    js = list(js)
    Ns = [1 << j for j in js]
    xis = sample_minor(n_samples, js, cfg, ctx, np.random.default_rng(seed))
    table = np.array([[abs(r.value) for r in exp_sum_prefix(Ns, PhaseSpec.from_real(float(x)), ctx, backend)]
                      for x in xis])
    sup = table.max(axis=0)
    run = running_sup(sup)
    fit = fit_power_law(Ns, run)
    return MinorScan(tuple(float(x) for x in xis), tuple(float(v) for v in sup), tuple(run),
                     FitResult(-fit.exponent, fit.constant, fit.r_squared, fit.points), tuple(js))


EDGE_OFFSETS = (1e-9, -1e-8, 1e-7, -3e-6, 2e-5, -1e-4)


def probe_grid(n_points: int, centers, offsets=(0.0,)) -> np.ndarray:
    """Golden-shifted uniform grid plus probes at the given centers shifted by ``offsets``."""
    probes = [c.alpha + d for c in centers for d in offsets]
    probes = [p - math.floor(p + 0.5) for p in probes][: n_points // 4]
    m = n_points - len(probes)
    base = -0.5 + (np.arange(m) + GOLDEN) / m
    return np.concatenate([base, np.array(probes)])


@dataclass(frozen=True)
class GapSweep:
    ns: tuple[int, ...]
    gaps: tuple[float, ...]
    fit: FitResult


def approximant_gap_sweep(ctx: KContext, cfg: ArcConfig, ns=range(8, 21), n_points: int = 1000,
                          offsets=(0.0,), backend=None) -> GapSweep:
    """max over a frequency grid of |m_{lam^n}(xi) - approximant(xi, n)|.

    Probes sit on centers that every approximant of the sweep resolves. Passing
    EDGE_OFFSETS probes the eta cutoff, where the gap only decays like
    lam^(-gamma' n / 2).
    """
    ns = list(ns)
    xis = probe_grid(n_points, class_members(ns[0], cfg, ctx), offsets)
    Ns = [math.floor(cfg.lam ** n + 1e-9) for n in ns]
    mvals = np.array([[r.value for r in exp_sum_prefix(Ns, PhaseSpec.from_real(float(x)), ctx, backend)]
                      for x in xis])
    gaps = [float(np.max(np.abs(mvals[:, i] - approximant_many(xis, n, cfg, ctx)))) for i, n in enumerate(ns)]
    return GapSweep(tuple(ns), tuple(gaps), fit_geometric_decay(ns, gaps, cfg.lam))


@dataclass(frozen=True)
class EquidistSweep:
    rows: tuple[dict, ...]
    constants: dict


def equidist_sweep(ctx: KContext, cases=((2, 4), (3, 8), (5, 5)), js=range(10, 23)) -> EquidistSweep:
    """C_j = max deviation * |I| / (1 + log |I|) for I = [1, 2^j]."""
    rows, consts = [], {}
    for q, D in cases:
        cs = []
        for j in js:
            size = 1 << j
            cells = equidist_counts((1, size), q, D, ctx)
            dev = max_deviation(cells)
            c = dev * size / (1 + math.log(size))
            cs.append(c)
            rows.append({"q": q, "D": D, "j": j, "max_deviation": dev, "C": c,
                         "total": sum(x.count for x in cells)})
        consts[f"{q},{D}"] = (min(cs), max(cs))
    return EquidistSweep(tuple(rows), consts)


def center_count(N: float, cfg: ArcConfig, ctx: KContext) -> int:
    return len(enumerate_centers(N, cfg, ctx))


def closed_form_center_count(N: float, cfg: ArcConfig) -> int:
    """Centers in the box Q = floor(N^gamma) when Q = 1: b in {-1, 0, 1}, q = 1, a = 0."""
    Q = cfg.box(N)
    if Q != 1:
        raise ValueError("closed form only covers N^gamma < 2")
    return 3

