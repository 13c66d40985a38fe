"""Major and minor arcs, the frequency classes P_{s,t}, bump profiles and the approximant."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousClassification, EnumerationCapExceeded
from .factors import fresnel_F, gauss_G, torus_center, v_tilde
from .qfield import ENUMERATION_CAP, KContext, QuadRat, centers_in_box, make_quadrat

_TOL = 1e-9


def _floor_real(x: float) -> int:
    """floor(x), treating values within a relative 1e-9 of an integer as that integer."""
    r = round(x)
    if abs(x - r) <= _TOL * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def _ints_in(lo: float, hi: float) -> range:
    """Integers m with lo < m <= hi (boundaries snapped as in :func:`_floor_real`)."""
    return range(_floor_real(lo) + 1, _floor_real(hi) + 1)


@dataclass(frozen=True)
class ArcConfig:
    gamma: float = 1 / 20
    gamma_prime: float = 1 / 20
    lam: float = 2.0
    c0_surrogate: float = 0.25

    def __post_init__(self):
        if not 0 < self.gamma < 0.1 + 1e-15:
            raise ValueError("gamma must lie in (0, 1/10)")
        if not 0 < self.gamma_prime < 0.1 + 1e-15:
            raise ValueError("gamma_prime must lie in (0, 1/10)")
        if not 1 < self.lam <= 2:
            raise ValueError("lambda must lie in (1, 2]")
        if self.c0_surrogate <= 0:
            raise ValueError("c0_surrogate must be positive")

    @classmethod
    def minor_arc_defaults(cls, c0: float = 0.25, lam: float = 2.0) -> "ArcConfig":
        """gamma' = 1/20 and gamma = min(1/20, c0/40)."""
        return cls(min(1 / 20, c0 / 40), 1 / 20, lam, c0)

    @property
    def minor_arc_admissible(self) -> bool:
        return self.gamma / self.gamma_prime < self.c0_surrogate

    def box(self, N: float) -> int:
        """floor(N^gamma), the q and |b| cap of the arcs at scale N."""
        return _floor_real(N ** self.gamma)

    def major_width(self, N: float) -> float:
        return N ** (-2 + self.gamma_prime)

    def wide_width(self, N: float) -> float:
        return N ** (-1 + self.gamma)


def enumerate_centers(N: float, cfg: ArcConfig, ctx: KContext, cap: int = ENUMERATION_CAP) -> list[QuadRat]:
    Q = cfg.box(N)
    if Q < 1:
        return []
    return centers_in_box(Q, Q, ctx, cap)


class ArcKind(str, enum.Enum):
    MAJOR = "major"
    MINOR1 = "minor1"
    MINOR2 = "minor2"


@dataclass(frozen=True)
class ArcLabel:
    kind: ArcKind
    center: QuadRat | None = None
    t: float | None = None


class CenterSet:
    """Centers sorted by position on the torus for nearest-center lookups."""

    def __init__(self, centers: list[QuadRat]):
        self.centers = sorted(centers, key=lambda c: c.alpha_fp)
        self.alphas = np.array([c.alpha for c in self.centers])

    def __len__(self):
        return len(self.centers)

    def nearest(self, xis: np.ndarray, width: float):
        """(index of nearest center, signed offset xi - alpha, count within width)."""
        xis = np.atleast_1d(np.asarray(xis, dtype=np.float64))
        n = len(self.alphas)
        pos = np.searchsorted(self.alphas, xis)
        best_idx = np.zeros(xis.shape, dtype=np.int64)
        best_t = np.full(xis.shape, np.inf)
        within = np.zeros(xis.shape, dtype=np.int64)
        for off in (-2, -1, 0, 1):
            idx = (pos + off) % n
            t = xis - self.alphas[idx]
            t = t - np.floor(t + 0.5)
            better = np.abs(t) < np.abs(best_t)
            best_idx = np.where(better, idx, best_idx)
            best_t = np.where(better, t, best_t)
            within += (np.abs(t) <= width).astype(np.int64)
        if n < 4:
            # tiny sets: neighbour offsets wrap onto the same centers
            within = np.zeros(xis.shape, dtype=np.int64)
            for a in self.alphas:
                t = xis - a
                within += (np.abs(t - np.floor(t + 0.5)) <= width).astype(np.int64)
        return best_idx, best_t, within


@functools.lru_cache(maxsize=64)
def _center_set(Q: int, ctx: KContext) -> CenterSet:
    return CenterSet(centers_in_box(Q, Q, ctx))


def classify_grid(xis, N: float, cfg: ArcConfig, ctx: KContext):
    """Vectorised classification: (kind codes 0=major 1=minor2 2=minor1, center index, t, CenterSet)."""
    cs = _center_set(cfg.box(N), ctx)
    xis = np.atleast_1d(np.asarray(xis, dtype=np.float64))
    if len(cs) == 0:
        return np.full(xis.shape, 2), np.zeros(xis.shape, dtype=np.int64), np.full(xis.shape, np.nan), cs
    idx, t, within = cs.nearest(xis, cfg.wide_width(N))
    if (within > 1).any():
        bad = float(xis[np.argmax(within > 1)])
        raise AmbiguousClassification(f"xi={bad} lies in two widened arcs at N={N}")
    d = np.abs(t)
    kind = np.where(d <= cfg.major_width(N), 0, np.where(d <= cfg.wide_width(N), 1, 2))
    return kind, idx, t, cs


def classify_frequency(xi: float, N: float, cfg: ArcConfig, ctx: KContext) -> ArcLabel:
    kind, idx, t, cs = classify_grid([xi], N, cfg, ctx)
    k = int(kind[0])
    if k == 2:
        return ArcLabel(ArcKind.MINOR1)
    return ArcLabel(ArcKind.MAJOR if k == 0 else ArcKind.MINOR2, cs.centers[int(idx[0])], float(t[0]))


def arcs_disjoint(N: float, cfg: ArcConfig, ctx: KContext) -> bool:
    """True when distinct centers at scale N are more than 2 N^(-1+gamma) apart."""
    cs = _center_set(cfg.box(N), ctx)
    if len(cs) < 2:
        return True
    full = 1 << ctx.precision_bits
    fps = [c.alpha_fp for c in cs.centers]
    gaps = [(fps[(i + 1) % len(fps)] - fps[i]) % full for i in range(len(fps))]
    sep = min(min(g, full - g) for g in gaps) / full
    return sep > 2 * cfg.wide_width(N)


def disjointness_threshold(cfg: ArcConfig, ctx: KContext, n_max: int) -> int | None:
    """Smallest n with arcs disjoint at every lambda^m, n <= m <= n_max."""
    threshold = None
    for n in range(n_max, -1, -1):
        if not arcs_disjoint(cfg.lam ** n, cfg, ctx):
            break
        threshold = n
    return threshold


# ---- frequency classes ------------------------------------------------------


@dataclass(frozen=True)
class FreqClass:
    s: int
    t: int
    members: tuple[QuadRat, ...]
    m_st: float


def _b_range(t: int, lam: float) -> list[int]:
    if t == 0:
        return [-1, 0, 1]
    pos = list(_ints_in(lam ** (t - 1), lam ** t))
    return sorted([-b for b in pos] + pos)


def freq_class(s: int, t: int, cfg: ArcConfig, ctx: KContext) -> FreqClass:
    members = []
    for q in _ints_in(cfg.lam ** (s - 1), cfg.lam ** s):
        for b in _b_range(t, cfg.lam):
            for a in range(q):
                if math.gcd(math.gcd(a, b), q) == 1:
                    members.append(make_quadrat(a, b, q, ctx))
    return FreqClass(s, t, tuple(members), max(s, t) / cfg.gamma)


@functools.lru_cache(maxsize=256)
def freq_classes(n: int, cfg: ArcConfig, ctx: KContext, cap: int = ENUMERATION_CAP) -> tuple[FreqClass, ...]:
    """P_{s,t} for 0 <= s, t <= gamma n."""
    top = _floor_real(cfg.gamma * n)
    if cfg.lam ** (3 * top) > cap:
        raise EnumerationCapExceeded(f"classes up to lambda^{top} exceed the cap")
    return tuple(freq_class(s, t, cfg, ctx) for s in range(top + 1) for t in range(top + 1))


def class_members(n: int, cfg: ArcConfig, ctx: KContext) -> list[QuadRat]:
    return [m for cls in freq_classes(n, cfg, ctx) for m in cls.members]


# ---- bumps ------------------------------------------------------------------


class BumpFamily(str, enum.Enum):
    ETA = "eta"
    PSI = "psi"
    CHI = "chi"


@dataclass(frozen=True)
class BumpSpec:
    family: BumpFamily
    lam: float = 2.0

    @property
    def inner(self) -> float:
        return {"eta": 1.0, "psi": 1 / (4 * self.lam), "chi": 0.0}[BumpFamily(self.family).value]

    @property
    def outer(self) -> float:
        return {"eta": self.lam, "psi": 0.25, "chi": 0.5}[BumpFamily(self.family).value]


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, built from exp(-1/u)."""
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        h0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        h1 = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        out = h0 / (h0 + h1)
    return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, out))


def bump(spec: BumpSpec, x):
    """Bump value in [0, 1]; exactly 1 on the inner interval and 0 outside the outer one."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    fam = BumpFamily(spec.family)
    if fam is BumpFamily.CHI:
        # triangle frequency profile of the Fejer kernel, 1 at the origin
        out = np.maximum(0.0, 1.0 - 2.0 * ax)
    else:
        lo, hi = spec.inner, spec.outer
        out = np.where(ax <= lo, 1.0, np.where(ax >= hi, 0.0, smooth_step((hi - ax) / (hi - lo))))
    return float(out) if np.ndim(out) == 0 else out


def chi_position_profile(x):
    """Inverse transform of the triangle profile: (1/2) sinc^2(x/2), nonnegative and at most 1/2."""
    return 0.5 * np.sinc(np.asarray(x, dtype=np.float64) / 2.0) ** 2


# ---- approximant and Pi multipliers ------------------------------------------


@functools.lru_cache(maxsize=8192)
def major_coefficient(center: QuadRat) -> complex:
    """g_k(a, b, q) = G_k(a, b, q) F(b/(2q))."""
    ctx = center.ctx
    return gauss_G(center.a, center.b, center.q, ctx).value * fresnel_F(center.b / (2 * center.q)).value


def approximant_many(xis, n: int, cfg: ArcConfig, ctx: KContext) -> np.ndarray:
    """The approximant multiplier at each xi of an array."""
    xis = np.atleast_1d(np.asarray(xis, dtype=np.float64))
    out = np.zeros(xis.shape, dtype=np.complex128)
    N = cfg.lam ** n
    scale = cfg.lam ** ((2 - cfg.gamma_prime) * n)
    eta = BumpSpec(BumpFamily.ETA, cfg.lam)
    for c in class_members(n, cfg, ctx):
        t = xis - c.alpha
        t = t - np.floor(t + 0.5)
        w = bump(eta, scale * np.abs(t))
        hit = np.nonzero(w)[0]
        if len(hit) == 0:
            continue
        coef = major_coefficient(c)
        for i in hit:
            out[i] += coef * v_tilde(N, float(t[i]), ctx).value * w[i]
    return out


def approximant(xi: float, n: int, cfg: ArcConfig, ctx: KContext) -> complex:
    return complex(approximant_many([xi], n, cfg, ctx)[0])


class HKind(str, enum.Enum):
    V_TILDE = "v_tilde"
    PSI_N = "psi_n"
    CHI_N = "chi_n"
    ONE = "one"


def _h_values(h: HKind, t: np.ndarray, index: int, cfg: ArcConfig, ctx: KContext) -> np.ndarray:
    if h is HKind.ONE:
        return np.ones(t.shape, dtype=np.complex128)
    if h is HKind.V_TILDE:
        N = cfg.lam ** index
        return np.array([v_tilde(N, float(x), ctx).value for x in t], dtype=np.complex128)
    fam = BumpFamily.PSI if h is HKind.PSI_N else BumpFamily.CHI
    return np.asarray(bump(BumpSpec(fam, cfg.lam), cfg.lam ** (2 * index) * t), dtype=np.complex128)


def pi_multiplier_many(xis, cls: FreqClass, n: int, h: str = "one", rho: str = "eta", g: str = "one",
                       h_index: int | None = None, cfg: ArcConfig | None = None,
                       ctx: KContext | None = None) -> np.ndarray:
    """Pi^{g,h,rho}_{s,t,<=n}: sum over the class of g(a,b,q) h(xi - alpha) rho(lambda^{(2-gamma')n} ||xi - alpha||).

    ``g`` is ``"one"`` or ``"gk"`` (G_k F(b/2q)); ``h`` one of v_tilde, psi_n, chi_n, one
    evaluated at scale ``h_index`` (defaults to n); ``rho`` is ``"eta"`` or ``"sqrt_eta"``.
    """
    cfg = cfg or ArcConfig()
    h = HKind(h)
    h_index = n if h_index is None else h_index
    xis = np.atleast_1d(np.asarray(xis, dtype=np.float64))
    out = np.zeros(xis.shape, dtype=np.complex128)
    scale = cfg.lam ** ((2 - cfg.gamma_prime) * n)
    eta = BumpSpec(BumpFamily.ETA, cfg.lam)
    for c in cls.members:
        t = xis - c.alpha
        t = t - np.floor(t + 0.5)
        w = bump(eta, scale * np.abs(t))
        if rho == "sqrt_eta":
            w = np.sqrt(w)
        elif rho != "eta":
            raise ValueError(f"unknown rho {rho!r}")
        hit = np.nonzero(w)[0]
        if len(hit) == 0:
            continue
        weight = 1.0 if g == "one" else major_coefficient(c)
        out[hit] += weight * _h_values(h, t[hit], h_index, cfg, ctx) * w[hit]
    return out


def pi_multiplier(xi: float, cls: FreqClass, n: int, h: str = "one", rho: str = "eta", g: str = "one",
                  h_index: int | None = None, cfg: ArcConfig | None = None, ctx: KContext | None = None) -> complex:
    return complex(pi_multiplier_many([xi], cls, n, h, rho, g, h_index, cfg, ctx)[0])
