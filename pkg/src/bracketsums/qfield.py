"""Exact arithmetic for frequencies (a + b*sqrt(k))/q in the real quadratic field Q(sqrt k)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContextMismatch, EnumerationCapExceeded, PrecisionTooLow, RationalSqrt

DEFAULT_PRECISION = 192
ENUMERATION_CAP = 2_000_000


@dataclass(frozen=True)
class KContext:
    """The parameter k = k1/k2 together with sqrt(k) to ``precision_bits`` bits.

    ``sqrtk_fp`` is floor(sqrt(k) * 2**precision_bits); ``cf`` holds the
    continued fraction of sqrt(k) as (preperiod digits, period digits).
    """

    k1: int
    k2: int
    precision_bits: int
    sqrtk_fp: int
    cf: tuple[tuple[int, ...], tuple[int, ...]]
    max_partial_quotient: int

    @property
    def disc(self) -> int:
        # sqrt(k) = sqrt(k1 * k2) / k2
        return self.k1 * self.k2

    @property
    def sqrtk(self) -> float:
        return math.sqrt(self.k1 / self.k2)

    @property
    def label(self) -> str:
        return str(self.k1) if self.k2 == 1 else f"{self.k1}/{self.k2}"

    def same_field(self, other: "KContext") -> bool:
        return (self.k1, self.k2, self.precision_bits) == (other.k1, other.k2, other.precision_bits)


def _is_square(m: int) -> bool:
    return m >= 0 and math.isqrt(m) ** 2 == m


def floor_surd(c: int, d: int, disc: int) -> int:
    """Exact floor of c + d*sqrt(disc) for a non-square ``disc``."""
    if d == 0:
        return c
    root = math.isqrt(d * d * disc)
    return c + root if d > 0 else c - root - 1


def floor_lin(c: int, d: int, e: int, ctx: KContext) -> int:
    """Exact floor of (c + d*sqrt(k)) / e for e > 0."""
    # (c + d sqrt(k1 k2)/k2) / e = (c k2 + d sqrt(D)) / (e k2)
    return floor_surd(c * ctx.k2, d, ctx.disc) // (e * ctx.k2)


def _surd_cf(disc: int, den: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Continued fraction of sqrt(disc)/den by the (P, Q) surd recurrence."""
    root = math.isqrt(disc)
    p, q = 0, den
    seen: dict[tuple[int, int], int] = {}
    digits: list[int] = []
    while (p, q) not in seen:
        seen[(p, q)] = len(digits)
        if q > 0:
            a = (p + root) // q
        else:
            a = -((p + root) // (-q)) - 1
        digits.append(a)
        p = a * q - p
        q = (disc - p * p) // q
    start = seen[(p, q)]
    return tuple(digits[:start]), tuple(digits[start:])


def make_context(k1: int, k2: int = 1, precision_bits: int = DEFAULT_PRECISION) -> KContext:
    if k1 < 1 or k2 < 1:
        raise ValueError("k1 and k2 must be positive integers")
    if precision_bits < 64:
        raise PrecisionTooLow(f"precision_bits={precision_bits} is below 64")
    g = math.gcd(k1, k2)
    k1, k2 = k1 // g, k2 // g
    if _is_square(k1 * k2):
        raise RationalSqrt(f"sqrt({k1}/{k2}) is rational")
    sqrtk_fp = math.isqrt(k1 * k2 << (2 * precision_bits)) // k2
    pre, period = _surd_cf(k1 * k2, k2)
    return KContext(k1, k2, precision_bits, sqrtk_fp, (pre, period), max(pre + period))


def parse_k(text: str) -> tuple[int, int]:
    """Parse ``"2"`` or ``"5/3"`` into (k1, k2)."""
    frac = Fraction(text.strip())
    return frac.numerator, frac.denominator


def cf_digits(ctx: KContext, count: int) -> list[int]:
    pre, period = ctx.cf
    out = list(pre[:count])
    i = 0
    while len(out) < count:
        out.append(period[i % len(period)])
        i += 1
    return out


def cf_convergents(ctx: KContext, count: int) -> list[tuple[int, int]]:
    """First ``count`` convergents p_n/q_n of sqrt(k)."""
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    out = []
    for a in cf_digits(ctx, count):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append((p, q))
    return out


@dataclass(frozen=True)
class QuadRat:
    """A normalized frequency (a + b sqrt k)/q with a in {0..q-1}, gcd(a,b,q) = 1.

    ``shift`` is the integer l with alpha = (a - l q + b sqrt k)/q in [-1/2, 1/2);
    ``alpha_fp`` is floor(alpha * 2**P).
    """

    a: int
    b: int
    q: int
    shift: int
    alpha_fp: int
    ctx: KContext = field(repr=False, compare=False)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.q)

    @property
    def alpha(self) -> float:
        return self.alpha_fp / (1 << self.ctx.precision_bits)

    @property
    def alpha_exact_num(self) -> int:
        """a - l q, the rational part numerator of alpha."""
        return self.a - self.shift * self.q

    def __eq__(self, other):
        if not isinstance(other, QuadRat):
            return NotImplemented
        return self.triple == other.triple and self.ctx.same_field(other.ctx)

    def __hash__(self):
        return hash((self.triple, self.ctx.k1, self.ctx.k2))


def _alpha_fixed(num: int, b: int, q: int, ctx: KContext) -> int:
    """floor(((num + b sqrt k)/q) * 2**P), exact."""
    scale = 1 << ctx.precision_bits
    if b == 0:
        return (num * scale) // q
    # floor((num*2^P + b*sqrt(k)*2^P)/q) = floor((num*2^P*k2 + b*sqrt(D*4^P))/(q*k2))
    return floor_surd(num * scale * ctx.k2, b, ctx.disc << (2 * ctx.precision_bits)) // (q * ctx.k2)


def make_quadrat(a: int, b: int, q: int, ctx: KContext) -> QuadRat:
    if q < 1:
        raise ValueError("q must be positive")
    a %= q
    g = math.gcd(math.gcd(a, b), q)
    a, b, q = a // g, b // g, q // g
    # l = floor((a + b sqrt k)/q + 1/2) puts alpha in [-1/2, 1/2)
    shift = floor_lin(2 * a + q, 2 * b, 2 * q, ctx)
    return QuadRat(a, b, q, shift, _alpha_fixed(a - shift * q, b, q, ctx), ctx)


def _check_ctx(x: QuadRat, y: QuadRat) -> None:
    if not x.ctx.same_field(y.ctx):
        raise ContextMismatch("frequencies belong to different contexts")


def torus_dist(x: QuadRat, y: QuadRat) -> float:
    _check_ctx(x, y)
    if x.triple == y.triple:
        return 0.0
    P = x.ctx.precision_bits
    d = (x.alpha_fp - y.alpha_fp) % (1 << P)
    return min(d, (1 << P) - d) / (1 << P)


def liouville_floor(ctx: KContext, q: int) -> float:
    """Lower bound for min_p |sqrt k - p/q| from the minimal polynomial k2 x^2 - k1."""
    return 1.0 / (ctx.k2 * q * q * (2.0 * ctx.sqrtk + 1.0))


def separation_constant(ctx: KContext) -> float:
    """c with ||alpha - alpha'|| > c X^-3 Y^-1 for distinct centers, q <= X, |b| <= Y."""
    return liouville_floor(ctx, 1) / 2.0


def iter_triples(X: int, Y: int):
    """All (a, b, q) with q <= X, |b| <= Y, 0 <= a < q and gcd(a, b, q) = 1."""
    for q in range(1, X + 1):
        for b in range(-Y, Y + 1):
            gb = math.gcd(b, q)
            for a in range(q):
                if math.gcd(a, gb) == 1:
                    yield a, b, q


def centers_in_box(X: int, Y: int, ctx: KContext, cap: int = ENUMERATION_CAP) -> list[QuadRat]:
    if X * (2 * Y + 1) * (X + 1) // 2 > cap:
        raise EnumerationCapExceeded(f"about {X * X * Y} centers exceeds cap {cap}")
    return [make_quadrat(a, b, q, ctx) for a, b, q in iter_triples(X, Y)]


def min_separation(ctx: KContext, X: int, Y: int, cap: int = ENUMERATION_CAP):
    """Closest distinct pair of centers with q <= X, |b| <= Y and their torus distance."""
    centers = sorted(centers_in_box(X, Y, ctx, cap), key=lambda c: c.alpha_fp)
    if len(centers) < 2:
        return None, math.inf
    full = 1 << ctx.precision_bits
    best = None
    for i, c in enumerate(centers):
        nxt = centers[(i + 1) % len(centers)]
        gap = (nxt.alpha_fp - c.alpha_fp) % full
        gap = min(gap, full - gap)
        if best is None or gap < best[0]:
            best = (gap, (c, nxt))
    return best[1], best[0] / full
