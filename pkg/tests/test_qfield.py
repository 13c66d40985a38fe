import math
import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bracketsums.errors import ContextMismatch, EnumerationCapExceeded, PrecisionTooLow, RationalSqrt
from bracketsums.qfield import (
    cf_convergents,
    centers_in_box,
    liouville_floor,
    make_context,
    make_quadrat,
    min_separation,
    parse_k,
    separation_constant,
    torus_dist,
)


def test_context_sqrt2():
    ctx = make_context(2, 1, 192)
    assert (ctx.k1, ctx.k2) == (2, 1)
    assert ctx.cf == ((1,), (2,))
    assert ctx.max_partial_quotient == 2


def test_context_rejects_rational_roots():
    with pytest.raises(RationalSqrt):
        make_context(4, 1)
    with pytest.raises(RationalSqrt):
        make_context(8, 2)  # reduces to 4/1
    with pytest.raises(PrecisionTooLow):
        make_context(2, 1, 32)


def test_context_half():
    ctx = make_context(1, 2)
    assert ctx.sqrtk == pytest.approx(0.7071067811865476, abs=1e-15)
    # 0.7071... = [0; 1, 2, 2, 2, ...]
    assert ctx.cf == ((0, 1), (2,))


def test_context_five_thirds_and_gcd_reduction():
    assert make_context(5, 3).cf == ((1,), (3, 2))
    assert (make_context(10, 6).k1, make_context(10, 6).k2) == (5, 3)
    assert parse_k("5/3") == (5, 3) and parse_k("2") == (2, 1)


@pytest.mark.parametrize("k", [(2, 1), (3, 1), (1, 2), (5, 3), (7, 11)])
def test_fixed_point_accuracy(k):
    ctx = make_context(*k)
    P = ctx.precision_bits
    with mpmath.workprec(P + 64):
        exact = mpmath.sqrt(mpmath.mpf(k[0]) / k[1])
        assert abs(mpmath.mpf(ctx.sqrtk_fp) / 2 ** P - exact) <= mpmath.mpf(2) ** (-P)


@pytest.mark.parametrize("k", [(2, 1), (3, 1), (1, 2), (5, 3)])
def test_cf_convergents_approximate(k):
    ctx = make_context(*k)
    with mpmath.workprec(400):
        root = mpmath.sqrt(mpmath.mpf(k[0]) / k[1])
        for p, q in cf_convergents(ctx, 30):
            assert abs(root - mpmath.mpf(p) / q) <= mpmath.mpf(1) / q ** 2


def test_make_quadrat_examples(ctx2):
    z = make_quadrat(1, 0, 1, ctx2)
    assert z.triple == (0, 0, 1) and z.alpha == 0.0
    assert make_quadrat(0, 1, 1, ctx2).alpha == pytest.approx(0.4142135624, abs=1e-10)
    assert make_quadrat(1, 1, 2, ctx2).alpha == pytest.approx(0.2071067812, abs=1e-10)
    assert make_quadrat(0, 0, 7, ctx2).triple == (0, 0, 1)
    assert make_quadrat(2, 2, 4, ctx2).triple == (1, 1, 2)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 60))
def test_make_quadrat_normalised(a, b, q):
    ctx = make_context(2)
    x = make_quadrat(a, b, q, ctx)
    assert make_quadrat(*x.triple, ctx) == x
    assert math.gcd(math.gcd(x.a, x.b), x.q) == 1
    assert 0 <= x.a < x.q
    assert -0.5 <= x.alpha < 0.5
    # alpha is (a - l q + b sqrt k)/q
    with mpmath.workprec(300):
        exact = (x.a - x.shift * x.q + x.b * mpmath.sqrt(2)) / x.q
        assert abs(mpmath.mpf(x.alpha_fp) / 2 ** ctx.precision_bits - exact) <= mpmath.mpf(2) ** (-ctx.precision_bits + 8)
    # same real number modulo 1 as the input triple
    with mpmath.workprec(300):
        given_val = (a + b * mpmath.sqrt(2)) / q
        diff = given_val - exact
        assert abs(diff - mpmath.nint(diff)) < mpmath.mpf(2) ** -200


def test_torus_dist_examples(ctx2):
    x = make_quadrat(0, 1, 1, ctx2)
    assert torus_dist(x, x) == 0.0
    assert torus_dist(x, make_quadrat(1, 0, 2, ctx2)) == pytest.approx(0.0857864376, abs=1e-9)
    assert torus_dist(x, make_quadrat(0, -1, 1, ctx2)) == pytest.approx(0.1715728753, abs=1e-9)
    with pytest.raises(ContextMismatch):
        torus_dist(x, make_quadrat(0, 1, 1, make_context(3)))


def test_uniqueness_of_centers(ctx2):
    cs = sorted(centers_in_box(20, 20, ctx2), key=lambda c: c.alpha_fp)
    fps = [c.alpha_fp for c in cs]
    assert len(set(fps)) == len(fps)


def test_liouville_floor(ctx2):
    assert liouville_floor(ctx2, 1) == pytest.approx(1 / (2 * math.sqrt(2) + 1))
    assert liouville_floor(ctx2, 5) == pytest.approx(liouville_floor(ctx2, 1) / 25)
    gap = min(abs(math.sqrt(2) - p / 5) for p in range(0, 11))
    assert gap == pytest.approx(0.01421356, abs=1e-8)
    assert gap >= liouville_floor(ctx2, 5)


@pytest.mark.parametrize("k", [(2, 1), (3, 1), (1, 2), (5, 3)])
def test_liouville_floor_is_valid(k):
    ctx = make_context(*k)
    for q in range(1, 200):
        p = round(ctx.sqrtk * q)
        best = min(abs(ctx.sqrtk - (p + d) / q) for d in (-1, 0, 1))
        assert best >= liouville_floor(ctx, q)


def test_min_separation_small(ctx2):
    pair, d = min_separation(ctx2, 1, 1)
    # centers {0, +-(sqrt 2 - 1)}: the closest pair is sqrt2-1 and 1-sqrt2, at distance 3 - 2 sqrt 2
    assert d == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-12)
    assert {pair[0].triple, pair[1].triple} == {(0, 1, 1), (0, -1, 1)}


def test_separation_law(ctx2):
    c = separation_constant(ctx2)
    for X in range(1, 17):
        for Y in range(1, 17):
            _, d = min_separation(ctx2, X, Y)
            assert d >= c * X ** -3 * Y ** -1


def test_enumeration_cap(ctx2):
    with pytest.raises(EnumerationCapExceeded):
        centers_in_box(1000, 1000, ctx2, cap=1000)
