import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bracketsums import _accel
from bracketsums.errors import BudgetExceeded
from bracketsums.factors import (
    Method,
    _chirp_rows_numba,
    _chirp_rows_numpy,
    _double_sum_counts_numba,
    _double_sum_counts_numpy,
    fresnel_asymptotic,
    fresnel_F,
    fresnel_quadrature,
    fresnel_series,
    gauss_g,
    gauss_g_many,
    gauss_G,
    gauss_G_sup,
    v_factor,
    v_factor_direct,
    v_tilde,
)
from bracketsums.qfield import make_context

from oracles import fresnel_mp, gauss_g_naive, gauss_G_naive

F1 = 0.24412670303767037 - 0.17170783918184912j
# empirical sup of |G_k| sqrt(q) over q <= 256, |b| <= 32, gcd(a, b, q) = 1
G_SUP = 1.0 + 1e-12


def test_gauss_g_examples():
    for q in (1, 2, 9, 100):
        assert gauss_g(0, 0, q).value == 1
    assert abs(gauss_g(1, 0, 2).value) < 1e-15
    assert abs(gauss_g(1, 0, 5).value) == pytest.approx(5 ** -0.5, abs=1e-14)


@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(1, 40))
def test_gauss_g_matches_naive(a, b, q):
    assert abs(gauss_g(a, b, q).value - gauss_g_naive(a, b, q)) < 1e-12


def test_gauss_g_reduction_identity():
    bs = np.arange(-64, 65)
    worst = 0.0
    for c in range(1, 9):
        for q in range(1, 65):
            for a in range(q):
                if math.gcd(a, q) != 1:
                    continue
                lhs = gauss_g_many(c * a, bs, c * q)
                rhs = np.where(bs % c == 0, gauss_g_many(a, bs // c, q), 0.0)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst <= 1e-12


@given(st.integers(-30, 30), st.lists(st.integers(-50, 50), min_size=1, max_size=8), st.integers(1, 50))
def test_gauss_g_many_matches_scalar(a, bs, q):
    many = gauss_g_many(a, bs, q)
    assert all(abs(m - gauss_g(a, b, q).value) < 1e-13 for m, b in zip(many, bs))


def test_gauss_g_bound():
    # |g(a, 0, q)| sqrt(q) is 1 for odd q, sqrt 2 for q = 0 mod 4 and 0 for q = 2 mod 4
    bs = np.arange(-8, 9)
    sup_odd, sup_all = 0.0, 0.0
    for q in range(1, 513):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            vals = np.abs(gauss_g_many(a, bs, q)) * math.sqrt(q)
            sup_all = max(sup_all, float(vals.max()))
            if q % 2:
                sup_odd = max(sup_odd, float(vals[8]))
    assert sup_odd <= 1.01
    assert sup_all <= 1.01 * math.sqrt(2)


def test_gauss_G_examples(ctx2):
    for k in [(2, 1), (3, 1), (1, 2), (5, 3)]:
        assert gauss_G(0, 0, 1, make_context(*k)).value == pytest.approx(1.0, abs=1e-15)
    assert gauss_G(1, 0, 2, ctx2).value == pytest.approx(0.5, abs=1e-15)
    assert abs(gauss_G(1, 1, 3, ctx2).value) <= G_SUP * 3 ** -0.5


@pytest.mark.parametrize("k", [(2, 1), (3, 1), (1, 2), (5, 3)])
def test_gauss_G_paths_agree(k):
    ctx = make_context(*k)
    for q in list(range(1, 13)) + [31, 64]:
        for b in (-3, 0, 1, 4):
            for a in range(q):
                d = gauss_G(a, b, q, ctx, method="direct_sum")
                r = gauss_G(a, b, q, ctx, method="reduced_sum")
                assert d.method is Method.DIRECT_SUM and r.method is Method.REDUCED_SUM
                assert abs(d.value - r.value) < 1e-10


@pytest.mark.parametrize("k", [(2, 1), (1, 2), (5, 3)])
def test_gauss_G_matches_naive(k):
    ctx = make_context(*k)
    for a, b, q in [(1, 1, 3), (2, -1, 5), (0, 3, 4), (3, 2, 7)]:
        assert abs(gauss_G(a, b, q, ctx).value - gauss_G_naive(a, b, q, *k)) < 1e-12


def test_gauss_G_budget(ctx2):
    with pytest.raises(BudgetExceeded):
        gauss_G(1, 1, 5000, ctx2, method="direct_sum")
    assert abs(gauss_G(1, 1, 5000, ctx2).value) <= 1


def test_gauss_G_conjugation(ctx2):
    for a, b, q in [(1, 2, 5), (3, -1, 7), (2, 5, 9)]:
        assert abs(gauss_G(a, -b, q, ctx2).value - gauss_G(-a, b, q, ctx2).value.conjugate()) < 1e-13


@pytest.mark.parametrize("k", [(2, 1), (3, 1), (1, 2), (5, 3)])
def test_gauss_G_sup_small(k):
    sup, arg = gauss_G_sup(make_context(*k), 32, 8)
    assert math.isfinite(sup) and sup <= G_SUP


@pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba missing")
def test_gauss_kernels_backends_agree():
    A, B1, B2, M = 3, 5, 7, 60
    assert np.array_equal(_double_sum_counts_numba(A, B1, B2, M), _double_sum_counts_numpy(A, B1, B2, M))
    rng = np.random.default_rng(1)
    wre, wim = rng.standard_normal(40), rng.standard_normal(40)
    a = _chirp_rows_numba(3, 5, 40, 11, wre, wim)
    b = _chirp_rows_numpy(3, 5, 40, 11, wre, wim)
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-12)


def test_fresnel_examples():
    assert fresnel_F(0).value == 1
    v = fresnel_F(1.0)
    assert abs(v.value - F1) < 1e-12
    assert abs(fresnel_quadrature(1.0) - fresnel_series(1.0)) < 1e-10
    assert v.est_error <= 1e-10


@given(st.floats(-50, 50, allow_nan=False))
def test_fresnel_conjugation(xi):
    assert abs(fresnel_F(-xi).value - fresnel_F(xi).value.conjugate()) < 1e-13


@pytest.mark.parametrize("xi", [-4.0, -1.3, -0.01, 0.25, 0.5, 2.0, 3.99])
def test_fresnel_series_crosscheck(xi):
    assert abs(fresnel_quadrature(xi) - fresnel_series(xi)) < 1e-10


@pytest.mark.parametrize("xi", [7.5, 40.0, 333.3])
def test_fresnel_independent_quadrature(xi):
    assert abs(fresnel_F(xi).value - fresnel_mp(xi)) < 1e-10


@pytest.mark.parametrize("xi", [2.0 ** 14 + 1, 3e4, -1e5, 1e7])
def test_fresnel_asymptotic_switch(xi):
    v = fresnel_F(xi)
    assert v.method is Method.SERIES
    if abs(xi) < 2e5:
        assert abs(v.value - fresnel_quadrature(xi)) < 1e-10
    val, err = fresnel_asymptotic(2.0 ** 13)
    assert abs(val - fresnel_quadrature(2.0 ** 13)) < 1e-10


def test_fresnel_decay():
    xis = np.geomspace(1, 1e4, 300)
    assert max(abs(fresnel_F(x).value) * math.sqrt(x) for x in xis) <= 1.001


def test_v_factor_examples(ctx2):
    for N in (1, 10, 1e6):
        assert v_factor(N, 0, ctx2).value == 1
    N = 1000.0
    ts = np.geomspace(N ** -2, N ** -1, 200)
    c_decay = max(abs(v_factor(N, t, ctx2).value) * 2 ** 0.25 * math.sqrt(t * N * N) for t in ts)
    assert c_decay <= 1.0
    small = [t for t in np.geomspace(1e-12, 0.1, 100) / N ** 2]
    c_lin = max(abs(v_factor(N, t, ctx2).value - 1) / (math.sqrt(2) * t * N * N) for t in small)
    assert c_lin <= 2 * math.pi


def test_v_direct_identity(ctx2):
    rng = np.random.default_rng(7)
    for _ in range(40):
        N = float(rng.uniform(1, 200))
        t = float(rng.uniform(-1, 1)) * 10 ** float(rng.uniform(-6, -2))
        assert abs(v_factor(N, t, ctx2).value - v_factor_direct(N, t, ctx2).value) <= 1e-8


def test_v_tilde(ctx2):
    assert v_tilde(50, 0, ctx2).value == 1
    assert v_tilde(7, 0.75, ctx2).value == v_factor(7, -0.25, ctx2).value
    t = 0.5 - 1e-6
    assert abs(v_tilde(100, t, ctx2).value - v_factor(100, t, ctx2).value) < 1e-10
