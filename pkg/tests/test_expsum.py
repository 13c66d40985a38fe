import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bracketsums import _accel
from bracketsums.errors import ArithmeticOverflow, EmptyInterval
from bracketsums.expsum import (
    BLOCK,
    PhaseSpec,
    bracket_identity_check,
    exp_sum,
    exp_sum_interval,
    exp_sum_prefix,
    floor_n_sqrtk,
    floor_table_np,
    phase_frac,
    segment_sums,
)
from bracketsums.qfield import make_context, make_quadrat

from oracles import exp_sum_center_mp, exp_sum_mp, floor_n_sqrtk_mp

BACKENDS = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])


def test_floor_examples(ctx2):
    assert floor_n_sqrtk(1, ctx2) == 1
    assert floor_n_sqrtk(10, ctx2) == 14
    assert floor_n_sqrtk(7, make_context(1, 2)) == 4


@given(st.integers(1, 10 ** 18), st.sampled_from([(2, 1), (3, 1), (1, 2), (5, 3), (7, 3)]))
def test_floor_matches_fixed_point(n, k):
    ctx = make_context(*k)
    f = floor_n_sqrtk(n, ctx)
    assert f == floor_n_sqrtk_mp(n, *k, bits=400)
    # f <= n sqrt k < f + 1, checked in integers: f^2 k2 <= n^2 k1 < (f+1)^2 k2
    assert f * f * k[1] <= n * n * k[0] < (f + 1) ** 2 * k[1]


def test_floor_overflow(ctx2):
    with pytest.raises(ArithmeticOverflow):
        floor_n_sqrtk(1 << 70, ctx2)


def test_floor_table_matches_scalar(ctx_any):
    n = np.arange(1, 20001, dtype=np.int64)
    table = floor_table_np(n, ctx_any.disc, ctx_any.k2)
    assert all(int(table[i]) == floor_n_sqrtk(int(n[i]), ctx_any) for i in range(0, 20000, 37))


def test_phase_frac_examples(ctx2):
    assert phase_frac(5, PhaseSpec.from_real(0), ctx2) == 0.0
    half = PhaseSpec.from_triple(1, 0, 2, ctx2)
    assert half.center.alpha == -0.5
    assert phase_frac(3, half, ctx2) == 0.0
    assert phase_frac(2, PhaseSpec.from_triple(0, 1, 1, ctx2), ctx2) == pytest.approx(4 * math.sqrt(2) - 5, abs=1e-14)


def test_exp_sum_trivial(ctx2):
    for N in (1, 7, 1000, 123457):
        assert exp_sum(N, PhaseSpec.from_real(0), ctx2).value == 1.0
    assert exp_sum(1, PhaseSpec.from_triple(1, 0, 4, ctx2), ctx2).value == pytest.approx(1j, abs=1e-15)


@pytest.mark.parametrize("backend", BACKENDS)
def test_exp_sum_oracle_n100(ctx2, backend):
    v = exp_sum(100, PhaseSpec.from_real(0.37), ctx2, backend).value
    ref = exp_sum_mp(100, Fraction(0.37))
    assert abs(v - ref) < 1e-12
    # frozen oracle value
    assert abs(v - (0.0662738586267344 - 0.011811645353922477j)) < 1e-12


@pytest.mark.parametrize("backend", BACKENDS)
def test_interval_oracle(ctx2, backend):
    I = (10 ** 6 + 1, 10 ** 6 + 10 ** 4)
    v = exp_sum_interval(I, PhaseSpec.from_triple(1, 1, 3, ctx2), ctx2, backend).value
    ref = exp_sum_center_mp(I[1], 1, 1, 3, lo=I[0])
    assert abs(v - ref) < 1e-12


def test_interval_errors(ctx2):
    assert exp_sum_interval((5, 5), PhaseSpec.from_real(0), ctx2).value == 1.0
    with pytest.raises(EmptyInterval):
        exp_sum_interval((6, 5), PhaseSpec.from_real(0.1), ctx2)
    N = 5000
    xi = PhaseSpec.from_real(0.211)
    assert exp_sum_interval((1, N), xi, ctx2).value == exp_sum(N, xi, ctx2).value


@pytest.mark.parametrize("seed", range(50))
def test_oracle_random_xi(seed):
    rng = np.random.default_rng(seed)
    ctx = make_context(*[(2, 1), (3, 1), (1, 2), (5, 3)][seed % 4])
    N = int(rng.integers(1, 10 ** 4))
    xi = float(rng.uniform(-0.5, 0.5))
    v = exp_sum(N, PhaseSpec.from_real(xi), ctx).value
    assert abs(v - exp_sum_mp(N, Fraction(xi), ctx.k1, ctx.k2)) < 1e-12


@given(st.floats(-0.5, 0.5, allow_nan=False), st.integers(1, 3000))
def test_conjugation_symmetry(xi, N):
    ctx = make_context(2)
    a = exp_sum(N, PhaseSpec.from_real(xi), ctx).value
    b = exp_sum(N, PhaseSpec.from_real(-xi), ctx).value
    assert abs(a - b.conjugate()) < 1e-12
    assert abs(a) <= 1 + 1e-12


@given(st.lists(st.integers(1, 4000), min_size=1, max_size=5), st.floats(-0.5, 0.5, allow_nan=False))
def test_partition_invariance(cuts, xi):
    ctx = make_context(3)
    N = 20000
    edges = sorted(set([0] + [c for c in cuts if c < N] + [N]))
    spec = PhaseSpec.from_real(xi)
    whole = exp_sum(N, spec, ctx).value
    parts = sum(exp_sum_interval((a + 1, b), spec, ctx).value * (b - a) for a, b in zip(edges, edges[1:])) / N
    assert abs(whole - parts) < 1e-12


def test_prefix_matches_individual(ctx2):
    spec = PhaseSpec.from_real(0.3141)
    Ns = [10, 1000, BLOCK, BLOCK + 3, 3 * BLOCK - 1]
    for r in exp_sum_prefix(Ns, spec, ctx2):
        assert abs(r.value - exp_sum(r.n_terms, spec, ctx2).value) < 1e-13


def test_center_mode_matches_oracle(ctx2):
    for a, b, q in [(1, 1, 2), (2, -3, 5), (0, 1, 1), (3, 4, 7)]:
        v = exp_sum(3000, PhaseSpec.from_triple(a, b, q, ctx2), ctx2).value
        assert abs(v - exp_sum_center_mp(3000, a, b, q)) < 1e-12


def test_center_with_offset(ctx2):
    t = Fraction(1, 10 ** 7)
    c = make_quadrat(1, 2, 3, ctx2)
    v = exp_sum(2000, PhaseSpec.from_center(c, t), ctx2).value
    ref = exp_sum_center_mp(2000, c.a - c.shift * c.q, c.b, c.q, t=t)
    assert abs(v - ref) < 1e-12


@pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba missing")
@pytest.mark.parametrize("xi", [0.37, -0.123456789, 1e-9, 0.49999])
def test_backends_agree(ctx_any, xi):
    spec = PhaseSpec.from_real(xi)
    starts = np.array([1, 1000, 77777, 300000], dtype=np.int64)
    stops = starts + np.array([999, 5000, BLOCK, 12345], dtype=np.int64)
    a = segment_sums(starts, stops, spec, ctx_any, backend="numba")
    b = segment_sums(starts, stops, spec, ctx_any, backend="numpy")
    assert np.max(np.abs(a - b)) < 1e-9


def test_bracket_identity(ctx2):
    assert bracket_identity_check(1, ctx2) < 1e-40
    assert bracket_identity_check(10 ** 5, ctx2) < 1e-30
    assert bracket_identity_check(7, make_context(1, 2)) < 1e-30
    for n in (3, 999, 10 ** 9):
        assert bracket_identity_check(n, ctx2) <= n * n * 2.0 ** (-192 + 6)


def test_est_phase_error_reported(ctx2):
    r = exp_sum(10 ** 5, PhaseSpec.from_real(0.25), ctx2)
    assert r.n_terms == 10 ** 5
    assert 0 <= r.est_phase_error < 1e-10
    assert abs(r.value) <= 1 + 2 * math.pi * r.est_phase_error
