import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from miopbd.errors import NonTerminating, PoleError
from miopbd.specfun import (
    QContext, QPow, SeriesSpec, compensated_sum, hyp_pfq, hypergeometric_terminating, pochhammer,
    pochhammer_real, qhyp_rphis, qpochhammer, qpochhammer_inf, qpochhammer_real,
)

# values frozen from a 40-digit mpmath evaluation
GAMMA_RATIO_1p5_0p5 = 1.1283791670955125739
QPOCH_REAL_0p3_0p5_1p5 = 0.63572439046255409002
HAHN_3F2 = -0.11666666666666666667
QPOCH_INF_0p05_0p5 = 0.90328603072359042727


def test_pochhammer_examples():
    assert pochhammer(7.3, 0) == 1.0
    assert pochhammer(2, 3) == 24.0
    assert pochhammer(0.5, 2) == 0.75


def test_pochhammer_real_examples():
    assert pochhammer_real(3, 0) == pytest.approx(1.0, rel=1e-15)
    assert pochhammer_real(2, 2) == pytest.approx(6.0, rel=1e-14)
    assert pochhammer_real(1.5, 0.5) == pytest.approx(GAMMA_RATIO_1p5_0p5, rel=1e-13)


def test_pochhammer_real_pole():
    with pytest.raises(PoleError):
        pochhammer_real(-2.0, 0.5)


@pytest.mark.parametrize("a", [0.5, 1.2, 3.7])
def test_pochhammer_real_matches_integer(a):
    for n in range(21):
        assert pochhammer_real(a, n) == pytest.approx(pochhammer(a, n), rel=1e-12)


def test_qpochhammer_examples():
    assert qpochhammer(0.4, 0.7, 0) == 1.0
    assert qpochhammer(1.0, 0.7, 3) == 0.0
    assert qpochhammer(0.5, 0.5, 2) == pytest.approx(0.375, rel=1e-15)
    ctx = QContext(0.5)
    assert qpochhammer_real(0.3, ctx, 0) == pytest.approx(1.0, rel=1e-15)
    assert qpochhammer_real(0.3, ctx, 2) == pytest.approx(0.595, rel=1e-13)
    assert qpochhammer_real(0.3, ctx, 1.5) == pytest.approx(QPOCH_REAL_0p3_0p5_1p5, rel=1e-13)
    assert qpochhammer_inf(0.05, ctx) == pytest.approx(QPOCH_INF_0p05_0p5, rel=1e-14)


@pytest.mark.parametrize("a", [0.5, 1.2, 3.7])
def test_qpochhammer_real_matches_integer(a):
    ctx = QContext(0.7)
    for n in range(21):
        assert qpochhammer_real(a, ctx, n) == pytest.approx(qpochhammer(a, 0.7, n), rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(0, 5), a=st.floats(-0.9, 0.9), q=st.floats(0.1, 0.9))
def test_qpochhammer_real_recursion(x, a, q):
    ctx = QContext(q)
    lhs = qpochhammer_real(a, ctx, x + 1)
    rhs = (1 - a * q ** x) * qpochhammer_real(a, ctx, x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 5), m=st.integers(0, 8), n=st.integers(0, 8))
def test_pochhammer_split(a, m, n):
    assert pochhammer(a, m + n) == pytest.approx(pochhammer(a, m) * pochhammer(a + m, n), rel=1e-12)


def test_terminating_series_index_zero_is_one():
    assert hyp_pfq([0.0, 3.1], [1.7], 0.9) == 1.0
    assert qhyp_rphis([QPow(0), 0.3], [0.5], 0.7, 0.2) == 1.0
    assert hyp_pfq([-1.0, 0.0], [2.5], 1 - 1 / 0.4) == 1.0


def test_hahn_3f2_value():
    a, b, N = 1.2, 4.5, 10
    assert hyp_pfq([-2, 2 + a + b - 1, -1], [a, -N], 1.0) == pytest.approx(HAHN_3F2, rel=1e-14)


def test_nonterminating_rejected():
    with pytest.raises(NonTerminating):
        hypergeometric_terminating(SeriesSpec((0.5, 1.5), (2.0,), 0.3))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), b=st.floats(0.2, 3), z=st.floats(-2, 2))
def test_2f1_matches_direct_sum(n, b, z):
    direct = sum(pochhammer(-n, k) * pochhammer(b, k) / pochhammer(b + 1, k) * z ** k / math.factorial(k)
                 for k in range(n + 1))
    got = hyp_pfq([-n, b], [b + 1], z)
    assert got == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_basic_series_vectorized_against_loop():
    q = 0.7
    xs = np.arange(6.0)
    vec = qhyp_rphis([QPow(-3), QPow(-xs), 0.2], [0.4, 0.1], q, q)
    for i, x in enumerate(xs):
        one = qhyp_rphis([QPow(-3), QPow(-x), 0.2], [0.4, 0.1], q, q)
        assert vec[i] == pytest.approx(one, rel=1e-14)


def test_compensated_sum_recovers_cancellation():
    terms = [1e16, 1.0, -1e16, 1.0]
    assert compensated_sum(terms) == 2.0
