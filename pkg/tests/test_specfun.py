import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from hetnet_in import specfun as S
from hetnet_in._quad import QuadratureError, gauss_legendre, gk_integrate, semi_infinite


def test_partition_counts():
    assert [len(S.partitions(m)) for m in range(10)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30]
    assert len(S.partitions(30)) == 5604


@pytest.mark.parametrize("m", [1, 4, 7, 12])
def test_partitions_sum_to_m(m):
    for p in S.partitions(m):
        assert sum((i + 1) * c for i, c in enumerate(p)) == m
    assert len(set(S.partitions(m))) == len(S.partitions(m))


def test_partition_order_bound():
    with pytest.raises(S.DomainError):
        S.partitions(S.MAX_ORDER + 1)


def test_compositions3():
    c = S.compositions3(4)
    assert len(c) == 15
    assert all(sum(t) == 4 and min(t) >= 0 for t in c)


def test_multinomial():
    assert S.multinomial(5, [2, 2, 1]) == 30
    assert S.multinomial(30, [10, 10, 10]) == math.factorial(30) // math.factorial(10) ** 3
    with pytest.raises(S.DomainError):
        S.multinomial(3, [1, 1])


def test_comp_inc_beta_reference():
    assert S.comp_inc_beta(1.5, 0.5, 0.5) == pytest.approx(1.2853981633974487, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.2, 4.0), b=st.floats(0.05, 12.0), z=st.floats(1e-6, 1 - 1e-6))
def test_comp_inc_beta_matches_mpmath(a, b, z):
    ref = float(mp.betainc(a, b, z, 1))
    assert S.comp_inc_beta(a, b, z) == pytest.approx(ref, rel=1e-9)


def test_nonpositive_b_rejected():
    with pytest.raises(S.DomainError):
        S.log_comp_inc_beta_w(2.0, -0.5, 0.7)
    with pytest.raises(S.DomainError):
        S.log_comp_inc_beta_w(2.0, 0.0, 0.7)


def test_tiny_complement_keeps_precision():
    # w = 1 - z near 0 is where the complement form matters
    w = 1e-14
    got = math.exp(float(S.log_comp_inc_beta_w(1.5, 0.5, w, 1 - w)))
    with mp.workdps(40):
        ref = float(mp.betainc(1.5, 0.5, 1 - mp.mpf(w), 1))
    assert got == pytest.approx(ref, rel=1e-10)


def test_domain_errors():
    with pytest.raises(S.DomainError):
        S.comp_inc_beta(1.0, 1.0, 1.0)
    with pytest.raises(S.DomainError):
        S.log_gamma(0.0)


def test_log_gamma():
    assert S.log_gamma(5.0) == pytest.approx(math.log(24))


def test_partition_arrays_consistent():
    P, k, lf = S.partition_arrays(6)
    assert P.shape == (11, 6)
    assert np.allclose(lf, special.gammaln(P + 1).sum(axis=1))
    assert list(k) == [sum(p) for p in S.partitions(6)]


# ---------------------------------------------------------------- quadrature

def test_gk_polynomial_exact():
    res = gk_integrate(lambda x: np.stack([x ** 5, x ** 10]), -1.0, 2.0, rtol=1e-14)
    assert res.value[0] == pytest.approx((2 ** 6 - 1) / 6, rel=1e-14)
    assert res.value[1] == pytest.approx((2 ** 11 + 1) / 11, rel=1e-14)


def test_semi_infinite_exponential():
    res = semi_infinite(lambda v: np.exp(-v) * v ** 2, rtol=1e-12, scale=1.0)
    assert float(res.value) == pytest.approx(2.0, rel=1e-11)


def test_semi_infinite_array_scale():
    scales = np.array([0.5, 1.0, 4.0])
    res = semi_infinite(lambda v: np.exp(-v / 2.0), rtol=1e-12, scale=scales)
    assert np.allclose(res.value, 2.0, rtol=1e-11)


def test_quadrature_failure_raises():
    with pytest.raises(QuadratureError):
        gk_integrate(lambda x: np.sign(np.sin(1e4 * x)) / np.sqrt(np.abs(x - 0.3)), 0.0, 1.0,
                     rtol=1e-14, max_intervals=64)


def test_gauss_legendre_interval():
    x, w = gauss_legendre(16, 2.0, 5.0)
    assert w.sum() == pytest.approx(3.0)
    assert np.dot(w, x ** 3) == pytest.approx((5 ** 4 - 2 ** 4) / 4)
