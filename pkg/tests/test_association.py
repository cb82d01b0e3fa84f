import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hetnet_in import association as A
from hetnet_in import make_params
from hetnet_in.config import NumericsParams
from conftest import coverage_params, skewed_params


def test_fractions_partition(p_cov):
    s = A.assoc_stats(p_cov)
    assert s.a1 + s.a2 == pytest.approx(1.0, abs=1e-12)
    assert s.a2obar + s.a2o == pytest.approx(s.a2, abs=1e-12)


def test_fractions_reference_values():
    s = A.assoc_stats(skewed_params())
    assert (s.a1, s.a2obar, s.a2o) == pytest.approx((0.20755, 0.71806, 0.07439), abs=5e-5)


def test_fractions_match_oracle(oracle):
    for row in oracle["association"]:
        s = A.assoc_stats(make_params(**row["params"]))
        assert s.a1 == pytest.approx(row["a1"], rel=1e-9)
        assert s.a2obar == pytest.approx(row["a2obar"], rel=1e-9)
        assert s.a2o == pytest.approx(row["a2o"], rel=1e-9)


def test_no_bias_no_offloading(p_cov):
    s = A.assoc_stats(p_cov.with_(bias=1.0))
    assert s.a2o == 0.0 and s.rho == 0.0
    assert A.in_probability(p_cov.with_(bias=1.0), 3) == pytest.approx(1.0)


def test_equal_tiers_closed_form():
    # equal powers, exponents and densities: each tier wins half, bias B gives
    # sqrt(B)/(1+sqrt(B)) for a fourth-power path loss
    p = make_params(lambda1=1e-4, lambda2=1e-4, p_ratio_db=0, alpha1=4, bias_db=0)
    assert A.assoc_stats(p).a2 == pytest.approx(0.5, abs=1e-12)
    q = p.with_(bias=3.0)
    assert A.assoc_stats(q).a2 == pytest.approx(np.sqrt(3) / (1 + np.sqrt(3)), abs=1e-10)


def test_mean_loads_reference():
    p = skewed_params()
    assert A.mean_load("2Obar", p) == pytest.approx(28.57, abs=0.01)
    assert A.mean_load("2O", p) == pytest.approx(3.856, abs=0.01)
    assert A.mean_load("2", p) == pytest.approx(31.43, abs=0.01)


@pytest.mark.parametrize("kind", A.LOAD_KINDS)
def test_load_pmf_mean_and_normalization(kind, p_cov):
    tab = A.load_pmf(kind, p_cov)
    assert abs(tab.total() - 1.0) <= 1e-9
    assert tab.offset == 1
    # the sized law has mean 1 + x (4.5/3.5), the mean-load constant is 1.28
    x = A._load_x(kind, p_cov)
    assert tab.mean() == pytest.approx(1 + x * 4.5 / 3.5, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(bdb=st.floats(0.5, 15.0), lu=st.floats(1e-3, 0.02))
def test_pmf_normalization_property(bdb, lu):
    p = coverage_params(bdb, lambda_u=lu)
    for tab in (A.pmf_active_offloaded(p), A.pmf_active_offloaded_nearest(p),
                A.load_pmf("2O", p), A.load_pmf("2Obar", p)):
        assert abs(tab.total() - 1.0) <= 1e-9
        assert not tab.renormalized


def test_count_pmf_is_negative_binomial(p_cov):
    rho = A.assoc_stats(p_cov).rho
    tab = A.pmf_active_offloaded(p_cov)
    ref = stats.nbinom.pmf(tab.support, 3.5, 3.5 / (3.5 + rho))
    assert np.allclose(tab.probs, ref, rtol=1e-10, atol=1e-300)
    assert tab.mean() == pytest.approx(rho, rel=1e-8)


def test_sized_pmf_is_size_biased(p_cov):
    rho = A.assoc_stats(p_cov).rho
    a = A.pmf_active_offloaded(p_cov)
    h = A.pmf_active_offloaded_nearest(p_cov)
    n = np.arange(1, 16)
    assert np.allclose(h.pmf(n), n * a.pmf(n) / rho, rtol=1e-9, atol=1e-12)


def test_in_dof_tail_folded(p_cov):
    U = 4
    tab = A.pmf_in_dof(p_cov, U)
    base = A.pmf_active_offloaded(p_cov)
    assert tab.support[-1] == U
    assert tab.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert tab.probs[U] == pytest.approx(A.prob_active_offloaded_at_least(p_cov, U), abs=1e-9)
    assert np.allclose(tab.probs[:U], base.probs[:U])


def test_truncation_error(p_cov):
    heavy = p_cov.with_(lambda_u=50.0)
    with pytest.raises(A.TruncationError):
        A.load_pmf("1", heavy, NumericsParams(load_sum_max=16))


def test_in_probability_endpoints_and_monotone(p_cov):
    vals = [A.in_probability(p_cov, u) for u in range(p_cov.n1)]
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) >= 0)
    assert all(0.0 <= v <= 1.0 for v in vals)
    big = p_cov.with_(n1=60)
    assert A.in_probability(big, 59) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("U", [1, 2, 3, 5, 7])
def test_in_probability_forms_agree(U, p_cov):
    closed = A.in_probability(p_cov, U)
    assert closed == pytest.approx(A.in_probability_direct(p_cov, U), abs=1e-9)
    inc = A.in_probability(p_cov, U) - A.in_probability(p_cov, U - 1)
    assert A.in_probability_increment(p_cov, U) == pytest.approx(inc, rel=1e-9, abs=1e-15)


def test_harmonic_term_closed_form(p_cov):
    rho = A.assoc_stats(p_cov).rho
    h = A.pmf_active_offloaded_nearest(p_cov)
    assert A.harmonic_term(rho) == pytest.approx(np.sum(h.probs / h.support), rel=1e-9)
    assert A.harmonic_term(0.0) == 1.0


def test_u_range_checked(p_cov):
    with pytest.raises(ValueError):
        A.in_probability(p_cov, p_cov.n1)
    with pytest.raises(ValueError):
        A.pmf_in_dof(p_cov, -1)


@pytest.mark.parametrize("kind", ["1", "2Obar", "2", "2O_abs", "2O"])
def test_distance_pdfs_normalized(kind, p_cov):
    assert A.distance_pdf(kind, p_cov).total_mass() == pytest.approx(1.0, abs=1e-7)


def test_distance_pdf_cdf_monotone(p_cov):
    pdf = A.distance_pdf("1", p_cov)
    c = [pdf.cdf(y) for y in (10.0, 40.0, 80.0, 200.0)]
    assert np.all(np.diff(c) > 0) and c[-1] <= 1.0 + 1e-9


def test_distance_pdf_domain(p_cov):
    with pytest.raises(A.DomainError):
        A.distance_pdf("1", p_cov)(-1.0)
