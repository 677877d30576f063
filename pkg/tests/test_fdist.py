import math

import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from dewatselect.fdist import f_cdf, f_critical, f_sf, log_gamma, reg_inc_beta
from oracles import f_cdf_quadrature


# --- log-gamma ---------------------------------------------------------------

@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 9.0, 27.0, 100.5,
                               1e4, 1e8])
def test_log_gamma_matches_lgamma(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)


def test_log_gamma_small_arguments_use_reflection():
    for x in (0.01, 0.2, 0.49):
        assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12)


def test_log_gamma_rejects_nonpositive():
    for x in (0.0, -1.0):
        with pytest.raises(ValueError):
            log_gamma(x)


# --- regularized incomplete beta ----------------------------------------------

def test_reg_inc_beta_uniform_case_is_identity():
    for x in (0.0, 1e-9, 0.25, 0.5, 0.75, 1.0 - 1e-9, 1.0):
        assert reg_inc_beta(x, 1.0, 1.0) == pytest.approx(x, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1 - 1e-6),
       st.floats(min_value=0.5, max_value=40.0),
       st.floats(min_value=0.5, max_value=40.0))
def test_reg_inc_beta_symmetry(x, a, b):
    assert abs(reg_inc_beta(x, a, b) - (1.0 - reg_inc_beta(1.0 - x, b, a))) < 1e-12


def test_reg_inc_beta_against_scipy():
    for a, b in [(0.5, 0.5), (3.0, 27.0), (1.0, 9.0), (4.5, 4.5), (20.0, 2.0)]:
        for x in (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
            assert reg_inc_beta(x, a, b) == pytest.approx(
                scipy.stats.beta.cdf(x, a, b), abs=1e-13, rel=1e-12)


def test_reg_inc_beta_domain_errors():
    with pytest.raises(ValueError):
        reg_inc_beta(-0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        reg_inc_beta(1.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        reg_inc_beta(0.5, 0.0, 1.0)


# --- F distribution -------------------------------------------------------------

GRID = [0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9, 1.0, 1.2, 1.5,
        1.8, 2.2, 2.7, 3.3, 4.0, 5.0, 6.5, 8.0, 10.0, 15.0]


@pytest.mark.parametrize("d1,d2", [(6, 54), (2, 18), (9, 54)])
def test_f_cdf_against_quadrature(d1, d2):
    for x in GRID:
        assert f_cdf(x, d1, d2) == pytest.approx(
            f_cdf_quadrature(x, d1, d2), abs=1e-8)


@pytest.mark.parametrize("d1,d2", [(6, 54), (2, 18), (9, 54), (1, 1), (3, 7)])
def test_f_cdf_monotone_and_bounded(d1, d2):
    previous = 0.0
    for x in GRID:
        value = f_cdf(x, d1, d2)
        assert 0.0 <= value <= 1.0
        assert value >= previous
        previous = value


def test_f_cdf_edges():
    assert f_cdf(0.0, 3, 7) == 0.0
    assert f_cdf(math.inf, 3, 7) == 1.0
    with pytest.raises(ValueError):
        f_cdf(-0.5, 3, 7)
    with pytest.raises(ValueError):
        f_cdf(1.0, 0, 7)


def test_f_sf_complement_and_tail_accuracy():
    for d1, d2 in [(6, 54), (2, 18), (9, 54)]:
        for x in GRID:
            assert f_sf(x, d1, d2) + f_cdf(x, d1, d2) == pytest.approx(1.0, abs=1e-12)
    # far tail needs relative accuracy, which the complement-side evaluation provides
    for x in (20.0, 50.0, 100.0):
        assert f_sf(x, 6, 54) == pytest.approx(
            float(scipy.stats.f.sf(x, 6, 54)), rel=1e-10)


def test_f_critical_inverts_cdf():
    for alpha in (0.2, 0.1, 0.05, 0.01, 0.001):
        for d1, d2 in [(6, 54), (2, 18), (9, 54), (1, 5)]:
            crit = f_critical(alpha, d1, d2)
            assert f_sf(crit, d1, d2) == pytest.approx(alpha, abs=1e-8)
            assert crit == pytest.approx(
                float(scipy.stats.f.isf(alpha, d1, d2)), rel=1e-7)


def test_f_critical_alpha_domain():
    for alpha in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ValueError):
            f_critical(alpha, 3, 7)
