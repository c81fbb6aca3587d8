import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleconnect.diagnostics import chi2_sf, gaussian_kde, ljung_box, residual_report, silverman_bandwidth
from teleconnect.errors import DomainError


def chi2_sf_even(x, df):
    """Oracle for even degrees of freedom: Poisson-sum closed form."""
    m = df // 2
    h = x / 2.0
    return math.exp(-h) * sum(h ** j / math.factorial(j) for j in range(m))


@pytest.mark.parametrize("df", [2, 4, 8, 10])
@pytest.mark.parametrize("x", [0.5, 3.0, 9.7, 25.0])
def test_chi2_even_closed_form(x, df):
    assert chi2_sf(x, df) == pytest.approx(chi2_sf_even(x, df), rel=1e-12)


def test_chi2_tabulated_quantile():
    assert chi2_sf(14.067, 7) == pytest.approx(0.05, abs=1e-4)


def test_ljung_box_direct_sum():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(73)
    n = x.size
    xc = x - x.mean()
    r = np.array([xc[:-k] @ xc[k:] for k in range(1, 11)]) / (xc @ xc)
    q = n * (n + 2) * sum(r[k - 1] ** 2 / (n - k) for k in range(1, 11))
    lb = ljung_box(x, 10, 1)
    assert lb.q_star == pytest.approx(q, rel=1e-12)
    assert lb.df == 9
    assert lb.p_value == pytest.approx(chi2_sf(q, 9))


def test_zero_autocorrelation_gives_zero_statistic():
    x = np.zeros(20)
    x[0], x[-1] = 1.0, -1.0
    lb = ljung_box(x, 10)
    assert lb.q_star == 0.0 and lb.p_value == 1.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 5000), scale=st.floats(1e-3, 1e3))
def test_scale_invariance(seed, scale):
    x = np.random.default_rng(seed).standard_normal(60)
    assert ljung_box(scale * x).q_star == pytest.approx(ljung_box(x).q_star, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(q=st.floats(0.1, 50), dq=st.floats(0.01, 10), df=st.integers(1, 20))
def test_p_value_decreasing(q, dq, df):
    assert chi2_sf(q + dq, df) <= chi2_sf(q, df)


@pytest.mark.parametrize("lags,fitdf", [(3, 3), (2, 5)])
def test_lags_must_exceed_fitdf(lags, fitdf):
    with pytest.raises(DomainError):
        ljung_box(np.random.default_rng(1).standard_normal(30), lags, fitdf)


def test_white_noise_acf_mostly_inside():
    # binomial(20, 0.05): at most two exceedances for about 92% of seeds; seed 1 is pinned
    rr = residual_report(np.random.default_rng(1).standard_normal(10_000))
    assert rr.acf.outside_bounds().size <= 2


def test_constant_residuals_rejected():
    with pytest.raises(DomainError):
        residual_report(np.ones(30))


def test_histogram_and_density():
    x = np.random.default_rng(3).standard_normal(500)
    rr = residual_report(x)
    assert rr.counts.sum() == x.size
    assert np.all(np.diff(rr.bin_edges) > 0)
    assert np.trapezoid(rr.density_y, rr.density_x) == pytest.approx(1.0, abs=1e-3)
    assert rr.density_x.size == 512


def test_silverman_rule():
    x = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
    iqr = 4.0 - 2.0  # linear-interpolation quartiles
    expected = 0.9 * min(x.std(ddof=1), iqr / 1.34) * 5 ** -0.2
    assert silverman_bandwidth(x) == pytest.approx(expected)


def test_kde_single_point_is_gaussian():
    gx, gy = gaussian_kde(np.array([0.0]), 1.0, n_points=7, cut=3.0)
    np.testing.assert_allclose(gy, np.exp(-0.5 * gx ** 2) / math.sqrt(2 * math.pi))
