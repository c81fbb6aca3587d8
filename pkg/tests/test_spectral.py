import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from teleconnect.errors import DomainError
from teleconnect.spectral import (
    SpectralEstimate,
    coherence_threshold,
    daniell_weights,
    detrend_linear,
    dft,
    f_quantile,
    fast_length,
    kernel_df,
    peak_coherence,
    periodogram_pair,
    raw_periodogram,
    significant_bands,
    smooth_circular,
    split_cosine_bell,
)

series = arrays(np.float64, st.integers(40, 90), elements=st.floats(-100, 100, allow_nan=False)).filter(
    lambda x: np.std(x) > 1e-2)


def naive_dft(x):
    n = x.size
    k = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * j * k / n)) for j in range(n)])


def f_cdf_quadrature(x, d1, d2):
    c = math.exp(math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)) * (d1 / d2) ** (d1 / 2)

    def pdf(t):
        return c * t ** (d1 / 2 - 1) * (1 + d1 * t / d2) ** (-(d1 + d2) / 2)

    return integrate.quad(pdf, 0, x, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def f_quantile_bisection(p, d1, d2):
    lo, hi = 0.0, 1.0
    while f_cdf_quadrature(hi, d1, d2) < p:
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f_cdf_quadrature(mid, d1, d2) < p else (lo, mid)
    return 0.5 * (lo + hi)


# -- transform -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 7, 16, 31, 64])
def test_dft_matches_direct_sum(n):
    x = np.random.default_rng(n).standard_normal(n)
    np.testing.assert_allclose(dft(x), naive_dft(x), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(x=arrays(np.float64, st.integers(1, 64), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_parseval(x):
    total = raw_periodogram(x).sum()
    assert total == pytest.approx(np.sum(x * x), rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("n,expected", [(1, 1), (7, 8), (73, 75), (169, 180), (300, 300), (301, 320)])
def test_fast_length(n, expected):
    assert fast_length(n) == expected


def test_detrend_removes_line():
    t = np.arange(30.0)
    np.testing.assert_allclose(detrend_linear(3.0 - 0.5 * t), 0.0, atol=1e-12)


def test_cosine_bell():
    w = split_cosine_bell(20, 0.1)
    np.testing.assert_allclose(w[:2], [0.5 * (1 - math.cos(math.pi / 4)), 0.5 * (1 - math.cos(3 * math.pi / 4))])
    assert np.all(w[2:18] == 1.0) and np.allclose(w[::-1], w)


@pytest.mark.parametrize("span,modified,df", [(9, False, 18.0), (3, False, 6.0), (5, True, 2 / (2 * 0.125 ** 2 + 3 * 0.25 ** 2))])
def test_kernel_df(span, modified, df):
    w = daniell_weights(span, modified)
    assert w.sum() == pytest.approx(1.0)
    assert kernel_df(w) == pytest.approx(df)


def test_span_one_smoothing_is_identity():
    v = np.random.default_rng(0).standard_normal(17)
    np.testing.assert_array_equal(smooth_circular(v, daniell_weights(1)), v)


def test_smoothing_wraps_circularly():
    v = np.zeros(10)
    v[0] = 3.0
    out = smooth_circular(v, daniell_weights(3))
    np.testing.assert_allclose(out[[9, 0, 1]], 1.0)
    assert out.sum() == pytest.approx(3.0)


# -- coherence -----------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(x=series, seed=st.integers(0, 1000))
def test_coherence_bounded(x, seed):
    y = np.random.default_rng(seed).standard_normal(x.size)
    c = periodogram_pair(x, y, span=5).coherence
    assert np.all(c >= 0) and np.all(c <= 1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(x=series, seed=st.integers(0, 1000), a=st.floats(-50, 50), b=st.floats(0.1, 20),
       c=st.floats(-50, 50), d=st.floats(-20, -0.1))
def test_coherence_affine_invariant(x, seed, a, b, c, d):
    y = np.random.default_rng(seed).standard_normal(x.size)
    base = periodogram_pair(x, y, span=5).coherence
    moved = periodogram_pair(a + b * x, c + d * y, span=5).coherence
    np.testing.assert_allclose(moved, base, atol=1e-10)


def test_identical_series_coherence_one():
    x = np.random.default_rng(1).standard_normal(100)
    est = periodogram_pair(x, x, span=9)
    np.testing.assert_allclose(est.coherence, 1.0, atol=1e-12)
    assert peak_coherence(est)[0] == est.freqs[0]


def test_sinusoid_peak():
    t = np.arange(200)
    x = np.sin(2 * np.pi * t / 10)
    est = periodogram_pair(x, np.random.default_rng(2).standard_normal(200), span=3)
    assert est.freqs[np.argmax(est.f_xx)] == pytest.approx(0.1, abs=1 / 200)


def test_independent_noise_low_coherence():
    rng = np.random.default_rng(3)
    est = periodogram_pair(rng.standard_normal(1000), rng.standard_normal(1000), span=9)
    assert est.coherence.mean() < 0.15


def test_coupled_sinusoid_peak():
    rng = np.random.default_rng(4)
    t = np.arange(256)
    s = np.sin(2 * np.pi * t / 8)
    # a flat kernel gives a plateau span bins wide; the modified kernel's half-weight
    # ends make the centre ordinate dominate, and no taper keeps the line in one bin
    est = periodogram_pair(s + rng.standard_normal(256), s + rng.standard_normal(256), span=5,
                           modified=True, taper=0.0)
    assert peak_coherence(est)[0] == pytest.approx(0.125, abs=est.bin_width)


def test_padding_grid():
    rng = np.random.default_rng(5)
    est = periodogram_pair(rng.standard_normal(73), rng.standard_normal(73), span=9, pad=True)
    assert est.n_fft == 75 and est.freqs[0] == pytest.approx(1 / 75) and est.freqs[-1] == pytest.approx(37 / 75)
    assert est.n_obs == 73


@pytest.mark.parametrize("span", [2, 1])
def test_bad_span(span):
    with pytest.raises(DomainError):
        periodogram_pair(np.arange(50.0), np.arange(50.0) ** 2, span=span)


def test_too_short_for_span():
    with pytest.raises(DomainError):
        periodogram_pair(np.arange(20.0), np.sin(np.arange(20.0)), span=9)


# -- threshold -----------------------------------------------------------------------

def test_threshold_cet_nao():
    thr = coherence_threshold(73, 9, 0.01)
    assert thr.df == pytest.approx(17.75, abs=0.005)
    assert thr.f_crit == pytest.approx(6.257, abs=5e-4)
    assert thr.C == pytest.approx(0.2606, abs=5e-5)


def test_threshold_with_300_differences():
    # a CET-PDO df of 17.94 corresponds to N = 300
    thr = coherence_threshold(300, 9, 0.01)
    assert thr.df == pytest.approx(17.94, abs=1e-9)
    assert thr.f_crit == pytest.approx(6.234, abs=5e-4)
    assert thr.C == pytest.approx(0.2579, abs=5e-5)


@pytest.mark.parametrize("p,d1,d2", [(0.99, 2, 15.75), (0.5, 2, 98.0), (0.45, 2, 400.0), (0.9, 4, 11.3), (0.95, 3, 7.0)])
def test_f_quantile_against_bisection(p, d1, d2):
    assert f_quantile(p, d1, d2) == pytest.approx(f_quantile_bisection(p, d1, d2), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0.01, 0.999), d2=st.floats(1.0, 500.0))
def test_f_quantile_two_numerator_df_closed_form(p, d2):
    closed = d2 / 2 * ((1 - p) ** (-2 / d2) - 1)
    assert f_quantile(p, 2, d2) == pytest.approx(closed, rel=1e-9)


def test_threshold_large_df_median():
    thr = coherence_threshold(5000, 200, 0.49)
    F = f_quantile_bisection(0.51, 2, thr.df - 2)
    assert thr.C == pytest.approx(F / (thr.df + F), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(10, 2000), a1=st.floats(0.001, 0.2), a2=st.floats(0.001, 0.2))
def test_threshold_monotone_in_alpha(N, a1, a2):
    lo, hi = sorted((a1, a2))
    assert coherence_threshold(N, 9, lo).C >= coherence_threshold(N, 9, hi).C - 1e-15


def test_threshold_domain():
    with pytest.raises(DomainError):
        coherence_threshold(73, 9, 0.6)


# -- bands ---------------------------------------------------------------------------

def _estimate(coh):
    coh = np.asarray(coh, dtype=float)
    n = 2 * coh.size
    ones = np.ones(coh.size)
    return SpectralEstimate(np.arange(1, coh.size + 1) / n, ones, ones, ones.astype(complex), coh, n, n, 9, "daniell")


def test_zero_coherence_has_no_bands():
    assert significant_bands(_estimate(np.zeros(20)), coherence_threshold(40)) == []


def test_band_runs():
    est = _estimate([0.1, 0.5, 0.6, 0.1, 0.9, 0.1, 0.3, 0.4])
    bands = significant_bands(est, coherence_threshold(40))
    assert [(b.lo * 16, b.hi * 16) for b in bands] == [(2, 3), (5, 5), (7, 8)]
    assert bands[0].period_lo == pytest.approx(16 / 3)


def test_peak_tie_goes_low():
    est = _estimate([0.2, 0.7, 0.3, 0.7])
    assert peak_coherence(est) == (pytest.approx(2 / 8), pytest.approx(0.7))
