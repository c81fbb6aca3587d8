import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleconnect.errors import DomainError
from teleconnect.series import difference
from teleconnect.stationarity import (
    TABLE_PROBS,
    TABLE_SIZES,
    TAU_TREND,
    adf_p_value,
    adf_test,
    critical_values,
    default_lag_order,
)


def _walk(seed, n):
    return np.cumsum(np.random.default_rng(seed).standard_normal(n))


def _normal_equations_tau(x, k, trend=True):
    """Oracle: t-ratio of the lagged level from (X'X)^-1, no QR."""
    dx = np.diff(x)
    m = dx.size
    n = m - k
    cols = [np.ones(n)] + ([np.arange(k + 1, m + 1.0)] if trend else []) + [x[k:m]]
    cols += [dx[k - j: m - j] for j in range(1, k + 1)]
    X = np.column_stack(cols)
    y = dx[k:]
    xtx = X.T @ X
    b = np.linalg.solve(xtx, X.T @ y)
    r = y - X @ b
    s2 = r @ r / (n - X.shape[1])
    j = 2 if trend else 1
    return b[j] / np.sqrt(s2 * np.linalg.inv(xtx)[j, j])


@pytest.mark.parametrize("n,k", [(2, 1), (9, 2), (28, 3), (301, 6), (74, 4)])
def test_default_lag_order(n, k):
    assert default_lag_order(n) == k


@pytest.mark.parametrize("seed,n,k,trend", [(0, 80, 2, True), (1, 150, 0, True), (2, 60, 3, False), (3, 300, 5, False)])
def test_statistic_matches_normal_equations(seed, n, k, trend):
    x = _walk(seed, n) + 0.3 * np.random.default_rng(seed + 50).standard_normal(n)
    assert adf_test(x, k, trend).statistic == pytest.approx(_normal_equations_tau(x, k, trend), rel=1e-10)


def test_frozen_interpolated_example():
    # statistic from the normal-equations oracle; p by hand interpolation between the 100 and 250 rows
    r = adf_test(_walk(11, 120))
    assert r.lag_order == 4
    assert r.statistic == pytest.approx(-1.6811263360699138, abs=1e-10)
    assert r.p_value == pytest.approx(0.7090085476468706, abs=1e-12)
    assert r.clamp is None


@pytest.mark.parametrize("i", range(TABLE_SIZES.size))
@pytest.mark.parametrize("j", range(TABLE_PROBS.size))
def test_table_nodes_reproduce_probabilities(i, j):
    p, clamp = adf_p_value(TAU_TREND[i, j], TABLE_SIZES[i])
    assert p == pytest.approx(TABLE_PROBS[j], abs=1e-12)
    assert clamp is None


def test_clamping():
    assert adf_p_value(-10.0, 100) == (0.01, "smaller")
    assert adf_p_value(2.0, 100) == (0.99, "greater")


def test_critical_values_beyond_table_are_flat():
    np.testing.assert_array_equal(critical_values(10), TAU_TREND[0])
    np.testing.assert_array_equal(critical_values(1e6), TAU_TREND[-1])


@settings(max_examples=30, deadline=None)
@given(stat=st.floats(-5, 0), delta=st.floats(0, 2), n=st.floats(20, 1000))
def test_p_value_monotone_in_statistic(stat, delta, n):
    assert adf_p_value(stat, n)[0] <= adf_p_value(stat + delta, n)[0] + 1e-15


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(-1e3, 1e3), b=st.floats(0.01, 100))
def test_affine_invariance(seed, a, b):
    x = _walk(seed, 100)
    assert adf_test(a + b * x).statistic == pytest.approx(adf_test(x).statistic, abs=1e-8)


def test_random_walk_not_rejected():
    # about 90% of seeds give p > 0.10 (nominal 10% size); seed 7 is one of them
    assert adf_test(_walk(7, 500)).p_value > 0.10


def test_white_noise_rejected():
    r = adf_test(np.random.default_rng(5).standard_normal(300))
    assert r.p_value == 0.01 and r.clamp == "smaller"


@pytest.mark.parametrize("key", ["cet", "nao", "pdo"])
def test_differenced_fixtures_stationary(report, key):
    assert adf_test(difference(report.annual[key])).p_value == 0.01


def test_runtime_budget(report):
    t0 = time.perf_counter()
    for key in ("cet", "nao", "pdo"):
        adf_test(report.annual[key])
    assert time.perf_counter() - t0 < 1.0


def test_too_short():
    with pytest.raises(DomainError):
        adf_test(np.arange(8.0), 2)
