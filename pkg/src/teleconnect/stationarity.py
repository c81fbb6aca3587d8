"""Augmented Dickey-Fuller unit-root test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from teleconnect.errors import DomainError, NumericError
from teleconnect.series import TimeSeries, _require_complete, _values

# Fuller's tabulated quantiles of the Dickey-Fuller tau statistic.
# Rows: sample sizes; columns: probabilities.
TABLE_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
TABLE_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
TAU_TREND = np.array([
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
])
TAU_CONSTANT = np.array([
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
])


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lag_order: int
    p_value: float
    n_obs: int
    trend: bool = True
    clamp: str | None = None  # "smaller" / "greater" when the true p lies beyond the table
    alternative: str = "stationary"

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "lag_order": self.lag_order,
            "p_value": self.p_value,
            "n_obs": self.n_obs,
            "trend": self.trend,
            "clamp": self.clamp,
            "alternative": self.alternative,
        }


def default_lag_order(n: int) -> int:
    return int(math.floor((n - 1) ** (1.0 / 3.0)))


def critical_values(n: float, trend: bool = True) -> np.ndarray:
    """Tau quantiles at sample size ``n`` by linear interpolation over the table rows."""
    table = TAU_TREND if trend else TAU_CONSTANT
    return np.array([np.interp(n, TABLE_SIZES, table[:, j]) for j in range(TABLE_PROBS.size)])


def adf_p_value(statistic: float, n: float, trend: bool = True) -> tuple[float, str | None]:
    crit = critical_values(n, trend)
    if statistic < crit[0]:
        return float(TABLE_PROBS[0]), "smaller"
    if statistic > crit[-1]:
        return float(TABLE_PROBS[-1]), "greater"
    return float(np.interp(statistic, crit, TABLE_PROBS)), None


def _ols_t_ratio(design: np.ndarray, target: np.ndarray, col: int) -> float:
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise NumericError("ADF design matrix is rank deficient")
    coef = np.linalg.solve(r, q.T @ target)
    resid = target - design @ coef
    dof = design.shape[0] - design.shape[1]
    s2 = resid @ resid / dof
    rinv = np.linalg.solve(r, np.eye(r.shape[0]))
    se = math.sqrt(s2 * (rinv[col] @ rinv[col]))
    if not se > 0:
        raise NumericError("zero standard error in ADF regression")
    return float(coef[col] / se)


def adf_test(s, lag_order: int | None = None, trend: bool = True) -> AdfResult:
    """Augmented Dickey-Fuller test against the stationary alternative.

    Regresses the differences on an intercept, a linear time index (unless
    ``trend`` is False), the lagged level and ``lag_order`` lagged
    differences. The p-value interpolates Fuller's table at the number of
    differences ``N - 1`` and is clamped to [0.01, 0.99].
    """
    x = _values(s)
    _require_complete(x, "adf_test")
    n = x.size
    if lag_order is None:
        lag_order = default_lag_order(n)
    if lag_order < 0:
        raise DomainError("lag order must be non-negative")
    if n < lag_order + 10:
        raise DomainError(f"series of length {n} is too short for {lag_order} lags")
    dx = np.diff(x)
    m = dx.size
    k = lag_order
    target = dx[k:]
    rows = target.size
    cols = [np.ones(rows)]
    if trend:
        cols.append(np.arange(k + 1, m + 1, dtype=float))
    level_col = len(cols)
    cols.append(x[k:m])
    for j in range(1, k + 1):
        cols.append(dx[k - j: m - j])
    design = np.column_stack(cols)
    stat = _ols_t_ratio(design, target, level_col)
    p, clamp = adf_p_value(stat, m, trend)
    return AdfResult(stat, k, p, n, trend, clamp)
