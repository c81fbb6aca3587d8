"""Residual adequacy checks: Ljung-Box portmanteau test and residual summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from teleconnect.errors import DomainError
from teleconnect.series import Correlogram, _require_complete, _values, acf


def chi2_sf(x: float, df: float) -> float:
    """Upper tail of the chi-square distribution (regularized upper incomplete gamma)."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class LjungBoxResult:
    q_star: float
    lags: int
    fitdf: int
    df: int
    p_value: float

    def as_dict(self) -> dict:
        return {"Q_star": self.q_star, "lags": self.lags, "fitdf": self.fitdf,
                "df": self.df, "p_value": self.p_value}


def ljung_box(residuals, lags: int = 10, fitdf: int = 0) -> LjungBoxResult:
    x = _values(residuals)
    _require_complete(x, "ljung_box")
    n = x.size
    if lags <= fitdf:
        raise DomainError("lags must exceed fitdf")
    if n <= lags:
        raise DomainError(f"{n} residuals cannot support {lags} lags")
    r = acf(x, lags).values[1:]
    k = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(r * r / (n - k)))
    df = lags - fitdf
    return LjungBoxResult(q, lags, fitdf, df, chi2_sf(q, df))


def silverman_bandwidth(x: np.ndarray) -> float:
    """Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * n^(-1/5)."""
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if not spread > 0:
        spread = sd if sd > 0 else (abs(x[0]) if x[0] != 0 else 1.0)
    return 0.9 * spread * x.size ** (-0.2)


def gaussian_kde(x: np.ndarray, bandwidth: float, n_points: int = 512, cut: float = 3.0):
    grid = np.linspace(x.min() - cut * bandwidth, x.max() + cut * bandwidth, n_points)
    z = (grid[:, None] - x[None, :]) / bandwidth
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (x.size * bandwidth * math.sqrt(2 * math.pi))
    return grid, dens


@dataclass(frozen=True)
class ResidualReport:
    acf: Correlogram
    bin_edges: np.ndarray
    counts: np.ndarray
    density_x: np.ndarray
    density_y: np.ndarray
    bandwidth: float

    def as_dict(self) -> dict:
        return {
            "acf": {"lags": self.acf.lags.tolist(), "values": self.acf.values.tolist(),
                    "bound": self.acf.confidence_bound,
                    "outside_bounds": self.acf.outside_bounds().tolist()},
            "histogram": {"edges": self.bin_edges.tolist(), "counts": self.counts.tolist()},
            "density": {"bandwidth": self.bandwidth, "n_points": int(self.density_x.size)},
        }


def residual_report(residuals, max_lag: int = 20) -> ResidualReport:
    x = _values(residuals)
    if x.size < 20:
        raise DomainError("residual report needs at least 20 residuals")
    correlogram = acf(x, min(max_lag, x.size - 1))
    counts, edges = np.histogram(x, bins="fd")
    bw = silverman_bandwidth(x)
    gx, gy = gaussian_kde(x, bw)
    return ResidualReport(correlogram, edges, counts, gx, gy, bw)
