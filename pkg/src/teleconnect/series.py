"""Core time-series container and elementary transforms."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from teleconnect.errors import AlignmentError, DomainError, NumericError

SEASON_LABELS = ("DJF", "MAM", "JJA", "SON")


class Period(enum.Enum):
    ANNUAL = 1
    SEASONAL = 4
    MONTHLY = 12


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Regularly spaced observations.

    ``start`` is ``(year, sub)`` where ``sub`` is the zero-based month or
    season index (always 0 for annual data). Missing observations are NaN.
    Seasonal series hold one value per year for a single season, so their
    step is one year and ``sub`` only identifies the season.
    """

    start: tuple[int, int]
    period: Period
    values: np.ndarray
    units: str = ""
    name: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise DomainError("a TimeSeries needs a 1-D array with at least one value")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def mask(self) -> np.ndarray:
        """True where the value is missing."""
        return np.isnan(self.values)

    @property
    def has_missing(self) -> bool:
        return bool(self.mask.any())

    @property
    def steps_per_year(self) -> int:
        return 12 if self.period is Period.MONTHLY else 1

    def time_index(self, i: int) -> tuple[int, int]:
        year, sub = self.start
        if self.period is Period.MONTHLY:
            k = sub + i
            return year + k // 12, k % 12
        return year + i, sub

    def years(self) -> np.ndarray:
        return np.array([self.time_index(i)[0] for i in range(len(self))])

    def label(self, i: int) -> str:
        year, sub = self.time_index(i)
        if self.period is Period.MONTHLY:
            return f"{year:04d}-{sub + 1:02d}"
        if self.period is Period.SEASONAL:
            return f"{year:04d}-{SEASON_LABELS[sub]}"
        return f"{year:04d}"

    def with_values(self, values, offset: int = 0, **changes) -> "TimeSeries":
        """New series sharing metadata, starting ``offset`` steps later."""
        start = self.time_index(offset) if offset else self.start
        return replace(self, start=start, values=np.asarray(values, dtype=float), **changes)

    def window(self, start_year=None, end_year=None) -> "TimeSeries":
        years = self.years()
        keep = np.ones(len(self), dtype=bool)
        if start_year is not None:
            keep &= years >= start_year
        if end_year is not None:
            keep &= years <= end_year
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            raise AlignmentError(f"window [{start_year}, {end_year}] holds no observations")
        return self.with_values(self.values[idx[0]: idx[-1] + 1], offset=int(idx[0]))

    def trim_missing(self) -> "TimeSeries":
        """Drop leading and trailing missing values."""
        ok = np.flatnonzero(~self.mask)
        if ok.size == 0:
            raise DomainError("series is entirely missing")
        return self.with_values(self.values[ok[0]: ok[-1] + 1], offset=int(ok[0]))

    def to_csv(self, path=None, header=("time", "value")) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for i, v in enumerate(self.values):
            writer.writerow([self.label(i), "" if math.isnan(v) else format_float(v)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="ascii", newline="") as fh:
                fh.write(text)
        return text


def format_float(v: float) -> str:
    return f"{v:.10g}"


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)


def _require_complete(x: np.ndarray, what: str):
    if np.isnan(x).any():
        raise DomainError(f"{what} does not accept missing values; align or trim first")


def difference(s: TimeSeries, d: int = 1) -> TimeSeries:
    """Apply the first-difference operator ``d`` times."""
    if d < 0:
        raise DomainError("difference order must be non-negative")
    if d == 0:
        return s
    if d >= len(s):
        raise DomainError(f"cannot difference a series of length {len(s)} {d} times")
    _require_complete(s.values, "difference")
    return s.with_values(np.diff(s.values, n=d), offset=d)


def integrate(diffs, initial) -> np.ndarray:
    """Invert :func:`difference` given the ``d`` leading values it dropped."""
    z = np.asarray(_values(diffs), dtype=float)
    initial = np.atleast_1d(np.asarray(initial, dtype=float))
    d = initial.size
    heads = [np.diff(initial, n=j)[0] for j in range(d)]
    for head in reversed(heads):
        z = np.concatenate([[head], head + np.cumsum(z)])
    return z


def standardize(s: TimeSeries) -> TimeSeries:
    """Centre to mean 0 and scale to unit sample standard deviation (N-1)."""
    x = s.values
    _require_complete(x, "standardize")
    if x.size < 2:
        raise DomainError("standardize needs at least two observations")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise DomainError("cannot standardize a constant series")
    return s.with_values((x - x.mean()) / sd)


@dataclass(frozen=True)
class Correlogram:
    lags: np.ndarray
    values: np.ndarray
    confidence_bound: float
    kind: str = "acf"

    def outside_bounds(self) -> np.ndarray:
        """Lags (excluding 0) whose value falls outside the +/- bound."""
        v = self.values[self.lags > 0]
        return self.lags[self.lags > 0][np.abs(v) > self.confidence_bound]


def _autocov(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    return np.array([np.dot(xc[: n - k], xc[k:]) / n for k in range(max_lag + 1)])


def acf(s, max_lag: int) -> Correlogram:
    """Sample autocorrelation from the biased (1/N) autocovariance."""
    x = _values(s)
    _require_complete(x, "acf")
    n = x.size
    if max_lag < 0 or max_lag >= n:
        raise DomainError(f"max_lag must lie in [0, {n - 1}]")
    gamma = _autocov(x, max_lag)
    if not gamma[0] > 0:
        raise DomainError("autocorrelation is undefined for a constant series")
    r = gamma / gamma[0]
    r[0] = 1.0
    return Correlogram(np.arange(max_lag + 1), r, 1.96 / math.sqrt(n), "acf")


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations ``r[0..m]`` (``r[0] == 1``)."""
    m = r.size - 1
    out = np.zeros(m + 1)
    out[0] = 1.0
    if m == 0:
        return out
    phi = np.zeros(m + 1)
    phi[1] = r[1]
    out[1] = r[1]
    v = 1.0 - r[1] ** 2
    for k in range(2, m + 1):
        if v <= 1e-14:
            raise NumericError(f"Durbin-Levinson recursion broke down at lag {k}")
        a = (r[k] - np.dot(phi[1:k], r[k - 1:0:-1])) / v
        prev = phi[1:k].copy()
        phi[1:k] = prev - a * prev[::-1]
        phi[k] = a
        out[k] = a
        v *= 1.0 - a * a
    return out


def pacf(s, max_lag: int) -> Correlogram:
    """Sample partial autocorrelation by Durbin-Levinson on the sample ACF.

    Lag 0 is reported as 1 by convention.
    """
    c = acf(s, max_lag)
    return Correlogram(c.lags, durbin_levinson(c.values), c.confidence_bound, "pacf")


@dataclass(frozen=True)
class ErrorMeasures:
    me: float
    rmse: float
    mae: float
    mape: float | None
    acf1: float
    mape_undefined: bool = False

    def as_dict(self) -> dict:
        return {"ME": self.me, "RMSE": self.rmse, "MAE": self.mae, "MAPE": self.mape, "ACF1": self.acf1}


def error_measures(actual, fitted) -> ErrorMeasures:
    """Training-set accuracy of ``fitted`` against ``actual``."""
    a = _values(actual)
    f = _values(fitted)
    if a.shape != f.shape:
        raise DomainError("actual and fitted must have equal length")
    _require_complete(a, "error_measures")
    _require_complete(f, "error_measures")
    e = a - f
    if np.any(a == 0):
        mape, undefined = None, True
    else:
        mape, undefined = float(100.0 * np.mean(np.abs(e / a))), False
    if e.size > 1 and np.any(e != e[0]):
        acf1 = float(acf(e, 1).values[1])
    else:
        acf1 = 0.0
    return ErrorMeasures(
        me=float(e.mean()),
        rmse=float(math.sqrt(np.mean(e * e))),
        mae=float(np.mean(np.abs(e))),
        mape=mape,
        acf1=acf1,
        mape_undefined=undefined,
    )
