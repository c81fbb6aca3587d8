"""Smoothed cross-spectral analysis and squared coherence.

Scaling convention: for a (detrended, tapered) series ``x`` of length ``N``
with DFT ``X_k``, the raw periodogram is ``I_k = |X_k|^2 / N`` over all ``N``
Fourier frequencies, so ``sum(I_k) = sum(x_t^2)`` and ``sum(I_k) / N`` is the
mean square of the tapered series. Cross-periodograms use ``X_k conj(Y_k) / N``.
When the series is zero-padded to a faster FFT length, ``N`` in the
denominator stays the number of observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from teleconnect.errors import DomainError
from teleconnect.series import _require_complete, _values


@dataclass(frozen=True, eq=False)
class SpectralEstimate:
    freqs: np.ndarray
    f_xx: np.ndarray
    f_yy: np.ndarray
    f_xy: np.ndarray
    coherence: np.ndarray
    n_obs: int
    n_fft: int
    span: int
    kernel: str

    @property
    def bin_width(self) -> float:
        return 1.0 / self.n_fft


@dataclass(frozen=True)
class CoherenceThreshold:
    L: int
    N: int
    df: float
    f_crit: float
    C: float
    alpha: float

    def as_dict(self) -> dict:
        return {"L": self.L, "N": self.N, "df": self.df, "F_crit": self.f_crit,
                "C": self.C, "alpha": self.alpha}


@dataclass(frozen=True)
class FrequencyBand:
    lo: float
    hi: float

    @property
    def period_lo(self) -> float:
        return 1.0 / self.hi

    @property
    def period_hi(self) -> float:
        return 1.0 / self.lo

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "period_lo": self.period_lo, "period_hi": self.period_hi}


def detrend_linear(x) -> np.ndarray:
    """Remove the least-squares line through ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    t = np.arange(1, n + 1) - (n + 1) / 2.0
    sumt2 = n * (n * n - 1) / 12.0
    return x - x.mean() - np.dot(x, t) * t / sumt2


def split_cosine_bell(n: int, fraction: float) -> np.ndarray:
    """Taper weights: cosine ramps over ``fraction`` of the samples at each end."""
    if not 0.0 <= fraction <= 0.5:
        raise DomainError("taper fraction must lie in [0, 0.5]")
    m = int(math.floor(n * fraction))
    w = np.ones(n)
    if m > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(1, 2 * m, 2) / (2 * m)))
        w[:m] = ramp
        w[n - m:] = ramp[::-1]
    return w


def daniell_weights(span: int, modified: bool = False) -> np.ndarray:
    """Weights of the Daniell smoother of total width ``span`` (odd)."""
    if span < 1 or span % 2 == 0:
        raise DomainError("span must be a positive odd integer")
    if span == 1:
        return np.ones(1)
    if not modified:
        return np.full(span, 1.0 / span)
    w = np.ones(span)
    w[0] = w[-1] = 0.5
    return w / (span - 1)


def kernel_df(weights: np.ndarray) -> float:
    """Equivalent degrees of freedom of a smoothing kernel, 2 / sum(w^2)."""
    return 2.0 / float(np.sum(weights * weights))


def fast_length(n: int) -> int:
    """Smallest integer >= n whose only prime factors are 2, 3 and 5."""
    m = n
    while True:
        k = m
        for f in (2, 3, 5):
            while k % f == 0:
                k //= f
        if k == 1:
            return m
        m += 1


def dft(x) -> np.ndarray:
    return np.fft.fft(np.asarray(x, dtype=complex))


def raw_periodogram(x, n_obs: int | None = None) -> np.ndarray:
    """Unsmoothed periodogram ``|X_k|^2 / n_obs`` at all Fourier frequencies."""
    x = np.asarray(x, dtype=float)
    X = dft(x)
    return (X * X.conj()).real / (n_obs or x.size)


def smooth_circular(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Circular convolution with a symmetric kernel, summed in a fixed order."""
    m = (weights.size - 1) // 2
    out = np.zeros_like(values)
    for j in range(-m, m + 1):
        out = out + weights[j + m] * np.roll(values, -j)
    return out


def prepare(x, detrend: bool = True, taper: float = 0.1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x = detrend_linear(x) if detrend else x - x.mean()
    return x * split_cosine_bell(x.size, taper)


def periodogram_pair(x, y, span: int = 9, detrend: bool = True, taper: float = 0.1,
                     modified: bool = False, pad: bool = False) -> SpectralEstimate:
    """Smoothed auto- and cross-spectra and squared coherence of two series.

    With ``pad`` the tapered series are zero-padded to :func:`fast_length`,
    which changes the frequency grid to multiples of ``1 / n_fft``. The zero
    frequency ordinate is replaced by the mean of its two neighbours before
    smoothing, since detrending leaves nothing meaningful there.
    """
    # contiguous copies keep the result independent of the caller's memory layout
    xv, yv = np.ascontiguousarray(_values(x)), np.ascontiguousarray(_values(y))
    if xv.size != yv.size:
        raise DomainError("series must have equal length")
    _require_complete(xv, "periodogram_pair")
    _require_complete(yv, "periodogram_pair")
    if span < 3 or span % 2 == 0:
        raise DomainError("span must be an odd integer >= 3")
    n0 = xv.size
    if n0 < 4 * span:
        raise DomainError(f"{n0} observations are too few for span {span}")
    weights = daniell_weights(span, modified)
    xt, yt = prepare(xv, detrend, taper), prepare(yv, detrend, taper)
    n = fast_length(n0) if pad else n0
    if n > n0:
        xt = np.concatenate([xt, np.zeros(n - n0)])
        yt = np.concatenate([yt, np.zeros(n - n0)])
    X, Y = dft(xt), dft(yt)
    spectra = []
    for a, b in ((X, X), (Y, Y), (X, Y)):
        per = a * b.conj() / n0
        per[0] = 0.5 * (per[1] + per[n - 1])
        spectra.append(smooth_circular(per, weights))
    nspec = n // 2
    sl = slice(1, nspec + 1)
    fxx, fyy, fxy = spectra[0][sl].real, spectra[1][sl].real, spectra[2][sl]
    denom = fxx * fyy
    power = (fxy * fxy.conj()).real
    coh = np.divide(power, denom, out=np.zeros_like(power), where=denom > 0)
    freqs = np.arange(1, nspec + 1) / n
    kernel = "modified.daniell" if modified else "daniell"
    return SpectralEstimate(freqs, fxx, fyy, fxy, coh, n0, n, span, kernel)


def f_quantile(prob: float, d1: float, d2: float) -> float:
    """Quantile of the F(d1, d2) distribution via the inverse regularized incomplete beta."""
    b = float(special.betaincinv(d1 / 2.0, d2 / 2.0, prob))
    return d2 * b / (d1 * (1.0 - b))


def coherence_threshold(N: int, L: int = 9, alpha: float = 0.01) -> CoherenceThreshold:
    """Level above which smoothed squared coherence is significant at ``alpha``."""
    if not 0.0 < alpha < 0.5:
        raise DomainError("alpha must lie in (0, 0.5)")
    if N < 2 or L < 1:
        raise DomainError("need N >= 2 and L >= 1")
    df = 2.0 * L * (N - 1) / N
    if df - 2.0 <= 0:
        raise DomainError(f"degrees of freedom {df:.3f} leave no denominator freedom")
    f_crit = f_quantile(1.0 - alpha, 2.0, df - 2.0)
    return CoherenceThreshold(L, N, df, f_crit, f_crit / (df + f_crit), alpha)


def significant_bands(est: SpectralEstimate, thr: CoherenceThreshold) -> list[FrequencyBand]:
    """Maximal runs of consecutive frequencies with coherence above ``thr.C``."""
    above = est.coherence > thr.C
    bands = []
    i, n = 0, above.size
    while i < n:
        if above[i]:
            j = i
            while j + 1 < n and above[j + 1]:
                j += 1
            bands.append(FrequencyBand(float(est.freqs[i]), float(est.freqs[j])))
            i = j + 1
        else:
            i += 1
    return bands


def peak_coherence(est: SpectralEstimate) -> tuple[float, float]:
    """Frequency and value of maximal coherence; ties go to the lower frequency."""
    if est.coherence.size == 0:
        raise DomainError("empty spectral estimate")
    i = int(np.argmax(est.coherence))
    return float(est.freqs[i]), float(est.coherence[i])
