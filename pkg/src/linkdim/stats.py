"""Core statistics shared by the Hurst and fitting machinery.

Variances are population variances (divide by N) throughout: block-mean
variance estimates normalize by the block count, and fixing the convention
keeps expected test values deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import RateSeries


@dataclass(frozen=True)
class Moments:
    mean: float  # bits/second
    rate_variance: float  # (bits/second)^2, variance of the rate samples
    bin_variance: float  # bits^2, variance of per-bin volume = rate_variance * T^2


@dataclass(frozen=True)
class Acf:
    lags: np.ndarray
    values: np.ndarray  # r(k) in [-1, 1], r(0) == 1


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray  # angular, strictly increasing in (0, pi]
    powers: np.ndarray


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float


def moments(series: RateSeries) -> Moments:
    """Mean rate and population variance of the rate samples."""
    if len(series) < 2:
        raise ValueError("need at least 2 samples for moments")
    x = series.samples
    mean = float(x.mean())
    var = float(x.var())
    return Moments(mean, var, var * series.bin_width**2)


def autocorrelation(series: RateSeries, max_lag: int) -> Acf:
    """Biased sample autocorrelation r(k) for k = 0..max_lag.

    r(k) = (1/N) sum_i (x_i - mu)(x_{i+k} - mu) / rate_variance, so r(0) is
    exactly 1 and |r(k)| <= 1.
    """
    n = len(series)
    if max_lag >= n:
        raise ValueError("max_lag must be smaller than the series length")
    x = series.samples
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))  # N * rate_variance
    if denom == 0.0:
        raise ValueError("zero-variance series has no autocorrelation")
    values = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        values[k] = np.dot(xc[: n - k], xc[k:]) / denom
    return Acf(np.arange(max_lag + 1), values)


def periodogram(series: RateSeries) -> Spectrum:
    """Raw periodogram at the Fourier frequencies w_n = 2*pi*n/N, n = 1..N//2.

    The mean is removed first, so the DC bin (excluded here) would be zero
    anyway.  Power is |X(w)|^2 / (2*pi*N), which ties back to the series via
    var(x) = (2*pi/N) * (2*sum(powers) - powers[-1] if N even else
    2*sum(powers)).
    """
    n = len(series)
    if n < 8:
        raise ValueError("need at least 8 samples for a periodogram")
    xc = series.samples - series.samples.mean()
    spec = np.fft.rfft(xc)
    half = n // 2
    freqs = 2.0 * np.pi * np.arange(1, half + 1) / n
    powers = np.abs(spec[1 : half + 1]) ** 2 / (2.0 * np.pi * n)
    return Spectrum(freqs, powers)


def ols_fit(x, y) -> LineFit:
    """Least-squares line through (x, y) with its coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if len(np.unique(x)) < 2:
        raise ValueError("need at least 2 distinct x values")
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.dot(x - xm, x - xm))
    sxy = float(np.dot(x - xm, y - ym))
    slope = sxy / sxx
    intercept = ym - slope * xm
    ss_tot = float(np.dot(y - ym, y - ym))
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        resid = y - (slope * x + intercept)
        r_squared = 1.0 - float(np.dot(resid, resid)) / ss_tot
    return LineFit(slope, intercept, float(np.clip(r_squared, 0.0, 1.0)))
