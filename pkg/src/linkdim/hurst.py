"""Hurst exponent estimation by variance-time, rescaled-range, and
periodogram regression.

Each estimator reduces the series to log-log points, fits a least-squares
line, and maps the slope to H.  The points and the fit are kept on the
estimate for auditing and plot emission.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .series import RateSeries, block_aggregate
from .stats import LineFit, ols_fit, periodogram as _periodogram


class HurstMethod(str, Enum):
    VARIANCE_TIME = "variance-time"
    RESCALED_RANGE = "rescaled-range"
    PERIODOGRAM = "periodogram"


@dataclass(frozen=True)
class HurstEstimate:
    method: HurstMethod
    hurst: float
    fit: LineFit
    points: np.ndarray  # (k, 2) array of the fitted log10 pairs


def dyadic_grid(smallest: int, length: int, largest_fraction: int = 8) -> list[int]:
    """Powers of 2 from `smallest` up to length // largest_fraction."""
    top = length // largest_fraction
    grid = []
    m = smallest
    while m <= top:
        grid.append(m)
        m *= 2
    return grid


def variance_time(
    series: RateSeries, block_sizes: Sequence[int] | None = None
) -> HurstEstimate:
    """Slope of log10 var(block means) against log10 block size; H = 1 + slope/2.

    Block sizes with degenerate (zero) variance are dropped; at least four
    points must survive.
    """
    n = len(series)
    if block_sizes is None:
        block_sizes = dyadic_grid(4, n)
    sizes = sorted(set(int(m) for m in block_sizes))
    if len(sizes) < 4:
        raise ValueError("need at least 4 distinct block sizes")
    for m in sizes:
        if m < 1 or n // m < 2:
            raise ValueError(f"block size {m} leaves fewer than 2 blocks")
    points = []
    for m in sizes:
        var = block_aggregate(series, m).samples.var()
        if var > 0:
            points.append((np.log10(m), np.log10(var)))
    if len(points) < 4:
        raise ValueError("fewer than 4 non-degenerate block sizes")
    pts = np.asarray(points)
    fit = ols_fit(pts[:, 0], pts[:, 1])
    return HurstEstimate(HurstMethod.VARIANCE_TIME, 1.0 + fit.slope / 2.0, fit, pts)


def _window_rs(window: np.ndarray) -> float:
    """Range of cumulative deviations over the population std of one window.

    Returns nan for a degenerate (constant) window.
    """
    dev = window - window.mean()
    z = np.cumsum(dev)
    r = z.max() - z.min()
    s = window.std()
    if s == 0.0:
        return float("nan")
    return float(r / s)


def rescaled_range(
    series: RateSeries, window_sizes: Sequence[int] | None = None
) -> HurstEstimate:
    """Slope of log10 mean(R/S) against log10 window size; H = slope.

    The series is split into disjoint windows per size; R/S is averaged over
    windows, skipping any with zero deviation.
    """
    n = len(series)
    if window_sizes is None:
        window_sizes = dyadic_grid(8, n)
    sizes = sorted(set(int(w) for w in window_sizes))
    if len(sizes) < 4:
        raise ValueError("need at least 4 distinct window sizes")
    if sizes[0] < 8:
        raise ValueError("window sizes must be at least 8")
    if sizes[-1] > n:
        raise ValueError("largest window exceeds series length")
    x = series.samples
    points = []
    for w in sizes:
        nwin = n // w
        seg = x[: nwin * w].reshape(nwin, w)
        dev = seg - seg.mean(axis=1, keepdims=True)
        z = np.cumsum(dev, axis=1)
        r = z.max(axis=1) - z.min(axis=1)
        s = seg.std(axis=1)
        ok = s > 0
        if ok.any():
            points.append((np.log10(w), np.log10(np.mean(r[ok] / s[ok]))))
    if len(points) < 4:
        raise ValueError("fewer than 4 non-degenerate window sizes")
    pts = np.asarray(points)
    fit = ols_fit(pts[:, 0], pts[:, 1])
    return HurstEstimate(HurstMethod.RESCALED_RANGE, fit.slope, fit, pts)


def periodogram_hurst(series: RateSeries, low_fraction: float = 0.1) -> HurstEstimate:
    """Log-log fit of the periodogram over its lowest frequencies; H = (1 - slope)/2.

    Only the lowest `low_fraction` of the Fourier frequencies enter the fit,
    where the power-law behaviour of a long-memory process holds.
    """
    if not 0 < low_fraction <= 0.5:
        raise ValueError("low_fraction must be in (0, 0.5]")
    if len(series) < 64:
        raise ValueError("need at least 64 samples for the periodogram test")
    spec = _periodogram(series)
    keep = int(np.floor(low_fraction * len(spec.frequencies)))
    freqs = spec.frequencies[:keep]
    powers = spec.powers[:keep]
    positive = powers > 0
    freqs, powers = freqs[positive], powers[positive]
    if len(freqs) < 8:
        raise ValueError("fewer than 8 retained frequencies")
    pts = np.column_stack([np.log10(freqs), np.log10(powers)])
    fit = ols_fit(pts[:, 0], pts[:, 1])
    return HurstEstimate(HurstMethod.PERIODOGRAM, (1.0 - fit.slope) / 2.0, fit, pts)


def hurst_suite(
    series: RateSeries,
    low_fraction: float = 0.1,
    block_sizes: Sequence[int] | None = None,
    window_sizes: Sequence[int] | None = None,
) -> list[HurstEstimate]:
    """All three estimates, in a fixed order."""
    return [
        variance_time(series, block_sizes),
        rescaled_range(series, window_sizes),
        periodogram_hurst(series, low_fraction),
    ]


def is_self_similar(estimates: Sequence[HurstEstimate]) -> bool:
    """True when at least 2 of 3 estimates land strictly inside (0.5, 1)."""
    hits = sum(1 for e in estimates if 0.5 < e.hurst < 1.0)
    return hits >= 2
