"""Throughput time series: trace aggregation and block re-aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import PacketTrace


@dataclass
class RateSeries:
    """Throughput samples in bits/second at a fixed aggregation time.

    Sample i is the traffic volume of bin i divided by the bin width, so
    `samples * bin_width` recovers per-bin volumes in bits.
    """

    samples: np.ndarray
    bin_width: float  # seconds
    origin_label: str = ""

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise ValueError("samples must be 1-d")
        if len(self.samples) < 1:
            raise ValueError("rate series must contain at least one sample")
        if self.bin_width <= 0:
            raise ValueError("bin width must be positive")
        if np.any(self.samples < 0):
            raise ValueError("negative rate sample")

    def __len__(self) -> int:
        return len(self.samples)


def _bin_count(duration: float, T: float) -> int:
    # ceil(duration / T), treating ratios within 1e-9 of an integer as exact
    # so that duration = n*T computed in floating point still yields n bins.
    ratio = duration / T
    floor = math.floor(ratio)
    if ratio - floor <= 1e-9 * max(1.0, ratio):
        return max(1, floor)
    return floor + 1


def aggregate(trace: PacketTrace, T: float) -> RateSeries:
    """Bin a trace at aggregation time `T` and return bits/second per bin.

    Bin i covers [i*T, (i+1)*T); a packet timestamped exactly at the trace
    duration falls into the final bin.  A trailing partial bin is kept and
    still divided by the full `T`.
    """
    if T <= 0:
        raise ValueError("aggregation time must be positive")
    if len(trace) == 0:
        raise ValueError("empty trace")
    nbins = _bin_count(trace.duration, T)
    idx = np.minimum((trace.timestamps // T).astype(np.int64), nbins - 1)
    volumes = np.bincount(idx, weights=trace.sizes_bits, minlength=nbins)
    label = f"{trace.source_label} T={T:g}s".strip()
    return RateSeries(volumes / T, T, origin_label=label)


def block_aggregate(series: RateSeries, m: int) -> RateSeries:
    """Average non-overlapping blocks of `m` samples; the remainder is dropped."""
    if m < 1:
        raise ValueError("block size must be at least 1")
    n = len(series)
    if m > n:
        raise ValueError(f"block size {m} exceeds series length {n}")
    nblocks = n // m
    blocks = series.samples[: nblocks * m].reshape(nblocks, m).mean(axis=1)
    return RateSeries(blocks, series.bin_width * m, origin_label=series.origin_label)


def write_rate_series_csv(series: RateSeries, path: str | Path) -> None:
    """Serialize as `bin_index,rate_bps` rows."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("bin_index,rate_bps\n")
        for i, r in enumerate(series.samples):
            fh.write(f"{i},{float(r)!r}\n")
