"""Matplotlib rendering of the analysis figures.

Every function takes computed data plus a target path and writes one PNG;
nothing here recomputes statistics, so the figures always agree with the
CSV data files emitted next to them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .distfit import QQPlot
from .hurst import HurstEstimate
from .series import RateSeries
from .stats import Spectrum

_PASS_COLOR = "#2a9d2a"
_FAIL_COLOR = "#d62728"


def plot_rate_series(
    series: RateSeries,
    path: Path,
    capacities: Mapping[str, float] | None = None,
) -> None:
    """Throughput against time, with optional capacity lines overlaid."""
    t = np.arange(len(series)) * series.bin_width
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, series.samples / 1e6, lw=0.6, color="tab:blue")
    if capacities:
        for i, (name, cap) in enumerate(capacities.items()):
            ax.axhline(cap / 1e6, lw=1.0, ls="--", color=f"C{i + 1}", label=name)
        ax.legend(fontsize=8, ncol=3)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("throughput (Mbit/s)")
    ax.set_title(f"T = {series.bin_width:g} s")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_spectrum(spectrum: Spectrum, path: Path) -> None:
    positive = spectrum.powers > 0
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(spectrum.frequencies[positive], spectrum.powers[positive], lw=0.5)
    ax.set_xlabel("angular frequency (rad)")
    ax.set_ylabel("power")
    ax.set_title("periodogram")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_hurst_panels(estimates: Sequence[HurstEstimate], path: Path) -> None:
    """One log-log panel per estimator: points plus the fitted line."""
    fig, axes = plt.subplots(1, len(estimates), figsize=(4 * len(estimates), 3.5))
    axes = np.atleast_1d(axes)
    for ax, est in zip(axes, estimates):
        x, y = est.points[:, 0], est.points[:, 1]
        ax.plot(x, y, "o", ms=4)
        ax.plot(x, est.fit.slope * x + est.fit.intercept, "-", color="tab:red")
        ax.set_title(f"{est.method.value}: H = {est.hurst:.4f}")
        ax.set_xlabel("log10 x")
        ax.set_ylabel("log10 y")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_qq(qq: QQPlot, family: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(qq.theoretical, qq.observed, ".", ms=2)
    lo = min(qq.theoretical[0], qq.observed[0])
    hi = max(qq.theoretical[-1], qq.observed[-1])
    ax.plot([lo, hi], [lo, hi], "-", color="tab:red", lw=1)
    ax.set_xlabel(f"{family} quantiles")
    ax.set_ylabel("observed quantiles")
    ax.set_title(f"Q-Q vs {family} (gamma = {qq.gamma:.4f})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_epsilon_bars(
    rows: Sequence[tuple[str, str, float, bool]],
    epsilon: float,
    path: Path,
) -> None:
    """Empirical-criterion bars, one group per label, coloured by pass/fail.

    `rows` are (group_label, approach, empirical_epsilon, passed).
    """
    groups = list(dict.fromkeys(r[0] for r in rows))
    approaches = list(dict.fromkeys(r[1] for r in rows))
    width = 0.8 / max(len(approaches), 1)
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(groups)), 4))
    for j, approach in enumerate(approaches):
        xs, ys, colors = [], [], []
        for i, g in enumerate(groups):
            for r in rows:
                if r[0] == g and r[1] == approach:
                    xs.append(i + (j - len(approaches) / 2 + 0.5) * width)
                    ys.append(r[2] if r[2] is not None else 0.0)
                    colors.append(_PASS_COLOR if r[3] else _FAIL_COLOR)
        ax.bar(xs, ys, width=width * 0.9, color=colors, edgecolor="none")
        for x, y in zip(xs, ys):
            ax.annotate(approach, (x, y), fontsize=6, rotation=90,
                        ha="center", va="bottom")
    ax.axhline(epsilon, color="black", lw=1, ls=":", label=f"target = {epsilon:g}")
    ax.set_xticks(range(len(groups)))
    ax.set_xticklabels(groups)
    ax.set_ylabel("empirical exceedance fraction")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
