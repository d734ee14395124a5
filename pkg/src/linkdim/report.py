"""End-to-end analysis pipeline and report/plot-data emission.

The pipeline per aggregation time is: aggregate -> moments -> Hurst triple
-> fit ranking -> capacities for every approach -> empirical validation.
Results land in `report.json`, a table-shaped `table.csv`, per-figure CSV
data files, and rendered PNG figures alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .dimension import (
    Approach,
    ProvisioningInput,
    ProvisioningResult,
    capacity_c1,
    capacity_c2,
    capacity_c3,
    capacity_fitted,
    capacity_rule_of_thumb,
    validate,
)
from .distfit import Family, QQPlot, RankedFit, qq_pairs, rank_fits, fit as fit_family
from .hurst import HurstEstimate, hurst_suite, is_self_similar
from .ingest import PacketTrace, TraceSummary, trace_summary
from .series import RateSeries, aggregate, write_rate_series_csv
from .stats import Moments, Spectrum, autocorrelation, moments as compute_moments, periodogram

SCHEMA_VERSION = 1

DEFAULT_TIMESCALES = (0.01, 0.05, 0.1, 0.5, 1.0)
DEFAULT_FAMILIES = (Family.NORMAL, Family.LOGNORMAL, Family.GEV)
MODEL_APPROACH_ORDER = (Approach.C1, Approach.C2, Approach.C3, Approach.C4, Approach.C5)


class AnalysisError(RuntimeError):
    """A pipeline stage failed; the message carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class AnalysisConfig:
    trace_path: str
    format: str = "auto"
    timescales: Sequence[float] = DEFAULT_TIMESCALES
    epsilon: float = 0.01
    families: Sequence[Family] = DEFAULT_FAMILIES
    hurst_low_fraction: float = 0.1
    output_dir: str = "linkdim-out"
    render_plots: bool = True

    def __post_init__(self) -> None:
        if not self.timescales or any(t <= 0 for t in self.timescales):
            raise ValueError("timescales must be non-empty and positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be inside (0, 1)")

    def as_dict(self) -> dict:
        return {
            "trace_path": str(self.trace_path),
            "format": self.format,
            "timescales": [float(t) for t in self.timescales],
            "epsilon": self.epsilon,
            "families": [f.value for f in self.families],
            "hurst_low_fraction": self.hurst_low_fraction,
            "output_dir": str(self.output_dir),
        }


@dataclass
class TimescaleAnalysis:
    T: float
    series: RateSeries
    moments: Moments
    degenerate: bool
    hurst_estimates: list[HurstEstimate] | None
    self_similar: bool | None
    spectrum: Spectrum | None
    ranking: list[RankedFit]
    qq: dict[Family, QQPlot] = field(default_factory=dict)
    results: list[ProvisioningResult] = field(default_factory=list)


def _stage(name: str, fn: Callable):
    try:
        return fn()
    except AnalysisError:
        raise
    except Exception as exc:
        raise AnalysisError(name, exc) from exc


def analyze_timescale(
    series: RateSeries,
    epsilon: float,
    families: Sequence[Family],
    low_fraction: float,
) -> TimescaleAnalysis:
    """Run the full per-timescale pipeline on one rate series.

    Constant traffic (zero rate variance) short-circuits: every model
    approach then needs exactly the mean rate, and neither the Hurst tests
    nor the distribution fits are defined.
    """
    T = series.bin_width
    mom = _stage("moments", lambda: compute_moments(series))

    if mom.rate_variance == 0.0:
        inp = ProvisioningInput(mom.mean, 0.0, T, epsilon)
        results = [
            ProvisioningResult(a, mom.mean, epsilon, inp) for a in MODEL_APPROACH_ORDER
        ]
        results.append(capacity_rule_of_thumb(mom.mean))
        results = validate(series, results, epsilon)
        return TimescaleAnalysis(
            T, series, mom, True, None, None, None, [], {}, results
        )

    estimates = _stage(
        "hurst", lambda: hurst_suite(series, low_fraction=low_fraction)
    )
    spectrum = _stage("periodogram", lambda: periodogram(series))
    ranking = _stage("fit-ranking", lambda: rank_fits(series.samples, families))
    qq = {r.family: qq_pairs(series.samples, r.dist) for r in ranking if r.dist}

    fitted = {r.family: r.dist for r in ranking if r.dist is not None}
    inp = ProvisioningInput(mom.mean, mom.rate_variance, T, epsilon)

    def _capacities() -> list[ProvisioningResult]:
        lognormal = fitted.get(Family.LOGNORMAL) or fit_family(
            Family.LOGNORMAL, series.samples
        )
        gev = fitted.get(Family.GEV) or fit_family(Family.GEV, series.samples)
        return [
            capacity_c1(inp),
            capacity_c2(inp),
            capacity_c3(inp),
            capacity_fitted(lognormal, epsilon),
            capacity_fitted(gev, epsilon),
            capacity_rule_of_thumb(mom.mean),
        ]

    results = _stage("capacities", _capacities)
    results = _stage("validate", lambda: validate(series, results, epsilon))
    return TimescaleAnalysis(
        T, series, mom, False, estimates, is_self_similar(estimates), spectrum,
        ranking, qq, results,
    )


def analyze_trace(trace: PacketTrace, config: AnalysisConfig) -> list[TimescaleAnalysis]:
    analyses = []
    for T in config.timescales:
        series = _stage(f"aggregate T={T:g}", lambda T=T: aggregate(trace, T))
        analyses.append(
            analyze_timescale(series, config.epsilon, config.families, config.hurst_low_fraction)
        )
    return analyses


# ---------------------------------------------------------------------------
# report assembly


def _fit_dict(f: RankedFit) -> dict:
    return {
        "family": f.family.value,
        "gamma": f.gamma,
        "params": list(f.dist.params) if f.dist else None,
        "error": f.error,
    }


def _estimate_dict(e: HurstEstimate) -> dict:
    return {
        "H": e.hurst,
        "slope": e.fit.slope,
        "intercept": e.fit.intercept,
        "r_squared": e.fit.r_squared,
    }


def _result_dict(r: ProvisioningResult) -> dict:
    return {
        "approach": r.approach.value,
        "capacity_bps": r.capacity,
        "empirical_epsilon": r.empirical_epsilon,
        "pass": r.passed,
    }


def build_report(
    summary: TraceSummary, config: AnalysisConfig, analyses: Sequence[TimescaleAnalysis]
) -> dict:
    """Self-contained report dict: config echo, trace summary, per-T results."""
    per_t = []
    for a in analyses:
        hurst_block = None
        if a.hurst_estimates is not None:
            vt, rs, pg = a.hurst_estimates
            hurst_block = {
                "variance_time": _estimate_dict(vt),
                "rescaled_range": _estimate_dict(rs),
                "periodogram": _estimate_dict(pg),
                "self_similar": a.self_similar,
            }
        per_t.append(
            {
                "T_s": a.T,
                "bins": len(a.series),
                "degenerate_variance": a.degenerate,
                "moments": {
                    "mean_bps": a.moments.mean,
                    "rate_variance_bps2": a.moments.rate_variance,
                    "bin_variance_bits2": a.moments.bin_variance,
                },
                "hurst": hurst_block,
                "fit_ranking": [_fit_dict(f) for f in a.ranking],
                "approaches": [_result_dict(r) for r in a.results],
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "linkdim",
        "version": __version__,
        "config": config.as_dict(),
        "trace": {
            "packet_count": summary.packet_count,
            "total_bits": summary.total_bits,
            "duration_s": summary.duration,
            "mean_rate_bps": summary.mean_rate,
        },
        "timescales": per_t,
        "all_passed": all(r.passed for a in analyses for r in a.results),
    }


# ---------------------------------------------------------------------------
# file emission


def _dump_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_table_csv(report: dict, path: Path) -> None:
    approaches = [a.value for a in MODEL_APPROACH_ORDER] + [Approach.RULE_OF_THUMB.value]
    header = ["T_s", "bins", "mean_bps", "rate_variance_bps2"]
    for name in approaches:
        header += [f"{name}_bps", f"{name}_eps_hat", f"{name}_pass"]
    lines = [",".join(header)]
    for entry in report["timescales"]:
        row = [
            _fmt(entry["T_s"]),
            _fmt(entry["bins"]),
            _fmt(entry["moments"]["mean_bps"]),
            _fmt(entry["moments"]["rate_variance_bps2"]),
        ]
        by_name = {r["approach"]: r for r in entry["approaches"]}
        for name in approaches:
            r = by_name[name]
            row += [_fmt(r["capacity_bps"]), _fmt(r["empirical_epsilon"]), _fmt(r["pass"])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_points_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Emitter:
    """Tracks written files so a failed run can remove its partial outputs."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.created: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.created.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.created:
            p.unlink(missing_ok=True)


def emit_analysis_outputs(
    report: dict, analyses: Sequence[TimescaleAnalysis], config: AnalysisConfig
) -> Path:
    """Write report.json, table.csv, plot-data CSVs, and rendered figures.

    Returns the output directory.  On any error the files written so far
    are removed before the error propagates.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    em = _Emitter(out_dir)
    try:
        _dump_json(report, em.path("report.json"))
        _write_table_csv(report, em.path("table.csv"))

        bar_rows = []
        for a in analyses:
            tag = f"T{a.T:g}"
            write_rate_series_csv(a.series, em.path(f"throughput_{tag}.csv"))
            if not a.degenerate:
                acf = autocorrelation(a.series, min(100, len(a.series) - 1))
                _write_points_csv(
                    em.path(f"acf_{tag}.csv"), ("lag", "r"), zip(acf.lags, acf.values)
                )
                if a.spectrum is not None:
                    _write_points_csv(
                        em.path(f"spectrum_{tag}.csv"),
                        ("omega_rad", "power"),
                        zip(a.spectrum.frequencies, a.spectrum.powers),
                    )
                for est in a.hurst_estimates or []:
                    slug = est.method.value.replace("-", "_")
                    fitted = est.fit.slope * est.points[:, 0] + est.fit.intercept
                    _write_points_csv(
                        em.path(f"hurst_{slug}_{tag}.csv"),
                        ("log10_x", "log10_y", "fit_log10_y"),
                        zip(est.points[:, 0], est.points[:, 1], fitted),
                    )
                for family, qq in a.qq.items():
                    stem = f"qq_{family.value.lower()}_{tag}"
                    _write_points_csv(
                        em.path(f"{stem}.csv"),
                        ("theoretical", "observed"),
                        zip(qq.theoretical, qq.observed),
                    )
                    _dump_json(
                        {"family": family.value, "gamma": qq.gamma, "T_s": a.T},
                        em.path(f"{stem}.json"),
                    )
            for r in a.results:
                bar_rows.append(
                    (f"{a.T:g}", r.approach.value, r.empirical_epsilon, r.passed)
                )
        _write_points_csv(
            em.path("epsilon_bars.csv"),
            ("T_s", "approach", "empirical_epsilon", "pass"),
            bar_rows,
        )

        if config.render_plots:
            from . import plots

            for a in analyses:
                tag = f"T{a.T:g}"
                caps = {r.approach.value: r.capacity for r in a.results}
                plots.plot_rate_series(
                    a.series, em.path(f"throughput_{tag}.png"), capacities=caps
                )
                if a.spectrum is not None and np.any(a.spectrum.powers > 0):
                    plots.plot_spectrum(a.spectrum, em.path(f"spectrum_{tag}.png"))
                if a.hurst_estimates:
                    plots.plot_hurst_panels(
                        a.hurst_estimates, em.path(f"hurst_{tag}.png")
                    )
                for family, qq in a.qq.items():
                    plots.plot_qq(
                        qq, family.value, em.path(f"qq_{family.value.lower()}_{tag}.png")
                    )
            plots.plot_epsilon_bars(
                bar_rows, config.epsilon, em.path("epsilon_bars.png")
            )
    except Exception as exc:
        em.cleanup()
        raise AnalysisError("emit-outputs", exc) from exc
    return out_dir


def run_analysis(trace: PacketTrace, config: AnalysisConfig) -> dict:
    """Full pipeline: analyze, build the report, emit every output file."""
    summary = _stage("summary", lambda: trace_summary(trace))
    analyses = analyze_trace(trace, config)
    report = build_report(summary, config, analyses)
    emit_analysis_outputs(report, analyses, config)
    return report


# ---------------------------------------------------------------------------
# batch comparison


def run_compare(
    traces: Sequence[tuple[str, PacketTrace | Exception]],
    T: float,
    epsilon: float,
    output_dir: str | Path,
    render_plots: bool = True,
) -> dict:
    """Per-trace empirical criterion for every approach at one timescale.

    `traces` pairs a label with either a loaded trace or the exception its
    loading raised; failed traces are recorded and the batch continues.
    """
    if not traces:
        raise ValueError("no traces to compare")
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    rows = []
    for index, (label, item) in enumerate(traces):
        if isinstance(item, Exception):
            entries.append({"trace": label, "index": index, "error": str(item)})
            continue
        try:
            series = aggregate(item, T)
            analysis = analyze_timescale(
                series, epsilon, (Family.LOGNORMAL, Family.GEV), 0.1
            )
            approaches = [_result_dict(r) for r in analysis.results]
            entries.append({"trace": label, "index": index, "approaches": approaches})
            for r in analysis.results:
                rows.append((index, label, r.approach.value, r.capacity,
                             r.empirical_epsilon, r.passed))
        except (AnalysisError, ValueError) as exc:
            entries.append({"trace": label, "index": index, "error": str(exc)})

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "linkdim",
        "version": __version__,
        "T_s": T,
        "epsilon": epsilon,
        "traces": entries,
        "all_passed": all(
            a["pass"] for e in entries if "approaches" in e for a in e["approaches"]
        ),
    }
    _dump_json(report, out_dir / "compare.json")
    _write_points_csv(
        out_dir / "compare.csv",
        ("trace_index", "trace", "approach", "capacity_bps", "empirical_epsilon", "pass"),
        rows,
    )
    if render_plots and rows:
        from . import plots

        bar_rows = [(str(r[0]), r[2], r[4], r[5]) for r in rows]
        plots.plot_epsilon_bars(bar_rows, epsilon, out_dir / "epsilon_bars.png")
    return report
