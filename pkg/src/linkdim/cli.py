"""Command-line interface.

Subcommands: `analyze` (full pipeline), `hurst` (self-similarity tests
only), `synth` (trace generation), `compare` (batch empirical criterion).

Defaults can be overridden with LINKDIM_-prefixed environment variables,
e.g. LINKDIM_EPSILON=0.005 or LINKDIM_TIMESCALES=0.01,0.1.

Exit codes: 0 when the analysis ran and every approach met the target,
1 when the analysis ran but some approach failed validation, 2 on any
execution error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .distfit import Family
from .hurst import hurst_suite, is_self_similar
from .ingest import TraceParseError, load_trace, trace_summary, write_csv_trace
from .report import (
    AnalysisConfig,
    AnalysisError,
    DEFAULT_FAMILIES,
    DEFAULT_TIMESCALES,
    run_analysis,
    run_compare,
)
from .series import aggregate
from .synth import GeneratorKind, GeneratorSpec, generate_trace

_ENV_PREFIX = "LINKDIM_"


def _env(name: str, fallback: str) -> str:
    return os.environ.get(_ENV_PREFIX + name, fallback)


def _parse_timescales(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad timescale list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty timescale list")
    return values


def _parse_families(text: str) -> list[Family]:
    names = {f.value.lower(): f for f in Family}
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok not in names:
            raise argparse.ArgumentTypeError(
                f"unknown family {tok!r}; choose from {sorted(names)}"
            )
        out.append(names[tok])
    if not out:
        raise argparse.ArgumentTypeError("empty family list")
    return out


def _add_trace_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trace", required=True, help="path to a CSV or pcap trace")
    p.add_argument(
        "--format",
        choices=("auto", "csv", "pcap"),
        default=_env("FORMAT", "auto"),
        help="trace format (default: by file suffix)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkdim",
        description="Traffic-trace statistics and link-capacity provisioning",
        epilog="Defaults may be overridden via LINKDIM_* environment variables "
        "(e.g. LINKDIM_EPSILON, LINKDIM_TIMESCALES, LINKDIM_OUT).",
    )
    parser.add_argument("--version", action="version", version=f"linkdim {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("analyze", help="full analysis and provisioning report")
    _add_trace_args(p)
    p.add_argument(
        "--timescales",
        type=_parse_timescales,
        default=_env("TIMESCALES", ",".join(str(t) for t in DEFAULT_TIMESCALES)),
        help="comma-separated aggregation times in seconds",
    )
    p.add_argument("--epsilon", type=float, default=float(_env("EPSILON", "0.01")))
    p.add_argument(
        "--families",
        type=_parse_families,
        default=_env("FAMILIES", ",".join(f.value for f in DEFAULT_FAMILIES)),
        help="families to rank by goodness of fit",
    )
    p.add_argument(
        "--low-fraction",
        type=float,
        default=float(_env("LOW_FRACTION", "0.1")),
        help="fraction of low frequencies used by the periodogram test",
    )
    p.add_argument("--out", default=_env("OUT", "linkdim-out"))
    p.add_argument("--no-plots", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("hurst", help="self-similarity tests only")
    _add_trace_args(p)
    p.add_argument("--timescale", type=float, default=float(_env("TIMESCALE", "0.01")))
    p.add_argument("--low-fraction", type=float, default=float(_env("LOW_FRACTION", "0.1")))
    p.add_argument("--out", default=_env("OUT", "linkdim-out"))
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic trace with known truth")
    p.add_argument("--kind", required=True, choices=[k.value for k in GeneratorKind])
    p.add_argument("--length", type=int, required=True, help="number of rate samples")
    p.add_argument("--seed", type=int, default=int(_env("SEED", "0")))
    p.add_argument("--bin-width", type=float, default=1.0, help="seconds per sample")
    p.add_argument("--mean", type=float, help="mean rate, bits/s")
    p.add_argument("--std", type=float, help="rate standard deviation, bits/s")
    p.add_argument("--hurst", type=float, help="Hurst exponent (fgn)")
    p.add_argument("--mu-log", type=float, help="log-scale location (iid-lognormal)")
    p.add_argument("--sigma-log", type=float, help="log-scale shape (iid-lognormal)")
    p.add_argument("--shape", type=float, help="shape (iid-gev)")
    p.add_argument("--loc", type=float, help="location, bits/s (iid-gev)")
    p.add_argument("--scale", type=float, help="scale, bits/s (iid-gev)")
    p.add_argument("--rate-pps", type=float, help="packet rate (poisson-packets)")
    p.add_argument("--packet-bits", type=float, help="packet size in bits")
    p.add_argument("--out", required=True, help="output CSV trace path")

    p = sub.add_parser("compare", help="empirical criterion across many traces")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument(
        "--format", choices=("auto", "csv", "pcap"), default=_env("FORMAT", "auto")
    )
    p.add_argument("--timescale", type=float, default=float(_env("TIMESCALE", "0.01")))
    p.add_argument("--epsilon", type=float, default=float(_env("EPSILON", "0.01")))
    p.add_argument("--out", default=_env("OUT", "linkdim-out"))
    p.add_argument("--no-plots", action="store_true")
    return parser


def _coerce(args: argparse.Namespace, attr: str, parse) -> None:
    # env-sourced defaults arrive as raw strings; flag values are parsed already
    value = getattr(args, attr)
    if isinstance(value, str):
        setattr(args, attr, parse(value))


_SYNTH_PARAM_FLAGS = {
    "mean": "mean",
    "std": "std",
    "hurst": "hurst",
    "mu_log": "mu_log",
    "sigma_log": "sigma_log",
    "shape": "shape",
    "loc": "loc",
    "scale": "scale",
    "rate_pps": "rate_pps",
    "packet_bits": "packet_bits",
}


def _cmd_analyze(args: argparse.Namespace) -> int:
    _coerce(args, "timescales", _parse_timescales)
    _coerce(args, "families", _parse_families)
    config = AnalysisConfig(
        trace_path=args.trace,
        format=args.format,
        timescales=args.timescales,
        epsilon=args.epsilon,
        families=args.families,
        hurst_low_fraction=args.low_fraction,
        output_dir=args.out,
        render_plots=not args.no_plots,
    )
    trace = load_trace(args.trace, args.format)
    report = run_analysis(trace, config)
    print(f"report written to {Path(args.out) / 'report.json'}")
    return 0 if report["all_passed"] else 1


def _cmd_hurst(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace, args.format)
    series = aggregate(trace, args.timescale)
    estimates = hurst_suite(series, low_fraction=args.low_fraction)
    verdict = is_self_similar(estimates)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    payload = {
        "schema_version": 1,
        "T_s": args.timescale,
        "estimates": {
            e.method.value: {
                "H": e.hurst,
                "slope": e.fit.slope,
                "intercept": e.fit.intercept,
                "r_squared": e.fit.r_squared,
            }
            for e in estimates
        },
        "verdict": "self-similar" if verdict else "not-self-similar",
    }
    (out_dir / "hurst.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for est in estimates:
        slug = est.method.value.replace("-", "_")
        lines = ["log10_x,log10_y,fit_log10_y"]
        for x, y in est.points:
            lines.append(f"{x!r},{y!r},{est.fit.slope * x + est.fit.intercept!r}")
        (out_dir / f"hurst_{slug}.csv").write_text("\n".join(lines) + "\n", "utf-8")
    if not args.no_plots:
        from . import plots

        plots.plot_hurst_panels(estimates, out_dir / "hurst.png")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    kind = GeneratorKind(args.kind)
    params = {
        name: getattr(args, flag)
        for flag, name in _SYNTH_PARAM_FLAGS.items()
        if getattr(args, flag) is not None
    }
    spec = GeneratorSpec(
        kind=kind,
        length=args.length,
        seed=args.seed,
        bin_width=args.bin_width,
        params=params,
    )
    trace = generate_trace(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv_trace(trace, out)
    summary = trace_summary(trace)
    meta = {
        "kind": kind.value,
        "length": args.length,
        "seed": args.seed,
        "bin_width_s": args.bin_width,
        "params": params,
        "packet_count": summary.packet_count,
        "mean_rate_bps": summary.mean_rate,
        "duration_s": summary.duration,
    }
    meta_path = out.with_suffix(out.suffix + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", "utf-8")
    print(json.dumps(meta, indent=2, sort_keys=True))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    loaded: list[tuple[str, object]] = []
    for path in args.traces:
        try:
            loaded.append((path, load_trace(path, args.format)))
        except (OSError, TraceParseError, ValueError) as exc:
            loaded.append((path, exc))
    report = run_compare(
        loaded, args.timescale, args.epsilon, args.out, render_plots=not args.no_plots
    )
    print(f"comparison written to {Path(args.out) / 'compare.json'}")
    return 0 if report["all_passed"] else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "hurst": _cmd_hurst,
        "synth": _cmd_synth,
        "compare": _cmd_compare,
    }
    try:
        return handlers[args.cmd](args)
    except (AnalysisError, TraceParseError, ValueError, OSError) as exc:
        print(f"linkdim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
