"""Traffic-trace statistics and link-capacity provisioning toolkit.

All quantities are carried in bits and seconds internally; parsers and
generators own every unit conversion.
"""

__version__ = "0.1.0"

from .ingest import PacketRecord, PacketTrace, TraceParseError, TraceSummary
from .series import RateSeries, aggregate, block_aggregate
from .stats import Acf, LineFit, Moments, Spectrum, moments, ols_fit, periodogram
from .hurst import HurstEstimate, HurstMethod, hurst_suite, is_self_similar
from .distfit import Family, FitError, FittedDistribution, fit, qq_pairs, rank_fits
from .dimension import (
    Approach,
    ProvisioningInput,
    ProvisioningResult,
    empirical_epsilon,
    validate,
)
from .synth import GeneratorKind, GeneratorSpec, generate_rates, generate_trace

__all__ = [
    "PacketRecord",
    "PacketTrace",
    "TraceParseError",
    "TraceSummary",
    "RateSeries",
    "aggregate",
    "block_aggregate",
    "Acf",
    "LineFit",
    "Moments",
    "Spectrum",
    "moments",
    "ols_fit",
    "periodogram",
    "HurstEstimate",
    "HurstMethod",
    "hurst_suite",
    "is_self_similar",
    "Family",
    "FitError",
    "FittedDistribution",
    "fit",
    "qq_pairs",
    "rank_fits",
    "Approach",
    "ProvisioningInput",
    "ProvisioningResult",
    "empirical_epsilon",
    "validate",
    "GeneratorKind",
    "GeneratorSpec",
    "generate_rates",
    "generate_trace",
    "__version__",
]
