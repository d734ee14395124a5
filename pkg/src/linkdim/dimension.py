"""Link-capacity provisioning under five approaches plus the 30% rule.

Every approach answers the same question: the smallest capacity C such
that traffic exceeds C in at most a fraction epsilon of aggregation bins.
C1-C3 assume Gaussian marginals with increasingly conservative tail
treatments; C4/C5 read the capacity off a fitted heavy-tailed
distribution's quantile.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .distfit import Family, FittedDistribution, norm_ppf
from .series import RateSeries


class Approach(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    RULE_OF_THUMB = "rule-of-thumb"


@dataclass(frozen=True)
class ProvisioningInput:
    mu: float  # mean rate, bits/second
    rate_variance: float  # (bits/second)^2
    T: float  # aggregation time, seconds
    epsilon: float  # target exceedance probability

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be inside (0, 1)")
        if self.T <= 0:
            raise ValueError("aggregation time must be positive")
        if self.rate_variance < 0:
            raise ValueError("variance cannot be negative")


@dataclass(frozen=True)
class ProvisioningResult:
    approach: Approach
    capacity: float  # bits/second
    epsilon: float | None
    input: ProvisioningInput | None = None
    empirical_epsilon: float | None = None
    passed: bool | None = None


def _degenerate(inp: ProvisioningInput, approach: Approach) -> ProvisioningResult:
    warnings.warn(
        f"{approach.value}: zero variance, constant traffic needs exactly the mean rate",
        RuntimeWarning,
        stacklevel=3,
    )
    return ProvisioningResult(approach, inp.mu, inp.epsilon, inp)


def capacity_c1(inp: ProvisioningInput) -> ProvisioningResult:
    """Gaussian provisioning: C = mu + ppf(1 - epsilon) * std of the rate."""
    if inp.rate_variance == 0.0:
        return _degenerate(inp, Approach.C1)
    c = inp.mu + norm_ppf(1.0 - inp.epsilon) * math.sqrt(inp.rate_variance)
    return ProvisioningResult(Approach.C1, c, inp.epsilon, inp)


def tail_root(epsilon: float) -> float:
    """Root z > 1 of z^2 + ln(2*pi*z^2) = -2 ln(epsilon), by bisection.

    This is the exceedance threshold under the asymptotic Gaussian tail
    approximation Q(z) ~ exp(-z^2/2) / (z * sqrt(2*pi)); it is only
    meaningful deep enough in the tail, hence the epsilon cap.
    """
    if not 0.0 < epsilon < 0.3:
        raise ValueError("tail approximation requires epsilon < 0.3")
    target = -2.0 * math.log(epsilon)

    def f(z: float) -> float:
        return z * z + math.log(2.0 * math.pi * z * z) - target

    lo, hi = 1.0, 20.0
    if f(lo) > 0.0:
        raise ValueError("epsilon too large for the tail regime (root below z = 1)")
    if f(hi) < 0.0:
        raise ValueError("epsilon too small for the bisection bracket")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def capacity_c2(inp: ProvisioningInput) -> ProvisioningResult:
    """Gaussian tail-approximation provisioning: C = mu + z * std with z from tail_root."""
    if inp.rate_variance == 0.0:
        raise ValueError("C2 is undefined for zero variance")
    z = tail_root(inp.epsilon)
    c = inp.mu + z * math.sqrt(inp.rate_variance)
    return ProvisioningResult(Approach.C2, c, inp.epsilon, inp)


def capacity_c3(inp: ProvisioningInput) -> ProvisioningResult:
    """Exponential tail-bound provisioning: C = mu + sqrt(-2 ln eps) * std."""
    if inp.rate_variance == 0.0:
        return _degenerate(inp, Approach.C3)
    c = inp.mu + math.sqrt(-2.0 * math.log(inp.epsilon)) * math.sqrt(inp.rate_variance)
    return ProvisioningResult(Approach.C3, c, inp.epsilon, inp)


_FITTED_APPROACH = {Family.LOGNORMAL: Approach.C4, Family.GEV: Approach.C5}


def capacity_fitted(dist: FittedDistribution, epsilon: float) -> ProvisioningResult:
    """Fitted-distribution provisioning: C is the distribution's (1 - eps) quantile."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be inside (0, 1)")
    approach = _FITTED_APPROACH.get(dist.family)
    if approach is None:
        raise ValueError(
            "fitted provisioning is defined for Lognormal (C4) and GEV (C5)"
        )
    return ProvisioningResult(approach, dist.quantile(1.0 - epsilon), epsilon)


def capacity_rule_of_thumb(mu: float) -> ProvisioningResult:
    """Legacy 30% over-provisioning: C = 1.3 * mu, blind to variability."""
    if mu <= 0:
        raise ValueError("mean rate must be positive")
    return ProvisioningResult(Approach.RULE_OF_THUMB, 1.3 * mu, None)


def empirical_epsilon(series: RateSeries, capacity: float) -> float:
    """Fraction of rate samples strictly exceeding the capacity."""
    return float(np.mean(series.samples > capacity))


def validate(
    series: RateSeries, results: list[ProvisioningResult], epsilon: float
) -> list[ProvisioningResult]:
    """Fill each result's empirical epsilon; pass means eps_hat <= epsilon."""
    if not results:
        raise ValueError("no provisioning results to validate")
    out = []
    for r in results:
        eps_hat = empirical_epsilon(series, r.capacity)
        out.append(replace(r, empirical_epsilon=eps_hat, passed=eps_hat <= epsilon))
    return out
