"""Distribution fitting and goodness-of-fit via Q-Q correlation.

Six candidate families are supported.  CDF, PDF, and quantile are closed
forms throughout; the standard-normal quantile uses a rational
approximation polished by one Halley step, giving full double precision.

Fitting methods per family:

=============  ==============================================================
Normal         moment matching (sample mean, population std)
Lognormal      moment matching on mean/variance (default) or MLE on logs
Exponential    rate = 1 / mean
GEV            maximum likelihood, started from probability-weighted moments
Weibull        maximum likelihood via the one-dimensional profile equation
Pareto         scale fixed at the sample minimum, shape by MLE
=============  ==============================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import erfc, gamma as _gamma_fn


class Family(str, Enum):
    NORMAL = "Normal"
    LOGNORMAL = "Lognormal"
    GEV = "GEV"
    WEIBULL = "Weibull"
    PARETO = "Pareto"
    EXPONENTIAL = "Exponential"


class FitError(RuntimeError):
    """A distribution fit could not be produced."""


# ---------------------------------------------------------------------------
# standard normal kernel


_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)

# Acklam's rational approximation for the inverse normal CDF (~1e-9 on its
# own); the Halley step below refines it to machine precision.
_PPF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_PPF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_PPF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_PPF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_PPF_SPLIT = 0.02425


def norm_cdf(x):
    """Standard normal CDF via the complementary error function."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(-x / _SQRT2)
    return out if out.ndim else float(out)


def _ppf_tail(q: np.ndarray, c=_PPF_C, d=_PPF_D) -> np.ndarray:
    num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
    den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    return num / den


def norm_ppf(p):
    """Standard normal quantile (inverse CDF).

    Rational approximation in three regions, then one Halley refinement
    against the erfc-based CDF.
    """
    p_arr = np.asarray(p, dtype=float)
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
        raise ValueError("probability must be strictly inside (0, 1)")
    x = np.empty_like(p_arr)

    lo = p_arr < _PPF_SPLIT
    hi = p_arr > 1.0 - _PPF_SPLIT
    mid = ~(lo | hi)
    if lo.any():
        q = np.sqrt(-2.0 * np.log(p_arr[lo]))
        x[lo] = _ppf_tail(q)
    if hi.any():
        q = np.sqrt(-2.0 * np.log(1.0 - p_arr[hi]))
        x[hi] = -_ppf_tail(q)
    if mid.any():
        q = p_arr[mid] - 0.5
        r = q * q
        a, b = _PPF_A, _PPF_B
        num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        x[mid] = num * q / den

    # Halley polish of Phi(x) - p, evaluated through whichever tail keeps
    # full relative precision (1 - p is exact for p >= 0.5).  exp(x^2/2)
    # overflows around |x| ~ 38; the unpolished value stands there.
    err = np.where(
        p_arr <= 0.5,
        0.5 * erfc(-x / _SQRT2) - p_arr,
        (1.0 - p_arr) - 0.5 * erfc(x / _SQRT2),
    )
    with np.errstate(over="ignore", invalid="ignore"):
        u = err * _SQRT2PI * np.exp(x * x / 2.0)
        step = u / (1.0 + x * u / 2.0)
    x = x - np.where(np.isfinite(step), step, 0.0)
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# fitted distributions

_GUMBEL_EPS = 1e-9  # |shape| below this uses the Gumbel limit of the GEV


@dataclass(frozen=True)
class FittedDistribution:
    """A family tag plus its fitted parameters.

    Parameter order by family:
      Normal       (mu, sigma)
      Lognormal    (mu_log, sigma_log) of the underlying normal
      GEV          (shape, location, scale)
      Weibull      (shape, scale)
      Pareto       (x_min, alpha)
      Exponential  (rate,)
    """

    family: Family
    params: tuple[float, ...]

    _PARAM_COUNT = {
        Family.NORMAL: 2,
        Family.LOGNORMAL: 2,
        Family.GEV: 3,
        Family.WEIBULL: 2,
        Family.PARETO: 2,
        Family.EXPONENTIAL: 1,
    }
    _SCALE_INDEX = {
        Family.NORMAL: 1,
        Family.LOGNORMAL: 1,
        Family.GEV: 2,
        Family.WEIBULL: 1,
        Family.PARETO: 0,
        Family.EXPONENTIAL: 0,
    }

    def __post_init__(self) -> None:
        if len(self.params) != self._PARAM_COUNT[self.family]:
            raise ValueError(
                f"{self.family.value} takes {self._PARAM_COUNT[self.family]} parameters"
            )
        scale = self.params[self._SCALE_INDEX[self.family]]
        if not scale > 0:
            raise ValueError(f"{self.family.value} scale parameter must be positive")
        if self.family is Family.WEIBULL and not self.params[0] > 0:
            raise ValueError("Weibull shape must be positive")
        if self.family is Family.PARETO and not self.params[1] > 0:
            raise ValueError("Pareto shape must be positive")

    @property
    def support(self) -> tuple[float, float]:
        inf = float("inf")
        if self.family is Family.NORMAL:
            return (-inf, inf)
        if self.family in (Family.LOGNORMAL, Family.WEIBULL, Family.EXPONENTIAL):
            return (0.0, inf)
        if self.family is Family.PARETO:
            return (self.params[0], inf)
        shape, loc, scale = self.params
        if shape > _GUMBEL_EPS:
            return (loc - scale / shape, inf)
        if shape < -_GUMBEL_EPS:
            return (-inf, loc - scale / shape)
        return (-inf, inf)

    # -- CDF -----------------------------------------------------------------

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        x_arr = np.atleast_1d(x_arr)
        if not np.all(np.isfinite(x_arr)):
            raise ValueError("cdf argument must be finite")
        out = self._cdf(x_arr)
        return float(out[0]) if scalar else out

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        f = self.family
        if f is Family.NORMAL:
            mu, sigma = self.params
            return 0.5 * erfc(-(x - mu) / (sigma * _SQRT2))
        if f is Family.LOGNORMAL:
            mu, sigma = self.params
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = 0.5 * erfc(-(np.log(x[pos]) - mu) / (sigma * _SQRT2))
            return out
        if f is Family.GEV:
            shape, loc, scale = self.params
            z = (x - loc) / scale
            if abs(shape) < _GUMBEL_EPS:
                return np.exp(-np.exp(-z))
            w = 1.0 + shape * z
            out = np.empty_like(x)
            inside = w > 0
            with np.errstate(over="ignore"):
                out[inside] = np.exp(-w[inside] ** (-1.0 / shape))
            out[~inside] = 0.0 if shape > 0 else 1.0
            return out
        if f is Family.WEIBULL:
            shape, scale = self.params
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = -np.expm1(-((x[pos] / scale) ** shape))
            return out
        if f is Family.PARETO:
            x_min, alpha = self.params
            out = np.zeros_like(x)
            above = x >= x_min
            out[above] = 1.0 - (x_min / x[above]) ** alpha
            return out
        rate = self.params[0]
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -np.expm1(-rate * x[pos])
        return out

    # -- PDF -----------------------------------------------------------------

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        x_arr = np.atleast_1d(x_arr)
        out = self._pdf(x_arr)
        return float(out[0]) if scalar else out

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        f = self.family
        if f is Family.NORMAL:
            mu, sigma = self.params
            z = (x - mu) / sigma
            return np.exp(-z * z / 2.0) / (sigma * _SQRT2PI)
        if f is Family.LOGNORMAL:
            mu, sigma = self.params
            out = np.zeros_like(x)
            pos = x > 0
            z = (np.log(x[pos]) - mu) / sigma
            out[pos] = np.exp(-z * z / 2.0) / (x[pos] * sigma * _SQRT2PI)
            return out
        if f is Family.GEV:
            shape, loc, scale = self.params
            z = (x - loc) / scale
            out = np.zeros_like(x)
            if abs(shape) < _GUMBEL_EPS:
                t = np.exp(-z)
                return t * np.exp(-t) / scale
            w = 1.0 + shape * z
            inside = w > 0
            t = w[inside] ** (-1.0 / shape)
            out[inside] = t ** (shape + 1.0) * np.exp(-t) / scale
            return out
        if f is Family.WEIBULL:
            shape, scale = self.params
            out = np.zeros_like(x)
            pos = x > 0
            y = x[pos] / scale
            out[pos] = (shape / scale) * y ** (shape - 1.0) * np.exp(-(y**shape))
            return out
        if f is Family.PARETO:
            x_min, alpha = self.params
            out = np.zeros_like(x)
            above = x >= x_min
            out[above] = alpha * x_min**alpha / x[above] ** (alpha + 1.0)
            return out
        rate = self.params[0]
        out = np.zeros_like(x)
        pos = x >= 0
        out[pos] = rate * np.exp(-rate * x[pos])
        return out

    # -- quantile --------------------------------------------------------------

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        scalar = p_arr.ndim == 0
        p_arr = np.atleast_1d(p_arr)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise ValueError("probability must be strictly inside (0, 1)")
        out = self._quantile(p_arr)
        return float(out[0]) if scalar else out

    def _quantile(self, p: np.ndarray) -> np.ndarray:
        f = self.family
        if f is Family.NORMAL:
            mu, sigma = self.params
            return mu + sigma * norm_ppf(p)
        if f is Family.LOGNORMAL:
            mu, sigma = self.params
            return np.exp(mu + sigma * norm_ppf(p))
        if f is Family.GEV:
            shape, loc, scale = self.params
            if abs(shape) < _GUMBEL_EPS:
                return loc - scale * np.log(-np.log(p))
            return loc + scale * ((-np.log(p)) ** (-shape) - 1.0) / shape
        if f is Family.WEIBULL:
            shape, scale = self.params
            return scale * (-np.log1p(-p)) ** (1.0 / shape)
        if f is Family.PARETO:
            x_min, alpha = self.params
            return x_min * (1.0 - p) ** (-1.0 / alpha)
        rate = self.params[0]
        return -np.log1p(-p) / rate


# ---------------------------------------------------------------------------
# fitting


def _gev_pwm_start(x: np.ndarray) -> tuple[float, float, float]:
    """Probability-weighted-moment estimate of (shape, location, scale)."""
    xs = np.sort(x)
    n = len(xs)
    j = np.arange(1, n + 1)
    b0 = xs.mean()
    b1 = np.sum((j - 1) / (n - 1) * xs) / n
    b2 = np.sum((j - 1) * (j - 2) / ((n - 1) * (n - 2)) * xs) / n
    l2 = 2.0 * b1 - b0
    l3 = 6.0 * b2 - 6.0 * b1 + b0
    t3 = l3 / l2
    c = 2.0 / (3.0 + t3) - np.log(2.0) / np.log(3.0)
    k = 7.8590 * c + 2.9554 * c * c
    if abs(k) < 1e-12:
        k = 1e-12
    scale = l2 * k / ((1.0 - 2.0**-k) * _gamma_fn(1.0 + k))
    loc = b0 - scale * (1.0 - _gamma_fn(1.0 + k)) / k
    return -k, float(loc), float(scale)


def _gev_nll(params: np.ndarray, x: np.ndarray) -> float:
    shape, loc, scale = params
    if scale <= 0:
        return np.inf
    z = (x - loc) / scale
    n = len(x)
    if abs(shape) < _GUMBEL_EPS:
        return n * np.log(scale) + float(np.sum(z + np.exp(-z)))
    w = 1.0 + shape * z
    if np.any(w <= 0):
        return np.inf
    lw = np.log(w)
    return n * np.log(scale) + (1.0 / shape + 1.0) * float(np.sum(lw)) + float(
        np.sum(np.exp(-lw / shape))
    )


def _gumbel_moment_start(x: np.ndarray) -> tuple[float, float, float]:
    scale = float(x.std()) * np.sqrt(6.0) / np.pi
    return 1e-3, float(x.mean() - 0.5772156649 * scale), scale


def _repair_start(
    start: tuple[float, float, float], x: np.ndarray
) -> tuple[float, float, float]:
    # The moment start can leave sample points outside the implied support,
    # where the likelihood is infinite; inflating the scale widens the
    # support until every point is interior.
    shape, loc, scale = start
    for _ in range(80):
        if np.isfinite(_gev_nll(np.asarray([shape, loc, scale]), x)):
            return shape, loc, scale
        scale *= 1.5
    return _gumbel_moment_start(x)


def _fit_gev(x: np.ndarray) -> tuple[float, float, float]:
    start = _gev_pwm_start(x)
    if not all(np.isfinite(start)) or start[2] <= 0:
        start = _gumbel_moment_start(x)
    start = _repair_start(start, x)
    if not np.isfinite(_gev_nll(np.asarray(start), x)):
        raise FitError("no usable GEV starting point for this sample")
    res = minimize(
        _gev_nll,
        np.asarray(start),
        args=(x,),
        method="Nelder-Mead",
        options={"maxiter": 2000, "maxfev": 4000, "xatol": 1e-10, "fatol": 1e-10},
    )
    if not np.isfinite(res.fun):
        raise FitError(f"GEV likelihood diverged after {res.nit} iterations")
    if not res.success and res.fun > _gev_nll(np.asarray(start), x):
        raise FitError(f"GEV fit did not converge: {res.message}")
    shape, loc, scale = (float(v) for v in res.x)
    if scale <= 0:
        raise FitError("GEV fit produced a non-positive scale")
    return shape, loc, scale


def _fit_weibull(x: np.ndarray) -> tuple[float, float]:
    # Profile likelihood: the shape solves
    #   sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x) = 0,
    # computed on x/max(x) for overflow safety; the scale follows in closed form.
    log_x = np.log(x)
    mean_log = log_x.mean()
    y = x / x.max()

    def profile(k: float) -> float:
        yk = y**k
        return float(np.sum(yk * log_x) / np.sum(yk) - 1.0 / k - mean_log)

    lo, hi = 1e-3, 1.0
    while profile(hi) < 0:
        hi *= 2.0
        if hi > 1e4:
            raise FitError("Weibull profile equation has no root below shape 1e4")
    if profile(lo) > 0:
        raise FitError("Weibull profile equation has no root above shape 1e-3")
    shape = float(brentq(profile, lo, hi, xtol=1e-12, rtol=1e-14))
    scale = float(x.max() * np.mean(y**shape) ** (1.0 / shape))
    return shape, scale


def fit(family: Family, samples, method: str | None = None) -> FittedDistribution:
    """Fit one family to rate samples.

    `method` selects the Lognormal estimator: "moments" (default) matches
    the sample mean and variance, "mle" uses the log-sample mean and std.
    Other families have a single estimator and reject an explicit method.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 8:
        raise ValueError("need at least 8 samples to fit")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if method is not None and family is not Family.LOGNORMAL:
        raise ValueError(f"{family.value} has no alternative fitting method")

    if family in (Family.LOGNORMAL, Family.WEIBULL, Family.PARETO) and np.any(x <= 0):
        raise FitError(f"{family.value} requires strictly positive samples")

    if family is Family.NORMAL:
        m, v = float(x.mean()), float(x.var())
        if v == 0.0:
            raise FitError("zero variance: Normal fit is degenerate")
        return FittedDistribution(family, (m, float(np.sqrt(v))))

    if family is Family.LOGNORMAL:
        if method in (None, "moments"):
            m, v = float(x.mean()), float(x.var())
            if v == 0.0:
                raise FitError("zero variance: Lognormal fit is degenerate")
            sigma2 = float(np.log1p(v / (m * m)))
            mu = float(np.log(m) - sigma2 / 2.0)
            return FittedDistribution(family, (mu, float(np.sqrt(sigma2))))
        if method == "mle":
            lx = np.log(x)
            s = float(lx.std())
            if s == 0.0:
                raise FitError("zero variance: Lognormal fit is degenerate")
            return FittedDistribution(family, (float(lx.mean()), s))
        raise ValueError(f"unknown Lognormal method {method!r}")

    if family is Family.GEV:
        return FittedDistribution(family, _fit_gev(x))

    if family is Family.WEIBULL:
        if x.var() == 0.0:
            raise FitError("zero variance: Weibull fit is degenerate")
        return FittedDistribution(family, _fit_weibull(x))

    if family is Family.PARETO:
        x_min = float(x.min())
        log_ratio_sum = float(np.sum(np.log(x / x_min)))
        if log_ratio_sum == 0.0:
            raise FitError("zero variance: Pareto fit is degenerate")
        return FittedDistribution(family, (x_min, len(x) / log_ratio_sum))

    if family is Family.EXPONENTIAL:
        m = float(x.mean())
        if m <= 0.0:
            raise FitError("Exponential fit needs a positive sample mean")
        return FittedDistribution(family, (1.0 / m,))

    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Q-Q goodness of fit


@dataclass(frozen=True)
class QQPlot:
    theoretical: np.ndarray  # reference quantiles at i/(n+1)
    observed: np.ndarray  # order statistics
    gamma: float  # linear correlation of the two


def correlation_coefficient(observed, theoretical) -> float:
    """Pearson correlation between order statistics and reference quantiles."""
    obs = np.asarray(observed, dtype=float)
    theo = np.asarray(theoretical, dtype=float)
    if obs.shape != theo.shape or obs.ndim != 1 or len(obs) < 2:
        raise ValueError("need two equal-length vectors of at least 2 points")
    oc = obs - obs.mean()
    tc = theo - theo.mean()
    so = float(np.dot(oc, oc))
    st = float(np.dot(tc, tc))
    if so == 0.0 or st == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    gamma = float(np.dot(oc, tc)) / np.sqrt(so * st)
    return float(np.clip(gamma, -1.0, 1.0))


def qq_pairs(samples, dist: FittedDistribution) -> QQPlot:
    """Pair sorted samples with reference quantiles at the i/(n+1) positions."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 8:
        raise ValueError("need at least 8 samples for a Q-Q plot")
    observed = np.sort(x)
    n = len(x)
    theoretical = dist.quantile(np.arange(1, n + 1) / (n + 1.0))
    return QQPlot(theoretical, observed, correlation_coefficient(observed, theoretical))


@dataclass(frozen=True)
class RankedFit:
    family: Family
    gamma: float | None  # None when the fit failed
    dist: FittedDistribution | None = None
    error: str | None = None


def rank_fits(samples, families: Sequence[Family]) -> list[RankedFit]:
    """Fit every family, score each by Q-Q gamma, and sort best-first.

    Individual fit failures are recorded in the ranking rather than raised;
    only an empty family list or a failure of every family is an error.
    """
    if not families:
        raise ValueError("no families requested")
    ranked: list[RankedFit] = []
    for family in families:
        try:
            dist = fit(family, samples)
            qq = qq_pairs(samples, dist)
            ranked.append(RankedFit(family, qq.gamma, dist))
        except (FitError, ValueError) as exc:
            ranked.append(RankedFit(family, None, None, str(exc)))
    if all(r.gamma is None for r in ranked):
        raise FitError("every requested family failed to fit")
    ranked.sort(key=lambda r: (r.gamma is None, -(r.gamma or 0.0)))
    return ranked
