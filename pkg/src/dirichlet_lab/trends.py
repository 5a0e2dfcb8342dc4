"""Trend fits used to turn finite scans into bounded / unbounded verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Fit:
    slope: float
    intercept: float
    residual: float   # rms of log-residuals
    n: int

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, float)


def linear_fit(x, y) -> Fit:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2 or np.ptp(x) == 0:
        return Fit(float("nan"), float("nan"), float("nan"), int(x.size))
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (icpt + slope * x)
    return Fit(float(slope), float(icpt), float(np.sqrt(np.mean(res ** 2))), int(x.size))


def loglog_fit(x, y) -> Fit:
    """Slope of log y against log x (non-positive entries are dropped)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    return linear_fit(np.log(x[ok]), np.log(y[ok]))


def log_growth_exponent(delta, values) -> Fit:
    """Exponent p in ``values ~ log(1/delta)^p`` (fit on a log-log-log scale)."""
    delta = np.asarray(delta, float)
    values = np.asarray(values, float)
    ok = (delta > 0) & (delta < 1) & (values > 0)
    return linear_fit(np.log(np.log(1.0 / delta[ok])), np.log(values[ok]))


def running_max(values):
    return np.maximum.accumulate(np.asarray(values, float))


@dataclass
class TailVerdict:
    """Classification of an improper integral near zero from its increments."""
    finite: bool | None          # None: inconclusive
    geometric_rate: float        # slope of log increment per unit of log(1/t)
    power_exponent: float        # p in increment ~ x^{-p}, x = log(1/t)
    partial: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


def classify_tail(x, increments) -> TailVerdict:
    """Decide summability of per-panel increments indexed by ``x = log(1/t)``.

    Geometric decay (in x) or power decay faster than ``x^{-1.1}`` counts as
    convergent; increments that stay flat, grow, or decay no faster than
    ``1/x`` count as divergent.  Anything in between is inconclusive.
    """
    x = np.asarray(x, float)
    inc = np.abs(np.asarray(increments, float))
    partial = np.cumsum(inc)
    if not np.all(np.isfinite(inc)):
        return TailVerdict(False, float("inf"), float("-inf"), partial)
    half = slice(x.size // 2, None)
    xs, ys = x[half], inc[half]
    pos = ys > 0
    if pos.sum() < 3:
        return TailVerdict(True, float("-inf"), float("inf"), partial)
    geo = linear_fit(xs[pos], np.log(ys[pos]))
    pw = linear_fit(np.log(xs[pos]), np.log(ys[pos]))
    p = -pw.slope
    # decay measured relative to what is already accumulated
    if geo.slope < -0.02 and p > 1.5:
        return TailVerdict(True, geo.slope, p, partial)
    if p > 1.1:
        return TailVerdict(True, geo.slope, p, partial)
    if p < 1.0:
        return TailVerdict(False, geo.slope, p, partial)
    return TailVerdict(None, geo.slope, p, partial)


def bounded_verdict(scale, values, grow_tol: float = 0.25, fail_tol: float = 0.6):
    """Verdict on whether ``values`` stay bounded as ``scale -> 0``.

    The fitted exponent is the p of ``values ~ log(1/scale)^p``; it is compared
    with two thresholds, leaving a band in which the scan is inconclusive.
    """
    fit = log_growth_exponent(scale, values)
    if not np.isfinite(fit.slope):
        return INCONCLUSIVE, fit
    if fit.slope <= grow_tol:
        return PASS, fit
    if fit.slope >= fail_tol:
        return FAIL, fit
    return INCONCLUSIVE, fit
