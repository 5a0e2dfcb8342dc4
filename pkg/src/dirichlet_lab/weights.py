"""Boundary weights omega on (0, pi] and grid certificates for their regularity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._quad import gauss_legendre
from .trends import classify_tail, loglog_fit

TWO_PI = 2.0 * math.pi
T_MIN = 1e-10


@dataclass(frozen=True)
class Weight:
    """A positive weight with its derivative and logarithm.

    ``claims`` records what the constructor knows analytically (for instance
    the concavity exponent bound of a power); certificates never trust it.
    """
    value: Callable
    deriv: Callable
    log: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    claims: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))

    def log_ratio(self, t, s):
        """log(omega(t) / omega(s))."""
        return self.log(np.asarray(t, float)) - self.log(np.asarray(s, float))

    @property
    def vanishes_at_zero(self) -> bool:
        return bool(self.claims.get("zero_at_origin", True))

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items() if not callable(v))
        return f"{self.kind}({ps})"


def power_weight(alpha: float) -> Weight:
    """omega(t) = t^alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a = float(alpha)
    return Weight(
        value=lambda t: np.power(t, a),
        deriv=lambda t: a * np.power(t, a - 1.0),
        log=lambda t: a * np.log(t),
        kind="power",
        params={"alpha": a},
        claims={"increasing": True, "ratio_constant": a, "zero_at_origin": True},
    )


def concave_under_power(w: Weight, gamma: float) -> bool | None:
    """Analytic answer for powers: t^(alpha gamma) is concave iff alpha gamma <= 1."""
    if w.kind == "power":
        return w.params["alpha"] * gamma <= 1.0
    return None


def constant_weight(c: float = 1.0) -> Weight:
    c = float(c)
    if c <= 0:
        raise ValueError("constant must be positive")
    return Weight(
        value=lambda t: np.full(np.shape(t), c),
        deriv=lambda t: np.zeros(np.shape(t)),
        log=lambda t: np.full(np.shape(t), math.log(c)),
        kind="constant",
        params={"c": c},
        claims={"zero_at_origin": False},
    )


def log_power_weight(sigma: float, scale: float = math.e * math.pi) -> Weight:
    """omega(t) = log(scale/t)^(-sigma), increasing and vanishing slowly at 0."""
    s, c = float(sigma), float(scale)
    if s <= 0 or c <= math.pi:
        raise ValueError("need sigma > 0 and scale > pi")
    L = lambda t: np.log(c / np.asarray(t, float))
    return Weight(
        value=lambda t: L(t) ** (-s),
        deriv=lambda t: s * L(t) ** (-s - 1.0) / np.asarray(t, float),
        log=lambda t: -s * np.log(L(t)),
        kind="log_power",
        params={"sigma": s, "scale": c},
        claims={"increasing": True, "zero_at_origin": True},
    )


def product_weight(w1: Weight, w2: Weight) -> Weight:
    return Weight(
        value=lambda t: w1.value(t) * w2.value(t),
        deriv=lambda t: w1.deriv(t) * w2.value(t) + w1.value(t) * w2.deriv(t),
        log=lambda t: w1.log(t) + w2.log(t),
        kind="product",
        params={"factors": f"{w1.describe()}*{w2.describe()}"},
        claims={"zero_at_origin": w1.vanishes_at_zero or w2.vanishes_at_zero},
    )


# ---------------------------------------------------------------------------
# growth gauges

class GrowthGauge:
    """Positive gauge h on (0, 2pi] with its reciprocal integral.

    ``inverse_integral(t)`` is ``int_t^{2pi} ds / h(s)``; when no closed form is
    supplied it is computed on a logarithmic table.  ``floor`` is the smallest s
    at which h is resolved (a gauge built from a truncated set); the divergence
    verdict only looks at panels above it.
    """

    def __init__(self, h: Callable, exponent: float | None = None, name: str = "h",
                 inverse_integral: Callable | None = None, floor: float = 0.0):
        self.h = h
        self.floor = float(floor)
        self.exponent = exponent
        self.name = name
        self._inv = inverse_integral
        self._table = None

    def __call__(self, t):
        return self.h(np.asarray(t, dtype=float))

    def __repr__(self):
        return f"GrowthGauge({self.name})"

    def _build_table(self):
        # x = log(2pi / s) in [0, 700], unit panels
        xs = np.arange(0.0, 701.0)
        g, w = gauss_legendre(16)
        nodes = xs[:-1, None] + g[None, :]
        s = TWO_PI * np.exp(-nodes)
        inc = (s / self.h(s)) @ w
        self._table = (xs, np.concatenate([[0.0], np.cumsum(inc)]), inc)

    def increments(self):
        """Per-unit-log panel values of int ds/h and their log(1/t) positions."""
        if self._table is None:
            self._build_table()
        xs, _, inc = self._table
        keep = xs[1:] <= math.log(TWO_PI / self.floor) if self.floor > 0 else slice(None)
        return (xs[:-1] + 0.5 + math.log(1 / TWO_PI))[keep], inc[keep]

    def inverse_integral(self, t):
        t = np.asarray(t, dtype=float)
        if self._inv is not None:
            return self._inv(t)
        if self._table is None:
            self._build_table()
        xs, cum, _ = self._table
        x = np.log(TWO_PI / t)
        k = np.clip(np.floor(x).astype(int), 0, xs.size - 2)
        g, w = gauss_legendre(16)
        lo = xs[k]
        width = x - lo
        nodes = lo[..., None] + width[..., None] * g
        s = TWO_PI * np.exp(-nodes)
        part = (s / self.h(s)) @ w * width
        return cum[k] + part

    def diverges_at_zero(self) -> bool | None:
        """Verdict on int_0 ds/h = infinity (None when inconclusive)."""
        x, inc = self.increments()
        v = classify_tail(x, inc)
        return None if v.finite is None else (not v.finite)


def power_gauge(p: float) -> GrowthGauge:
    p = float(p)
    if p == 1.0:
        inv = lambda t: np.log(TWO_PI / t)
    else:
        inv = lambda t: (TWO_PI ** (1 - p) - np.asarray(t, float) ** (1 - p)) / (1 - p)
    return GrowthGauge(lambda t: np.power(t, p), exponent=p, name=f"t^{p:g}", inverse_integral=inv)


def t_log_gauge(power: float = 1.0) -> GrowthGauge:
    """h(t) = t log(e*2pi/t)^power."""
    k = float(power)
    c = math.e * TWO_PI
    if k == 1.0:
        inv = lambda t: np.log(np.log(c / np.asarray(t, float)))
    else:
        inv = lambda t: (np.log(c / np.asarray(t, float)) ** (1 - k) - 1.0) / (1 - k)
    return GrowthGauge(lambda t: t * np.log(c / t) ** k, exponent=1.0,
                       name=f"t*log^{k:g}(2e*pi/t)", inverse_integral=inv)


def _tail_divergence(h: GrowthGauge) -> bool:
    verdict = h.diverges_at_zero()
    return bool(verdict)


def capacity_log_weight(h: GrowthGauge, sigma: float, eta: float, alpha: float = 0.5) -> Weight:
    """omega = c t^alpha on (0, eta] and (int_t^{2pi} ds/h)^(-sigma) on (eta, pi].

    The constant c makes omega continuous at eta.
    """
    if not _tail_divergence(h):
        raise ValueError("h does not satisfy the divergence condition: "
                         "int_0 ds/h(s) is finite")
    if not (0 < eta < math.pi):
        raise ValueError("eta must lie in (0, pi)")
    s, a, e = float(sigma), float(alpha), float(eta)
    H_eta = float(h.inverse_integral(e))
    if H_eta <= 0:
        raise ValueError("int_eta^{2pi} ds/h must be positive")
    c = H_eta ** (-s) / e ** a

    def value(t):
        t = np.asarray(t, float)
        out = np.empty(t.shape)
        lo = t <= e
        out[lo] = c * t[lo] ** a
        out[~lo] = h.inverse_integral(t[~lo]) ** (-s)
        return out

    def deriv(t):
        t = np.asarray(t, float)
        out = np.empty(t.shape)
        lo = t <= e
        out[lo] = c * a * t[lo] ** (a - 1)
        H = h.inverse_integral(t[~lo])
        out[~lo] = s * H ** (-s - 1) / h(t[~lo])
        return out

    def log(t):
        t = np.asarray(t, float)
        out = np.empty(t.shape)
        lo = t <= e
        out[lo] = math.log(c) + a * np.log(t[lo])
        out[~lo] = -s * np.log(h.inverse_integral(t[~lo]))
        return out

    return Weight(value, deriv, log, kind="capacity_log",
                  params={"sigma": s, "eta": e, "alpha": a, "gauge": h.name, "c_eta": c},
                  claims={"zero_at_origin": True})


def log_integral_weight(h: GrowthGauge) -> Weight:
    """omega(t) = log int_t^pi ds/h(s)  (decreasing, unbounded at 0)."""
    Hpi = float(h.inverse_integral(math.pi))
    F = lambda t: h.inverse_integral(np.asarray(t, float)) - Hpi

    def value(t):
        return np.log(F(t))

    return Weight(value, lambda t: -1.0 / (h(t) * F(t)), lambda t: np.log(np.log(F(t))),
                  kind="log_integral", params={"gauge": h.name},
                  claims={"zero_at_origin": False})


# ---------------------------------------------------------------------------
# certificates

def certification_grid(n: int = 64, t_min: float = T_MIN, t_max: float = math.pi):
    """Logarithmic grid; doubling the number of intervals nests the old grid."""
    if n < 64:
        raise ValueError("certification grids need at least 64 points")
    x = np.linspace(math.log(t_min), math.log(t_max), n)
    return np.exp(x)


@dataclass
class Check:
    holds: bool
    violation_at: float | None = None
    detail: str = ""

    def __str__(self):
        if self.holds:
            return "holds on tested grid"
        where = f" at t={self.violation_at:.4g}" if self.violation_at is not None else ""
        return f"violated{where}{(': ' + self.detail) if self.detail else ''}"


@dataclass
class CertificateReport:
    weight: str
    gamma: float
    grid_size: int
    checks: dict
    ratio_derivative: tuple[float, float]   # min/max of x w'(x) / (x^2 w'(x^2))
    ratio_value: tuple[float, float]        # min/max of x w(x) / (x^2 w'(x^2))
    ratio_derivative_comparable: bool
    ratio_value_comparable: bool

    def holds(self, name: str) -> bool:
        return self.checks[name].holds

    def summary(self) -> str:
        lines = [f"certificate for {self.weight} (gamma={self.gamma}, grid={self.grid_size})"]
        for k, v in self.checks.items():
            lines.append(f"  {k}: {v}")
        lo, hi = self.ratio_derivative
        lines.append(f"  x w'(x)/(x^2 w'(x^2)) in [{lo:.4g}, {hi:.4g}] "
                     f"comparable={self.ratio_derivative_comparable}")
        lo, hi = self.ratio_value
        lines.append(f"  x w(x)/(x^2 w'(x^2)) in [{lo:.4g}, {hi:.4g}] "
                     f"comparable={self.ratio_value_comparable}")
        return "\n".join(lines)


def _monotone(t, f, increasing: bool, slack: float = 1e-9) -> Check:
    f = np.asarray(f, float)
    d = np.diff(f)
    tol = slack * np.maximum(np.abs(f[:-1]), np.abs(f[1:]))
    bad = d < -tol if increasing else d > tol
    if not np.all(np.isfinite(f)):
        i = int(np.argmin(np.isfinite(f)))
        return Check(False, float(t[i]), "non-finite value")
    if bad.any():
        i = int(np.argmax(bad))
        return Check(False, float(t[i + 1]))
    return Check(True)


def certify(w: Weight, gamma: float, grid: int = 64, t_min: float = T_MIN) -> CertificateReport:
    """Grid certificate for the regularity hypotheses placed on weights.

    Checks: omega increasing; omega(t^gamma) concave; t omega'/omega
    nondecreasing; omega(t^gamma) convex and t|omega'|omega nondecreasing (the
    variant used for decreasing-type bounds).  Also reports the two comparison
    ratios x omega'(x)/(x^2 omega'(x^2)) and x omega(x)/(x^2 omega'(x^2)).
    """
    t = certification_grid(grid, t_min)
    with np.errstate(all="ignore"):
        om = w.value(t)
        dom = w.deriv(t)
        checks = {}
        inc = _monotone(t, om, True)
        if inc.holds and np.any(dom <= 0):
            i = int(np.argmax(dom <= 0))
            inc = Check(False, float(t[i]), "derivative not positive")
        checks["increasing"] = inc
        # omega(s^gamma) as a function of s; concavity through its derivative
        s = t ** (1.0 / gamma)
        dphi = gamma * s ** (gamma - 1.0) * w.deriv(s ** gamma)
        checks["concave_power"] = _monotone(t, dphi, False)
        checks["convex_power"] = _monotone(t, dphi, True)
        checks["ratio_monotone"] = _monotone(t, t * dom / om, True)
        checks["product_monotone"] = _monotone(t, t * np.abs(dom) * om, True)
        x = t[t <= math.sqrt(math.pi)]
        x = x[x * x >= t_min * 1e-10]
        denom = x * x * w.deriv(x * x)
        r1 = x * w.deriv(x) / denom
        r2 = x * w.value(x) / denom
    rng = lambda r: (float(np.nanmin(r)), float(np.nanmax(r))) if np.isfinite(r).any() \
        else (float("nan"),) * 2
    return CertificateReport(w.describe(), gamma, t.size, checks, rng(r1), rng(r2),
                             _ratio_bounded(x, r1), _ratio_bounded(x, r2))


def _ratio_bounded(x, r) -> bool:
    """Comparable means: finite, positive, no power-law trend toward 0, and a
    bounded spread on the grid."""
    r = np.asarray(r, float)
    if r.size < 4 or not np.all(np.isfinite(r)) or np.any(r <= 0):
        return False
    fit = loglog_fit(x, r)
    return bool(abs(fit.slope) < 0.05 and r.max() / r.min() < 100.0)
