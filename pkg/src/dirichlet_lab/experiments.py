"""Ratio experiments shared by the command line, the scripts and the tests.

Each function returns plain rows (lists of floats) plus a short fitted summary,
so that the same numbers can be printed, written to CSV or asserted on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import QuadConfig
from .carleson import MultiplierVerdict, multiplier_verdict
from .circle_sets import (CantorSpec, CircleSet, arc_from_chord, build_cantor,
                          build_theta_sequence, dist_to_set, theta_steps)
from .local_dirichlet import EnergyResult, dirichlet_energy, rs_local_many
from .measures import from_weight
from .outer_functions import OuterDistanceFunction
from .trends import Fit, linear_fit
from .weights import Weight, power_weight

LOCAL_HEADER = ["zeta", "delta", "D_zeta", "over_I", "over_Gamma", "over_Sigma", "ratio_to_model"]


@dataclass
class RatioTable:
    """D_zeta(f) / delta^(2 alpha - 1) at boundary points, with a log-log trend."""
    rows: list
    band: float
    trend: Fit
    header: list = field(default_factory=lambda: list(LOCAL_HEADER))

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r[6] for r in self.rows])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def summary(self) -> str:
        return (f"{len(self.rows)} points, ratio in [{self.ratios.min():.6g}, {self.ratios.max():.6g}], "
                f"spread {self.band:.4g}, trend exponent {self.trend.slope:.4f} "
                f"against log log(1/delta)")


def trusted_points(E: CircleSet, thetas, quad: QuadConfig = QuadConfig()) -> np.ndarray:
    """Drop the points whose distance to a truncated set is not resolved."""
    th = np.asarray(thetas, float)
    if E.truncation_error <= 0:
        return th
    return th[dist_to_set(th, E) >= quad.trust_factor * E.truncation_error]


def cantor_probe_points(E: CircleSet, octaves=range(2, 15)) -> np.ndarray:
    """Points at chordal distance pi 2^-k from the end of the largest gap, plus the
    midpoint of one gap per length class."""
    g = int(np.argmax(E.lengths))
    u = math.pi * 2.0 ** -np.asarray(list(octaves), float)
    inner = E.starts[g] + arc_from_chord(u)
    key = np.round(np.log(E.lengths), 9)
    mids = []
    for k in np.unique(key):
        i = int(np.nonzero(key == k)[0][0])
        mids.append(E.starts[i] + E.lengths[i] / 2.0)
    return np.concatenate([inner, mids])


def sequence_mid_gap_points(E: CircleSet, count: int = 40, largest_index: float = 1e4) -> np.ndarray:
    """Midpoints of the gaps between consecutive points of a one-sided
    sequence e^{-i/n}, for n spread logarithmically."""
    gamma = float(E.metadata.get("gamma", 1.0))
    n = np.unique(np.round(np.logspace(0, math.log10(largest_index), count)).astype(int))
    a, b = n ** -gamma, (n + 1.0) ** -gamma
    return -(a + b) / 2.0


def free_side_points(E: CircleSet, octaves=range(1, 15)) -> np.ndarray:
    """Points e^{iu} at chordal distance pi 2^-k from the accumulation point 1 on
    the side of a one-sided sequence that carries no points."""
    u = math.pi * 2.0 ** -np.asarray(list(octaves), float)
    return arc_from_chord(u)


def local_ratio_table(w: Weight, E: CircleSet, thetas, quad: QuadConfig = QuadConfig(),
                      min_delta: float = 0.0, max_delta: float = math.inf) -> RatioTable:
    """D_zeta(f_{omega,E}) at the given points, normalised by delta^(2 alpha - 1).

    The trend is the slope of log(ratio) against log log(1/delta) over
    delta < 1/e; a log^k(1/delta) factor shows up as slope k.
    """
    alpha = float(w.params.get("alpha", 0.5)) if w.kind == "power" else 0.5
    f = OuterDistanceFunction(w, E)
    th = trusted_points(E, thetas, quad)
    res = rs_local_many(f, th, quad)
    rows = []
    for t, r in zip(th, res):
        if not (min_delta <= r.delta <= max_delta):
            continue
        ratio = r.total / r.delta ** (2.0 * alpha - 1.0)
        rows.append([float(t), r.delta, r.total, r.over_I, r.over_Gamma, r.over_Sigma, ratio])
    rows.sort(key=lambda r: -r[1])
    d = np.array([r[1] for r in rows])
    q = np.array([r[6] for r in rows])
    band = float(q.max() / q.min()) if q.size and q.min() > 0 else math.inf
    use = d < math.exp(-1.0)
    trend = linear_fit(np.log(np.log(1.0 / d[use])), np.log(q[use])) if use.sum() >= 3 else \
        Fit(float("nan"), float("nan"), float("nan"), int(use.sum()))
    return RatioTable(rows, band, trend)


@dataclass
class NecessaryTrend:
    """mu(I_N) log(1/|I_N|) on the arcs I_N = [1, e^{i theta_N}] of a theta_n-set."""
    alpha: float
    beta: float
    rows: list
    trend: Fit

    def summary(self) -> str:
        return (f"alpha={self.alpha:g} beta={self.beta:g}: fitted exponent of "
                f"mu(I_N) log(1/|I_N|) against log N = {self.trend.slope:.4f} "
                f"(log-log model {2.0 - self.beta:g})")


def theta_necessary_trend(alpha: float, beta: float, n_max: int = 10 ** 6,
                          points: int = 16) -> NecessaryTrend:
    """Measure of the arcs [0, theta_N] for mu = dist omega'(dist)^2 |dzeta| with
    omega = t^alpha, on the theta_n-set built through n_max; the trend is fitted
    as a power of log N."""
    E = build_theta_sequence(alpha, beta, n_max + 1)
    mu = from_weight(power_weight(alpha), E)
    first = int(E.metadata["first_index"])
    ns = np.unique(np.round(np.logspace(math.log10(max(first + 1, 10)), math.log10(n_max),
                                        points)).astype(int))
    t = theta_steps(np.arange(first, n_max + 1, dtype=float), alpha, beta)
    # theta_N = theta_{n_max + 1} + sum_{N <= k <= n_max} t_k
    tail = float(E.metadata["theta_N"])
    suffix = np.cumsum(t[::-1])[::-1] + tail
    theta_N = suffix[ns - first]
    mass = mu.arc_mass(np.zeros(ns.size), theta_N)
    val = mass * np.log(1.0 / theta_N)
    rows = [[float(n), float(l), float(m), float(v)] for n, l, m, v in zip(ns, theta_N, mass, val)]
    trend = linear_fit(np.log(np.log(ns.astype(float))), np.log(val))
    return NecessaryTrend(alpha, beta, rows, trend)


@dataclass
class ThresholdPoint:
    ratio: float
    alpha: float
    dimension: float
    energy: EnergyResult
    multiplier: MultiplierVerdict | None

    @property
    def in_D(self) -> bool | None:
        return self.energy.finite

    def row(self) -> list:
        mv = self.multiplier
        return [self.ratio, self.alpha, self.alpha / (self.dimension / 2.0), self.energy.value,
                float(bool(self.energy.finite)), self.energy.growth_exponent,
                float("nan") if mv is None or mv.in_D is None else float(mv.in_D),
                float("nan") if mv is None or mv.multiplier is None else float(mv.multiplier)]


THRESHOLD_HEADER = ["ratio", "alpha", "alpha_over_half_dim", "energy", "finite",
                    "growth_exponent", "verdict_in_D", "verdict_multiplier"]


def cantor_dimension(ratio: float) -> float:
    return math.log(2.0) / math.log(1.0 / ratio)


def threshold_scan(ratio: float, depth: int = 14, factors=(0.95, 1.05),
                   quad: QuadConfig = QuadConfig(), threads: int = 1,
                   with_verdict: bool = True) -> list[ThresholdPoint]:
    """Energy of f_{alpha,E} and the multiplier verdict at alpha = factor * dim/2."""
    E = build_cantor(CantorSpec(ratio, depth))
    dim = cantor_dimension(ratio)
    out = []
    for fac in factors:
        a = fac * dim / 2.0
        w = power_weight(a)
        en = dirichlet_energy(OuterDistanceFunction(w, E), quad, threads)
        mv = multiplier_verdict(w, E, quad) if with_verdict else None
        out.append(ThresholdPoint(ratio, a, dim, en, mv))
    return out
