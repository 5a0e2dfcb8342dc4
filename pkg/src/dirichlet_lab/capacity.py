"""Capacity, polarity and cyclicity criteria.

The criteria are sufficient conditions: a divergent integral or series proves
capacity zero, while convergence leaves the criterion silent, except for
Cantor sets, where the series test is an equivalence.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._quad import QuadConfig, gauss_legendre
from .circle_sets import TWO_PI, CantorSpec, CircleSet, chord
from .local_dirichlet import dirichlet_mu
from .measures import BoundaryMeasure, lebesgue
from .outer_functions import OuterDistanceFunction
from .set_classes import ClassReport, k_test, l_test
from .trends import FAIL, PASS, bounded_verdict, classify_tail, linear_fit
from .weights import GrowthGauge, Weight, power_weight

DIVERGES, CONVERGES, INCONCLUSIVE = "diverges", "converges", "inconclusive"


@dataclass
class CapacityReport:
    criterion: str
    verdict: str                 # diverges | converges | inconclusive
    conclusion: str
    trajectory: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)
    rate: float = float("nan")

    def __str__(self):
        return f"{self.criterion}: {self.verdict} ({self.conclusion})"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["position", "partial"])
            for x, v in zip(self.positions, self.trajectory):
                w.writerow([repr(float(x)), repr(float(v))])


def cantor_capacity_series(spec: CantorSpec | None = None, terms: int = 40,
                           log_ratio: Callable[[int], float] | None = None) -> CapacityReport:
    """Partial sums of sum_n 2^-n log(1/(pi rho_1 ... rho_n)).

    ``log_ratio(n)`` may replace the spec when the ratios underflow (it returns
    log rho_n).  Terms with n <= 1 can be negative; they are folded into the
    first partial sum so that the trajectory is nondecreasing.  Terms decaying
    geometrically give a convergent series (positive capacity); terms bounded
    below give divergence (capacity zero).
    """
    if terms < 10:
        raise ValueError("need at least 10 terms")
    if log_ratio is None:
        if spec is None:
            raise ValueError("give a CantorSpec or log_ratio")
        log_ratio = lambda n: math.log(spec.ratio(n))
    n = np.arange(0, terms + 1)
    logs = np.array([0.0] + [-float(log_ratio(k)) for k in range(1, terms + 1)])
    for k in range(1, terms + 1):
        if not logs[k] > math.log(2.0):
            raise ValueError(f"rho_{k} must lie in (0, 1/2)")
    cum = np.cumsum(logs)
    terms_v = 2.0 ** -n * (cum - math.log(math.pi))
    head = float(np.sum(terms_v[:2]))
    traj = head + np.concatenate([[0.0], np.cumsum(terms_v[2:])])
    pos = n[1:]
    tail = terms_v[terms // 2:]
    slope = linear_fit(n[terms // 2:], np.log(tail)).slope
    if slope < math.log(0.9):
        verdict, concl = CONVERGES, "series converges: positive logarithmic capacity"
    elif tail.min() >= 0.5 * tail.max():
        verdict, concl = DIVERGES, "terms bounded below: series diverges, capacity zero"
    else:
        verdict, concl = INCONCLUSIVE, "terms decay too slowly to decide"
    return CapacityReport("Cantor capacity series", verdict, concl, traj, pos, slope)


def _sublevel_profile(E: CircleSet, mu: BoundaryMeasure, floor: float, points_per_octave: int = 4):
    k = np.arange(0, 4000)
    t = 2.0 * 2.0 ** (-k / points_per_octave)
    t = t[t >= floor]
    return t, mu.sublevel_mass(E, t)


def energy_divergence(E: CircleSet, mu: BoundaryMeasure | None = None,
                      quad: QuadConfig = QuadConfig(), floor: float | None = None) -> CapacityReport:
    """Partial integrals of int_eps^1 dt / mu(E_t) as eps decreases to a floor.

    Per-octave increments are classified: flat or growing increments mean
    divergence (capacity zero); summable decay leaves the criterion silent.
    """
    mu = mu or lebesgue()
    fl = floor if floor is not None else max(quad.trust_factor * E.truncation_error, 1e-12)
    # octave panels [2^-(j+1), 2^-j] with Gauss nodes
    J = int(math.floor(math.log2(1.0 / fl)))
    s, w = gauss_legendre(8)
    hi = 2.0 ** -np.arange(J)
    lo = hi / 2.0
    nodes = (lo[:, None] + (hi - lo)[:, None] * s[None, :]).ravel()
    vals = mu.sublevel_mass(E, nodes).reshape(J, s.size)
    with np.errstate(divide="ignore"):
        inc = ((hi - lo)[:, None] * w[None, :] / vals).sum(axis=1)
    x = np.log(1.0 / lo)
    traj = np.cumsum(inc)
    if not np.all(np.isfinite(inc)):
        return CapacityReport("int dt/mu(E_t)", DIVERGES, "mu(E_t) vanishes: integral diverges",
                              traj, lo)
    v = classify_tail(x, inc)
    if v.finite is False:
        return CapacityReport("int dt/mu(E_t)", DIVERGES,
                              "integral diverges: capacity zero", traj, lo, v.power_exponent)
    if v.finite:
        cantor = E.metadata.get("kind") == "cantor" and mu.name == "lebesgue"
        concl = "integral converges: positive capacity" if cantor else \
            "integral converges: criterion silent"
        return CapacityReport("int dt/mu(E_t)", CONVERGES, concl, traj, lo, v.power_exponent)
    return CapacityReport("int dt/mu(E_t)", INCONCLUSIVE, "increment decay undecided", traj, lo,
                          v.power_exponent)


def sublevel_gauge(E: CircleSet, mu: BoundaryMeasure | None = None,
                   per_octave: int = 8, quad: QuadConfig = QuadConfig()) -> GrowthGauge:
    """h(t) = t sup_{s >= t} mu(E_s)/s: the smallest gauge above mu(E_t) with
    h(t)/t nonincreasing.  It is resolved down to the same floor as
    ``energy_divergence``."""
    mu = mu or lebesgue()
    grid = TWO_PI * 2.0 ** (-np.arange(0, 1000 * per_octave) / per_octave)
    # mu(E_s)/s peaks where a gap saturates: add those chords and the diameter
    lens, _ = E.all_gap_lengths(True)
    kinks = chord(np.minimum(np.unique(lens) / 2.0, math.pi))
    grid = np.unique(np.concatenate([grid, kinks[kinks > 0], [2.0]]))[::-1]
    ratio = mu.sublevel_mass(E, grid) / grid
    env = np.maximum.accumulate(ratio)

    def h(t):
        shape = np.shape(t)
        t = np.atleast_1d(np.asarray(t, float)).ravel()
        j = np.searchsorted(-grid, -t, side="right") - 1          # grid[j] >= t
        j = np.clip(j, 0, grid.size - 1)
        own = mu.sublevel_mass(E, t) / t
        return (t * np.maximum(env[j], own)).reshape(shape)

    floor = max(quad.trust_factor * E.truncation_error, 1e-12)
    return GrowthGauge(h, name=f"t sup mu(E_s)/s [{mu.name}]", floor=floor)


# ---------------------------------------------------------------------------
# hypothesis checks shared by the polarity and cyclicity criteria

@dataclass
class Clause:
    name: str
    holds: bool | None
    detail: str

    def __str__(self):
        mark = {True: "holds", False: "fails", None: "undecided"}[self.holds]
        return f"{self.name}: {mark} ({self.detail})"


def _grid(E: CircleSet, quad: QuadConfig, n: int = 64):
    lo = max(quad.trust_factor * E.truncation_error, 1e-10)
    return np.exp(np.linspace(math.log(lo), math.log(1.0), n))


def _o_bound(E, mu, h, quad) -> Clause:
    t = 2.0 ** -np.arange(1, 200)
    t = t[t >= max(quad.trust_factor * E.truncation_error, 1e-12)]
    m = mu.sublevel_mass(E, t)
    hv = np.asarray(h(t), float)
    r = m / hv
    if np.all(r == 0):
        return Clause("mu(E_t) = O(h(t))", True, "mu(E_t) vanishes near 0")
    verdict, fit = bounded_verdict(t, np.maximum.accumulate(r), 0.2, 0.4)
    if verdict == PASS:
        return Clause("mu(E_t) = O(h(t))", True, f"sup ratio {r.max():.4g}")
    return Clause("mu(E_t) = O(h(t))", False if verdict == FAIL else None,
                  f"ratio grows like log(1/t)^{fit.slope:.3g} (last ratio {r[-1]:.4g})")


def _monotone_ratio(t, f, increasing: bool, slack: float = 1e-9) -> bool:
    d = np.diff(f) if increasing else -np.diff(f)
    return bool(np.all(d >= -slack * np.abs(f[1:])))


def _shape_clauses(h, grid) -> list[Clause]:
    hv = np.asarray(h(grid), float)
    c1 = _monotone_ratio(grid, hv / grid, increasing=False)
    sig = [2.0 ** -k for k in range(1, 11)]
    found = [s for s in sig if _monotone_ratio(grid, hv / grid ** s, increasing=True)]
    return [Clause("h(t)/t decreasing", c1, "checked on a logarithmic grid"),
            Clause("h(t)/t^s increasing for some s > 0", bool(found),
                   f"s = {found[0]:g}" if found else "no s in 2^-k, k = 1..10")]


def _divergence_clause(h: GrowthGauge) -> Clause:
    d = h.diverges_at_zero()
    detail = {True: "int dt/h diverges", False: "int dt/h converges", None: "undecided"}[d]
    return Clause("int_0 dt/h(t) = infinity", d, detail)


@dataclass
class CriterionVerdict:
    verdict: str
    clauses: list

    @property
    def failing(self):
        return [c for c in self.clauses if c.holds is not True]

    def summary(self) -> str:
        return "\n".join([self.verdict] + ["  " + str(c) for c in self.clauses])


def polarity_check(E: CircleSet, mu: BoundaryMeasure | None = None, h: GrowthGauge | None = None,
                   quad: QuadConfig = QuadConfig(), class_report: ClassReport | None = None
                   ) -> CriterionVerdict:
    """All hypotheses of the L2 polarity criterion; 'polar' when every one holds."""
    mu = mu or lebesgue()
    h = h or sublevel_gauge(E, mu, quad=quad)
    rep = class_report or l_test(E, 2, quad=quad)
    clauses = [Clause("E in L2", rep.verdict == PASS if rep.verdict != "inconclusive" else None,
                      str(rep))]
    clauses.append(_o_bound(E, mu, h, quad))
    clauses += _shape_clauses(h, _grid(E, quad))
    div = _divergence_clause(h)
    clauses.append(div)
    if div.holds is False:
        return CriterionVerdict("criterion silent: int dt/h converges", clauses)
    if all(c.holds is True for c in clauses):
        return CriterionVerdict("polar: capacity zero", clauses)
    return CriterionVerdict("hypotheses not met", clauses)


def cyclicity_check(w, E: CircleSet, mu: BoundaryMeasure | None = None,
                    h: GrowthGauge | None = None, quad: QuadConfig = QuadConfig(),
                    threads: int = 1, class_report: ClassReport | None = None
                    ) -> CriterionVerdict:
    """Hypotheses of the cyclicity criterion for f_{omega,E} in D(mu):
    E is a K-set, mu(E_t) = O(h), h/t decreasing, h/t^s increasing for some s,
    int dt/h divergent and f in D(mu)."""
    if not isinstance(w, Weight):
        w = power_weight(float(w))
    mu = mu or lebesgue()
    h = h or sublevel_gauge(E, mu, quad=quad)
    rep = class_report or k_test(E, quad)
    clauses = [Clause("E is a K-set", rep.verdict == PASS if rep.verdict != "inconclusive" else None,
                      str(rep))]
    clauses.append(_o_bound(E, mu, h, quad))
    clauses += _shape_clauses(h, _grid(E, quad))
    clauses.append(_divergence_clause(h))
    f = OuterDistanceFunction(w, E)
    try:
        res = dirichlet_mu(f, mu, quad, threads) if (mu.density is not None or mu.atoms) else None
        ok = True if res is None else res.finite
        detail = "D_mu(f) = 0" if res is None else (
            f"D_mu(f) = {res.value:.6g}" if res.finite else f"D_mu(f) = inf ({res.diagnostic})")
    except (RuntimeError, ValueError) as exc:
        ok, detail = None, f"not computed: {exc}"
    clauses.append(Clause("f in D(mu)", ok, detail))
    if all(c.holds is True for c in clauses):
        return CriterionVerdict("cyclic", clauses)
    return CriterionVerdict("hypotheses not met", clauses)
