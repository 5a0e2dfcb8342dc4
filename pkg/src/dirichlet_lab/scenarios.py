"""Scenario runner: a config names a set, a weight, a measure and a pipeline of
steps; each step writes one CSV and one summary block.

Exit status: 0 when every step completes, 2 when a step reports that the
hypotheses of its criterion are not met, 1 on a numerical failure.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import capacity, carleson, experiments, set_classes
from .circle_sets import (TWO_PI, CantorSpec, CircleSet, gap_counting, pushforward_integral,
                          sublevel_length)
from .config import ConfigError, ScenarioConfig, option, parse_scenario
from .local_dirichlet import UntrustedRegime, dirichlet_energy, dirichlet_mu
from .outer_functions import OuterDistanceFunction, carleson_check
from .weights import power_gauge

EXIT_OK, EXIT_NUMERICAL, EXIT_HYPOTHESIS = 0, 1, 2


@dataclass
class StepResult:
    name: str
    summary: str
    header: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    status: int = EXIT_OK
    values: dict = field(default_factory=dict)


@dataclass
class RunResult:
    scenario: str
    status: int
    steps: list
    artifacts: list

    def summary(self) -> str:
        out = [f"scenario {self.scenario}: exit status {self.status}"]
        for s in self.steps:
            out.append(f"[{s.name}]")
            out += ["  " + line for line in s.summary.splitlines()]
        return "\n".join(out)


class Context:
    """Objects built once from the config and shared by the steps."""

    def __init__(self, cfg: ScenarioConfig, threads: int = 1, rel_tol: float | None = None):
        self.cfg = cfg
        self.threads = threads
        q = cfg.quad
        if rel_tol is not None:
            q = replace(q, rel_tol=rel_tol)
        self.quad = q.build()
        self._set = None

    @property
    def set(self) -> CircleSet:
        if self._set is None:
            self._set = self.cfg.set.build()
        return self._set

    @property
    def weight(self):
        return self.cfg.weight.build()

    @property
    def measure(self):
        return self.cfg.measure.build(self.set, self.weight)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# steps

def step_set_stats(ctx: Context) -> StepResult:
    E = ctx.set
    t = np.exp(np.linspace(math.log(1e-6), math.log(2.0), 100))
    rows, ok = [], True
    for x in t:
        n = gap_counting(E, x)
        length = float(sublevel_length(E, x))
        ok &= x * n <= length * (1 + 1e-12)
        rows.append([x, n, length])
    agree = []
    for name, om in (("t^0.2", lambda s: np.power(s, 0.2)), ("log(e/t)", lambda s: np.log(math.e / s))):
        a = pushforward_integral(om, E, "exact_gaps").value
        b = pushforward_integral(om, E, "counting").value
        agree.append(f"{name}: exact_gaps {a:.12g}, counting {b:.12g}, rel diff {abs(a - b) / abs(a):.2e}")
    summary = "\n".join([repr(E), f"total gap length {E.total_gap_length:.15g} (2pi = {TWO_PI:.15g})",
                         f"t N_E(t) <= |E_t| on 100 grid values: {'holds' if ok else 'violated'}"]
                        + agree)
    return StepResult("set_stats", summary, ["t", "N_E", "sublevel_length"], rows,
                      EXIT_OK if ok else EXIT_NUMERICAL)


def _probe_points(ctx: Context):
    E = ctx.set
    if E.metadata.get("kind") == "cantor":
        return experiments.cantor_probe_points(E)
    return experiments.free_side_points(E)


def step_local_ratio(ctx: Context) -> StepResult:
    pts = option(ctx.cfg, "points", None, list)
    pts = _probe_points(ctx) if pts is None else np.asarray(pts, float)
    tab = experiments.local_ratio_table(ctx.weight, ctx.set, pts, ctx.quad)
    return StepResult("local_ratio", tab.summary(), tab.header, tab.rows,
                      values={"band": tab.band, "trend": tab.trend.slope})


def _class_step(name: str, run: Callable) -> Callable:
    def step(ctx: Context) -> StepResult:
        rep = run(ctx)
        m = rep.metadata
        if "delta" in m:
            header, rows = ["delta", "value", "running_sup"], list(zip(m["delta"], m["value"], m["running_sup"]))
        else:
            header, rows = ["arc_length", "min_ratio"], list(zip(m["scales"], m["min_ratio"]))
        return StepResult(name, str(rep), header, [list(r) for r in rows],
                          values={"verdict": rep.verdict})
    return step


def step_equivalents(ctx: Context) -> StepResult:
    beta = option(ctx.cfg, "beta", 0.5)
    rep = set_classes.kset_equivalents(ctx.set, beta, quad=ctx.quad)
    t, frac = rep.sublevel_profile if rep.sublevel_profile else ((), ())
    return StepResult("class_equivalents", rep.summary(), ["threshold_ratio", "sup_fraction"],
                      [[a, b] for a, b in zip(t, frac)],
                      values={"sublevel_exponent": rep.sublevel_exponent})


def step_energy(ctx: Context) -> StepResult:
    res = dirichlet_energy(OuterDistanceFunction(ctx.weight, ctx.set), ctx.quad, ctx.threads)
    rows = [[s, i, c] for s, i, c in zip(res.scales, res.increments, res.trajectory)]
    summ = (f"energy {res.value:.10g} ({'finite' if res.finite else 'divergent'}); "
            f"{res.diagnostic}")
    return StepResult("energy", summ, ["gap_length", "increment", "partial"], rows,
                      values={"finite": res.finite, "value": res.value})


def step_mu_energy(ctx: Context) -> StepResult:
    res = dirichlet_mu(OuterDistanceFunction(ctx.weight, ctx.set), ctx.measure, ctx.quad, ctx.threads)
    rows = [[s, i, c] for s, i, c in zip(res.scales, res.increments, res.trajectory)] \
        if res.trajectory is not None else []
    return StepResult("mu_energy", f"D_mu(f) = {res.value:.10g}; {res.diagnostic}",
                      ["gap_length", "increment", "partial"], rows,
                      values={"finite": res.finite, "value": res.value})


def step_carleson_set(ctx: Context) -> StepResult:
    r = carleson_check(ctx.set, ctx.weight)
    return StepResult("carleson_set", f"int |log omega(dist)| = {r.value:.10g} "
                      f"({'finite' if r.finite else 'divergent'})", ["value"], [[r.value]])


def _scan_rows(scan):
    return ["arc_start", "arc_length", "mass", "energy", "ratio"], [list(r) for r in scan.rows]


def step_ars(ctx: Context) -> StepResult:
    scan = carleson.ars_boundary_test(ctx.measure, E=ctx.set)
    h, rows = _scan_rows(scan)
    return StepResult("ars", str(scan), h, rows, values={"verdict": scan.verdict})


def step_cn(ctx: Context) -> StepResult:
    scan = carleson.necessary_log_test(ctx.measure, E=ctx.set)
    h, rows = _scan_rows(scan)
    return StepResult("cn", str(scan), h, rows, values={"verdict": scan.verdict})


def step_onebox(ctx: Context) -> StepResult:
    E = ctx.set
    if E.metadata.get("kind") != "cantor":
        return StepResult("onebox", "hypotheses not met: the bundled gauge needs a Cantor set",
                          status=EXIT_HYPOTHESIS)
    rep = carleson.one_box_test(ctx.measure, carleson.cantor_gauge(E, ctx.weight), E=E)
    return StepResult("onebox", str(rep), ["arc_start", "arc_length", "mass", "gauge", "ratio"],
                      [list(r) for r in rep.rows], values={"verdict": rep.verdict})


def step_multiplier(ctx: Context) -> StepResult:
    mv = carleson.multiplier_verdict(ctx.weight, ctx.set, ctx.quad)
    status = EXIT_HYPOTHESIS if mv.reason.startswith("hypotheses not met") else EXIT_OK
    return StepResult("multiplier", mv.summary(), ["in_D", "multiplier"],
                      [[mv.in_D, mv.multiplier]], status,
                      values={"in_D": mv.in_D, "multiplier": mv.multiplier})


def step_capacity_series(ctx: Context) -> StepResult:
    s = ctx.cfg.set
    terms = option(ctx.cfg, "terms", 40, int)
    if ctx.cfg.options.get("rule") == "doubly_exponential":
        # rho_n = 2^(-2^n)
        rep = capacity.cantor_capacity_series(None, terms, lambda n: -(2.0 ** n) * math.log(2.0))
    else:
        rep = capacity.cantor_capacity_series(CantorSpec(s.ratio, s.depth), terms)
    return StepResult("capacity_series", str(rep), ["term", "partial"],
                      [[x, v] for x, v in zip(rep.positions, rep.trajectory)],
                      values={"verdict": rep.verdict})


def step_energy_divergence(ctx: Context) -> StepResult:
    rep = capacity.energy_divergence(ctx.set, ctx.measure, ctx.quad)
    return StepResult("energy_divergence", str(rep), ["t", "partial"],
                      [[x, v] for x, v in zip(rep.positions, rep.trajectory)],
                      values={"verdict": rep.verdict})


def _gauge(ctx: Context):
    p = option(ctx.cfg, "gauge_power", None)
    return None if p is None else power_gauge(p)


def step_polarity(ctx: Context) -> StepResult:
    v = capacity.polarity_check(ctx.set, ctx.measure, _gauge(ctx), ctx.quad)
    status = EXIT_HYPOTHESIS if v.verdict == "hypotheses not met" else EXIT_OK
    return StepResult("polarity", v.summary(), ["clause", "holds", "detail"],
                      [[c.name, c.holds, c.detail] for c in v.clauses], status,
                      values={"verdict": v.verdict})


def step_cyclicity(ctx: Context) -> StepResult:
    v = capacity.cyclicity_check(ctx.weight, ctx.set, ctx.measure, _gauge(ctx), ctx.quad, ctx.threads)
    status = EXIT_HYPOTHESIS if v.verdict == "hypotheses not met" else EXIT_OK
    return StepResult("cyclicity", v.summary(), ["clause", "holds", "detail"],
                      [[c.name, c.holds, c.detail] for c in v.clauses], status,
                      values={"verdict": v.verdict})


def step_threshold(ctx: Context) -> StepResult:
    s = ctx.cfg.set
    ratios = option(ctx.cfg, "ratios", [s.ratio], list)
    factors = option(ctx.cfg, "factors", [0.95, 1.05], list)
    rows, lines, flips = [], [], True
    for r in ratios:
        pts = experiments.threshold_scan(r, s.depth, factors, ctx.quad, ctx.threads)
        for p in pts:
            rows.append(p.row())
            mv = p.multiplier
            lines.append(f"ratio {r:.6g} alpha {p.alpha:.6g} ({p.alpha / (p.dimension / 2):.3f} x dim/2): "
                         f"energy {'finite' if p.energy.finite else 'divergent'}, "
                         f"verdict in D {mv.in_D}, multiplier {mv.multiplier}")
        below = [p for p in pts if p.alpha < p.dimension / 2]
        above = [p for p in pts if p.alpha > p.dimension / 2]
        flips &= all(p.energy.finite is False for p in below) and all(p.energy.finite for p in above)
    lines.append("membership flips across alpha = dim/2: " + ("yes" if flips else "no"))
    return StepResult("threshold", "\n".join(lines), experiments.THRESHOLD_HEADER, rows,
                      values={"flips": flips})


def step_theta_trend(ctx: Context) -> StepResult:
    s = ctx.cfg.set
    betas = option(ctx.cfg, "betas", [s.beta], list)
    n_max = option(ctx.cfg, "n_max", 10 ** 6, int)
    rows, lines = [], []
    for b in betas:
        tr = experiments.theta_necessary_trend(s.alpha, b, n_max)
        rows += [[b] + r for r in tr.rows]
        lines.append(tr.summary())
    return StepResult("theta_trend", "\n".join(lines), ["beta", "N", "arc_length", "mass", "value"], rows)


STEPS: dict[str, Callable[[Context], StepResult]] = {
    "set_stats": step_set_stats,
    "local_ratio": step_local_ratio,
    "class_k": _class_step("class_k", lambda c: set_classes.k_test(c.set, c.quad)),
    "class_l1": _class_step("class_l1", lambda c: set_classes.l_test(c.set, 1, quad=c.quad)),
    "class_l2": _class_step("class_l2", lambda c: set_classes.l_test(c.set, 2, quad=c.quad)),
    "class_equivalents": step_equivalents,
    "carleson_set": step_carleson_set,
    "energy": step_energy,
    "mu_energy": step_mu_energy,
    "ars": step_ars,
    "cn": step_cn,
    "onebox": step_onebox,
    "multiplier": step_multiplier,
    "capacity_series": step_capacity_series,
    "energy_divergence": step_energy_divergence,
    "polarity": step_polarity,
    "cyclicity": step_cyclicity,
    "threshold": step_threshold,
    "theta_trend": step_theta_trend,
}


# ---------------------------------------------------------------------------
# bundled scenarios

BUNDLED = {
    "cantor-alpha0.3": """
[scenario]
name = cantor-alpha0.3
description = D_zeta(f_alpha) / dist^(2 alpha - 1) over dyadic distances for the middle-third Cantor set
pipeline = set_stats, local_ratio, class_k
[set]
kind = cantor
ratio = 1/3
depth = 14
[weight]
kind = power
alpha = 0.3
""",
    "F-log2": """
[scenario]
name = F-log2
description = growth of the L2 integral and of the local ratio on the one-sided sequence e^(-i/n)
pipeline = class_l2, local_ratio
[set]
kind = one_sided
gamma = 1
count = 65536
[weight]
kind = power
alpha = 0.3
""",
    "cantor-threshold": """
[scenario]
name = cantor-threshold
description = membership of f_alpha in D flips at alpha = dim/2 for Cantor sets
pipeline = threshold
ratios = 1/3, 1/4
factors = 0.95, 1.05
[set]
kind = cantor
depth = 14
""",
    "theta-necessary": """
[scenario]
name = theta-necessary
description = mu(I_N) log(1/|I_N|) on the theta_n-set for alpha = 1/4
pipeline = theta_trend
betas = 1.5, 3
n_max = 1000000
[set]
kind = theta
alpha = 0.25
beta = 3
""",
    "cantor-capacity": """
[scenario]
name = cantor-capacity
description = capacity series and polarity criteria on the middle-third Cantor set
pipeline = capacity_series, energy_divergence, polarity
[set]
kind = cantor
ratio = 1/3
depth = 14
""",
    "point-cyclic": """
[scenario]
name = point-cyclic
description = cyclicity hypotheses for (1 - z)^0.3 with Lebesgue measure and h(t) = t
pipeline = cyclicity
gauge_power = 1
[set]
kind = point
[weight]
kind = power
alpha = 0.3
""",
}


def bundled(name: str) -> ScenarioConfig:
    if name not in BUNDLED:
        raise ConfigError(f"no bundled scenario {name!r}; available: {', '.join(sorted(BUNDLED))}")
    return parse_scenario(BUNDLED[name], name)


def validate(cfg: ScenarioConfig) -> None:
    """Resolve every reference before anything runs."""
    bad = [s for s in cfg.pipeline if s not in STEPS]
    if bad:
        raise ConfigError(f"unknown pipeline steps: {', '.join(bad)}")
    cfg.weight.build()
    if cfg.set.kind not in ("cantor",) and any(s in ("capacity_series", "threshold") for s in cfg.pipeline):
        raise ConfigError("capacity_series and threshold need a Cantor set")


def write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def run(cfg: ScenarioConfig, out_dir=None, threads: int = 1, rel_tol: float | None = None,
        log: Callable[[str], None] | None = None) -> RunResult:
    validate(cfg)
    ctx = Context(cfg, threads, rel_tol)
    out = Path(out_dir if out_dir is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = cfg.output.prefix or cfg.name
    steps, artifacts, status = [], [], EXIT_OK
    for name in cfg.pipeline:
        t0 = time.perf_counter()
        try:
            res = STEPS[name](ctx)
        except (RuntimeError, FloatingPointError, ArithmeticError, UntrustedRegime) as exc:
            res = StepResult(name, f"numerical failure: {exc}", status=EXIT_NUMERICAL)
        if res.rows:
            path = out / f"{prefix}_{name}.csv"
            write_rows(path, res.header, res.rows)
            artifacts.append(path)
        steps.append(res)
        if log:
            log(f"[{name}] {time.perf_counter() - t0:.1f}s\n  " + res.summary.replace("\n", "\n  "))
        if res.status == EXIT_NUMERICAL:
            status = EXIT_NUMERICAL
        elif res.status == EXIT_HYPOTHESIS and status == EXIT_OK:
            status = EXIT_HYPOTHESIS
    result = RunResult(cfg.name, status, steps, artifacts)
    summary = out / f"{prefix}_summary.txt"
    summary.write_text(result.summary() + "\n")
    artifacts.append(summary)
    return result
