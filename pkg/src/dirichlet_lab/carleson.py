"""Carleson-measure tests for the Dirichlet space and the multiplier pipeline.

Whether a measure is a Carleson measure cannot be decided from finite data.
The verdict combines a sufficient test (one box with an integrable gauge) and a
necessary test (mass times log(1/|I|) bounded), with the logarithmic energy
test on arcs as a tie breaker.  All scans report the extreme ratio, its
witness arc and the trend fitted over shrinking arcs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import QuadConfig, ladder
from .circle_sets import TWO_PI, CircleSet, chord, gap_counting, normalize, pushforward_integral
from .measures import BoundaryMeasure, DiskMeasure, atoms_only, dist_power, from_weight, lebesgue
from .outer_functions import carleson_check
from .set_classes import ClassReport, arc_family, l_test
from .trends import (FAIL, INCONCLUSIVE, PASS, Fit, bounded_verdict, classify_tail,
                     linear_fit)
from .weights import Weight, power_weight


@dataclass
class ArcScan:
    """Per-arc rows (start, length, mass, numerator, ratio) and their summary."""
    name: str
    verdict: str
    sup_ratio: float
    witness: tuple
    fit: Fit | None
    rows: np.ndarray = field(repr=False)
    note: str = ""

    def __str__(self):
        fit = "" if self.fit is None else f", trend exponent {self.fit.slope:.3f}"
        note = f" [{self.note}]" if self.note else ""
        return (f"{self.name}: {self.verdict} (sup ratio {self.sup_ratio:.6g}{fit}; "
                f"witness arc start={self.witness[0]:.6g} length={self.witness[1]:.6g}){note}")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["arc_start", "arc_length", "mass", "energy", "ratio"])
            for r in self.rows:
                w.writerow([repr(float(v)) for v in r])


def _atom_arcs(anchors, lengths=None):
    """Arcs starting at, ending at and centred on each anchor (dyadic lengths by default)."""
    anc = np.unique(np.asarray(anchors, float))
    L = TWO_PI * 2.0 ** -np.arange(1, 31) if lengths is None else np.unique(lengths)
    A, Lg = np.meshgrid(anc, L, indexing="ij")
    A, Lg = A.ravel(), Lg.ravel()
    return normalize(np.concatenate([A - Lg / 2, A, A - Lg])), np.concatenate([Lg, Lg, Lg])


def _default_arcs(mu: BoundaryMeasure, E: CircleSet | None, max_anchors: int, kinds=None):
    S = E if E is not None else mu.set
    atoms = [p.theta for p, m in mu.atoms if m > 0]
    if S is None:
        return _atom_arcs(atoms or [0.0])
    starts, lens = arc_family(S, max_anchors=max_anchors)
    if kinds == "centred":
        n = starts.size // 3
        starts, lens = starts[2 * n:], lens[2 * n:]
    if atoms:
        # the arcs through atoms carry their mass at every scale
        a_s, a_l = _atom_arcs(atoms, lens)
        starts, lens = np.concatenate([starts, a_s]), np.concatenate([lens, a_l])
    return starts, lens


def _per_scale(lens, values, pick=np.max):
    scales = np.unique(lens)[::-1]
    return scales, np.array([pick(values[lens == s]) for s in scales])


# ---------------------------------------------------------------------------
# logarithmic energy of arcs

def _segment_log_offsets(k):
    """int_0^1 int_k^{k+1} log|x - y| dy dx for integer offsets k >= 0."""
    G = lambda t: np.where(t == 0, 0.0, 0.5 * t * t * np.log(np.abs(t) + (t == 0)) - 0.75 * t * t)
    k = np.asarray(k, float)
    return G(k + 1) - 2.0 * G(k) + G(k - 1)


def log_energy_bins(masses, width: float, periodic: bool = False, log_plus: bool = False) -> float:
    """sum_ij m_i m_j <log(1/|zeta - xi|)> for equal consecutive bins of arc width
    ``width``, each treated as a uniform patch.

    The arc-length logarithm is integrated in closed form over pairs of
    segments; the smooth ratio between arc length and chord is applied at the
    bin centres.  ``periodic`` closes the bins into the full circle.
    """
    m = np.asarray(masses, float)
    M = m.size
    k = np.arange(M)
    if periodic:
        k_eff = np.minimum(k, M - k)
    else:
        k_eff = k
    arc = k_eff * width
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(arc > 0, np.log(arc / chord(arc)), 0.0)
    kern = -math.log(width) - _segment_log_offsets(k_eff) + corr
    if log_plus:
        kern = np.maximum(kern, 0.0)
    if periodic:
        f = np.fft.rfft(m)
        auto = np.fft.irfft(f * np.conj(f), M)
        return float(np.dot(auto, kern))
    full = np.correlate(m, m, mode="full")[M - 1:]      # sum_i m_i m_{i+k}
    return float(kern[0] * full[0] + 2.0 * np.dot(kern[1:], full[1:]))


def ars_boundary_test(mu: BoundaryMeasure, arcs=None, E: CircleSet | None = None,
                      bins: int = 256, log_plus: bool = False, max_anchors: int = 64,
                      grow_tol: float = 0.2, fail_tol: float = 0.4) -> ArcScan:
    """sup over arcs of int_I int_I log(1/|zeta - xi|) dmu dmu / mu(I).

    ``log_plus`` truncates the kernel at zero.  Arcs with zero mass are skipped.
    The verdict fits the per-scale supremum against log(1/|I|).
    """
    starts, lens = arcs if arcs is not None else _default_arcs(mu, E, max_anchors, "centred")
    starts = np.asarray(starts, float)
    lens = np.asarray(lens, float)
    rows = []
    x = np.arange(bins + 1) / bins
    for s, L in zip(starts, lens):
        L = min(float(L), TWO_PI)
        edges = s + L * x
        cum = mu.arc_mass(np.full(bins + 1, s), edges - s)
        masses = np.diff(cum)
        masses[0] += cum[0]
        total = float(cum[-1])
        if total <= 0:
            continue
        if any(np.mod(p.theta - s, TWO_PI) <= L for p, m in mu.atoms if m > 0):
            rows.append((s, L, total, np.inf, np.inf))
            continue
        en = log_energy_bins(masses, L / bins, periodic=L >= TWO_PI, log_plus=log_plus)
        rows.append((s, L, total, en, en / total))
    rows = np.array(rows) if rows else np.zeros((0, 5))
    return _summarise("ARS energy", rows, grow_tol, fail_tol)


def _summarise(name, rows, grow_tol, fail_tol, var="log"):
    if rows.shape[0] == 0:
        return ArcScan(name, INCONCLUSIVE, float("nan"), (float("nan"), float("nan")), None, rows,
                       "no arc with positive mass")
    lens, ratio = rows[:, 1], rows[:, 4]
    k = int(np.argmax(ratio))
    scales, sups = _per_scale(lens, ratio)
    small = scales < 1.0
    if small.sum() >= 3:
        if np.all(sups[small] <= 0):
            verdict, fit = PASS, Fit(float("-inf"), float("nan"), float("nan"), int(small.sum()))
        else:
            verdict, fit = bounded_verdict(scales[small], np.maximum(sups[small], 1e-300),
                                           grow_tol, fail_tol)
    else:
        verdict, fit = INCONCLUSIVE, None
    return ArcScan(name, verdict, float(ratio[k]), (float(rows[k, 0]), float(rows[k, 1])), fit, rows)


# ---------------------------------------------------------------------------
# box test for measures in the closed disk

def _kernel_re(x):
    """Re of (1/x) log(1/(1 - x)) for |x| <= 1, x != 1."""
    x = np.asarray(x, complex)
    out = np.empty(x.shape)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = np.real(1.0 + xs / 2.0 + xs * xs / 3.0 + xs ** 3 / 4.0)
    xb = x[~small]
    out[~small] = np.real(-np.log(1.0 - xb) / xb)
    return out


def ars_box_test(mu: DiskMeasure, arcs=None, grow_tol: float = 0.2,
                 fail_tol: float = 0.4) -> ArcScan:
    """sup over boxes of int int_{S(I)} Re k_w(z) dmu(w) dmu(z) / mu(S(I)) with
    k_w(z) = (1/(conj(w) z)) log(1/(1 - conj(w) z)).

    Coincident boundary points carry the self-energy of a uniform arc of the
    measure's cell width.  Empty boxes are skipped.
    """
    if arcs is None:
        j = np.arange(1, 12)
        L = TWO_PI * 2.0 ** -j
        starts = np.concatenate([np.arange(8) * TWO_PI / 8 for _ in L])
        lens = np.repeat(L, 8)
        arcs = (np.concatenate([starts, [0.0]]), np.concatenate([lens, [TWO_PI]]))
    rows = []
    for s, L in zip(*arcs):
        mask = mu.box_mask(float(s), float(L))
        if not mask.any():
            continue
        z = mu.points[mask]
        m = mu.masses[mask]
        total = float(m.sum())
        if total <= 0:
            continue
        x = np.conj(z)[:, None] * z[None, :]
        diag_bd = np.isclose(np.abs(x), 1.0, atol=1e-14) & np.isclose(x, 1.0, atol=1e-14)
        with np.errstate(all="ignore"):
            K = _kernel_re(np.where(diag_bd, 0.0, x))
        if diag_bd.any():
            if mu.cell <= 0:
                K[diag_bd] = np.inf
            else:
                K[diag_bd] = math.log(1.0 / mu.cell) + 1.5
        en = float(m @ K @ m)
        rows.append((float(s), float(L), total, en, en / total))
    rows = np.array(rows) if rows else np.zeros((0, 5))
    return _summarise("ARS box energy", rows, grow_tol, fail_tol)


# ---------------------------------------------------------------------------
# one box and the necessary condition

def gauge_integral_finite(phi, upper: float = TWO_PI):
    """(finite?, value) of int_0^upper phi(x)/x dx with slow-divergence detection."""
    with np.errstate(all="ignore"):
        res = ladder(lambda x: phi(x) / x, np.array([upper]), n_levels=80)
    levels = res.levels[0]
    if not np.all(np.isfinite(levels)) or np.any(levels < 0):
        return False, float("inf")
    xlog = np.log(1.0 / (upper * 0.5 ** np.arange(levels.size)))
    use = xlog > 1.0
    verdict = classify_tail(xlog[use], levels[use])
    if verdict.finite is False or not res.finite[0]:
        return False, float("inf")
    if verdict.finite is None:
        return None, float(res.value[0])
    return True, float(res.value[0])


def cantor_gauge(E: CircleSet, w: Weight):
    """phi(s) = int_0^s t omega'(t)^2 N_E(t) dt / N_E(s), with N_E(t) the number of
    gap endpoints of gaps longer than 2t (tail gaps included)."""
    lens, mult = E.all_gap_lengths(True)
    b = np.sort(np.unique(lens / 2.0))
    cnt = np.array([2.0 * np.sum(mult[lens / 2.0 > bb]) for bb in np.concatenate([[0.0], b])])
    # cnt[k] = N_E on (b[k-1], b[k]]  (b[-1] := 0)
    g = lambda x: ladder(lambda t: t * w.deriv(t) ** 2, np.atleast_1d(x)).value
    with np.errstate(all="ignore"):
        gb = g(b)
    gb0 = np.concatenate([[0.0], gb])
    piece = cnt[:-1] * np.diff(gb0)       # integral over (b[k-1], b[k]]
    cum = np.concatenate([[0.0], np.cumsum(piece)])

    def phi(s):
        shape = np.shape(s)
        s = np.atleast_1d(np.asarray(s, float)).ravel()
        k = np.searchsorted(b, s, side="left")          # s in (b[k-1], b[k]]
        kk = np.minimum(k, b.size)
        with np.errstate(all="ignore"):
            gs = g(np.maximum(s, 1e-300))
        base = gb0[kk]
        n = cnt[kk]
        num = cum[kk] + n * (gs - base)
        return (num / np.maximum(n, 2.0)).reshape(shape)

    return phi


@dataclass
class OneBoxReport:
    verdict: str
    bound_verdict: str
    sup_ratio: float
    witness: tuple
    integral_finite: bool | None
    integral_value: float
    fit: Fit | None
    rows: np.ndarray = field(repr=False)

    def __str__(self):
        return (f"one box: {self.verdict} (sup mu(I)/phi(|I|) = {self.sup_ratio:.6g}, trend "
                f"{self.bound_verdict}; int phi(x)/x dx "
                f"{'finite' if self.integral_finite else 'divergent' if self.integral_finite is False else 'undecided'})")


def one_box_test(mu: BoundaryMeasure, phi, arcs=None, E: CircleSet | None = None,
                 max_anchors: int = 512, grow_tol: float = 0.2, fail_tol: float = 0.4) -> OneBoxReport:
    """Sufficient condition: mu(closed box over I) = O(phi(|I|)) and int phi(x)/x dx < inf.

    For a boundary measure the closed box over I carries the mass of the closed arc.
    """
    starts, lens = arcs if arcs is not None else _default_arcs(mu, E, max_anchors)
    starts, lens = np.asarray(starts, float), np.asarray(lens, float)
    mass = mu.arc_mass(starts, lens)
    with np.errstate(all="ignore"):
        ph = np.asarray(phi(lens), float)
    ratio = np.where(ph > 0, mass / ph, np.inf)
    rows = np.stack([starts, lens, mass, ph, ratio], axis=1)
    fin, val = gauge_integral_finite(phi)
    k = int(np.argmax(ratio))
    scales, sups = _per_scale(lens, ratio)
    small = scales < 1.0
    if not np.all(np.isfinite(sups)):
        bverdict, fit = FAIL, None
    elif small.sum() >= 3:
        bverdict, fit = bounded_verdict(scales[small], sups[small], grow_tol, fail_tol)
    else:
        bverdict, fit = INCONCLUSIVE, None
    if fin is False:
        verdict = "clause 2 fails: int phi(x)/x dx diverges"
    elif bverdict == FAIL:
        verdict = "clause 1 fails: mu(S(I))/phi(|I|) is unbounded"
    elif fin and bverdict == PASS:
        verdict = "sufficient condition holds"
    else:
        verdict = INCONCLUSIVE
    return OneBoxReport(verdict, bverdict, float(ratio[k]), (float(starts[k]), float(lens[k])),
                        fin, val, fit, rows)


def necessary_log_test(mu: BoundaryMeasure, arcs=None, E: CircleSet | None = None,
                       max_anchors: int = 512, grow_tol: float = 0.2,
                       fail_tol: float = 0.4) -> ArcScan:
    """mu(I) log(1/|I|) over arcs; its per-scale supremum is fitted as a power of
    log(1/|I|).  Unbounded growth means mu is not a Carleson measure."""
    starts, lens = arcs if arcs is not None else _default_arcs(mu, E, max_anchors)
    starts, lens = np.asarray(starts, float), np.asarray(lens, float)
    keep = lens < 1.0
    starts, lens = starts[keep], lens[keep]
    mass = mu.arc_mass(starts, lens)
    val = mass * np.log(1.0 / lens)
    rows = np.stack([starts, lens, mass, val, val], axis=1)
    scan = _summarise("necessary log condition", rows, grow_tol, fail_tol)
    scan.note = {PASS: "bounded: condition holds", FAIL: "grows: not a Carleson measure",
                 INCONCLUSIVE: "trend undecided"}[scan.verdict]
    return scan


# ---------------------------------------------------------------------------
# the multiplier pipeline

@dataclass
class MultiplierVerdict:
    in_D: bool | None
    multiplier: bool | None
    reason: str
    class_report: ClassReport | None = None
    checks: dict = field(default_factory=dict)

    def summary(self) -> str:
        fmt = lambda v: {True: "yes", False: "no", None: "undecided"}[v]
        lines = [f"member of D: {fmt(self.in_D)}", f"multiplier: {fmt(self.multiplier)}",
                 f"reason: {self.reason}"]
        for k, v in self.checks.items():
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def multiplier_verdict(w, E: CircleSet, quad: QuadConfig = QuadConfig(),
                       class_report: ClassReport | None = None, run_ars: bool = True
                       ) -> MultiplierVerdict:
    """Is f_{omega,E} in D, and is it a multiplier of D?

    Membership is the finiteness of int dist omega'(dist)^2 |dzeta| (valid on
    L2 sets, L1 sets for powers).  For members the measure dist omega'(dist)^2
    |dzeta| is run through the necessary log test, the one-box test (with the
    Cantor gauge on Cantor sets) and, to break ties, the ARS energy test.
    """
    if not isinstance(w, Weight):
        w = power_weight(float(w))
    order = 1 if w.kind == "power" else 2
    if class_report is None:
        class_report = l_test(E, order, quad=quad)
    checks = {f"L{order} test": str(class_report)}
    prof = lambda d: d * w.deriv(d) ** 2
    tot = pushforward_integral(prof, E, "exact_gaps")
    checks["int dist omega'(dist)^2"] = "divergent" if not tot.finite else f"{tot.value:.6g}"
    if class_report.verdict == FAIL:
        return _verdict_without_class(w, E, tot.finite, class_report, checks, order)
    if not tot.finite:
        return MultiplierVerdict(False, False, "int dist omega'(dist)^2 |dzeta| diverges: not in D, "
                                 "hence not a multiplier", class_report, checks)
    mu = from_weight(w, E)
    cn = necessary_log_test(mu)
    checks["necessary log test"] = str(cn)
    if cn.verdict == FAIL:
        return MultiplierVerdict(True, False, "mu(S(I)) log(1/|I|) unbounded: the measure is not "
                                 "Carleson, so f is not a multiplier", class_report, checks)
    ob = None
    if E.metadata.get("kind") == "cantor":
        ob = one_box_test(mu, cantor_gauge(E, w))
        checks["one box (Cantor gauge)"] = str(ob)
        if ob.verdict == "sufficient condition holds" and cn.verdict == PASS:
            return MultiplierVerdict(True, True, "one-box condition holds: the measure is "
                                     "Carleson, so f is a multiplier", class_report, checks)
    if run_ars:
        ars = ars_boundary_test(mu)
        checks["ARS energy"] = str(ars)
        if ars.verdict == PASS and cn.verdict != FAIL:
            return MultiplierVerdict(True, True, "energy condition bounded on the scanned arcs: "
                                     "multiplier", class_report, checks)
        if ars.verdict == FAIL:
            return MultiplierVerdict(True, False, "energy condition grows on the scanned arcs: "
                                     "not a multiplier", class_report, checks)
    return MultiplierVerdict(True, None, "sufficient and necessary tests disagree: inconclusive",
                             class_report, checks)


def _verdict_without_class(w, E, finite, class_report, checks, order) -> MultiplierVerdict:
    """Conclusions that survive without the L-class hypothesis.

    On any Carleson set D_zeta(f) is bounded below by a multiple of
    dist omega'(dist)^2, so divergence of its integral rules out membership and
    failure of the necessary log test rules out the multiplier property.  For
    powers, membership is equivalent to dist^(2 alpha - 1) being integrable on
    every set.
    """
    missing = f"hypotheses not met: E fails the L{order} test"
    if not carleson_check(E, power_weight(1.0)).finite:
        return MultiplierVerdict(None, None, missing + " and is not a Carleson set", class_report, checks)
    if not finite:
        return MultiplierVerdict(False, False, "int dist omega'(dist)^2 |dzeta| diverges: not in D "
                                 "(lower bound valid on every Carleson set)", class_report, checks)
    in_D = True if w.kind == "power" else None
    cn = necessary_log_test(from_weight(w, E))
    checks["necessary log test"] = str(cn)
    if cn.verdict == FAIL:
        return MultiplierVerdict(in_D, False, "mu(S(I)) log(1/|I|) unbounded and D_zeta(f) dominates "
                                 "dist omega'(dist)^2 on every Carleson set: not a multiplier",
                                 class_report, checks)
    return MultiplierVerdict(in_D, None, missing + "; the necessary log test alone does not decide "
                             "the multiplier property", class_report, checks)


def write_scan_summary(path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text + "\n")
