"""Numerical classifiers for Carleson, K, L1 and L2 sets.

Every test scans a finite family (arcs or boundary points) and turns the scan
into a verdict by fitting how the extreme value evolves as the scale shrinks:
boundedness is never decidable from finite data, so an explicit inconclusive
state is kept.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import QuadConfig, ladder
from .circle_sets import (TWO_PI, CircleSet, arc_from_chord, chord, normalize,
                          pushforward_integral, residual_arc_integral)
from .kernels import KernelEngine
from .outer_functions import carleson_check
from .trends import FAIL, INCONCLUSIVE, PASS, Fit, bounded_verdict, linear_fit, running_max
from .weights import Weight, power_weight


@dataclass
class ClassReport:
    name: str
    verdict: str
    witness: object
    constant: float
    fit: Fit | None = None
    metadata: dict = field(default_factory=dict, repr=False)

    def __str__(self):
        fit = "" if self.fit is None else f", trend exponent {self.fit.slope:.3f}"
        return f"{self.name}: {self.verdict} (constant {self.constant:.6g}{fit}; witness {self.witness})"


# ---------------------------------------------------------------------------
# arcs

class _RangeMax:
    """Sparse table for range maxima over a circularly doubled array."""

    def __init__(self, values):
        v = np.concatenate([values, values])
        self.levels = [v]
        k = 1
        while 2 * k <= v.size:
            prev = self.levels[-1]
            self.levels.append(np.maximum(prev[:-k], prev[k:]))
            k *= 2

    def query(self, lo, hi):
        """max over [lo, hi) (empty ranges give 0)."""
        lo = np.asarray(lo, np.int64)
        hi = np.asarray(hi, np.int64)
        n = np.maximum(hi - lo, 1)
        j = np.floor(np.log2(n)).astype(int)
        out = np.zeros(lo.shape)
        for lev in np.unique(j):
            m = j == lev
            t = self.levels[lev]
            out[m] = np.maximum(t[lo[m]], t[hi[m] - (1 << lev)])
        return np.where(hi > lo, out, 0.0)


def _piece_max(x0, x1, L):
    """max of min(x, L - x) over [x0, x1] inside a gap of length L."""
    mid = L / 2.0
    inside = (x0 <= mid) & (x1 >= mid)
    near = np.where(x1 < mid, x1, x0)
    return np.where(inside, mid, np.minimum(near, L - near))


class ArcScanner:
    """Exact suprema of dist over arcs, from the gap structure."""

    def __init__(self, E: CircleSet):
        self.E = E
        self.n = E.n_gaps
        self.rmq = _RangeMax(E.lengths / 2.0)

    def _ends(self, p, L):
        E = self.E
        i, x, _ = E.locate(p)
        j, y, _ = E.locate(p + L)
        return i, x, j, y

    def sup_offset(self, start, length):
        """sup over the arc [start, start+length] of the arc distance to E."""
        E = self.E
        p = normalize(np.asarray(start, float))
        L = np.asarray(length, float)
        i, x, j, y = self._ends(p, L)
        li, lj = E.lengths[i], E.lengths[j]
        k = np.mod(j - i, self.n)
        same = (k == 0) & (y >= x) & (L < TWO_PI)
        # piece of the first gap
        first = np.where(x < li, _piece_max(x, np.where(same, y, li), li), 0.0)
        last = np.where(same, 0.0, _piece_max(np.zeros_like(y), np.minimum(y, lj), lj))
        k = np.where(same, 0, np.where(k == 0, self.n, k))
        mid = self.rmq.query(i + 1, i + k)
        return np.maximum(np.maximum(first, last), mid)

    def sup_dist(self, start, length):
        return chord(self.sup_offset(start, length))


def _anchors(E: CircleSet, max_anchors: int):
    ends = np.concatenate([E.starts, normalize(E.starts + E.lengths)])
    ends = np.unique(ends)
    if ends.size <= max_anchors:
        return ends
    pick = ends[np.linspace(0, ends.size - 1, max_anchors // 2).round().astype(int)]
    small = np.argsort(E.lengths, kind="stable")[: max_anchors // 4]
    rs = E.residual_starts
    if rs.size > max_anchors // 8:
        rs = rs[np.linspace(0, rs.size - 1, max_anchors // 8).round().astype(int)]
    extra = np.concatenate([E.starts[small], normalize(E.starts[small] + E.lengths[small]),
                            rs, normalize(rs + E.residual_length)])
    return np.unique(np.concatenate([pick, extra]))


def arc_family(E: CircleSet, quad: QuadConfig = QuadConfig(), max_anchors: int = 4096,
               min_length: float | None = None, per_octave: int = 1):
    """Arcs anchored at gap endpoints: starting at, ending at and centred on each
    anchor, with dyadic lengths 2pi 2^-j down to ``min_length``."""
    lmin = min_length if min_length is not None else max(quad.trust_factor * E.truncation_error, 1e-9)
    j = np.arange(1, 200 * per_octave) / per_octave
    lengths = TWO_PI * 2.0 ** -j
    lengths = lengths[lengths >= lmin]
    anc = _anchors(E, max_anchors)
    A, Lg = np.meshgrid(anc, lengths, indexing="ij")
    A, Lg = A.ravel(), Lg.ravel()
    starts = np.concatenate([A, A - Lg, A - Lg / 2.0])
    lens = np.concatenate([Lg, Lg, Lg])
    return normalize(starts), lens


def k_test(E: CircleSet, quad: QuadConfig = QuadConfig(), max_anchors: int = 4096,
           min_length: float | None = None) -> ClassReport:
    """c_E = inf over arcs I of sup_{zeta in I} dist(zeta, E) / |I|."""
    starts, lens = arc_family(E, quad, max_anchors, min_length)
    sc = ArcScanner(E)
    ratio = sc.sup_dist(starts, lens) / lens
    scales = np.unique(lens)[::-1]
    mins = np.array([ratio[lens == s].min() for s in scales])
    k = int(np.argmin(ratio))
    fit = linear_fit(np.log(1.0 / scales), np.log(np.maximum(mins, 1e-300)))
    c = float(ratio[k])
    if c <= 0:
        verdict = FAIL
    elif fit.slope < -0.3:
        verdict = FAIL
    elif fit.slope > -0.1:
        verdict = PASS
    else:
        verdict = INCONCLUSIVE
    return ClassReport("K", verdict, (float(starts[k]), float(lens[k])), c, fit,
                       {"scales": scales, "min_ratio": mins})


def k_ratio(E: CircleSet, start: float, length: float) -> float:
    """sup dist / |I| for one arc (re-evaluates a k_test witness)."""
    return float(ArcScanner(E).sup_dist(np.array([start]), np.array([length]))[0] / length)


# ---------------------------------------------------------------------------
# Gamma-region log integrals

def default_zeta_grid(E: CircleSet, quad: QuadConfig = QuadConfig(), max_per_bin: int = 3,
                      per_octave: int = 2):
    """Points at distances b 2^{-j/per_octave} from both ends of representative gaps
    (at most ``max_per_bin`` gaps per dyadic length bin), restricted to distances
    that the truncation resolves."""
    dmin = max(quad.trust_factor * E.truncation_error, 1e-12)
    bins = np.floor(np.log2(E.lengths)).astype(int)
    out = []
    for b_ in np.unique(bins):
        idx = np.nonzero(bins == b_)[0]
        if idx.size > max_per_bin:
            idx = idx[np.linspace(0, idx.size - 1, max_per_bin).round().astype(int)]
        for g in np.unique(idx):
            s, L = float(E.starts[g]), float(E.lengths[g])
            j = np.arange(0, 400) / per_octave
            u = (L / 2.0) * 2.0 ** -j
            u = u[(chord(u) >= dmin)]
            u = u * (1 - 1e-9)
            out.append(s + u)
            out.append(s + L - u)
    th = normalize(np.concatenate(out)) if out else np.zeros(0)
    return np.unique(th)


def gamma_log_integrals(E: CircleSet, thetas, order: int, quad: QuadConfig = QuadConfig(),
                        engine: KernelEngine | None = None):
    """delta * int_Gamma log^order(delta/delta') / |zeta - zeta'|^2 |dzeta'| at each theta."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    eng = engine or KernelEngine(E, [lambda d: np.ones_like(d), np.log, lambda d: np.log(d) ** 2], quad)
    th = normalize(np.asarray(thetas, float))
    d = chord(E.endpoint_offset(th))
    L = np.log(d)
    if order == 1:
        co = np.stack([L, -np.ones_like(L), np.zeros_like(L)], axis=1)
        near = lambda dd, zi: L[zi] - np.log(dd)
    else:
        co = np.stack([L * L, -2.0 * L, np.ones_like(L)], axis=1)
        near = lambda dd, zi: (L[zi] - np.log(dd)) ** 2
    res = eng.run(th, co, near, None, include_own=False, sigma=False)
    if not res.converged.all():
        raise RuntimeError("Gamma-region quadrature did not converge")
    return d, d * res.Gamma


def l_test(E: CircleSet, order: int = 2, zeta_grid=None, quad: QuadConfig = QuadConfig(),
           grow_tol: float = 0.2, fail_tol: float = 0.4) -> ClassReport:
    """Boundedness of delta * int_Gamma log^order(delta/delta')/|zeta-zeta'|^2 over zeta.

    The running supremum over points with dist >= delta is fitted against
    log(1/delta) on a log-log scale, over delta <= 1/e.
    """
    th = default_zeta_grid(E, quad) if zeta_grid is None else normalize(np.asarray(zeta_grid, float))
    d, v = gamma_log_integrals(E, th, order, quad)
    o = np.argsort(-d, kind="stable")
    ds, vs, ts = d[o], v[o], th[o]
    rs = running_max(vs)
    use = ds <= math.exp(-1.0)
    if np.all(rs[use] <= 0):
        # no other gap contributes: the integral vanishes identically
        verdict, fit = PASS, None
    else:
        verdict, fit = bounded_verdict(ds[use], rs[use], grow_tol, fail_tol)
    k = int(np.argmax(vs))
    return ClassReport(f"L{order}", verdict, float(ts[k]), float(vs[k]), fit,
                       {"delta": ds, "value": vs, "running_sup": rs, "theta": ts})


def write_class_csv(path, report: ClassReport) -> None:
    m = report.metadata
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if "delta" in m:
            w.writerow(["delta", "value", "running_sup"])
            for row in zip(m["delta"], m["value"], m["running_sup"]):
                w.writerow([repr(float(x)) for x in row])
        else:
            w.writerow(["arc_length", "min_ratio"])
            for row in zip(m["scales"], m["min_ratio"]):
                w.writerow([repr(float(x)) for x in row])


# ---------------------------------------------------------------------------
# equivalent K-conditions

class _ArcIntegrals:
    """int_I h(dist) over arcs: prefix sums over whole gaps plus the two partial
    gaps at the ends; residual arcs contribute their ideal mass."""

    def __init__(self, E: CircleSet, h):
        self.E = E
        self.h = h
        with np.errstate(all="ignore"):
            res = ladder(lambda u: h(chord(u)), E.lengths / 2.0)
        self.full = 2.0 * res.value
        self.prefix = np.concatenate([[0.0], np.cumsum(np.concatenate([self.full, self.full]))])
        self.res_mass, _ = residual_arc_integral(h, E)
        rc = normalize(E.residual_starts + E.residual_length / 2.0)
        self.res_centres = np.sort(rc)

    def _half(self, u):
        """int_0^u h(chord(v)) dv at the distinct positive entries of u."""
        u = np.asarray(u, float)
        out = np.zeros(u.shape)
        pos = u > 0
        if pos.any():
            vals, inv = np.unique(u[pos], return_inverse=True)
            with np.errstate(all="ignore"):
                g = ladder(lambda v: self.h(chord(v)), vals).value
            out[pos] = g[inv.ravel()]
        return out

    def cumulative(self, x, g):
        """int_0^x h(dist) over gap g, for x in [0, length of g]."""
        L = self.E.lengths[g]
        x = np.minimum(np.asarray(x, float), L)
        left = x <= L / 2.0
        part = self._half(np.where(left, x, L - x))
        return np.where(left, part, self.full[g] - part)

    def over(self, start, length):
        E = self.E
        p = normalize(np.asarray(start, float))
        L = np.asarray(length, float)
        i, x, _ = E.locate(p)
        j, y, _ = E.locate(p + L)
        n = E.n_gaps
        k = np.mod(j - i, n)
        same = (k == 0) & (y >= x) & (L < TWO_PI)
        cx = self.cumulative(x, i)
        cy = self.cumulative(y, j)
        part_first = np.where(same, cy - cx, self.full[i] - cx)
        part_last = np.where(same, 0.0, cy)
        k = np.where(same, 0, np.where(k == 0, n, k))
        mid = self.prefix[i + k] - self.prefix[i + 1]
        mid = np.where(k > 1, mid, 0.0)
        total = part_first + part_last + mid
        if self.res_centres.size:
            c = self.res_centres
            lo = np.searchsorted(c, p, side="left")
            q = p + L
            hi = np.searchsorted(c, q, side="right") + c.size * (q >= TWO_PI) \
                + (np.searchsorted(c, q - TWO_PI, side="right") - c.size) * (q >= TWO_PI)
            # arcs that meet no residual arc get nothing, even when the residual mass is infinite
            total = total + np.where(hi > lo, self.res_mass * np.maximum(hi - lo, 1), 0.0)
        return total


@dataclass
class EquivalentsReport:
    mean_log: float
    mean_log_witness: tuple
    neg_power: float
    neg_power_witness: tuple
    pos_power: float
    pos_power_witness: tuple
    sublevel_exponent: float
    sublevel_profile: tuple = field(repr=False, default=())

    def summary(self) -> str:
        return (f"sup mean log(|I|/dist) = {self.mean_log:.6g}\n"
                f"sup |I|^b mean dist^-b = {self.neg_power:.6g}\n"
                f"inf |I|^-b mean dist^b = {self.pos_power:.6g}\n"
                f"fitted sublevel exponent beta_E = {self.sublevel_exponent:.4f}")


def kset_equivalents(E: CircleSet, beta: float, arcs=None, quad: QuadConfig = QuadConfig(),
                     max_anchors: int = 512) -> EquivalentsReport:
    """Constants of the equivalent forms of the K-condition over an arc family."""
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    starts, lens = arcs if arcs is not None else arc_family(E, quad, max_anchors)
    starts, lens = np.asarray(starts, float), np.asarray(lens, float)
    with np.errstate(all="ignore"):
        logs = _ArcIntegrals(E, np.log).over(starts, lens)
        negp = _ArcIntegrals(E, lambda d: d ** -beta).over(starts, lens)
        posp = _ArcIntegrals(E, lambda d: d ** beta).over(starts, lens)
    item2 = np.log(lens) - logs / lens
    item3 = lens ** beta * negp / lens
    item4 = lens ** -beta * posp / lens
    k2, k3, k4 = int(np.argmax(item2)), int(np.argmax(item3)), int(np.argmin(item4))
    s, f = _sublevel_profile(E, starts, lens, floor=quad.trust_factor * E.truncation_error)
    # the ratio saturates at 1 for thresholds comparable to the arc; fit the
    # small-threshold regime only
    ok = (f > 0) & (f <= 0.5)
    if ok.sum() < 3:
        ok = f > 0
    fit = linear_fit(np.log(s[ok]), np.log(f[ok]))
    w = lambda k: (float(starts[k]), float(lens[k]))
    return EquivalentsReport(float(item2[k2]), w(k2), float(item3[k3]), w(k3),
                             float(item4[k4]), w(k4), float(fit.slope), (s, f))


def _sublevel_profile(E: CircleSet, starts, lens, ks=range(2, 14), floor: float = 0.0):
    """sup over arcs of |{zeta in I: dist <= s|I|}| / |I| for s = 2^-k, using only
    arcs whose threshold s|I| stays above ``floor``."""
    s_vals, f_vals = [], []
    for k in ks:
        s = 2.0 ** -k
        best = 0.0
        for L in np.unique(lens):
            if s * L < floor:
                continue
            m = lens == L
            a = float(arc_from_chord(s * L))
            far = _far_measure(E, starts[m], L, a)
            best = max(best, float(np.max((L - far) / L)))
        s_vals.append(s)
        f_vals.append(best)
    return np.array(s_vals), np.array(f_vals)


def _piece_far(u0, u1, gl, a):
    """measure of {u in [u0, u1] : min(u, gl - u) > a}."""
    return np.maximum(np.minimum(u1, gl - a) - np.maximum(u0, a), 0.0)


def _far_measure(E: CircleSet, starts, L: float, a: float):
    """|{zeta in [p, p+L] : arc distance to E > a}| for each start p."""
    p = normalize(np.asarray(starts, float))
    i, x, _ = E.locate(p)
    j, y, _ = E.locate(p + L)
    n = E.n_gaps
    li, lj = E.lengths[i], E.lengths[j]
    k = np.mod(j - i, n)
    same = (k == 0) & (y >= x) & (L < TWO_PI)
    xin, yin = np.minimum(x, li), np.minimum(y, lj)
    first = _piece_far(xin, np.where(same, yin, li), li, a)
    last = np.where(same, 0.0, _piece_far(np.zeros_like(yin), yin, lj, a))
    full = np.maximum(E.lengths - 2.0 * a, 0.0)
    prefix = np.concatenate([[0.0], np.cumsum(np.concatenate([full, full]))])
    k = np.where(same, 0, np.where(k == 0, n, k))
    mid = np.where(k > 1, prefix[i + k] - prefix[np.minimum(i + 1, i + k)], 0.0)
    return first + last + mid


def beta_exponent(E: CircleSet, tol: float = 1e-3) -> float:
    """sup{b : dist^-b integrable}, by bisection on the finiteness of the pushforward."""
    chk = carleson_check(E, power_weight(1.0))
    if not chk.finite:
        raise ValueError("set is not a Carleson set")
    if not E.has_tail:
        # finitely many gaps: every dist^-b with b < 1 is integrable
        return 1.0
    finite = lambda b: pushforward_integral(lambda t: t ** -b, E, "exact_gaps").finite
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if finite(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
