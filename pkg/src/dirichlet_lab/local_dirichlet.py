"""Local Dirichlet integrals of distance-type outer functions.

For an outer function the local Dirichlet integral at a boundary point zeta
depends only on the boundary modulus:

    D_zeta(f) = 1/(2pi) int [ |f(z')|^2 - |f(z)|^2 - 2|f(z)|^2 log(|f(z')|/|f(z)|) ]
                         / |z - z'|^2 |dz'|.

With |f| = omega(dist) the numerator is ``omega(delta)^2 phi(y)`` where
``y = 2 (log omega(d') - log omega(delta))`` and ``phi(y) = e^y - 1 - y``; it
is nonnegative and vanishes to second order on the diagonal.  The defining
double-difference form is kept as an independent check (:func:`douglas_local`)
for functions whose boundary values are known in closed form.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._quad import QuadConfig, adaptive, gauss_legendre, pairwise_sum
from .circle_sets import (TWO_PI, CircleSet, _theta, chord, normalize)
from .kernels import KernelEngine
from .outer_functions import OuterDistanceFunction
from .trends import linear_fit

__all__ = ["QuadConfig", "LocalDirichletBreakdown", "UntrustedRegime", "rs_local",
           "rs_local_many", "rs_regional", "douglas_local", "dirichlet_energy",
           "dirichlet_mu", "EnergyResult", "write_local_csv", "phi"]


class UntrustedRegime(ValueError):
    """The boundary point is too close to a truncated set for its distance to be resolved."""


@dataclass
class LocalDirichletBreakdown:
    total: float
    over_I: float
    over_Gamma: float
    over_Sigma: float
    error: float = 0.0
    delta: float = float("nan")
    diagnostic: str = ""

    @property
    def finite(self) -> bool:
        return math.isfinite(self.total)

    def region(self, name: str) -> float:
        return {"I": self.over_I, "Gamma": self.over_Gamma, "Sigma": self.over_Sigma}[name]


def phi(y):
    """e^y - 1 - y, accurate for small |y|."""
    y = np.asarray(y, float)
    small = np.abs(y) < 1e-3
    ys = np.where(small, y, 0.0)
    series = ys * ys * (0.5 + ys * (1.0 / 6.0 + ys / 24.0))
    with np.errstate(over="ignore"):
        direct = np.expm1(np.where(small, 0.0, y)) - y
    return np.where(small, series, direct)


class _RSContext:
    """Engine plus per-point coefficients of the modulus-only integrand."""

    def __init__(self, f: OuterDistanceFunction, quad: QuadConfig):
        w = f.weight
        self.f = f
        self.quad = quad
        self.engine = KernelEngine(f.set, [lambda d: w.value(d) ** 2, lambda d: np.ones_like(d), w.log],
                                   quad)

    def evaluate(self, theta) -> np.ndarray:
        """Rows (I, Gamma, Sigma, error, converged) for angles off E."""
        w = self.f.weight
        theta = np.asarray(theta, float)
        u = self.f.set.endpoint_offset(theta)
        delta = chord(u)
        wd = w.value(delta)
        gd = w.log(delta)
        w2 = wd * wd
        coeffs = np.stack([np.ones_like(w2), -w2 * (1.0 - 2.0 * gd), -2.0 * w2], axis=1)
        dprime = w.deriv(delta)

        def near(d, zi):
            with np.errstate(all="ignore"):
                y = 2.0 * (w.log(d) - gd[zi])
                return w2[zi] * phi(y)

        def diag(zi):
            return 2.0 * dprime[zi] ** 2 * np.cos(u[zi] / 2.0) ** 2

        rs = self.engine.run(theta, coeffs, near, diag)
        scale = 1.0 / TWO_PI
        return (rs.I * scale, rs.Gamma * scale, rs.Sigma * scale, rs.error * scale, rs.converged)


def _check_point(f: OuterDistanceFunction, th: float, quad: QuadConfig, trusted: bool):
    E = f.set
    delta = float(chord(E.endpoint_offset(th)))
    if delta == 0.0:
        return delta, "on_set"
    if trusted and E.truncation_error > 0 and delta < quad.trust_factor * E.truncation_error:
        raise UntrustedRegime(
            f"untrusted regime: dist {delta:.3g} is below {quad.trust_factor:g} x truncation "
            f"error {E.truncation_error:.3g}")
    return delta, ""


def _on_set_value(f: OuterDistanceFunction, delta: float) -> LocalDirichletBreakdown:
    if f.weight.kind == "constant":
        return LocalDirichletBreakdown(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if f.weight.vanishes_at_zero:
        inf = float("inf")
        return LocalDirichletBreakdown(inf, inf, 0.0, 0.0, 0.0, 0.0,
                                       "boundary point on E where the modulus vanishes: "
                                       "the integrand grows like omega(dist)^2/|z-z'|^2 and "
                                       "its integral diverges")
    raise ValueError("boundary point on E is only supported for weights vanishing at 0")


def rs_local_many(f: OuterDistanceFunction, thetas, quad: QuadConfig = QuadConfig(),
                  trusted: bool = True, context: _RSContext | None = None
                  ) -> list[LocalDirichletBreakdown]:
    thetas = normalize(np.atleast_1d(np.asarray(thetas, float)))
    out: list[LocalDirichletBreakdown | None] = [None] * thetas.size
    live, deltas = [], []
    for k, th in enumerate(thetas):
        delta, flag = _check_point(f, float(th), quad, trusted)
        if flag:
            out[k] = _on_set_value(f, delta)
        else:
            live.append(k)
            deltas.append(delta)
    if live:
        ctx = context or _RSContext(f, quad)
        I, G, S, err, conv = ctx.evaluate(thetas[live])
        for j, k in enumerate(live):
            if not conv[j]:
                raise RuntimeError(f"local integral did not converge at theta={thetas[k]:.17g}: "
                                   f"achieved error {err[j]:.3g}")
            tot = float(I[j] + G[j] + S[j])
            out[k] = LocalDirichletBreakdown(tot, float(I[j]), float(G[j]), float(S[j]),
                                             float(err[j]), deltas[j])
    return out  # type: ignore[return-value]


def rs_local(f: OuterDistanceFunction, zeta, quad: QuadConfig = QuadConfig(),
             trusted: bool = True) -> LocalDirichletBreakdown:
    """Local Dirichlet integral at one boundary point with its regional split."""
    return rs_local_many(f, [_theta(zeta)], quad, trusted)[0]


def rs_regional(f: OuterDistanceFunction, zeta, region: str, quad: QuadConfig = QuadConfig(),
                trusted: bool = True) -> float:
    if region not in ("I", "Gamma", "Sigma"):
        raise ValueError("region must be 'I', 'Gamma' or 'Sigma'")
    return rs_local(f, zeta, quad, trusted).region(region)


# ---------------------------------------------------------------------------
# closed-form boundary values: the defining double-difference integral

def douglas_local(boundary_values, zeta, quad: QuadConfig = QuadConfig(), breakpoints=()) -> float:
    """(1/2pi) int |f(xi) - f(zeta)|^2 / |xi - zeta|^2 |dxi| for closed-form boundary values.

    ``boundary_values`` maps angles to complex values; ``breakpoints`` lists
    angles where it is not smooth (panels are graded toward them).
    """
    th = float(_theta(zeta))
    f0 = complex(boundary_values(np.array([th]))[0])
    rel = [0.0, TWO_PI]
    grade = 2.0 ** -np.arange(1, 41, 3)
    for p in np.atleast_1d(np.asarray(breakpoints, float)):
        q = float(np.mod(p - th, TWO_PI))
        if 0.0 < q < TWO_PI:
            rel += [q] + list(q * (1 - grade)) + list(q + (TWO_PI - q) * grade)
    cuts = np.unique(np.clip(np.array(rel), 0.0, TWO_PI))

    def integrand(x, _o):
        xi = th + x
        v = np.asarray(boundary_values(xi), complex)
        return np.abs(v - f0) ** 2 * 0.25 / np.sin(0.5 * x) ** 2

    res = adaptive(integrand, cuts[:-1], cuts[1:], np.zeros(cuts.size - 1, int), 1,
                   rel_tol=quad.rel_tol * 1e-2, abs_tol=quad.abs_tol,
                   max_iter=quad.max_subdivisions)
    if not res.converged[0]:
        raise RuntimeError(f"Douglas integral did not converge: error {res.error[0]:.3g}")
    return float(res.value[0] / TWO_PI)


# ---------------------------------------------------------------------------
# integrals over the circle

@dataclass
class EnergyResult:
    """int D_zeta(f) dmu(zeta) with the per-class increments used for the verdict."""
    value: float
    finite: bool | None
    growth_exponent: float
    increments: np.ndarray = field(repr=False)
    scales: np.ndarray = field(repr=False)
    diagnostic: str = ""
    trajectory: np.ndarray = field(default=None, repr=False)


def _gap_classes(E: CircleSet, max_per_class: int):
    """Group gaps by length; pick at most ``max_per_class`` representatives.

    Returns a list of (length, representative indices, weight per representative)
    ordered by decreasing length.
    """
    lens = E.lengths
    key = np.round(np.log(lens), 9)
    classes = []
    for k in np.unique(key)[::-1]:
        idx = np.nonzero(key == k)[0]
        if idx.size > max_per_class:
            # gaps are symmetric under reflection for the bundled sets; spread the picks
            pick = idx[np.linspace(0, idx.size - 1, max_per_class).round().astype(int)]
            pick = np.unique(pick)
        else:
            pick = idx
        classes.append((float(lens[idx[0]]), pick, idx.size / pick.size))
    return classes


def _half_gap_nodes(E: CircleSet, gaps, floor: float, ratio: float, order: int):
    """Quadrature nodes in the halves of the given gaps: panels [b r^{j+1}, b r^j]
    in the distance u to the nearer endpoint, stopping at u = floor."""
    s, w = gauss_legendre(order)
    th, wt, tag = [], [], []
    for g in gaps:
        start, L = float(E.starts[g]), float(E.lengths[g])
        b = L / 2.0
        J = max(1, int(math.floor(math.log(max(floor, 1e-300) / b) / math.log(ratio))))
        J = min(J, 200)
        for side in (0, 1):
            for j in range(J):
                hi = b * ratio ** j
                lo = b * ratio ** (j + 1)
                u = lo + (hi - lo) * s
                th.append(start + u if side == 0 else start + L - u)
                wt.append((hi - lo) * w)
                tag.append(np.full(order, j))
    if not th:
        return np.zeros(0), np.zeros(0), np.zeros(0, int)
    return normalize(np.concatenate(th)), np.concatenate(wt), np.concatenate(tag)


def _closure(levels: np.ndarray) -> tuple[float, bool]:
    if levels.size < 3:
        return 0.0, True
    q = levels[-1] / levels[-2] if levels[-2] != 0 else 0.0
    if not np.isfinite(q) or abs(q) >= 0.999:
        return float("inf"), False
    return float(levels[-1] * q / (1.0 - q)), True


def _evaluate_chunks(ctx: _RSContext, theta: np.ndarray, threads: int, chunk: int = 128):
    chunks = [theta[i:i + chunk] for i in range(0, theta.size, chunk)]

    def job(t):
        I, G, S, err, conv = ctx.evaluate(t)
        return I + G + S, err, conv

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    if not parts:
        return np.zeros(0), np.zeros(0), np.ones(0, bool)
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]))


def dirichlet_mu_density(f: OuterDistanceFunction, density, quad: QuadConfig = QuadConfig(),
                         threads: int = 1, max_per_class: int = 4, order: int = 6,
                         headroom: float | None = None) -> EnergyResult:
    """int_T D_zeta(f) density(zeta) dtheta over all gaps of E.

    Inside each half gap the distance variable is cut geometrically (ratio rho
    for Cantor sets, 1/2 otherwise) down to ``headroom`` times the truncation
    error, and the remainder is closed by geometric extrapolation.  Gaps of
    equal length form a class; the verdict is read from the growth of the
    per-class increments with log(1/length).
    """
    E = f.set
    ratio = float(E.metadata.get("ratio")) if E.metadata.get("kind") == "cantor" and \
        isinstance(E.metadata.get("ratio"), (int, float)) else 0.5
    trunc = E.truncation_error
    hr = quad.trust_factor if headroom is None else headroom
    floor = max(hr * trunc, 1e-9)
    classes = _gap_classes(E, max_per_class)
    if trunc > 0:
        # at least three panels per half gap so that the geometric closure applies
        classes = [c for c in classes if c[0] / 2.0 * ratio ** 3 >= floor]
    if not classes:
        raise UntrustedRegime(
            f"no gap of the truncated set is long enough for the energy integral: need "
            f"half-length x ratio^3 >= {floor:.3g} ({hr:g} x truncation error); build the set deeper")
    ctx = _RSContext(f, quad)
    gaps = np.concatenate([c[1] for c in classes])
    th, wt, tag = _half_gap_nodes(E, gaps, floor, ratio, order)
    D, err, conv = _evaluate_chunks(ctx, th, threads)
    if not conv.all():
        raise RuntimeError(f"local integrals did not converge at {int((~conv).sum())} nodes")
    dens = np.asarray(density(th), float)
    vals = D * dens * wt
    # split node values back per gap and per panel level
    incs, scales = [], []
    pos = 0
    closures_ok = True
    s_nodes, _ = gauss_legendre(order)
    for length, pick, mult in classes:
        acc = []
        for g in pick:
            b = E.lengths[g] / 2.0
            J = max(1, int(math.floor(math.log(floor / b) / math.log(ratio))))
            J = min(J, 200)
            n = 2 * J * order
            v = vals[pos:pos + n].reshape(2, J, order).sum(axis=(0, 2))
            pos += n
            c, ok = _closure(v)
            closures_ok &= ok
            acc.append(pairwise_sum(v) + c)
        incs.append(mult * pairwise_sum(np.array(acc)))
        scales.append(length)
    incs = np.array(incs)
    scales = np.array(scales)
    explicit = pairwise_sum(incs)
    if not closures_ok:
        return EnergyResult(float("inf"), False, float("inf"), incs, scales,
                            "local integral is not integrable across a gap endpoint",
                            np.cumsum(incs))
    finite, expo, extra, diag = _class_verdict(E, incs, scales)
    value = explicit + extra if finite is not False else float("inf")
    return EnergyResult(value, finite, expo, incs, scales, diag, np.cumsum(incs))


def _class_verdict(E: CircleSet, incs: np.ndarray, scales: np.ndarray):
    """Decide convergence of the sum of per-class increments over shrinking gaps.

    For self-similar sets (all classes are levels) increments are fitted
    against the level index: growth ``r^k`` with ``r >= 1`` diverges.  For other
    sets the remaining classes are too few to matter or are handled by fitting
    increments against log(1/length).
    """
    n = incs.size
    if n < 4:
        return True, float("nan"), 0.0, "too few length classes for a trend; sum of computed classes"
    x = np.log(1.0 / scales)
    pos = incs > 0
    if E.metadata.get("kind") == "cantor":
        k = np.arange(n)
        use = pos & (k >= 2)
        fit = linear_fit(k[use], np.log(incs[use]))
        r = math.exp(fit.slope)
        if fit.slope >= 0:
            return False, fit.slope, float("inf"), (
                f"increments per level grow with ratio {r:.4f} >= 1: divergent")
        # remaining levels (explicit ones not computed plus the ideal tail) summed geometrically
        rest = incs[-1] * r / (1.0 - r)
        return True, fit.slope, rest, f"increments per level decay with ratio {r:.4f} < 1"
    fit = linear_fit(np.log(x[pos]), np.log(incs[pos]))
    return True, fit.slope, 0.0, "sum over all explicit gaps"


def dirichlet_energy(f: OuterDistanceFunction, quad: QuadConfig = QuadConfig(), threads: int = 1,
                     max_per_class: int = 4, order: int = 6, headroom: float | None = None
                     ) -> EnergyResult:
    """(1/2pi) int_T D_zeta(f) |dzeta|."""
    res = dirichlet_mu_density(f, lambda t: np.full(np.shape(t), 1.0 / TWO_PI), quad, threads,
                               max_per_class, order, headroom)
    return res


def dirichlet_mu(f: OuterDistanceFunction, mu, quad: QuadConfig = QuadConfig(), threads: int = 1,
                 **kw) -> EnergyResult:
    """int D_zeta(f) dmu for a boundary measure (density part plus atoms)."""
    if mu.density is not None:
        res = dirichlet_mu_density(f, mu.density, quad, threads, **kw)
    else:
        res = EnergyResult(0.0, True, float("nan"), np.zeros(0), np.zeros(0), "no density part")
    atom_total = 0.0
    diag = res.diagnostic
    for point, mass in mu.atoms:
        br = rs_local(f, point, quad, trusted=False)
        if not br.finite:
            diag += f"; atom at theta={point.theta:.6g} lies on E: value +inf"
            return EnergyResult(float("inf"), False, res.growth_exponent, res.increments,
                                res.scales, diag, res.trajectory)
        atom_total += mass * br.total
    return EnergyResult(res.value + atom_total, res.finite, res.growth_exponent, res.increments,
                        res.scales, diag, res.trajectory)


def write_local_csv(path, rows) -> None:
    """Rows of (theta, delta, D, over_I, over_Gamma, over_Sigma, ratio_to_model)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zeta", "delta", "D_zeta", "over_I", "over_Gamma", "over_Sigma",
                    "ratio_to_model"])
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
