"""Vectorised quadrature building blocks.

Two rules live here.  ``adaptive`` is a batched Gauss-Kronrod (7/15) integrator
that refines many independent integrals at once; every integral ("group") makes
its own splitting decisions, so the result for one group never depends on which
other groups share the batch.  ``ladder`` integrates functions with an
integrable endpoint singularity at zero on geometrically shrinking panels and
closes the remainder by geometric extrapolation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Kronrod 15 / Gauss 7 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights on the same 15 nodes (zero at Kronrod-only nodes).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and subdivision policy for the singular quadratures.

    ``exclusion_radius_factor`` sets the half-width of the window around the
    diagonal (relative to the local scale, the distance to the nearest gap
    endpoint) on which the integrand is replaced by its limiting value.
    ``trust_factor`` is the multiple of a set's truncation error below which
    distances are considered unresolved.  ``far_ratio`` bounds gap-size over
    distance for the moment expansion of far gaps.
    """
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 80
    exclusion_radius_factor: float = 1e-6
    trust_factor: float = 100.0
    far_ratio: float = 0.1

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 32:
            raise ValueError("max_subdivisions must be at least 32")
        if not (0 < self.far_ratio < 1):
            raise ValueError("far_ratio must lie in (0, 1)")

    @property
    def taylor_terms(self) -> int:
        return int(min(24, max(6, np.ceil(np.log(self.rel_tol / 10.0) / np.log(self.far_ratio)))))

    def halved(self) -> "QuadConfig":
        from dataclasses import replace
        return replace(self, rel_tol=self.rel_tol / 2, abs_tol=self.abs_tol / 2)


@dataclass
class AdaptiveResult:
    value: np.ndarray        # per group
    error: np.ndarray        # per group
    converged: np.ndarray    # per group, bool
    origin_value: np.ndarray  # per original panel
    evaluations: int


def _kronrod(func, a, b, origin):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    idx = np.broadcast_to(origin[:, None], x.shape)
    f = np.asarray(func(x.ravel(), idx.ravel()), dtype=float).reshape(x.shape)
    k = half * (f @ KRONROD_WEIGHTS)
    g = half * (f @ GAUSS_WEIGHTS)
    err = np.abs(k - g)
    bad = ~np.isfinite(k)
    err[bad] = np.inf
    return k, err


def adaptive(func, a, b, group, n_groups: int, rel_tol: float = 1e-8,
             abs_tol=1e-12, max_iter: int = 80,
             max_panels: int = 4_000_000) -> AdaptiveResult:
    """Integrate ``func`` over the panels ``[a_i, b_i]`` and sum per group.

    ``func(x, origin)`` receives flat arrays of abscissae and the index of the
    original panel each abscissa descends from.  Panels of one group are split
    until the group's error estimate is below ``max(abs_tol, rel_tol*|value|)``;
    ``abs_tol`` may be given per group.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    group = np.asarray(group, dtype=np.int64)
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), (n_groups,))
    origin = np.arange(a.size, dtype=np.int64)
    n_orig = a.size
    if a.size == 0:
        z = np.zeros(n_groups)
        return AdaptiveResult(z, z.copy(), np.ones(n_groups, bool), np.zeros(0), 0)
    val, err = _kronrod(func, a, b, origin)
    evals = 15 * a.size
    converged = np.zeros(n_groups, bool)
    for _ in range(max_iter):
        gval = np.bincount(group, weights=val, minlength=n_groups)
        gerr = np.bincount(group, weights=err, minlength=n_groups)
        tol = np.maximum(abs_tol, rel_tol * np.abs(gval))
        converged = gerr <= tol
        if converged.all() or a.size > max_panels:
            break
        # Within each unconverged group split the smallest set of worst panels
        # whose removal would leave at most half the tolerance behind.
        order = np.lexsort((np.arange(a.size), -err, group))
        e_sorted = err[order]
        g_sorted = group[order]
        csum = np.cumsum(e_sorted)
        start = np.searchsorted(g_sorted, g_sorted, side="left")
        before = csum - e_sorted - np.where(start > 0, csum[start - 1], 0.0)
        remaining = gerr[g_sorted] - before
        pick = (remaining > 0.5 * tol[g_sorted]) & ~converged[g_sorted]
        width_ok = (b[order] - a[order]) > 4e-16 * np.maximum(1.0, np.abs(a[order]))
        pick &= width_ok
        if not pick.any():
            break
        split = np.zeros(a.size, bool)
        split[order[pick]] = True
        keep = ~split
        sa, sb = a[split], b[split]
        sm = 0.5 * (sa + sb)
        ca = np.stack([sa, sm], axis=1).ravel()
        cb = np.stack([sm, sb], axis=1).ravel()
        cg = np.repeat(group[split], 2)
        co = np.repeat(origin[split], 2)
        cv, ce = _kronrod(func, ca, cb, co)
        evals += 15 * ca.size
        a = np.concatenate([a[keep], ca])
        b = np.concatenate([b[keep], cb])
        group = np.concatenate([group[keep], cg])
        origin = np.concatenate([origin[keep], co])
        val = np.concatenate([val[keep], cv])
        err = np.concatenate([err[keep], ce])
    gval = np.bincount(group, weights=val, minlength=n_groups)
    gerr = np.bincount(group, weights=err, minlength=n_groups)
    tol = np.maximum(abs_tol, rel_tol * np.abs(gval))
    oval = np.bincount(origin, weights=val, minlength=n_orig)
    return AdaptiveResult(gval, gerr, gerr <= tol, oval, evals)


def integrate(func, a: float, b: float, breakpoints=(), rel_tol=1e-10,
              abs_tol=1e-14, max_iter=80) -> tuple[float, float]:
    """Scalar convenience wrapper: integral of a vectorised ``func`` over [a, b]."""
    pts = np.unique(np.clip(np.concatenate([[a, b], np.asarray(breakpoints, float)]), a, b))
    res = adaptive(lambda x, _o: func(x), pts[:-1], pts[1:], np.zeros(pts.size - 1, int), 1,
                   rel_tol, abs_tol, max_iter)
    return float(res.value[0]), float(res.error[0])


@dataclass
class LadderResult:
    value: np.ndarray     # integral over (0, b] for each b, inf where divergent
    levels: np.ndarray    # per-level contributions, shape (n_b, n_levels)
    finite: np.ndarray    # bool per b


def ladder(func, b, n_levels: int = 56, ratio: float = 0.5, order: int = 10,
           moments: int = 0, chunk: int = 4096) -> LadderResult:
    """Integrate ``func(u)`` over ``(0, b]`` for each entry of ``b``.

    Panels are ``[b r^{j+1}, b r^j]`` for ``j < n_levels``; the part below the
    last panel is closed by geometric extrapolation of the final two panel
    contributions.  A ratio of the last contributions that is not below one
    marks the integral as divergent.  With ``moments = m`` the integrand is
    additionally weighted by ``(u/b)^k`` for ``k = 0..m`` and the result gains a
    trailing axis.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    s, w = gauss_legendre(order)
    j = np.arange(n_levels)
    lo = ratio ** (j + 1)
    width = ratio ** j - lo
    sn = (lo[:, None] + width[:, None] * s[None, :]).ravel()       # in (0, 1)
    wn = (width[:, None] * w[None, :]).ravel()
    k = np.arange(moments + 1)
    pw = sn[:, None] ** k[None, :]                                 # (nodes, m+1)
    out_levels = np.empty((b.size, n_levels, moments + 1))
    for c0 in range(0, b.size, chunk):
        bc = b[c0:c0 + chunk]
        u = bc[:, None] * sn[None, :]
        f = np.asarray(func(u), dtype=float)
        contrib = (f * wn[None, :])[:, :, None] * pw[None, :, :]
        contrib = contrib.reshape(bc.size, n_levels, order, moments + 1).sum(axis=2)
        out_levels[c0:c0 + chunk] = contrib * bc[:, None, None]
    total = out_levels.sum(axis=1)
    last, prev = out_levels[:, -1, :], out_levels[:, -2, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(prev != 0, last / prev, 0.0)
    ok = np.abs(q) < 0.999
    finite = np.all(np.isfinite(total), axis=1) & np.all(ok, axis=1)
    tail = np.where(ok, last * q / np.where(ok, 1.0 - q, 1.0), np.inf)
    value = np.where(finite[:, None], total + tail, np.inf)
    if moments == 0:
        return LadderResult(value[:, 0], out_levels[:, :, 0], finite)
    return LadderResult(value, out_levels, finite)


def ladder_adaptive(func, b, n_levels: int = 56, ratio: float = 0.5, rel_tol: float = 1e-12,
                    abs_tol: float = 1e-300, max_iter: int = 60, chunk: int = 2048) -> LadderResult:
    """Same panels and closure as :func:`ladder`, but every panel is refined by
    adaptive Gauss-Kronrod bisection, so integrands with kinks or jumps inside
    a panel are resolved to ``rel_tol``."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    j = np.arange(n_levels)
    lo_f, hi_f = ratio ** (j + 1), ratio ** j
    out_levels = np.empty((b.size, n_levels))
    for c0 in range(0, b.size, chunk):
        bc = b[c0:c0 + chunk]
        a_ = (bc[:, None] * lo_f[None, :]).ravel()
        b_ = (bc[:, None] * hi_f[None, :]).ravel()
        grp = np.repeat(np.arange(bc.size), n_levels)
        res = adaptive(lambda x, o: func(x), a_, b_, grp, bc.size, rel_tol=rel_tol,
                       abs_tol=abs_tol, max_iter=max_iter)
        out_levels[c0:c0 + chunk] = res.origin_value.reshape(bc.size, n_levels)
    total = out_levels.sum(axis=1)
    last, prev = out_levels[:, -1], out_levels[:, -2]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(prev != 0, last / prev, 0.0)
    ok = np.abs(q) < 0.999
    finite = np.isfinite(total) & ok
    tail = np.where(ok, last * q / np.where(ok, 1.0 - q, 1.0), np.inf)
    return LadderResult(np.where(finite, total + tail, np.inf), out_levels, finite)


def pairwise_sum(x) -> float:
    """Deterministic pairwise summation (independent of thread layout)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        return 0.0
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return float(x[0])
