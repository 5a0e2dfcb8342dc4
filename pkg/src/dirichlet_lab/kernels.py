"""Integrals of gap-structured numerators against the kernel 1/|zeta - zeta'|^2.

The quantities computed here all have the form

    int_{T \\ {zeta}} N_zeta(dist(zeta', E)) / |zeta - zeta'|^2 |dzeta'|

split over the component of T minus E containing zeta (region "I") and, on the
other gaps, over the parts where dist <= dist(zeta, E) ("Gamma") and where
dist >= dist(zeta, E) ("Sigma").  The numerator is given two ways: as a
vectorised callback for direct quadrature, and as a combination
``sum_i c_i(zeta) h_i(d)`` of fixed basis functions.  The second form lets the
contribution of every gap that is small compared with its distance to zeta be
expanded in moments of the basis functions, which are computed once per gap
length.  Gaps close to zeta and the component of zeta itself go through batched
adaptive Gauss-Kronrod quadrature.

Each half of a gap is parameterised by the arc distance ``u`` to its nearer
endpoint ``e``; the boundary point is ``e + s u`` with orientation ``s = +-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._quad import QuadConfig, adaptive, ladder
from .circle_sets import (TWO_PI, CircleSet, chord, normalize, residual_arc_integral)

REGIONS = ("I", "Gamma", "Sigma")
# panel cut fractions toward a gap endpoint (logarithmic singularities live there)
_GRADED = np.array([0.0, 2.0 ** -40, 2.0 ** -30, 2.0 ** -20, 2.0 ** -12, 2.0 ** -8,
                    2.0 ** -4, 2.0 ** -2, 1.0])
_DIAG = np.array([-0.5, -0.125, -2.0 ** -6, -2.0 ** -10, 2.0 ** -10, 2.0 ** -6, 0.125, 0.5])
_BUDGET = 250_000          # (zeta, half-gap) pairs handled per far-field chunk


def wrap(x):
    """Map angle differences to (-pi, pi]."""
    y = np.mod(np.asarray(x, float) + math.pi, TWO_PI) - math.pi
    return np.where(y == -math.pi, math.pi, y)


def kernel(delta):
    """1 / |zeta - zeta'|^2 for an angular separation delta."""
    return 0.25 / np.sin(0.5 * np.asarray(delta, float)) ** 2


@dataclass
class RegionSums:
    I: np.ndarray
    Gamma: np.ndarray
    Sigma: np.ndarray
    error: np.ndarray
    converged: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.I + self.Gamma + self.Sigma


def _ladder_moments(h, b, m):
    with np.errstate(all="ignore"):
        res = ladder(lambda u: h(chord(u)), b, moments=m - 1)
    if not res.finite.all():
        raise ValueError("basis function is not integrable at gap endpoints")
    return res.value


def moment_table(h, b, m: int, direct_limit: int = 3000, step: float = 0.02) -> np.ndarray:
    """Moments int_0^b (u/b)^k h(chord(u)) du, k < m, for every entry of b.

    Up to ``direct_limit`` distinct lengths are integrated directly.  Beyond
    that, moments divided by b are tabulated on a uniform grid in log b and
    interpolated with six-point Lagrange stencils; they are smooth functions of
    log b because h is smooth away from 0.
    """
    b = np.asarray(b, float)
    if b.size <= direct_limit:
        return _ladder_moments(h, b, m)
    x = np.log(b)
    x0, x1 = float(x.min()) - 3 * step, float(x.max()) + 3 * step
    n = int(math.ceil((x1 - x0) / step)) + 1
    grid = x0 + step * np.arange(n)
    table = _ladder_moments(h, np.exp(grid), m) / np.exp(grid)[:, None]
    pos = (x - x0) / step
    j0 = np.clip(np.floor(pos).astype(int) - 2, 0, n - 6)
    t = pos - j0
    out = np.zeros((b.size, m))
    for j in range(6):
        wj = np.ones_like(t)
        for k in range(6):
            if k != j:
                wj *= (t - k) / (j - k)
        out += wj[:, None] * table[j0 + j]
    return out * b[:, None]


def _taylor_polys(m: int) -> list[np.ndarray]:
    """Coefficients (in t = cot(y/2)) of the k-th derivative of 1/(4 sin^2(y/2))."""
    polys = [np.array([0.25, 0.0, 0.25])]
    dt = np.array([-0.5, 0.0, -0.5])
    for _ in range(1, m):
        polys.append(npoly.polymul(npoly.polyder(polys[-1]), dt))
    return polys


class KernelEngine:
    """Evaluates region sums for many boundary points on one set.

    ``basis`` holds the functions h_i(d) of chordal distance; ``near`` is the
    direct numerator ``near(d, zeta_index)``.  The basis moments are computed
    once in the constructor.
    """

    def __init__(self, E: CircleSet, basis: Sequence[Callable], quad: QuadConfig = QuadConfig()):
        self.E = E
        self.quad = quad
        self.basis = list(basis)
        self.m = quad.taylor_terms
        ng = E.n_gaps
        self.he = np.concatenate([E.starts, E.starts + E.lengths])
        self.hs = np.concatenate([np.ones(ng), -np.ones(ng)])
        self.hb = np.concatenate([E.lengths, E.lengths]) / 2.0
        self.hgap = np.concatenate([np.arange(ng), np.arange(ng)])
        self.polys = _taylor_polys(self.m)
        self.fact = np.array([math.factorial(k) for k in range(self.m)], float)
        uniq, inv = np.unique(self.hb, return_inverse=True)
        mom = np.empty((len(self.basis), self.hb.size, self.m))
        for i, h in enumerate(self.basis):
            mom[i] = moment_table(h, uniq, self.m)[inv]
        self.moments = mom
        self.res_centres = E.residual_starts + E.residual_length / 2.0
        self.res_mass = np.zeros(len(self.basis))
        if E.has_tail:
            for i, h in enumerate(self.basis):
                val, ok = residual_arc_integral(h, E)
                if not ok:
                    raise ValueError(f"basis function {i} is not integrable on residual arcs")
                self.res_mass[i] = val

    # -- far field ------------------------------------------------------------
    def _taylor_terms(self, t, scale):
        """P_k(t) scale^k / k!  for k < m, stacked on a trailing axis."""
        out = np.empty(t.shape + (self.m,))
        p = np.ones_like(scale)
        for k in range(self.m):
            out[..., k] = npoly.polyval(t, self.polys[k]) * p / self.fact[k]
            p = p * scale
        return out

    def _far(self, theta, coeffs, a, own, sigma):
        """Moment-expansion sums over far half gaps and residual arcs."""
        nz = theta.size
        nh = self.hb.size
        gam = np.zeros(nz)
        sig = np.zeros(nz)
        err = np.zeros(nz)
        near = np.zeros((nz, nh), bool)
        rows = max(1, _BUDGET // max(nh, 1))
        with np.errstate(all="ignore"):
            amom = np.empty((len(self.basis), nz, self.m))
            for i, h in enumerate(self.basis):
                res = ladder(lambda u, h=h: h(chord(u)), np.maximum(a, 1e-300), moments=self.m - 1)
                amom[i] = np.where(a[:, None] > 0, res.value, 0.0)
            amu = np.einsum("zi,izk->zk", coeffs, amom)
            for c0 in range(0, nz, rows):
                sl = slice(c0, c0 + rows)
                d0 = wrap(self.he[None, :] - theta[sl, None])
                isfar = (self.hb[None, :] <= self.quad.far_ratio * np.abs(d0)) & \
                        (self.hgap[None, :] != own[sl, None])
                near[sl] = ~isfar
                d0 = np.where(isfar, d0, 1.0)
                tt = 1.0 / np.tan(0.5 * d0)
                sb = self.hs[None, :] * self.hb[None, :]
                terms_b = self._taylor_terms(tt, np.broadcast_to(sb, tt.shape))
                mfull = np.einsum("zi,ihk->zhk", coeffs[sl], self.moments)
                full = np.einsum("zhk,zhk->zh", terms_b, mfull)
                ab = a[sl, None] < self.hb[None, :]
                sa = self.hs[None, :] * a[sl, None]
                terms_a = self._taylor_terms(tt, np.broadcast_to(sa, tt.shape))
                part = np.einsum("zhk,zk->zh", terms_a, amu[sl])
                g = np.where(ab, part, full)
                s = np.where(ab, full - part, 0.0)
                e = np.abs(terms_b[..., -1] * mfull[..., -1])
                gam[sl] = np.sum(np.where(isfar, g, 0.0), axis=1)
                if sigma:
                    sig[sl] = np.sum(np.where(isfar, s, 0.0), axis=1)
                err[sl] = np.sum(np.where(isfar, e, 0.0), axis=1)
            if self.res_centres.size:
                mass = coeffs @ self.res_mass
                for c0 in range(0, nz, rows):
                    sl = slice(c0, c0 + rows)
                    k = kernel(wrap(self.res_centres[None, :] - theta[sl, None]))
                    gam[sl] += mass[sl] * np.sum(k, axis=1)
        return gam, sig, err, near

    # -- near field -------------------------------------------------------------
    def run(self, theta, coeffs, near_numerator, diag_limit=None, include_own: bool = True,
            sigma: bool = True) -> RegionSums:
        """Region sums at angles ``theta`` (all off E).

        ``coeffs`` has shape (n_theta, n_basis).  ``diag_limit(zeta_index)``
        gives the limit of the full integrand at zeta' = zeta and enables the
        exclusion window around the diagonal.
        """
        theta = normalize(np.atleast_1d(np.asarray(theta, float)))
        coeffs = np.atleast_2d(np.asarray(coeffs, float))
        nz = theta.size
        E = self.E
        own, x, inside = E.locate(theta)
        if not inside.all():
            raise ValueError("all evaluation points must lie off the set")
        L = E.lengths[own]
        a = np.minimum(x, L - x)
        gam, sig, ferr, near = self._far(theta, coeffs, a, own, sigma)
        zi_n, h_n = np.nonzero(near)
        own_rows = self.hgap[h_n] == own[zi_n]
        if not include_own:
            zi_n, h_n, own_rows = zi_n[~own_rows], h_n[~own_rows], own_rows[~own_rows]
        d0 = wrap(self.he[h_n] - theta[zi_n])
        s = self.hs[h_n]
        b = self.hb[h_n]
        ar = a[zi_n]
        pdiag = -s * d0                                    # position of zeta in own halves
        w = self.quad.exclusion_radius_factor * ar if diag_limit is not None else np.zeros_like(ar)
        nan = np.full(h_n.size, np.nan)
        cols = [b[:, None] * _GRADED[None, :],
                np.where(own_rows, nan, np.where(ar < b, ar, nan))[:, None],
                np.where(own_rows, nan, np.abs(d0))[:, None] * np.array([[0.25, 1.0, 4.0]]),
                np.where(own_rows, pdiag, nan)[:, None] + np.where(own_rows, ar, nan)[:, None] * _DIAG[None, :],
                np.where(own_rows, pdiag - w, nan)[:, None],
                np.where(own_rows, pdiag + w, nan)[:, None]]
        cuts = np.concatenate(cols, axis=1)
        cuts = np.where(np.isfinite(cuts), np.clip(cuts, 0.0, b[:, None]), b[:, None])
        cuts = np.sort(cuts, axis=1)
        lo, hi = cuts[:, :-1], cuts[:, 1:]
        row = np.broadcast_to(np.arange(h_n.size)[:, None], lo.shape)
        keep = hi > lo
        if diag_limit is not None:
            inwin = own_rows[:, None] & (lo >= (pdiag - w)[:, None]) & (hi <= (pdiag + w)[:, None])
            keep &= ~inwin
        lo, hi, row = lo[keep], hi[keep], row[keep]
        mid = 0.5 * (lo + hi)
        region = np.where(own_rows[row], 0, np.where(mid <= ar[row], 1, 2))
        if not sigma:
            sel = region != 2
            lo, hi, row, region = lo[sel], hi[sel], row[sel], region[sel]
        pz = zi_n[row]
        pd0 = d0[row]
        ps = s[row]

        def integrand(u, origin):
            dd = pd0[origin] + ps[origin] * u
            return near_numerator(chord(u), pz[origin]) * kernel(dd)

        scale = np.abs(gam) + np.abs(sig)
        ng = 3 * nz
        atol = np.maximum(self.quad.abs_tol, 0.25 * self.quad.rel_tol * np.repeat(scale, 3))
        with np.errstate(all="ignore"):
            res = adaptive(integrand, lo, hi, 3 * pz + region, ng, rel_tol=self.quad.rel_tol,
                           abs_tol=atol, max_iter=self.quad.max_subdivisions)
        val = res.value.reshape(nz, 3)
        er = res.error.reshape(nz, 3).sum(axis=1)
        conv = res.converged.reshape(nz, 3).all(axis=1)
        I = val[:, 0].copy()
        if diag_limit is not None and include_own:
            # the window [zeta - w, zeta + w] lies inside the own gap since w << a
            lim = np.asarray(diag_limit(np.arange(nz)), float)
            window = 2.0 * self.quad.exclusion_radius_factor * a * lim
            I += window
            er = er + np.abs(window) * self.quad.exclusion_radius_factor
        return RegionSums(I, gam + val[:, 1], sig + val[:, 2], er + ferr, conv)
