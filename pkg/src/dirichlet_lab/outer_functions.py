"""Outer functions whose boundary modulus is a weight of the distance to a set.

For a weight omega and a closed set E the outer function f has
``|f*(zeta)| = omega(dist(zeta, E))`` almost everywhere and is recovered inside
the disk from the Herglotz integral of ``log omega(dist)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import QuadConfig, adaptive
from .circle_sets import (TWO_PI, CircleSet, IntegralResult, _theta, chord,
                          dist_to_set, pushforward_integral, residual_arc_integral)
from .weights import Weight


@dataclass(frozen=True)
class OuterDistanceFunction:
    weight: Weight
    set: CircleSet

    def modulus(self, theta):
        """omega(dist) at boundary angles; the limit omega(0+) on E."""
        d = np.asarray(dist_to_set(np.asarray(theta, float), self.set), float)
        with np.errstate(all="ignore"):
            zero = self.weight.value(np.array([0.0]))[0]
            vals = np.where(d > 0, self.weight.value(np.where(d > 0, d, 1.0)), zero)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return float(vals) if vals.ndim == 0 else vals

    def log_modulus(self, d):
        """log omega at chordal distances d > 0."""
        return self.weight.log(np.asarray(d, float))


def boundary_modulus(f: OuterDistanceFunction, zeta) -> float:
    return float(f.modulus(_theta(zeta)))


def carleson_check(E: CircleSet, w: Weight) -> IntegralResult:
    """int_T |log omega(dist(zeta, E))| |dzeta|, with a divergence diagnostic."""
    res = pushforward_integral(lambda t: np.abs(w.log(t)), E, "exact_gaps")
    if not res.finite:
        msg = "log omega(dist) is not integrable: " + res.diagnostic
        return IntegralResult(float("inf"), False, msg, res.trajectory)
    return res


def _herglotz(z: complex, theta):
    e = np.exp(1j * theta)
    return (e + z) / (e - z)


def evaluate_interior(f: OuterDistanceFunction, z: complex, quad: QuadConfig = QuadConfig()) -> complex:
    """f(z) for |z| < 1 from the Herglotz integral of log|f*|.

    Every gap is cut at its midpoint into two halves parameterised by the arc
    distance u to the nearer endpoint; the logarithmic singularity at u = 0 is
    handled by graded initial panels and adaptive refinement, and panels are
    also cut where the Poisson kernel peaks.  Residual arcs of a truncated set
    contribute their total log-mass times the kernel at the arc centre.
    """
    z = complex(z)
    if abs(z) > 1.0 - 1e-8:
        raise ValueError("evaluate_interior needs |z| <= 1 - 1e-8")
    E = f.set
    chk = carleson_check(E, f.weight)
    if not chk.finite:
        raise ValueError(chk.diagnostic)
    g = f.weight.log
    # half gaps: endpoint e, orientation s, half-length b
    e = np.concatenate([E.starts, E.starts + E.lengths])
    s = np.concatenate([np.ones(E.n_gaps), -np.ones(E.n_gaps)])
    b = np.concatenate([E.lengths, E.lengths]) / 2.0
    r = abs(z)
    phi = math.atan2(z.imag, z.real)
    depth = max(1.0 - r, 1e-300)
    # graded cuts toward the endpoint and around the kernel peak
    fr = np.array([0.0] + [2.0 ** -k for k in range(24, 0, -2)] + [1.0])
    a_list, b_list, o_list = [], [], []
    for h in range(e.size):
        cuts = b[h] * fr
        pk = np.mod(s[h] * (phi - e[h]), TWO_PI)
        extra = pk + depth * np.array([-8, -2, -0.5, 0.0, 0.5, 2, 8])
        extra = extra[(extra > 0) & (extra < b[h])]
        cuts = np.unique(np.concatenate([cuts, extra]))
        a_list.append(cuts[:-1])
        b_list.append(cuts[1:])
        o_list.append(np.full(cuts.size - 1, h))
    pa = np.concatenate(a_list)
    pb = np.concatenate(b_list)
    ph = np.concatenate(o_list)

    def integrand(x, origin, part):
        h = ph[origin]
        th = e[h] + s[h] * x
        with np.errstate(all="ignore"):
            val = _herglotz(z, th) * g(chord(x))
        return val.real if part == 0 else val.imag

    out = []
    for part in (0, 1):
        res = adaptive(lambda x, o: integrand(x, o, part), pa, pb, np.zeros(pa.size, int), 1,
                       rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_iter=quad.max_subdivisions)
        if not res.converged[0]:
            raise RuntimeError(f"Herglotz quadrature did not converge: achieved error "
                               f"{res.error[0]:.3g} on value {res.value[0]:.6g}")
        out.append(res.value[0])
    total = complex(out[0], out[1])
    if E.has_tail:
        mass, ok = residual_arc_integral(g, E)
        if not ok:
            raise ValueError("log omega(dist) is not integrable on the residual arcs")
        centres = E.residual_starts + E.residual_length / 2.0
        total += mass * complex(np.sum(_herglotz(z, centres)))
    return complex(np.exp(total / TWO_PI))
