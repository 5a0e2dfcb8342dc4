"""Finite measures on the closed disk used by the Carleson and capacity tests.

A boundary measure has an absolutely continuous part and finitely many atoms.
When the density is a function of the distance to a closed set (a *profile*)
arc masses and sublevel masses are computed exactly from the gap structure;
otherwise arcs are integrated adaptively.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._quad import integrate, ladder
from .circle_sets import (TWO_PI, AnglePoint, CircleSet, arc_from_chord, chord,
                          dist_to_set, normalize, pushforward_integral)
from .set_classes import _ArcIntegrals
from .weights import Weight


def _in_arc(theta, start, length):
    return np.mod(theta - np.asarray(start, float), TWO_PI) <= np.asarray(length, float)


@dataclass(frozen=True)
class BoundaryMeasure:
    """density(theta) with respect to |dzeta|, plus atoms (AnglePoint, mass).

    ``profile`` and ``set`` describe the density as ``profile(dist(zeta, set))``
    when that structure is known.
    """
    density: Callable | None
    atoms: tuple = ()
    profile: Callable | None = None
    set: CircleSet | None = None
    name: str = "custom"
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for p, m in self.atoms:
            if not isinstance(p, AnglePoint) or not (m >= 0 and np.isfinite(m)):
                raise ValueError("atoms must be (AnglePoint, finite nonnegative mass)")
        if self.profile is not None and self.set is None:
            raise ValueError("a distance profile needs its set")

    # -- construction helpers ---------------------------------------------
    def scaled(self, c: float) -> "BoundaryMeasure":
        if c <= 0:
            raise ValueError("scale must be positive")
        dens = None if self.density is None else (lambda t, d=self.density: c * d(t))
        return replace(self, density=dens, atoms=tuple((p, c * m) for p, m in self.atoms),
                       scale=self.scale * c, _cache={})

    def with_atoms(self, atoms) -> "BoundaryMeasure":
        return replace(self, atoms=tuple(self.atoms) + tuple(atoms), _cache={})

    # -- masses -----------------------------------------------------------
    def _integrals(self):
        if "arc" not in self._cache:
            self._cache["arc"] = _ArcIntegrals(self.set, self.profile)
        return self._cache["arc"]

    def arc_mass(self, starts, lengths):
        """mu of the closed arcs [start, start + length]."""
        starts = np.atleast_1d(np.asarray(starts, float))
        lengths = np.atleast_1d(np.asarray(lengths, float))
        out = np.zeros(starts.size)
        if self.density is not None:
            if self.name == "lebesgue":
                out += self.scale * np.minimum(lengths, TWO_PI)
            elif self.profile is not None:
                with np.errstate(all="ignore"):
                    out += self.scale * self._integrals().over(starts, np.minimum(lengths, TWO_PI))
            else:
                for k, (s, L) in enumerate(zip(starts, lengths)):
                    out[k] = integrate(self.density, s, s + min(L, TWO_PI), rel_tol=1e-10)[0]
        for p, m in self.atoms:
            out += m * _in_arc(p.theta, starts, lengths)
        return out

    def total_mass(self) -> float:
        return float(self.arc_mass(np.array([0.0]), np.array([TWO_PI]))[0])

    def sublevel_mass(self, E: CircleSet, t):
        """mu(E_t) with E_t = {zeta : dist(zeta, E) <= t}."""
        t = np.atleast_1d(np.asarray(t, float))
        out = np.zeros(t.size)
        if self.density is not None:
            if self.name == "lebesgue":
                from .circle_sets import sublevel_length
                out += self.scale * sublevel_length(E, t)
            elif self.profile is not None and self.set is E:
                out += self.scale * _profile_sublevel(E, self.profile, t)
            else:
                raise ValueError("sublevel masses need Lebesgue or a profile on the same set")
        for p, m in self.atoms:
            out += m * (dist_to_set(p.theta, E) <= t)
        return out


def _profile_sublevel(E: CircleSet, h, t):
    """sum over all gaps (tail included) of 2 int_0^{min(a_t, L/2)} h(chord u) du."""
    lens, mult = E.all_gap_lengths(True)
    b = lens / 2.0
    order = np.argsort(b)
    b, mult = b[order], mult[order]
    with np.errstate(all="ignore"):
        G = lambda x: ladder(lambda u: h(chord(u)), np.atleast_1d(x)).value
        Gb = G(b)
        prefix = np.concatenate([[0.0], np.cumsum(mult * Gb)])
        cm = np.concatenate([[0.0], np.cumsum(mult)])
        a = np.asarray(arc_from_chord(np.minimum(t, 2.0)), float)
        Ga = G(np.maximum(a, 1e-300))
    k = np.searchsorted(b, a, side="right")
    return 2.0 * (prefix[k] + (cm[-1] - cm[k]) * Ga)


def lebesgue() -> BoundaryMeasure:
    """Arc length |dzeta| (total mass 2 pi)."""
    return BoundaryMeasure(lambda t: np.ones(np.shape(t)), (), None, None, "lebesgue")


def dist_power(E: CircleSet, p: float) -> BoundaryMeasure:
    """dist(zeta, E)^p |dzeta|, p > -1."""
    if p <= -1:
        raise ValueError("dist^p is integrable only for p > -1")
    prof = lambda d: np.power(d, p)
    return BoundaryMeasure(lambda th: prof(dist_to_set(np.asarray(th, float), E)), (), prof, E,
                           f"dist^{p:g}")


def from_weight(w: Weight, E: CircleSet) -> BoundaryMeasure:
    """dist * omega'(dist)^2 |dzeta|."""
    prof = lambda d: d * w.deriv(d) ** 2
    dens = lambda th: prof(dist_to_set(np.asarray(th, float), E))
    return BoundaryMeasure(dens, (), prof, E, f"dist*omega'^2[{w.describe()}]")


def atoms_only(atoms) -> BoundaryMeasure:
    return BoundaryMeasure(None, tuple(atoms), name="atomic")


def profile_total_is_finite(E: CircleSet, h) -> bool:
    return pushforward_integral(h, E, "exact_gaps").finite


@dataclass(frozen=True)
class DiskMeasure:
    """Point masses at points of the closed disk.

    ``cell`` is the arc width that each boundary point stands for when the
    measure discretises a boundary measure; it regularises the diagonal of the
    logarithmic kernel (a uniform arc of width h has self-energy
    m^2 (log(1/h) + 3/2)).
    """
    points: np.ndarray
    masses: np.ndarray
    cell: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, complex).ravel()
        ms = np.asarray(self.masses, float).ravel()
        if pts.size != ms.size:
            raise ValueError("points and masses differ in length")
        if np.any(ms < 0) or np.any(np.abs(pts) > 1.0 + 1e-12):
            raise ValueError("masses must be nonnegative and points in the closed disk")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)

    @classmethod
    def from_boundary(cls, mu: BoundaryMeasure, n: int = 4096) -> "DiskMeasure":
        """Discretise a boundary measure on n equal arcs (mass at each arc centre)."""
        h = TWO_PI / n
        starts = np.arange(n) * h
        m = replace(mu, atoms=(), _cache={}).arc_mass(starts, np.full(n, h)) if mu.density is not None \
            else np.zeros(n)
        # each atom goes to exactly one cell
        for p, a in mu.atoms:
            m[int(np.floor(np.mod(p.theta, TWO_PI) / h)) % n] += a
        return cls(np.exp(1j * (starts + np.pi / n)), np.maximum(m, 0.0), TWO_PI / n)

    def box_mask(self, start: float, length: float) -> np.ndarray:
        """Points of the closed box over the arc: angle in the arc, 1 - |I| <= r <= 1."""
        r = np.abs(self.points)
        ang = np.angle(self.points)
        inside = _in_arc(ang, start, length) | (r == 0)
        return inside & (r >= 1.0 - length)
