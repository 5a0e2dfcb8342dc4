"""Boundary and disk measures."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab.circle_sets import AnglePoint, sublevel_length
from dirichlet_lab.measures import (BoundaryMeasure, DiskMeasure, atoms_only, dist_power, from_weight,
                                    lebesgue)
from dirichlet_lab.weights import power_weight

from conftest import scan_distance


def _brute_mass(E, profile, start, length, n=400_000):
    th = start + (np.arange(n) + 0.5) * (length / n)
    with np.errstate(all="ignore"):
        vals = np.nan_to_num(profile(scan_distance(E, th)), nan=0.0)
    return float(np.sum(vals) * length / n)


class TestLebesgue:
    def test_total(self):
        assert lebesgue().total_mass() == pytest.approx(2 * math.pi)

    @given(st.floats(0, 7), st.floats(0, 6))
    def test_arc_mass_is_length(self, s, L):
        assert lebesgue().arc_mass(s, L)[0] == pytest.approx(L)

    def test_sublevel_is_length(self, cantor_third):
        t = np.array([1e-5, 1e-3, 0.1])
        np.testing.assert_allclose(lebesgue().sublevel_mass(cantor_third, t),
                                   sublevel_length(cantor_third, t), rtol=1e-14)

    def test_scaled(self):
        assert lebesgue().scaled(0.5).total_mass() == pytest.approx(math.pi)
        with pytest.raises(ValueError):
            lebesgue().scaled(0.0)


class TestProfiles:
    def test_distance_to_point(self, point):
        # int_0^{2pi} 2 sin(u/2) du = 8
        assert dist_power(point, 1.0).total_mass() == pytest.approx(8.0, rel=1e-12)

    @pytest.mark.parametrize("start,length", [(0.3, 1.0), (5.9, 0.8), (2.0, 0.01)])
    def test_arc_mass_against_scan(self, two_points, start, length):
        mu = dist_power(two_points, 0.5)
        assert mu.arc_mass(start, length)[0] == pytest.approx(
            _brute_mass(two_points, lambda d: d ** 0.5, start, length), rel=1e-6)

    def test_weight_measure_against_scan(self, cantor_small):
        w = power_weight(0.4)
        mu = from_weight(w, cantor_small)
        g = int(np.argmax(cantor_small.lengths))
        s, L = float(cantor_small.starts[g]) + 0.05, float(cantor_small.lengths[g]) - 0.1
        prof = lambda d: d * w.deriv(d) ** 2
        assert mu.arc_mass(s, L)[0] == pytest.approx(_brute_mass(cantor_small, prof, s, L), rel=1e-6)

    def test_weight_measure_sees_residual_arcs(self, cantor_small):
        # an arc around a residual arc carries the ideal mass of the deeper set
        mu = from_weight(power_weight(0.4), cantor_small)
        s, L = float(cantor_small.residual_starts[0]), float(cantor_small.residual_length)
        assert mu.arc_mass(s - 1e-3, L + 2e-3)[0] > 0

    def test_integrability_guard(self, point):
        with pytest.raises(ValueError):
            dist_power(point, -1.0)

    def test_profile_needs_set(self):
        with pytest.raises(ValueError):
            BoundaryMeasure(lambda t: t, profile=lambda d: d)

    def test_sublevel_mass_point(self, point):
        # mu(E_t) for dist^0 = Lebesgue on the point set: 4 arcsin(t/2)
        t = np.array([0.01, 0.5, 1.5])
        np.testing.assert_allclose(dist_power(point, 0.0).sublevel_mass(point, t),
                                   4 * np.arcsin(t / 2), rtol=1e-10)


class TestAtoms:
    def test_closed_arcs(self):
        mu = atoms_only([(AnglePoint(1.0), 2.0)])
        assert mu.arc_mass(0.5, 0.5)[0] == 2.0
        assert mu.arc_mass(1.0, 0.1)[0] == 2.0
        assert mu.arc_mass(1.1, 0.1)[0] == 0.0

    def test_wraps(self):
        mu = atoms_only([(AnglePoint(0.05), 1.0)])
        assert mu.arc_mass(6.2, 0.2)[0] == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            atoms_only([(AnglePoint(0.0), -1.0)])

    def test_with_atoms_adds(self):
        mu = lebesgue().with_atoms([(AnglePoint(0.0), 3.0)])
        assert mu.total_mass() == pytest.approx(2 * math.pi + 3.0)


class TestDisk:
    def test_from_boundary_keeps_mass(self, two_points):
        mu = dist_power(two_points, 1.0).with_atoms([(AnglePoint(0.0), 1.0)])
        D = DiskMeasure.from_boundary(mu, 512)
        assert D.masses.sum() == pytest.approx(mu.total_mass(), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            DiskMeasure(np.array([2.0 + 0j]), np.array([1.0]))
        with pytest.raises(ValueError):
            DiskMeasure(np.array([0j]), np.array([1.0, 2.0]))

    def test_box_contains_origin_only_for_large_arcs(self):
        D = DiskMeasure(np.array([0j]), np.array([1.0]))
        assert D.box_mask(0.0, 2 * math.pi)[0]
        assert not D.box_mask(0.0, 0.5)[0]
