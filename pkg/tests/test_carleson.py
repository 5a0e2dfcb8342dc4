"""Carleson-measure tests and the multiplier pipeline."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirichlet_lab import (ars_boundary_test, ars_box_test, cantor_gauge, gauge_integral_finite,
                           l_test, multiplier_verdict, necessary_log_test, one_box_test)
from dirichlet_lab.carleson import log_energy_bins
from dirichlet_lab.circle_sets import AnglePoint, build_theta_sequence, gap_counting
from dirichlet_lab.measures import DiskMeasure, atoms_only, dist_power, from_weight, lebesgue
from dirichlet_lab.trends import FAIL, PASS
from dirichlet_lab.weights import power_weight

FULL = (np.array([0.0]), np.array([2 * math.pi]))


def _trapezoid(y, x):
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def _one(start, length):
    return np.array([start]), np.array([length])


class TestEnergyOverArcs:
    def test_full_circle_energy_vanishes(self):
        scan = ars_boundary_test(lebesgue(), arcs=FULL, bins=1024)
        # (1/(2pi)^2) int int log(1/|z - w|) = 0; discretisation error decays with the bins
        assert abs(scan.rows[0, 3]) / (2 * math.pi) ** 2 < 1e-6

    @pytest.mark.parametrize("L", [1e-3, 1e-2])
    def test_small_arc_closed_form(self, L):
        # a segment of length L: int int log(1/|x - y|) = L^2 (log(1/L) + 3/2)
        scan = ars_boundary_test(lebesgue(), arcs=_one(0.4, L))
        assert scan.rows[0, 4] == pytest.approx(L * (math.log(1 / L) + 1.5), rel=1e-5)

    def test_lebesgue_passes(self, point):
        assert ars_boundary_test(lebesgue(), E=point).verdict == PASS

    def test_zero_mass_arcs_skipped(self):
        scan = ars_boundary_test(atoms_only([(AnglePoint(1.0), 1.0)]), arcs=_one(3.0, 0.1))
        assert scan.rows.shape[0] == 0

    @given(st.lists(st.floats(0, 10), min_size=2, max_size=40), st.booleans())
    def test_bins_symmetric(self, masses, periodic):
        m = np.array(masses)
        a = log_energy_bins(m, 0.01, periodic)
        b = log_energy_bins(m[::-1], 0.01, periodic)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    @settings(max_examples=10)
    @given(st.floats(0.1, 10.0))
    def test_scaling(self, c):
        mu = dist_power(build_theta_sequence(0.25, 3.0, 512), -0.5)
        a = ars_boundary_test(mu, arcs=_one(0.0, 0.05))
        b = ars_boundary_test(mu.scaled(c), arcs=_one(0.0, 0.05))
        assert b.sup_ratio == pytest.approx(c * a.sup_ratio, rel=1e-10)

    def test_log_plus_is_larger(self):
        arcs = _one(0.0, 3.0)
        assert ars_boundary_test(lebesgue(), arcs=arcs, log_plus=True).sup_ratio >= \
            ars_boundary_test(lebesgue(), arcs=arcs).sup_ratio


class TestBoxes:
    def test_atom_at_origin(self):
        D = DiskMeasure(np.array([0j]), np.array([2.0]))
        scan = ars_box_test(D, arcs=FULL)
        assert scan.sup_ratio == pytest.approx(2.0)

    def test_empty_box_skipped(self):
        D = DiskMeasure(np.array([0j]), np.array([2.0]))
        assert ars_box_test(D, arcs=_one(0.0, 0.1)).rows.shape[0] == 0

    def test_boundary_consistency(self):
        mu = lebesgue()
        D = DiskMeasure.from_boundary(mu, 2048)
        for L in (1.0, 0.3, 0.1, 0.03):
            box = ars_box_test(D, arcs=_one(0.2, L)).rows[0]
            bd = ars_boundary_test(mu, arcs=_one(0.2, L)).rows[0]
            # the kernels differ by a bounded amount: ratios within an additive constant
            assert abs(box[4] - bd[4]) < 1.0
            # box masses sit at cell centres: at most one cell of mass differs at each end
            assert abs(box[2] - bd[2]) <= 2 * D.cell + 1e-12


class TestOneBox:
    def test_identity_gauge(self, point):
        rep = one_box_test(lebesgue(), lambda x: np.asarray(x, float), E=point)
        assert rep.verdict == "sufficient condition holds"

    def test_divergent_gauge(self, point):
        phi = lambda x: 1.0 / np.log(4 * math.pi / np.asarray(x, float))
        rep = one_box_test(lebesgue(), phi, E=point)
        assert rep.integral_finite is False
        assert rep.verdict.startswith("clause 2 fails")

    def test_gauge_integral(self):
        assert gauge_integral_finite(lambda x: x)[0] is True
        assert gauge_integral_finite(lambda x: x)[1] == pytest.approx(2 * math.pi, rel=1e-10)
        assert gauge_integral_finite(lambda x: 1.0 / np.log(4 * math.pi / x))[0] is False

    def test_cantor_gauge_integrable_above_threshold(self, cantor_third):
        w = power_weight(0.4)
        ok, val = gauge_integral_finite(cantor_gauge(cantor_third, w))
        assert ok is True

    def test_cantor_gauge_matches_counting_integral(self, cantor_third):
        # int_0^1 phi(x)/x dx is comparable to int_0^1 t omega'(t)^2 N_E(t) dt
        w = power_weight(0.4)
        phi = cantor_gauge(cantor_third, w)
        x = np.exp(np.linspace(math.log(1e-6), 0, 4000))
        counts = np.array([gap_counting(cantor_third, float(t)) for t in x])
        lhs = _trapezoid(phi(x), np.log(x))
        rhs = _trapezoid(x * w.deriv(x) ** 2 * counts * x, np.log(x))
        assert 0.1 < lhs / rhs < 10


class TestNecessary:
    def test_lebesgue(self, point):
        assert necessary_log_test(lebesgue(), E=point).verdict == PASS

    def test_atom_fails(self):
        scan = necessary_log_test(atoms_only([(AnglePoint(1.0), 1.0)]))
        assert scan.verdict == FAIL

    def test_scaling_keeps_trend(self, theta_set):
        mu = from_weight(power_weight(0.25), theta_set)
        a = necessary_log_test(mu)
        b = necessary_log_test(mu.scaled(7.0))
        assert a.verdict == b.verdict
        assert b.fit.slope == pytest.approx(a.fit.slope, abs=1e-10)
        assert b.sup_ratio == pytest.approx(7.0 * a.sup_ratio, rel=1e-12)


@pytest.fixture(scope="module")
def cantor_l1(cantor_third):
    return l_test(cantor_third, 1)


class TestVerdict:
    def test_above_threshold(self, cantor_third, cantor_l1):
        v = multiplier_verdict(0.4, cantor_third, class_report=cantor_l1)
        assert v.in_D is True and v.multiplier is True

    def test_below_threshold(self, cantor_third, cantor_l1):
        v = multiplier_verdict(0.25, cantor_third, class_report=cantor_l1)
        assert v.in_D is False and v.multiplier is False

    def test_theta_set_small_beta_is_not_a_multiplier(self):
        v = multiplier_verdict(0.25, build_theta_sequence(0.25, 1.5, 4096))
        assert v.in_D is True and v.multiplier is False

    def test_theta_set_large_beta_undecided(self, theta_set):
        v = multiplier_verdict(0.25, theta_set)
        assert v.in_D is True and v.multiplier is None
        assert "hypotheses not met" in v.reason
