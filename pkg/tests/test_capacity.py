"""Capacity series, sublevel integrals, polarity and cyclicity criteria."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab import (cantor_capacity_series, cyclicity_check, energy_divergence, polarity_check)
from dirichlet_lab.capacity import CONVERGES, DIVERGES, sublevel_gauge
from dirichlet_lab.circle_sets import AnglePoint, CantorSpec, dist_to_set
from dirichlet_lab.measures import BoundaryMeasure, atoms_only, dist_power, lebesgue
from dirichlet_lab.set_classes import k_test, l_test
from dirichlet_lab.weights import power_gauge, t_log_gauge


def _doubly_exponential(n):
    return -(2.0 ** n) * math.log(2.0)


class TestSeries:
    @pytest.mark.parametrize("rho", [0.1, 0.2, 0.3, 0.45])
    def test_constant_ratio_converges(self, rho):
        for terms in (20, 40):
            assert cantor_capacity_series(CantorSpec(rho, 1), terms).verdict == CONVERGES

    def test_doubly_exponential_diverges(self):
        for terms in (20, 40):
            assert cantor_capacity_series(terms=terms, log_ratio=_doubly_exponential).verdict == DIVERGES

    def test_slow_decay_converges(self):
        assert cantor_capacity_series(terms=40, log_ratio=lambda n: -float(n)).verdict == CONVERGES

    def test_limit_for_third(self):
        # sum_{n>=0} 2^-n (n log 3 - log pi) = 2 log 3 - 2 log pi
        rep = cantor_capacity_series(CantorSpec(1 / 3, 1), 60)
        assert rep.trajectory[-1] == pytest.approx(2 * math.log(3) - 2 * math.log(math.pi), abs=1e-14)

    @given(st.floats(0.01, 0.49))
    def test_trajectory_nondecreasing(self, rho):
        rep = cantor_capacity_series(CantorSpec(rho, 1), 30)
        assert np.all(np.diff(rep.trajectory) >= 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            cantor_capacity_series(CantorSpec(1 / 3, 1), 5)
        with pytest.raises(ValueError):
            cantor_capacity_series(terms=20, log_ratio=lambda n: math.log(0.6))


def _log_squared_measure(E):
    prof = lambda d: np.log(100.0 / d) ** 2
    return BoundaryMeasure(lambda th: prof(dist_to_set(np.asarray(th, float), E)), (), prof, E, "log^2")


class TestSublevelIntegral:
    def test_point_diverges(self, point):
        assert energy_divergence(point).verdict == DIVERGES

    @pytest.mark.parametrize("name", ["cantor_third", "cantor_quarter"])
    def test_cantor_converges(self, request, name):
        rep = energy_divergence(request.getfixturevalue(name))
        assert rep.verdict == CONVERGES and "positive capacity" in rep.conclusion

    def test_log_squared_measure_is_silent(self, point):
        rep = energy_divergence(point, _log_squared_measure(point))
        assert rep.verdict == CONVERGES and "silent" in rep.conclusion

    def test_trajectory_nondecreasing(self, cantor_third):
        assert np.all(np.diff(energy_divergence(cantor_third).trajectory) >= 0)


class TestPolarity:
    def test_point_identity_gauge(self, point):
        v = polarity_check(point, h=power_gauge(1.0))
        assert v.verdict.startswith("polar")

    def test_point_t_log_gauge(self, point):
        v = polarity_check(point, h=t_log_gauge(1.0))
        assert v.verdict.startswith("polar")

    def test_square_root_gauge_silent(self, point):
        v = polarity_check(point, h=power_gauge(0.5))
        assert v.verdict.startswith("criterion silent")

    @pytest.mark.parametrize("name", ["point", "cantor_third", "theta_set"])
    def test_agrees_with_sublevel_integral(self, request, name):
        E = request.getfixturevalue(name)
        v = polarity_check(E)
        e = energy_divergence(E)
        if e.verdict == DIVERGES:
            assert v.verdict.startswith("polar") or v.verdict == "hypotheses not met"
            assert any(c.name.startswith("int_0") and c.holds for c in v.clauses)
        else:
            assert not v.verdict.startswith("polar")

    def test_lebesgue_specialisation(self, point, cantor_third, theta_set):
        # the divergence clause with the sublevel gauge reduces to int dt/|E_t|
        for E in (point, cantor_third, theta_set):
            div = [c for c in polarity_check(E).clauses if c.name.startswith("int_0")][0]
            assert div.holds == (energy_divergence(E).verdict == DIVERGES)

    def test_envelope_gauge(self, point):
        h = sublevel_gauge(point)
        t = np.array([1e-6, 1e-3, 0.5, 2.0])
        assert np.all(h.h(t) >= lebesgue().sublevel_mass(point, t) * (1 - 1e-12))
        ratio = h.h(np.sort(t)) / np.sort(t)
        assert np.all(np.diff(ratio) <= 1e-12)


class TestCyclicity:
    def test_point_power(self, point):
        v = cyclicity_check(0.3, point, h=power_gauge(1.0))
        assert v.verdict == "cyclic"

    def test_point_atom_away_from_set(self, point):
        v = cyclicity_check(0.3, point, mu=atoms_only([(AnglePoint(math.pi), 1.0)]), h=power_gauge(1.0))
        assert v.verdict == "cyclic"

    @pytest.mark.parametrize("gauge", [power_gauge(1.0), t_log_gauge(1.0), None])
    def test_cantor_not_met(self, cantor_third, gauge):
        kt = k_test(cantor_third)
        v = cyclicity_check(0.4, cantor_third, h=gauge, class_report=kt)
        assert v.verdict == "hypotheses not met"
        names = {c.name for c in v.failing}
        # the growth bound and the divergence of int dt/h cannot hold together
        assert names & {"mu(E_t) = O(h(t))", "int_0 dt/h(t) = infinity"}

    def test_weighted_measure_finite(self, point):
        v = cyclicity_check(0.3, point, mu=dist_power(point, 0.5), h=power_gauge(1.0))
        member = [c for c in v.clauses if c.name == "f in D(mu)"][0]
        assert member.holds is True
