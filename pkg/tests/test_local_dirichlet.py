"""Local Dirichlet integrals: the modulus route against the closed-form oracle."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirichlet_lab import (OuterDistanceFunction, QuadConfig, dirichlet_energy, dirichlet_mu,
                           douglas_local, rs_local, rs_local_many, rs_regional)
from dirichlet_lab.circle_sets import AnglePoint, CantorSpec, build_cantor, finite_set
from dirichlet_lab.experiments import trusted_points
from dirichlet_lab.local_dirichlet import UntrustedRegime
from dirichlet_lab.measures import atoms_only, lebesgue
from dirichlet_lab.weights import Weight, constant_weight, power_weight

@pytest.fixture(scope="module")
def cantor_mid():
    return build_cantor(CantorSpec(0.25, 10))


ORACLE_POINTS = np.linspace(0.15, 2 * math.pi - 0.15, 20)


def _two_point_weight() -> Weight:
    """|1 - z^2| = d sqrt(4 - d^2) where d is the chordal distance to {1, -1}."""
    return Weight(value=lambda t: t * np.sqrt(4 - t * t),
                  deriv=lambda t: np.sqrt(4 - t * t) - t * t / np.sqrt(4 - t * t),
                  log=lambda t: np.log(t) + 0.5 * np.log(4 - t * t))


def _principal_power(alpha):
    # (1 - e^{i x})^alpha with the branch cut along the positive reals outside the disc
    return lambda x: (1 - np.exp(1j * x)) ** alpha


CASES = {
    "one_minus_z": (power_weight(1.0), [0.0], _principal_power(1.0), [0.0]),
    "power_0.3": (power_weight(0.3), [0.0], _principal_power(0.3), [0.0]),
    "power_0.7": (power_weight(0.7), [0.0], _principal_power(0.7), [0.0]),
    "two_points": (_two_point_weight(), [0.0, math.pi],
                   lambda x: 1 - np.exp(2j * x), [0.0, math.pi]),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_modulus_route_matches_oracle(name):
    w, pts, boundary, breaks = CASES[name]
    f = OuterDistanceFunction(w, finite_set(pts))
    thetas = ORACLE_POINTS[np.min(np.abs(ORACLE_POINTS[:, None] - np.array(pts)[None, :]), axis=1) > 1e-3]
    rs = rs_local_many(f, thetas)
    for th, br in zip(thetas, rs):
        assert br.total == pytest.approx(douglas_local(boundary, th, breakpoints=breaks), rel=1e-5)


class TestExamples:
    def test_identity_is_one(self, point):
        f = OuterDistanceFunction(power_weight(1.0), point)
        for th in (0.01, 1.0, math.pi, 5.0):
            assert rs_local(f, AnglePoint(th)).total == pytest.approx(1.0, rel=1e-8)

    def test_constant_is_zero(self, cantor_third):
        f = OuterDistanceFunction(constant_weight(2.0), cantor_third)
        assert rs_local(f, AnglePoint(3.0)).total == pytest.approx(0.0, abs=1e-14)

    def test_oracle_z_at_i(self):
        assert douglas_local(lambda x: np.exp(1j * x), math.pi / 2) == pytest.approx(1.0, rel=1e-10)

    def test_oracle_z_squared_at_one(self):
        assert douglas_local(lambda x: np.exp(2j * x), 0.0) == pytest.approx(2.0, rel=1e-10)

    def test_oracle_constant(self):
        assert douglas_local(lambda x: np.full(np.shape(x), 3 + 1j), 1.0) == 0.0

    def test_power_at_minus_one_pinned(self, point):
        f = OuterDistanceFunction(power_weight(0.3), point)
        oracle = douglas_local(_principal_power(0.3), math.pi, breakpoints=[0.0])
        assert rs_local(f, AnglePoint(math.pi)).total == pytest.approx(oracle, rel=1e-6)
        # frozen after the oracle cross-check
        assert oracle == pytest.approx(0.0609577148, rel=1e-8)

    def test_point_has_no_gamma(self, point):
        f = OuterDistanceFunction(power_weight(0.3), point)
        assert rs_regional(f, AnglePoint(1.0), "Gamma") == 0.0

    def test_on_set_is_infinite(self, point):
        f = OuterDistanceFunction(power_weight(0.3), point)
        assert not rs_local(f, AnglePoint(0.0), trusted=False).finite

    def test_rejects_unknown_region(self, point):
        f = OuterDistanceFunction(power_weight(0.3), point)
        with pytest.raises(ValueError):
            rs_regional(f, AnglePoint(1.0), "Omega")


class TestProperties:
    @settings(max_examples=15)
    @given(st.floats(0.01, 2 * math.pi - 0.01), st.sampled_from([0.3, 0.7, 1.2]))
    def test_regions_add_up(self, cantor_small, th, alpha):
        f = OuterDistanceFunction(power_weight(alpha), cantor_small)
        br = rs_local(f, AnglePoint(th), trusted=False)
        if br.finite:
            assert br.over_I + br.over_Gamma + br.over_Sigma == pytest.approx(br.total, rel=1e-8)

    def test_symmetric_sequence_gamma_is_finite(self, symmetric_seq):
        f = OuterDistanceFunction(power_weight(0.3), symmetric_seq)
        rows = rs_local_many(f, [0.5 * (1 / n + 1 / (n + 1)) for n in (2, 3, 4)])
        assert all(math.isfinite(r.over_Gamma) and r.over_Gamma > 0 for r in rows)

    @pytest.mark.parametrize("set_name", ["point", "cantor_third"])
    def test_lower_bound_constant_is_stable(self, request, set_name):
        E = request.getfixturevalue(set_name)
        w = power_weight(0.3)
        f = OuterDistanceFunction(w, E)
        g = int(np.argmax(E.lengths))
        u = math.pi * 2.0 ** -np.arange(2, 17, dtype=float)
        th = trusted_points(E, E.starts[g] + 2 * np.arcsin(u / 2))
        assert th.size >= 10
        rows = rs_local_many(f, th)
        c = np.array([r.total / (r.delta * w.deriv(np.array([r.delta]))[0] ** 2) for r in rows])
        assert c.min() > 0.1
        assert c.max() / c.min() < 10

    def test_refinement_is_monotone(self, cantor_third):
        f = OuterDistanceFunction(power_weight(0.3), cantor_third)
        th = [1.0, 2.5, 4.0]
        loose = rs_local_many(f, th, QuadConfig(rel_tol=1e-6))
        tight = rs_local_many(f, th, QuadConfig(rel_tol=5e-7))
        for a, b in zip(loose, tight):
            assert abs(a.total - b.total) <= 1e-6 * a.total

    def test_threads_bit_stable(self, cantor_mid):
        f = OuterDistanceFunction(power_weight(0.4), cantor_mid)
        one = dirichlet_energy(f, threads=1)
        four = dirichlet_energy(f, threads=4)
        assert one.value == four.value


class TestIntegrals:
    def test_energy_of_identity(self, point):
        res = dirichlet_energy(OuterDistanceFunction(power_weight(1.0), point))
        assert res.finite and res.value == pytest.approx(1.0, rel=1e-6)

    def test_energy_of_constant(self, cantor_mid):
        res = dirichlet_energy(OuterDistanceFunction(constant_weight(1.0), cantor_mid))
        assert res.value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.4, 0.7])
    def test_energy_of_power_at_point(self, point, alpha):
        # (1 - z)^alpha = sum a_n z^n; the energy is sum n |a_n|^2, finite for every alpha > 0
        n = np.arange(1, 400_000)
        a = np.cumprod((n - 1 - alpha) / n)
        series = float(np.sum(n * a * a))
        tail = alpha ** 2 / math.gamma(1 - alpha) ** 2 * n[-1] ** (-2 * alpha) / (2 * alpha) * \
            (n[-1] + 0.5) ** 0  # leading n^{-2 alpha - 1} tail of n |a_n|^2
        res = dirichlet_energy(OuterDistanceFunction(power_weight(alpha), point))
        assert res.finite
        assert res.value == pytest.approx(series + tail, rel=1e-4)

    def test_energy_needs_resolved_gaps(self, cantor_small):
        with pytest.raises(UntrustedRegime):
            dirichlet_energy(OuterDistanceFunction(power_weight(0.6), cantor_small))

    def test_atom_measure(self, point):
        f = OuterDistanceFunction(power_weight(1.0), point)
        res = dirichlet_mu(f, atoms_only([(AnglePoint(math.pi), 1.0)]))
        assert res.value == pytest.approx(1.0, rel=1e-8)

    def test_atom_on_set_is_infinite(self, point):
        f = OuterDistanceFunction(power_weight(1.0), point)
        res = dirichlet_mu(f, atoms_only([(AnglePoint(0.0), 1.0)]))
        assert res.value == math.inf

    def test_normalised_lebesgue_is_energy(self, cantor_mid):
        f = OuterDistanceFunction(power_weight(0.6), cantor_mid)
        a = dirichlet_mu(f, lebesgue().scaled(1 / (2 * math.pi))).value
        b = dirichlet_energy(f).value
        assert a == pytest.approx(b, rel=1e-10)
