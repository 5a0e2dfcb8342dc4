"""Weights, growth gauges and regularity certificates."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab.weights import (GrowthGauge, Weight, capacity_log_weight, certification_grid,
                                   certify, concave_under_power, constant_weight,
                                   log_integral_weight, log_power_weight, power_gauge,
                                   power_weight, product_weight, t_log_gauge)


def _central_difference(w, t, h=1e-6):
    return (w.value(t * (1 + h)) - w.value(t * (1 - h))) / (2 * h * t)


class TestPowerWeight:
    def test_log_derivative_is_alpha(self):
        w = power_weight(0.3)
        t = certification_grid()
        np.testing.assert_allclose(t * w.deriv(t) / w.value(t), 0.3, rtol=1e-13)

    @pytest.mark.parametrize("alpha,gamma,expected", [(0.3, 3.0, True), (0.6, 2.5, False),
                                                      (0.5, 2.0, True)])
    def test_concavity_flag(self, alpha, gamma, expected):
        assert concave_under_power(power_weight(alpha), gamma) is expected
        assert certify(power_weight(alpha), gamma).holds("concave_power") is expected

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            power_weight(0.0)

    @given(st.floats(0.05, 3.0))
    def test_derivative_matches_differences(self, alpha):
        w = power_weight(alpha)
        t = certification_grid()[1:-1]
        np.testing.assert_allclose(w.deriv(t), _central_difference(w, t), rtol=1e-6)


@pytest.mark.parametrize("w", [log_power_weight(1.0), log_power_weight(0.4),
                               product_weight(power_weight(0.3), log_power_weight(1.0))])
def test_derivatives_match_differences(w):
    t = certification_grid()[1:-1]
    np.testing.assert_allclose(w.deriv(t), _central_difference(w, t), rtol=1e-6)


class TestCertificate:
    def test_power_hypotheses(self):
        rep = certify(power_weight(0.3), 3.0)
        assert rep.holds("increasing") and rep.holds("concave_power") and rep.holds("ratio_monotone")

    def test_power_ratio_unbounded(self):
        # x w'(x)/(x^2 w'(x^2)) = x^-alpha: unbounded as x -> 0
        rep = certify(power_weight(0.3), 3.0)
        assert not rep.ratio_derivative_comparable
        lo, hi = rep.ratio_derivative
        x_min = math.sqrt(1e-10 * 1e-10)
        assert hi / lo > 100

    def test_power_ratio_closed_form(self):
        w = power_weight(0.3)
        x = np.exp(np.linspace(math.log(1e-5), 0.5 * math.log(math.pi), 50))
        r = x * w.deriv(x) / (x * x * w.deriv(x * x))
        np.testing.assert_allclose(r, x ** -0.3, rtol=1e-12)

    def test_log_power_ratio_monotone(self):
        w = log_power_weight(1.0)
        t = certification_grid()
        r = t * w.deriv(t) / w.value(t)
        # t w'/w = sigma / log(e pi / t), increasing in t
        np.testing.assert_allclose(r, 1.0 / np.log(math.e * math.pi / t), rtol=1e-12)
        assert certify(w, 3.0).holds("ratio_monotone")

    def test_constant_rejected(self):
        rep = certify(constant_weight(2.0), 2.0)
        assert not rep.holds("increasing")
        assert "derivative" in rep.checks["increasing"].detail

    @given(st.floats(0.55, 2.0), st.floats(1.5, 4.0))
    def test_violation_survives_refinement(self, alpha, gamma):
        w = power_weight(alpha)
        coarse, fine = certify(w, gamma, grid=64), certify(w, gamma, grid=127)
        for name, chk in coarse.checks.items():
            if not chk.holds:
                assert not fine.checks[name].holds

    def test_deterministic(self):
        a = certify(log_power_weight(0.7), 2.5).summary()
        b = certify(log_power_weight(0.7), 2.5).summary()
        assert a == b

    def test_grid_nests(self):
        g1, g2 = certification_grid(64), certification_grid(127)
        np.testing.assert_allclose(g2[::2], g1, rtol=1e-12)

    def test_grid_minimum(self):
        with pytest.raises(ValueError):
            certification_grid(10)


class TestGauges:
    def test_power_one_diverges(self):
        assert power_gauge(1.0).diverges_at_zero() is True

    def test_power_half_converges(self):
        assert power_gauge(0.5).diverges_at_zero() is False

    def test_t_log_squared_converges(self):
        # int dt / (t log^2) = 1/log: finite
        assert t_log_gauge(2.0).diverges_at_zero() is False
        assert t_log_gauge(1.0).diverges_at_zero() is True

    @pytest.mark.parametrize("h", [power_gauge(1.0), power_gauge(0.7), t_log_gauge(1.0)])
    def test_table_matches_closed_form(self, h):
        g = GrowthGauge(h.h)
        t = np.array([1e-8, 1e-3, 0.1, 1.0, 3.0])
        np.testing.assert_allclose(g.inverse_integral(t), h.inverse_integral(t), rtol=1e-10)


class TestCapacityWeight:
    def test_identity_gauge_closed_form(self):
        w = capacity_log_weight(power_gauge(1.0), sigma=0.5, eta=0.1)
        t = np.array([0.2, 1.0, 3.0])
        np.testing.assert_allclose(w.value(t), np.log(2 * math.pi / t) ** -0.5, rtol=1e-13)

    def test_continuous_at_eta(self):
        w = capacity_log_weight(power_gauge(1.0), sigma=0.5, eta=0.1)
        eps = 1e-12
        assert w.value(np.array([0.1 - eps]))[0] == pytest.approx(w.value(np.array([0.1 + eps]))[0],
                                                                   rel=1e-9)

    def test_rejects_convergent_gauge(self):
        with pytest.raises(ValueError, match="divergence"):
            capacity_log_weight(t_log_gauge(2.0), 0.5, 0.1)

    def test_derivative(self):
        w = capacity_log_weight(power_gauge(1.0), sigma=0.5, eta=0.1)
        t = np.array([1e-4, 0.05, 0.3, 2.0])
        np.testing.assert_allclose(w.deriv(t), _central_difference(w, t), rtol=1e-6)

    def test_log_integral_weight(self):
        w = log_integral_weight(power_gauge(1.0))
        t = np.array([1e-6, 0.01, 1.0])
        # int_t^pi ds/s = log(pi/t)
        np.testing.assert_allclose(w.value(t), np.log(np.log(math.pi / t)), rtol=1e-12)


def test_weight_is_callable():
    w = power_weight(2.0)
    assert w(3.0) == pytest.approx(9.0)
    assert isinstance(w, Weight)
