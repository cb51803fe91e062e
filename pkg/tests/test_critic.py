import math

import numpy as np
import pytest
from scipy.integrate import quad

from iadp.critic import (BasisSet, CostConfig, SaturationDomainError,
                         baseline_regressor_Y, grad_phi, penalty_W, phi,
                         regressor_Y, running_cost, value)
from iadp.plant import ConfigurationError


class TestBasis:
    def test_phi_frozen_point(self):
        # [x1^2, x1 x2, x2^2, x2^3, x1 x2^2, x1^2 x2] at (2, -2)
        assert np.array_equal(phi(BasisSet.default(), [2.0, -2.0]),
                              [4.0, -4.0, 4.0, -8.0, 8.0, -8.0])

    def test_phi_zero_at_origin(self):
        assert np.array_equal(phi(BasisSet.default(), [0.0, 0.0]), np.zeros(6))

    def test_grad_frozen_point(self):
        expect = np.array([
            [4.0, 0.0],
            [-2.0, 2.0],
            [0.0, -4.0],
            [0.0, 12.0],
            [4.0, -8.0],
            [-8.0, 4.0],
        ])
        assert np.array_equal(grad_phi(BasisSet.default(), [2.0, -2.0]), expect)

    def test_grad_matches_finite_difference(self, rng):
        basis = BasisSet.default()
        h = 1e-6
        for _ in range(50):
            x = rng.uniform(-3, 3, 2)
            g = grad_phi(basis, x)
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                fd = (phi(basis, x + e) - phi(basis, x - e)) / (2 * h)
                assert np.allclose(fd, g[:, j], atol=1e-5, rtol=1e-6)

    def test_custom_exponents(self):
        basis = BasisSet([[1, 0, 0], [0, 2, 1]])
        assert basis.N == 2 and basis.n == 3
        out = phi(basis, [2.0, 3.0, 4.0])
        assert np.array_equal(out, [2.0, 36.0])

    def test_shape_validation(self):
        with pytest.raises(ConfigurationError):
            phi(BasisSet.default(), [1.0, 2.0, 3.0])
        with pytest.raises(ConfigurationError):
            BasisSet(np.arange(6))

    def test_value(self):
        w = np.arange(1.0, 7.0)
        x = [2.0, -2.0]
        assert value(w, BasisSet.default(), x) == pytest.approx(
            float(w @ phi(BasisSet.default(), x)), abs=0)


class TestPenalty:
    def test_frozen_value(self):
        # 2*2*1*atanh(0.5) + 4*log(0.75)
        expect = 4 * math.atanh(0.5) + 4 * math.log(0.75)
        assert penalty_W([1.0], 2.0) == pytest.approx(expect, abs=1e-12)
        assert penalty_W([1.0], 2.0) == pytest.approx(1.0464963, abs=1e-6)

    def test_zero(self):
        assert penalty_W([0.0], 2.0) == 0.0

    def test_even_and_monotone(self):
        prev = 0.0
        for v in np.linspace(0.1, 1.95, 30):
            p = penalty_W([v], 2.0)
            assert p == pytest.approx(penalty_W([-v], 2.0), abs=1e-12)
            assert p > prev
            prev = p

    def test_matches_quadrature(self, rng):
        beta = 2.0
        for _ in range(20):
            v = rng.uniform(-1.9, 1.9)
            ref, _ = quad(lambda s: 2 * beta * math.atanh(s / beta), 0.0, v,
                          epsabs=1e-12, epsrel=1e-12)
            assert penalty_W([v], beta) == pytest.approx(ref, abs=1e-9)

    def test_sum_over_channels(self):
        assert penalty_W([1.0, -1.0], 2.0) == pytest.approx(
            2 * penalty_W([1.0], 2.0), abs=1e-12)

    def test_domain_clamp_and_error(self):
        # arguments within 1e-6 of the bound are clamped, beyond that rejected
        assert math.isfinite(penalty_W([2.0], 2.0))
        with pytest.raises(SaturationDomainError):
            penalty_W([2.1], 2.0)


class TestCost:
    def test_frozen_value(self):
        cfg = CostConfig(Q=np.eye(2), beta=2.0, c_bar=2.0)
        # x^T x = 2, W(1) ~ 1.046496, c_bar^2 |du|^2 = 1
        got = running_cost([1.0, 1.0], [0.5], [0.5], cfg)
        assert got == pytest.approx(2.0 + 1.0464963 + 1.0, abs=1e-6)

    def test_zero_at_rest(self):
        cfg = CostConfig(Q=np.eye(2))
        assert running_cost([0.0, 0.0], [0.0], [0.0], cfg) == 0.0

    def test_nonnegative(self, rng):
        cfg = CostConfig(Q=np.eye(2), beta=2.0, c_bar=2.0)
        for _ in range(100):
            x = rng.uniform(-3, 3, 2)
            u0 = rng.uniform(-1.0, 1.0, 1)
            du = rng.uniform(-0.9, 0.9, 1)
            assert running_cost(x, du, u0, cfg) >= 0.0

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            CostConfig(Q=np.array([[1.0, 0.0], [0.5, 1.0]]))
        with pytest.raises(ConfigurationError):
            CostConfig(Q=-np.eye(2))
        with pytest.raises(ConfigurationError):
            CostConfig(Q=np.eye(2), beta=0.0)
        with pytest.raises(ConfigurationError):
            CostConfig(Q=np.eye(2), c_bar=-1.0)


class TestRegressor:
    def test_incremental_form(self):
        gphi = grad_phi(BasisSet.default(), [2.0, -2.0])
        g_bar = np.array([[0.0], [0.1]])
        du = [0.5]
        x0dot = np.array([-2.0, -4.0])
        got = regressor_Y(gphi, g_bar, du, x0dot)
        assert np.allclose(got, gphi @ (g_bar @ np.array(du) + x0dot), atol=0)

    def test_baseline_form(self, rng):
        gphi = grad_phi(BasisSet.default(), rng.uniform(-2, 2, 2))
        xdot = rng.uniform(-5, 5, 2)
        assert np.allclose(baseline_regressor_Y(gphi, xdot), gphi @ xdot, atol=0)

    def test_linear_in_du(self, rng):
        gphi = grad_phi(BasisSet.default(), [1.0, 0.5])
        g_bar = np.array([[0.0], [0.1]])
        x0dot = rng.uniform(-1, 1, 2)
        y0 = regressor_Y(gphi, g_bar, [0.0], x0dot)
        y1 = regressor_Y(gphi, g_bar, [1.0], x0dot)
        y2 = regressor_Y(gphi, g_bar, [2.0], x0dot)
        assert np.allclose(y2 - y1, y1 - y0, atol=1e-12)
