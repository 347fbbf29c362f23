"""Tests for SE balancing, pole location and DE tuning."""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import pytest

from conftest import log_uniform
from fracpow.estimates import de_phi, de_phi_peak
from fracpow.exceptions import ParameterDomainError, PreconditionError
from fracpow.kernel import HALF_PI, FractionalOrder
from fracpow.params import (
    TAU_COEFFICIENT_EXACT,
    de_config,
    de_step,
    de_step_threshold,
    equalized_tau,
    im_x0_large_lambda,
    im_x0_large_tau,
    lambda_star,
    lambda_star_admissible,
    pole_x0,
    se_params_from_h,
    se_params_from_n,
    sn,
    strip_halfwidth,
    tau_star,
)


class TestSEParams:
    @pytest.mark.parametrize(
        "alpha, h, d, expected",
        [
            (0.5, 1.0, HALF_PI, (10, 10, 21)),
            (0.25, 1.0, HALF_PI, (20, 7, 28)),
            (0.5, 0.5, math.pi / 4, (20, 20, 41)),
        ],
    )
    def test_from_step(self, alpha, h, d, expected):
        params = se_params_from_h(FractionalOrder(alpha), h, d)
        assert (params.M, params.N, params.n) == expected

    def test_from_count(self, half):
        params = se_params_from_n(half, 155)
        assert params.h == pytest.approx(0.356862, abs=1e-6)
        assert (params.M, params.N, params.n) == (78, 78, 157)

    def test_integer_boundaries_are_not_bumped(self, half):
        params = se_params_from_n(half, 4)
        assert (params.M, params.N, params.n) == (2, 2, 5)

    def test_narrow_strip(self):
        params = se_params_from_n(FractionalOrder(0.75), 100, math.pi / 4)
        assert params.h == pytest.approx(0.36276, abs=1e-5)
        assert (params.M, params.N) == (25, 75)

    @pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
    @pytest.mark.parametrize("h", [0.2, 0.45, 1.3])
    def test_truncation_balances_discretization(self, alpha, h):
        order = FractionalOrder(alpha)
        params = se_params_from_h(order, h)
        target = math.pi * HALF_PI
        assert alpha * params.M * h * h >= target * (1 - 1e-9)
        assert (1 - alpha) * params.N * h * h >= target * (1 - 1e-9)
        assert alpha * (params.M - 1) * h * h < target
        assert (1 - alpha) * (params.N - 1) * h * h < target

    def test_rule_matches_params(self, half):
        params = se_params_from_n(half, 60)
        rule = params.build_rule()
        assert (rule.h, rule.M, rule.N, rule.d) == (params.h, params.M, params.N, params.d)

    @pytest.mark.parametrize("n_target", [0, 2, -5])
    def test_rejects_small_targets(self, half, n_target):
        with pytest.raises(ParameterDomainError):
            se_params_from_n(half, n_target)

    def test_rejects_wide_strip(self, half):
        with pytest.raises(ParameterDomainError):
            se_params_from_h(half, 1.0, 2.0)


class TestScaling:
    def test_sn_reference_values(self, half):
        assert sn(40, half) == pytest.approx(10.455, abs=2e-3)
        assert sn(40, FractionalOrder(0.25)) == pytest.approx(9.964, abs=2e-3)
        assert sn(40, FractionalOrder(0.75)) == sn(40, FractionalOrder(0.25))

    def test_sn_needs_c2n_above_one(self, half):
        with pytest.raises(ParameterDomainError):
            sn(1, half, 0.01)

    def test_sn_increases_with_n(self, half):
        values = [sn(n, half) for n in (5, 10, 20, 40, 80, 160, 320)]
        assert values == sorted(values)

    def test_tau_star(self, half):
        assert 83.9 <= tau_star(40, half) <= 84.9
        assert tau_star(160, half) == pytest.approx(3267.0, rel=0.01)

    def test_exact_root_coefficient(self, half):
        assert TAU_COEFFICIENT_EXACT == pytest.approx(0.3028, abs=1e-4)
        assert tau_star(40, half, exact_root=True) > tau_star(40, half)

    def test_lambda_star(self, half):
        tau = tau_star(40, half)
        assert lambda_star(40, half, tau) == pytest.approx(2.23e8, rel=0.02)
        assert lambda_star(40, FractionalOrder(0.25), 100.0) == pytest.approx(4.5e10, rel=0.02)

    def test_lambda_star_decreases_with_alpha(self):
        values = [lambda_star(40, FractionalOrder(alpha), 100.0) for alpha in (0.25, 0.5, 0.75)]
        assert values[0] > values[1] > values[2]

    def test_lambda_star_admissibility(self):
        order = FractionalOrder(0.01)
        assert not lambda_star_admissible(11, order)
        assert lambda_star_admissible(12, order)
        assert lambda_star_admissible(1, FractionalOrder(0.5))


class TestPole:
    def test_equal_arguments(self):
        pole = pole_x0(100.0, 100.0)
        assert pole.x0.real == pytest.approx(0.0, abs=1e-15)
        assert pole.im_x0 == pytest.approx(HALF_PI, rel=1e-15)

    def test_reference_values(self):
        assert pole_x0(1e12, 100.0).im_x0 == pytest.approx(0.1344, abs=2e-4)
        assert pole_x0(1.0, 84.4).im_x0 == pytest.approx(0.5445, abs=2e-3)

    def test_solves_defining_equation(self, rng):
        lams = log_uniform(rng, 1.0, 1e16, 1000)
        taus = log_uniform(rng, 1.0, 1e16, 1000)
        for lam, tau in zip(lams, taus):
            target = complex((math.log(tau) - math.log(lam)) / math.pi, 1.0)
            x0 = pole_x0(float(lam), float(tau)).x0
            assert abs(cmath.sinh(x0) - target) <= 1e-12 * abs(target)
            assert 0.0 < x0.imag <= HALF_PI

    @pytest.mark.parametrize("lam, tau", [(1e12, 100.0), (1.0, 84.4), (1e16, 1.0), (3.0, 1e9)])
    def test_matches_extended_precision(self, lam, tau):
        with mp.workprec(200):
            u = (mp.log(mp.mpf(tau)) - mp.log(mp.mpf(lam))) / mp.pi
            expected = float(mp.im(mp.asinh(mp.mpc(u, 1))))
        assert pole_x0(lam, tau).im_x0 == pytest.approx(expected, rel=1e-12)

    def test_conjugate_symmetry(self):
        a = pole_x0(1e12, 100.0).x0
        b = pole_x0(100.0, 1e12).x0
        assert a == -b.conjugate()

    def test_large_lambda_asymptotic(self):
        exact = pole_x0(1e12, 100.0).im_x0
        assert im_x0_large_lambda(1e12, 100.0) == pytest.approx(exact, rel=0.05)

    @pytest.mark.parametrize("tau", [1e10, 1e12, 1e16])
    def test_large_tau_asymptotic(self, tau):
        exact = pole_x0(1.0, tau).im_x0
        assert im_x0_large_tau(tau) == pytest.approx(exact, rel=0.05)

    def test_large_tau_asymptotic_overshoots_at_moderate_tau(self):
        assert im_x0_large_tau(84.4) == pytest.approx(0.7083, abs=1e-4)
        assert im_x0_large_tau(84.4) > pole_x0(1.0, 84.4).im_x0

    def test_asymptotic_domains(self):
        with pytest.raises(ParameterDomainError):
            im_x0_large_lambda(10.0, 100.0)
        with pytest.raises(ParameterDomainError):
            im_x0_large_tau(1.0)

    def test_rejects_lambda_below_one(self):
        with pytest.raises(ParameterDomainError):
            pole_x0(0.5, 10.0)

    def test_strip_halfwidth(self):
        assert strip_halfwidth(1e12, 100.0) == pytest.approx(0.1277, abs=3e-4)
        assert strip_halfwidth(1.0, 84.4) == pytest.approx(0.517, abs=2e-3)
        with pytest.raises(ParameterDomainError):
            strip_halfwidth(1.0, 84.4, 1.0)


class TestDEStep:
    def test_reference_values(self, half):
        assert de_step(40, 0.5169, half) == pytest.approx(0.1277, abs=1e-4)
        assert de_step(100, 0.1266, half) == pytest.approx(0.04618, abs=1e-5)

    def test_threshold_names_minimum(self, half):
        assert de_step_threshold(0.1, half) == pytest.approx(0.5 * math.e / 0.4)
        with pytest.raises(PreconditionError, match="minimum admissible n is 4"):
            de_step(1, 0.1, half)

    def test_exactly_at_threshold_count(self, half):
        assert de_step(4, 0.1, half) > 0.0


class TestDEConfig:
    def test_reference_configuration(self, half):
        config = de_config(40, half)
        assert 83.9 <= config.tau <= 84.9
        assert config.d == pytest.approx(0.517, abs=2e-3)
        assert config.h == pytest.approx(0.1277, abs=3e-4)
        assert config.s_n == pytest.approx(10.455, abs=2e-3)
        assert config.c1 == pytest.approx(2 * math.pi**2 * 0.95)
        assert config.c2 == pytest.approx(23.876, abs=1e-3)

    def test_chain_is_consistent(self, half):
        config = de_config(60, half)
        assert config.tau == tau_star(60, half)
        assert config.d == strip_halfwidth(1.0, config.tau)
        assert config.h == de_step(60, config.d, half)
        assert config.lambda_star == lambda_star(60, half, config.tau)

    def test_rule(self, half):
        config = de_config(40, half)
        rule = config.build_rule()
        assert (rule.tau, rule.h, rule.M, rule.N) == (config.tau, config.h, 40, 40)

    def test_small_n(self, half):
        config = de_config(2, half)
        assert config.h > 0.0
        assert config.build_rule().n == 5

    def test_narrow_override_below_threshold(self, half):
        with pytest.raises(PreconditionError):
            de_config(2, half, d=0.05)

    def test_tau_override(self, half):
        config = de_config(40, half, tau=100.0)
        assert config.tau == 100.0
        assert config.d == strip_halfwidth(1.0, 100.0)

    def test_rejects_tau_below_one(self, half):
        with pytest.raises(ParameterDomainError):
            de_config(40, half, tau=0.5)

    def test_exact_root(self, half):
        assert de_config(40, half, exact_root=True).tau > de_config(40, half).tau


class TestEqualizedTau:
    def test_balances_both_peaks(self, half):
        tau = equalized_tau(40, half)
        at_one = de_phi(1.0, tau, 40, half)
        peak = de_phi_peak(tau, 40, half, lambda_max=1e40, grid_points=400)
        assert at_one == pytest.approx(peak, rel=1e-6)
        assert tau > 1.0
