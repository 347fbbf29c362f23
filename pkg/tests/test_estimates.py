"""Tests for the SE bound and the DE estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import log_uniform, rounding_floor
from fracpow.estimates import (
    ErrorEstimate,
    EstimateKind,
    de_discretization_factor,
    de_estimate_okayama,
    de_estimate_scalar,
    de_operator_estimate,
    de_phi,
    de_phi_at_lambda_star,
    de_phi_at_lambda_star_tau_star,
    de_phi_at_one,
    de_phi_grid,
    de_phi_peak,
    de_proposition_bound,
    discretization_ratio,
    estimate_for,
    generic_trapezoid_bound,
    k_alpha,
    k_bar_alpha,
    se_bound,
    se_truncated_bound,
    xi,
)
from fracpow.exceptions import ParameterDomainError
from fracpow.figures import FIG2_LAMBDA, FIG2_TAU, scalar_de_sweep
from fracpow.kernel import HALF_PI, FractionalOrder, build_de_rule, eval_rule
from fracpow.params import de_step, equalized_tau, lambda_star, strip_halfwidth, tau_star


class TestGenericBound:
    def test_terms(self):
        value = generic_trapezoid_bound(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0, 0)
        assert value == pytest.approx(discretization_ratio(math.pi) + 2.0, rel=1e-14)

    def test_ratio_matches_sinh_form(self):
        for t in (0.5, 3.0, 20.0):
            assert discretization_ratio(t) == pytest.approx(math.exp(-t) / (2 * math.sinh(t)), rel=1e-13)

    def test_tails_decay_with_truncation(self):
        short = generic_trapezoid_bound(1.0, 1.0, 0.5, 1.0, 1.0, 2.0, 5, 5)
        long = generic_trapezoid_bound(1.0, 1.0, 0.5, 1.0, 1.0, 2.0, 50, 50)
        assert long < short

    def test_rejects_negative_constant(self):
        with pytest.raises(ParameterDomainError):
            generic_trapezoid_bound(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0, 0)


class TestSEBound:
    @pytest.mark.parametrize(
        "alpha, n, d, expected",
        [
            (0.5, 100, HALF_PI, 8.6e-10),
            (0.5, 157, HALF_PI, 3.1e-12),
            (0.5, 100, math.pi / 4, 5.7e-7),
        ],
    )
    def test_reference_values(self, alpha, n, d, expected):
        assert se_bound(FractionalOrder(alpha), n, d).value == pytest.approx(expected, rel=0.03)

    def test_carries_inputs(self, half):
        estimate = se_bound(half, 100)
        assert estimate.kind is EstimateKind.SE_BOUND
        assert estimate.inputs == {"alpha": 0.5, "n": 100, "d": HALF_PI}

    def test_truncated_form_scaling(self, half):
        raw = se_truncated_bound(half, 0.4, 30, 30)
        scaled = se_truncated_bound(half, 0.4, 30, 30, scaled=True)
        assert scaled == pytest.approx(half.prefactor * raw, rel=1e-15)

    def test_truncated_form_decreases(self, half):
        assert se_truncated_bound(half, 0.4, 60, 60) < se_truncated_bound(half, 0.4, 10, 10)

    def test_decreases_with_n(self, order):
        values = [se_bound(order, n).value for n in (25, 50, 100, 200, 400)]
        assert values == sorted(values, reverse=True)


class TestBuildingBlocks:
    def test_xi(self):
        assert xi(1e-8) == pytest.approx(2.0, rel=1e-12)
        assert xi(0.1) == pytest.approx(2.035, abs=1e-3)
        values = [xi(d) for d in np.linspace(0.05, 1.5, 30)]
        assert values == sorted(values)

    def test_xi_domain(self):
        for d in (0.0, HALF_PI, 2.0):
            with pytest.raises(ParameterDomainError):
                xi(d)

    def test_k_alpha(self, half):
        assert k_alpha(half) == pytest.approx(4.5363, abs=1e-3)
        assert k_alpha(FractionalOrder(0.25)) == pytest.approx(8.13, abs=1e-2)
        assert k_alpha(FractionalOrder(0.25)) == k_alpha(FractionalOrder(0.75))
        assert k_bar_alpha(half) == pytest.approx(4 * k_alpha(half) / math.pi, rel=1e-14)

    @pytest.mark.parametrize("n", [10, 40, 100, 400])
    @pytest.mark.parametrize("d", [0.1, 0.5, 1.2])
    def test_discretization_factor(self, half, n, d):
        lhs, rhs = de_discretization_factor(n, d, half)
        assert 0.0 < lhs <= rhs


class TestPhi:
    def test_value_at_one_near_closed_form(self, half):
        tau = tau_star(40, half)
        ratio = de_phi(1.0, tau, 40, half) / de_phi_at_one(tau, 40, half)
        assert 1 / 3 <= ratio <= 3

    def test_finite_n_peak_near_phi(self, half):
        tau = tau_star(40, half)
        peak_at = lambda_star(40, half, tau)
        ratio = de_phi(peak_at, tau, 40, half) / de_phi_at_lambda_star(tau, 40, half, finite_n=True)
        assert 1 / 3 <= ratio <= 3

    def test_asymptotic_peak_same_magnitude(self, half):
        # The asymptotic constants only hold to within two decades at n = 40.
        tau = tau_star(40, half)
        peak_at = lambda_star(40, half, tau)
        ratio = de_phi(peak_at, tau, 40, half) / de_phi_at_lambda_star(tau, 40, half)
        assert 1 / 100 <= ratio <= 100

    def test_tau_star_roughly_equalizes(self, half):
        tau = tau_star(40, half)
        ratio = de_phi_at_one(tau, 40, half) / de_phi_at_lambda_star(tau, 40, half)
        assert 1 / 100 <= ratio <= 100
        assert de_phi_at_lambda_star_tau_star(40, half) == pytest.approx(
            de_phi_at_lambda_star(tau, 40, half), rel=0.05
        )

    def test_equalized_tau_balances_endpoints(self, half):
        tau = equalized_tau(40, half)
        at_one = de_phi(1.0, tau, 40, half)
        assert at_one == pytest.approx(
            de_phi_peak(tau, 40, half, lambda_max=1e40, grid_points=400), rel=1e-6
        )
        ratio = at_one / de_phi(lambda_star(40, half, tau), tau, 40, half)
        assert 1 / 5 <= ratio <= 5

    @pytest.mark.parametrize(
        "n, alpha",
        [(40, 0.25), (40, 0.5), (40, 0.75), (160, 0.5), (160, 0.75)],
    )
    def test_argmax_tracks_lambda_star(self, n, alpha):
        order = FractionalOrder(alpha)
        tau = tau_star(n, order)
        expected = lambda_star(n, order, tau)
        grid = np.logspace(math.log10(tau), 20.0, 2000)
        values = de_phi_grid(grid, tau, n, order)
        argmax = grid[int(np.nanargmax(values))]
        assert abs(math.log(argmax / expected)) <= 0.25 * math.log(expected / tau)

    @pytest.mark.parametrize("alpha", [0.5, 0.75])
    def test_argmax_within_a_decade_at_small_n(self, alpha):
        order = FractionalOrder(alpha)
        tau = tau_star(40, order)
        expected = lambda_star(40, order, tau)
        grid = np.logspace(math.log10(tau), 20.0, 2000)
        argmax = grid[int(np.nanargmax(de_phi_grid(grid, tau, 40, order)))]
        assert expected / 10 <= argmax <= 10 * expected

    def test_peak_value(self, half):
        assert de_phi_at_lambda_star(84.4, 40, half) == pytest.approx(5.1e-11, rel=0.03)

    def test_at_one_needs_tau_above_one(self, half):
        with pytest.raises(ParameterDomainError):
            de_phi_at_one(1.0, 40, half)

    def test_landscape(self, half):
        tau = tau_star(40, half)
        grid = np.logspace(0.0, 20.0, 2000)
        values = de_phi_grid(grid, tau, 40, half)
        assert np.all(np.isfinite(values)) and np.all(values > 0.0)

        step = 20.0 / 1999
        argmin = int(np.argmin(values))
        assert abs(math.log10(grid[argmin]) - math.log10(tau)) <= 2 * step

        beyond = np.flatnonzero(grid >= tau)
        argmax = beyond[int(np.argmax(values[beyond]))]
        assert beyond[0] < argmax < beyond[-1]
        assert values[argmax] > values[beyond[0]]
        assert values[argmax] > values[-1]

    def test_grid_marks_inadmissible_points(self, half):
        values = de_phi_grid([1.0, 1e300], 1e10, 3, half)
        assert np.isfinite(values[0])
        assert np.isnan(values[1])


class TestDEEstimators:
    def test_operator_estimate(self, half):
        estimate = de_operator_estimate(40, half)
        assert estimate.value == pytest.approx(1.46e-10, rel=0.03)
        assert estimate.kind is EstimateKind.DE_OPERATOR

    def test_operator_estimate_decreases(self, order):
        values = [de_operator_estimate(n, order).value for n in (10, 20, 40, 80, 160)]
        assert values == sorted(values, reverse=True)

    def test_positive(self, rng):
        lams = log_uniform(rng, 1.0, 1e16, 40)
        taus = log_uniform(rng, 1.0, 1e8, 40)
        for lam, tau in zip(lams, taus):
            for n in (10, 40, 160):
                order = FractionalOrder(float(rng.uniform(0.1, 0.9)))
                assert de_estimate_scalar(float(lam), float(tau), n, order).value > 0.0
                assert de_estimate_okayama(float(lam), float(tau), n, order).value > 0.0

    def test_scalar_far_below_comparison(self, half):
        for n in (20, 60, 120, 200):
            ere = de_estimate_scalar(FIG2_LAMBDA, FIG2_TAU, n, half).value
            ere2 = de_estimate_okayama(FIG2_LAMBDA, FIG2_TAU, n, half).value
            assert ere <= 1e-3 * ere2

    def test_scalar_tracks_measured_error(self, half):
        floor = rounding_floor(FIG2_LAMBDA, 0.5)
        for record in scalar_de_sweep(n_grid=range(20, 201, 20), max_workers=1):
            assert record.measured_error <= 100 * record.estimate_de + floor

    def test_proposition_bound_holds(self, half):
        lam, tau = FIG2_LAMBDA, FIG2_TAU
        d = strip_halfwidth(lam, tau)
        for n in range(10, 201, 10):
            h = de_step(n, d, half)
            rule = build_de_rule(half, tau, h, n, d=d)
            error = abs(eval_rule(rule, lam) - lam**-0.5)
            bound = de_proposition_bound(lam, tau, h, n, n, d, half)
            assert error <= bound + rounding_floor(lam, 0.5)


class TestEstimateRecord:
    @pytest.mark.parametrize("value", [-1.0, math.nan, math.inf])
    def test_rejects_bad_values(self, value):
        with pytest.raises(ParameterDomainError):
            ErrorEstimate(value, EstimateKind.GENERIC)

    def test_dispatch(self, half):
        assert estimate_for("se", half, 100) == se_bound(half, 100)
        assert estimate_for("fest", half, 40) == de_operator_estimate(40, half)
        ere = estimate_for("ere", half, 40, lam=1e12, tau=100.0)
        assert ere == de_estimate_scalar(1e12, 100.0, 40, half)
        assert estimate_for("ere2", half, 40, lam=1e12, tau=100.0).kind is EstimateKind.DE_OKAYAMA

    def test_dispatch_errors(self, half):
        with pytest.raises(ParameterDomainError):
            estimate_for("ere", half, 40)
        with pytest.raises(ParameterDomainError):
            estimate_for("bogus", half, 40)
