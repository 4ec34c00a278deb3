"""Bound evaluators and the step-size planner: frozen arithmetic, monotonicity."""

import math

import numpy as np
import pytest

from langevin_lab.bounds import (
    GrowthFunction,
    biased_limit_renyi_rate,
    gaussian_start_bound,
    grad_moment_bounds,
    hypercontractivity_schedule,
    kl_ula_bound,
    langevin_kl_rate,
    one_step_bound,
    plan_kl,
    renyi_decomp_bound,
    renyi_ld_rate,
    renyi_lp_rate,
    renyi_ula_lsi_bound,
    renyi_ula_pi_bound,
    renyi_waiting_time,
    two_phase_bound,
)


class TestKlUlaBound:
    def test_frozen_arithmetic(self):
        rep = kl_ula_bound(1.0, 1.0, 1, 0.25, 8, 1.0)
        assert abs(rep.bound_value - (math.exp(-2.0) + 2.0)) < 1e-15

    def test_zero_start_floor(self):
        rep = kl_ula_bound(1.0, 1.0, 1, 0.25, 100, 0.0)
        assert rep.bound_value == 2.0

    def test_large_k_approaches_bias_floor(self):
        floor = 8 * 0.1 * 2 * 4.0 / 0.5
        rep = kl_ula_bound(0.5, 2.0, 2, 0.1 * 0.5 / 16.0, 10**6, 5.0)
        assert abs(rep.bound_value - 8 * (0.1 * 0.5 / 16.0) * 2 * 4.0 / 0.5) < 1e-12
        assert rep.bound_value < floor

    def test_cap_error_quotes_cap(self):
        with pytest.raises(ValueError, match=r"alpha/\(4 L\^2\)"):
            kl_ula_bound(1.0, 1.0, 1, 0.3, 10, 1.0)
        kl_ula_bound(1.0, 1.0, 1, 0.3, 10, 1.0, check_window=False)

    def test_alpha_le_L_asserted(self):
        with pytest.raises(ValueError, match="alpha <= L"):
            kl_ula_bound(2.0, 1.0, 1, 0.01, 10, 1.0)

    def test_satisfied_verdict(self):
        rep = kl_ula_bound(1.0, 1.0, 1, 0.25, 8, 1.0, observed=1.0)
        assert rep.satisfied is True
        rep = kl_ula_bound(1.0, 1.0, 1, 0.25, 8, 1.0, observed=5.0)
        assert rep.satisfied is False

    def test_monotone_in_stated_directions(self):
        base = dict(alpha=1.0, L=1.0, n=1, eps=0.1, k=50, H0=1.0)

        def value(**kw):
            args = {**base, **kw}
            return kl_ula_bound(**args).bound_value

        # nondecreasing in eps once the bias floor dominates the decay term
        lattice = [0.0125, 0.025, 0.0625, 0.125, 0.25]
        for h0, k in ((0.0, 10), (0.0, 500), (1.0, 500)):
            vals = [value(eps=e, k=k, H0=h0) for e in lattice]
            assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert value(n=1) <= value(n=2) <= value(n=5)
        assert value(H0=0.5) <= value(H0=1.0) <= value(H0=2.0)
        assert value(k=100) <= value(k=50) <= value(k=10)
        # nonincreasing in alpha (alpha <= L region), nondecreasing in L;
        # eps kept inside every window on the lattice
        assert value(eps=0.01, alpha=1.0) <= value(eps=0.01, alpha=0.5) <= value(
            eps=0.01, alpha=0.25
        )
        assert value(eps=0.01, L=1.0) <= value(eps=0.01, L=2.0) <= value(eps=0.01, L=4.0)


class TestOneStep:
    def test_continuity_at_zero_step(self):
        rep = one_step_bound(1.0, 1.0, 1, 1e-12, 1.0)
        assert abs(rep.bound_value - 1.0) < 1e-10

    def test_frozen_arithmetic(self):
        rep = one_step_bound(1.0, 1.0, 1, 0.25, 1.0)
        assert abs(rep.bound_value - (math.exp(-0.25) + 6.0 / 16.0)) < 1e-15

    def test_telescoping_dominated_by_theorem_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            alpha = float(rng.uniform(0.2, 2.0))
            L = alpha * float(rng.uniform(1.0, 3.0))
            n = int(rng.integers(1, 6))
            eps = float(rng.uniform(0.05, 1.0)) * alpha / (4 * L * L)
            H0 = float(rng.uniform(0.0, 5.0))
            k = int(rng.integers(1, 400))
            h = H0
            for _ in range(k):
                h = one_step_bound(alpha, L, n, eps, h).bound_value
            assert h <= kl_ula_bound(alpha, L, n, eps, k, H0).bound_value + 1e-12


class TestPlanner:
    def test_frozen_example(self):
        plan = plan_kl(1.0, 1.0, 1, 0.1, 1.0)
        assert plan.eps == 0.25 * 0.025
        assert plan.k == 480
        assert plan.regime == "LSI-KL"

    def test_cap_binds_for_loose_delta(self):
        plan = plan_kl(1.0, 1.0, 1, 5.0, 1.0)
        assert plan.eps == 0.25

    def test_scaling_in_L(self):
        p1 = plan_kl(1.0, 1.0, 1, 0.1, 1.0)
        p2 = plan_kl(1.0, 2.0, 1, 0.1, 1.0)
        assert abs(p2.eps - p1.eps / 4.0) < 1e-18
        assert p2.k == 4 * p1.k or abs(p2.k - 4 * p1.k) <= 3  # ceil slack

    def test_feeding_plan_into_bound_meets_delta(self):
        # exact inequality over a 81-point lattice
        count = 0
        for alpha, L in ((0.5, 0.5), (0.5, 1.0), (1.0, 2.0)):
            for n in (1, 2, 5):
                for delta in (0.05, 0.5, 5.0):
                    for H0 in (0.1, 1.0, 10.0):
                        plan = plan_kl(alpha, L, n, delta, H0)
                        rep = kl_ula_bound(alpha, L, n, plan.eps, plan.k, H0)
                        assert rep.bound_value <= delta
                        count += 1
        assert count == 81


class TestLangevinRates:
    def test_zero_time(self):
        kl, w2 = langevin_kl_rate(1.0, 0.0, 1.0)
        assert kl.bound_value == 1.0
        assert abs(w2.bound_value - math.sqrt(2.0)) < 1e-15

    def test_frozen_decay(self):
        kl, _ = langevin_kl_rate(1.0, math.log(2.0), 1.0)
        assert abs(kl.bound_value - 0.25) < 1e-15

    def test_renyi_ld(self):
        assert renyi_ld_rate(1.0, 2.0, 0.0, 3.0).bound_value == 3.0
        rep = renyi_ld_rate(1.0, 2.0, 1.0, 3.0)
        assert abs(rep.bound_value - 3.0 * math.exp(-1.0)) < 1e-15
        with pytest.raises(ValueError):
            renyi_ld_rate(1.0, 0.5, 1.0, 3.0)

    def test_renyi_lp_linear_phase(self):
        rep = renyi_lp_rate(1.0, 2.0, 1.0, 3.0)
        assert abs(rep.bound_value - 2.0) < 1e-15

    def test_renyi_lp_exponential_phase(self):
        # crossing at t1 = 2, then exp(-(t - t1))
        rep = renyi_lp_rate(1.0, 2.0, 3.0, 3.0)
        assert abs(rep.bound_value - math.exp(-1.0)) < 1e-15

    def test_renyi_lp_small_start(self):
        rep = renyi_lp_rate(1.0, 2.0, 1.0, 0.5)
        assert abs(rep.bound_value - 0.5 * math.exp(-1.0)) < 1e-15

    def test_two_phase_continuous_at_crossing(self):
        for R0 in (1.5, 3.0, 10.0):
            for slope in (0.1, 1.0, 2.5):
                u1 = (R0 - 1.0) / slope
                left = two_phase_bound(R0, slope, u1)
                right = two_phase_bound(R0, slope, u1 * (1 + 1e-15))
                assert abs(left - 1.0) < 1e-12
                assert abs(left - right) < 1e-12


class TestHypercontractivity:
    def test_schedule(self):
        assert hypercontractivity_schedule(1.0, 2.0, 0.0) == 2.0
        assert abs(hypercontractivity_schedule(1.0, 2.0, 0.5 * math.log(3.0)) - 4.0) < 1e-12
        with pytest.raises(ValueError):
            hypercontractivity_schedule(1.0, 1.0, 0.5)

    def test_waiting_time(self):
        assert renyi_waiting_time(1.0, 2.0, 2.0) == 0.0
        assert abs(renyi_waiting_time(1.0, 2.0, 4.0) - 0.5 * math.log(3.0)) < 1e-15
        with pytest.raises(ValueError):
            renyi_waiting_time(1.0, 2.0, 1.5)


class TestRenyiDecomp:
    def test_biased_start_at_limit(self):
        assert renyi_decomp_bound(0.0, 0.7, 2.0) == 0.7

    def test_prefactor(self):
        assert renyi_decomp_bound(1.0, 0.0, 2.0) == 1.5

    def test_infinity_propagates(self):
        assert renyi_decomp_bound(math.inf, 0.1, 2.0) == math.inf
        assert renyi_decomp_bound(0.1, math.inf, 2.0) == math.inf

    def test_order_validation(self):
        with pytest.raises(ValueError):
            renyi_decomp_bound(1.0, 1.0, 1.0)


class TestGrowthFunction:
    def test_power_model(self):
        g = GrowthFunction(c=2.0, p=2.0)
        assert g(0.5) == 0.5
        assert abs(g.inverse(0.5) - 0.5) < 1e-15
        assert g(0.0) == 0.0

    def test_monotone(self):
        g = GrowthFunction(c=1.3, p=1.7)
        eps = np.linspace(0.01, 1.0, 50)
        vals = [g(e) for e in eps]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_gaussian_envelope_dominates_exact_bias(self):
        # envelope must upper-bound the exact isotropic-Gaussian Renyi bias
        n, alpha, order, eps_max = 2, 1.0, 3.0, 0.2
        g = GrowthFunction.gaussian_bias(n, alpha, order, eps_max)
        for eps in np.linspace(1e-4, eps_max, 50):
            c = eps * alpha / 2.0
            exact = n / (2.0 * (order - 1.0)) * (
                order * math.log(1.0 - c) - math.log(1.0 - order * c)
            )
            assert g(eps) >= exact - 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            GrowthFunction(c=0.0, p=2.0)
        with pytest.raises(ValueError):
            GrowthFunction.gaussian_bias(1, 1.0, 3.0, 1.0)


class TestRenyiUlaBounds:
    def g(self):
        return GrowthFunction.gaussian_bias(1, 1.0, 3.0, 0.11)

    def test_lsi_frozen(self):
        g = self.g()
        rep = renyi_ula_lsi_bound(1.0, 1.0, 2.0, 0.1, 40, 1.0, g)
        assert abs(rep.bound_value - (1.5 * math.exp(-1.0) + g(0.1))) < 1e-15

    def test_lsi_large_k_leaves_growth_term(self):
        g = self.g()
        rep = renyi_ula_lsi_bound(1.0, 1.0, 2.0, 0.1, 10**7, 1.0, g)
        assert abs(rep.bound_value - g(0.1)) < 1e-12

    def test_pi_k0(self):
        g = self.g()
        rep = renyi_ula_pi_bound(1.0, 1.0, 2.0, 0.1, 120, 3.0, g)
        assert rep.inputs["k0"] == 80.0
        with pytest.raises(ValueError, match="k0 = 80"):
            renyi_ula_pi_bound(1.0, 1.0, 2.0, 0.1, 40, 3.0, g)

    def test_window_enforced(self):
        g = self.g()
        with pytest.raises(ValueError, match="cap"):
            renyi_ula_lsi_bound(1.0, 1.0, 2.0, 0.5, 10, 1.0, g)


class TestBiasedLimitRate:
    def test_zero_steps(self):
        rep = biased_limit_renyi_rate(1.0, 1.0, 2.0, 0.1, 0, 2.5)
        assert rep.bound_value == 2.5

    def test_lsi_frozen(self):
        rep = biased_limit_renyi_rate(1.0, 1.0, 2.0, 0.1, 20, 2.5)
        assert abs(rep.bound_value - 2.5 * math.exp(-1.0)) < 1e-15

    def test_pi_linear_phase_frozen(self):
        rep = biased_limit_renyi_rate(1.0, 1.0, 2.0, 0.1, 10, 2.0, kind="PI")
        assert abs(rep.bound_value - 1.5) < 1e-15

    def test_pi_needs_q_at_least_two(self):
        with pytest.raises(ValueError):
            biased_limit_renyi_rate(1.0, 1.0, 1.5, 0.1, 10, 2.0, kind="PI")


def test_grad_moment_bounds():
    assert grad_moment_bounds(1.0, 1.0, 1) == (1.0, None)
    stat, moving = grad_moment_bounds(1.0, 1.0, 2, H=0.0)
    assert stat == 2.0 and moving == 4.0
    _, moving = grad_moment_bounds(2.0, 3.0, 1, H=1.0)
    assert abs(moving - (4 * 9 / 2.0 + 6.0)) < 1e-15


def test_gaussian_start_bound():
    # n=2, L=4pi, f*=0 -> log 2
    assert abs(gaussian_start_bound(0.0, 2, 4 * math.pi) - math.log(2.0)) < 1e-15
    # normalized 1D standard normal: f* = log sqrt(2 pi), L=1 -> bound 0
    f_star = 0.5 * math.log(2 * math.pi)
    assert abs(gaussian_start_bound(f_star, 1, 1.0)) < 1e-15
