"""Divergence functionals: closed forms vs quadrature oracles, inequalities."""

import math

import numpy as np
import pytest

from langevin_lab.functionals import (
    _guard,
    fisher_gaussian,
    fisher_grid,
    kl_gaussian,
    kl_grid,
    renyi_gaussian,
    renyi_grid,
    renyi_info_gaussian,
    renyi_info_grid,
    w2_gaussian,
)
from langevin_lab.gaussian_dynamics import GaussianMeasure, ula_stationary_gaussian
from langevin_lab.grid1d import discretize
from langevin_lab.targets import GaussianTargetSpec

N01 = GaussianMeasure([0.0], [[1.0]])

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(200)


def gh_expect(mu, var, f):
    """200-node Gauss-Hermite expectation under N(mu, var)."""
    x = mu + math.sqrt(2.0 * var) * _GH_NODES
    return float((_GH_WEIGHTS * f(x)).sum() / math.sqrt(math.pi))


def gaussian_pdf(x, mu, var):
    return np.exp(-0.5 * (x - mu) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def random_measure(rng, n, scale=1.0):
    A = rng.normal(size=(n, n))
    return GaussianMeasure(rng.normal(size=n), scale * (A @ A.T + 0.3 * np.eye(n)))


class TestKlGaussian:
    def test_self_divergence_zero(self):
        assert kl_gaussian(N01, N01) == 0.0

    def test_biased_limit_closed_form(self):
        # alpha=1, eps=0.5: KL(N(0,4/3) | N(0,1)) = (1/3 + ln 3/4) / 2
        val = kl_gaussian(GaussianMeasure([0.0], [[4.0 / 3.0]]), N01)
        assert abs(val - 0.5 * (1.0 / 3.0 + math.log(0.75))) < 1e-15

    def test_biased_limit_quadratic_upper_bound(self):
        val = kl_gaussian(GaussianMeasure([0.0], [[4.0 / 3.0]]), N01)
        assert val <= 1.0 / 36.0  # n eps^2 alpha^2 / (16 (1 - eps alpha/2)^2)


class TestRenyiGaussian:
    def test_self_divergence_zero(self):
        rng = np.random.default_rng(0)
        rho = random_measure(rng, 2)
        for q in (0.5, 1.0, 2.0, 5.0):
            assert renyi_gaussian(rho, rho, q) == 0.0

    def test_variance_ratio_threshold(self):
        rho = GaussianMeasure([0.0], [[2.0]])
        assert renyi_gaussian(rho, N01, 2.0) == math.inf
        assert renyi_gaussian(rho, N01, 3.0) == math.inf

    def test_below_threshold_closed_form(self):
        # sigma^2=2, lambda^2=1, q=1.5 -> (1/2) ln 2
        val = renyi_gaussian(GaussianMeasure([0.0], [[2.0]]), N01, 1.5)
        assert abs(val - 0.5 * math.log(2.0)) < 1e-14

    def test_against_numeric_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m1, m2 = rng.normal(size=2)
            s1 = float(rng.uniform(0.4, 1.2))
            s2 = float(rng.uniform(0.8, 1.6))
            q = float(rng.uniform(1.1, 2.5))
            rho = GaussianMeasure([m1], [[s1]])
            nu = GaussianMeasure([m2], [[s2]])
            if q * s2 + (1 - q) * s1 <= 0.05:
                continue
            oracle = gh_expect(
                m2, s2, lambda x: (gaussian_pdf(x, m1, s1) / gaussian_pdf(x, m2, s2)) ** q
            )
            assert abs(renyi_gaussian(rho, nu, q) - math.log(oracle) / (q - 1)) < 1e-8

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_ula_biased_limit_formula(self, q):
        # R_q(nu_eps | nu) for the isotropic Gaussian has an explicit form
        alpha, eps, n = 1.0, 0.5, 1
        spec = GaussianTargetSpec(mean=[0.0], precision=[[alpha]])
        nu_eps = ula_stationary_gaussian(spec, eps)
        nu = GaussianMeasure([0.0], [[1.0 / alpha]])
        c = eps * alpha / 2.0
        expected = n / (2.0 * (q - 1.0)) * (q * math.log(1.0 - c) - math.log(1.0 - q * c))
        assert abs(renyi_gaussian(nu_eps, nu, q) - expected) < 1e-12

    def test_ula_biased_limit_infinite_orders(self):
        # threshold q >= 2/(eps alpha); exact and roundoff-adjacent cases
        for alpha, eps in ((1.0, 0.5), (1.0, 0.4)):
            spec = GaussianTargetSpec(mean=[0.0], precision=[[alpha]])
            nu_eps = ula_stationary_gaussian(spec, eps)
            nu = GaussianMeasure([0.0], [[1.0 / alpha]])
            threshold = 2.0 / (eps * alpha)
            assert renyi_gaussian(nu_eps, nu, threshold) == math.inf
            assert renyi_gaussian(nu_eps, nu, threshold + 1.0) == math.inf

    def test_monotone_in_order(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            rho = random_measure(rng, 2, scale=0.5)
            nu = random_measure(rng, 2)
            values = [renyi_gaussian(rho, nu, q) for q in (0.5, 1.0, 1.5, 2.0, 3.0)]
            finite = [v for v in values if not math.isinf(v)]
            for lo, hi in zip(values, values[1:]):
                assert lo <= hi + 1e-10
            assert finite == sorted(finite)


class TestFisherGaussian:
    def test_self_zero(self):
        assert fisher_gaussian(N01, N01) == 0.0

    def test_against_quadrature(self):
        rho = GaussianMeasure([0.0], [[2.0]])
        # dlog(rho/nu) = -x/2 + x = x/2 under rho = N(0,2)
        oracle = gh_expect(0.0, 2.0, lambda x: (x / 2.0) ** 2)
        assert abs(fisher_gaussian(rho, N01) - oracle) < 1e-8
        assert abs(fisher_gaussian(rho, N01) - 0.5) < 1e-12

    def test_lsi_relation(self):
        # J >= 2 alpha H for nu = N(0, I/alpha)
        rng = np.random.default_rng(9)
        alpha = 1.3
        nu = GaussianMeasure(np.zeros(2), np.eye(2) / alpha)
        for _ in range(100):
            rho = random_measure(rng, 2)
            assert fisher_gaussian(rho, nu) >= 2.0 * alpha * kl_gaussian(rho, nu) - 1e-9


class TestRenyiInfoGaussian:
    def test_self_zero(self):
        assert renyi_info_gaussian(N01, N01, 2.0) == 0.0

    def test_order_one_recovers_fisher(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            rho = random_measure(rng, 2, scale=0.7)
            nu = random_measure(rng, 2)
            assert abs(
                renyi_info_gaussian(rho, nu, 1.0) - fisher_gaussian(rho, nu)
            ) < 1e-12

    def test_against_quadrature_mean_shift(self):
        rho = GaussianMeasure([0.5], [[1.0]])
        oracle = gh_expect(
            0.0,
            1.0,
            lambda x: (gaussian_pdf(x, 0.5, 1.0) / gaussian_pdf(x, 0.0, 1.0)) ** 2 * 0.25,
        )
        val = renyi_info_gaussian(rho, N01, 2.0)
        assert abs(val - oracle) < 1e-8
        assert abs(val - math.exp(0.25) / 4.0) < 1e-14

    def test_against_quadrature_general(self):
        m1, s1, q = 0.4, 0.7, 3.0

        def integrand(x):
            ratio = gaussian_pdf(x, m1, s1) / gaussian_pdf(x, 0.0, 1.0)
            dlog = -(x - m1) / s1 + x
            return ratio**q * dlog**2

        oracle = gh_expect(0.0, 1.0, integrand)
        val = renyi_info_gaussian(GaussianMeasure([m1], [[s1]]), N01, q)
        assert abs(val - oracle) < 1e-8

    def test_infinite_when_moment_diverges(self):
        assert renyi_info_gaussian(GaussianMeasure([0.0], [[2.0]]), N01, 2.0) == math.inf

    def test_renyi_lsi_relation(self):
        # G/F >= (2 alpha / q^2) R for nu = N(0, I/alpha)
        rng = np.random.default_rng(21)
        alpha = 0.8
        nu = GaussianMeasure(np.zeros(2), np.eye(2) / alpha)
        for _ in range(50):
            rho = random_measure(rng, 2, scale=0.4)
            for q in (1.0, 1.5, 2.0, 4.0):
                r = renyi_gaussian(rho, nu, q)
                if math.isinf(r):
                    continue
                g = renyi_info_gaussian(rho, nu, q)
                f = math.exp((q - 1.0) * r)
                assert g / f >= (2.0 * alpha / q**2) * r - 1e-10

    def test_renyi_pi_relation(self):
        # G/F >= (4 alpha / q^2)(1 - exp(-R)) for q >= 2
        rng = np.random.default_rng(22)
        alpha = 1.1
        nu = GaussianMeasure(np.zeros(2), np.eye(2) / alpha)
        for _ in range(50):
            rho = random_measure(rng, 2, scale=0.4)
            for q in (2.0, 3.0, 5.0):
                r = renyi_gaussian(rho, nu, q)
                if math.isinf(r):
                    continue
                g = renyi_info_gaussian(rho, nu, q)
                f = math.exp((q - 1.0) * r)
                assert g / f >= (4.0 * alpha / q**2) * (1.0 - math.exp(-r)) - 1e-10


class TestW2Gaussian:
    def test_self_zero(self):
        assert w2_gaussian(N01, N01) == 0.0

    def test_pure_translation(self):
        assert abs(w2_gaussian(GaussianMeasure([1.0], [[1.0]]), N01) - 1.0) < 1e-12

    def test_commuting_diagonal_closed_form(self):
        rho = GaussianMeasure([1.0, 0.0], np.diag([2.0, 0.5]))
        nu = GaussianMeasure([0.0, 1.0], np.diag([1.0, 1.5]))
        expected = math.sqrt(
            2.0
            + (math.sqrt(2.0) - 1.0) ** 2
            + (math.sqrt(0.5) - math.sqrt(1.5)) ** 2
        )
        assert abs(w2_gaussian(rho, nu) - expected) < 1e-12

    def test_talagrand(self):
        # (alpha/2) W2^2 <= KL for nu = N(0, I/alpha)
        rng = np.random.default_rng(31)
        alpha = 2.0
        nu = GaussianMeasure(np.zeros(3), np.eye(3) / alpha)
        for _ in range(50):
            rho = random_measure(rng, 3)
            assert 0.5 * alpha * w2_gaussian(rho, nu) ** 2 <= kl_gaussian(rho, nu) + 1e-10


def test_gaussian_start_renyi_bound():
    # rho = N(x*, I/L) against an L-smooth Gaussian: R_q <= f(x*) + (n/2) log(L/2pi)
    rng = np.random.default_rng(40)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        A = rng.normal(size=(n, n))
        cov = A @ A.T + 0.4 * np.eye(n)
        prec = np.linalg.inv(cov)
        mean = rng.normal(size=n)
        L = float(np.linalg.eigvalsh(prec)[-1])
        f_star = 0.5 * math.log((2.0 * math.pi) ** n * np.linalg.det(cov))
        nu = GaussianMeasure(mean, cov)
        rho = GaussianMeasure(mean, np.eye(n) / L)
        bound = f_star + 0.5 * n * math.log(L / (2.0 * math.pi))
        for q in (1.0, 2.0, 4.0, 8.0):
            assert renyi_gaussian(rho, nu, q) <= bound + 1e-9


class TestGridFunctionals:
    def setup_method(self):
        self.nu = discretize(lambda x: gaussian_pdf(x, 0.0, 1.0), -12, 12, 4001)
        self.rho = discretize(lambda x: gaussian_pdf(x, 0.0, 2.0), -12, 12, 4001)

    def test_self_divergences_vanish(self):
        assert kl_grid(self.nu, self.nu) <= 1e-10
        assert renyi_grid(self.nu, self.nu, 2.0) <= 1e-10
        assert fisher_grid(self.nu, self.nu) <= 1e-10
        assert renyi_info_grid(self.nu, self.nu, 2.0) <= 1e-10

    def test_kl_matches_gaussian_closed_form(self):
        exact = kl_gaussian(GaussianMeasure([0.0], [[2.0]]), N01)
        assert abs(kl_grid(self.rho, self.nu) - exact) < 1e-6

    def test_renyi_matches_gaussian_closed_form(self):
        exact = renyi_gaussian(GaussianMeasure([0.0], [[2.0]]), N01, 1.5)
        assert abs(renyi_grid(self.rho, self.nu, 1.5) - exact) < 1e-6

    def test_fisher_matches_gaussian_closed_form(self):
        assert abs(fisher_grid(self.rho, self.nu) - 0.5) < 1e-5

    def test_renyi_info_matches_gaussian_closed_form(self):
        rho = discretize(lambda x: gaussian_pdf(x, 0.5, 1.0), -12, 12, 4001)
        exact = math.exp(0.25) / 4.0
        assert abs(renyi_info_grid(rho, self.nu, 2.0) - exact) < 1e-6

    def test_monotone_in_order_on_grids(self):
        rho = discretize(lambda x: gaussian_pdf(x, 0.5, 0.8), -12, 12, 4001)
        values = [renyi_grid(rho, self.nu, q) for q in (0.5, 1.0, 1.5, 2.0, 3.0)]
        for lo, hi in zip(values, values[1:]):
            assert lo <= hi + 1e-10

    def test_mismatched_grids_rejected(self):
        other = discretize(lambda x: gaussian_pdf(x, 0.0, 1.0), -11, 11, 4001)
        with pytest.raises(ValueError, match="different grids"):
            kl_grid(self.rho, other)

    def test_divergent_integrand_detected(self):
        # q=3 with sigma^2/lambda^2 = 2 diverges; the grid cannot represent it
        with pytest.raises(ValueError, match="diverges|enlarge"):
            renyi_grid(self.rho, self.nu, 3.0)


class TestGuard:
    def test_nan_is_error(self):
        with pytest.raises(FloatingPointError):
            _guard(float("nan"))

    def test_small_negative_clipped(self):
        assert _guard(-5e-13) == 0.0

    def test_large_negative_is_error(self):
        with pytest.raises(FloatingPointError):
            _guard(-1e-6)
