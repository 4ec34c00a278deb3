"""Evaluators for the convergence bounds, rates, and the step-size planner.

Each evaluator computes the right-hand side of one inequality and wraps it
in a :class:`BoundReport`; when an observed value is supplied the report
also carries a ``satisfied`` verdict (observed <= bound + tol).  Evaluators
enforce their step-size windows; ``check_window=False`` disables that for
deliberately-broken demonstration runs.

Proof-internal constants (the one-step 6 eps^2 n L^2 term) are exposed via
:func:`one_step_bound` so the telescoping chain can be validated, but
planning uses only theorem-level constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

__all__ = [
    "BoundReport",
    "StepPlan",
    "GrowthFunction",
    "kl_ula_bound",
    "one_step_bound",
    "plan_kl",
    "langevin_kl_rate",
    "renyi_ld_rate",
    "renyi_lp_rate",
    "hypercontractivity_schedule",
    "renyi_waiting_time",
    "renyi_decomp_bound",
    "renyi_ula_lsi_bound",
    "renyi_ula_pi_bound",
    "biased_limit_renyi_rate",
    "grad_moment_bounds",
    "gaussian_start_bound",
    "two_phase_bound",
]


@dataclass(frozen=True)
class BoundReport:
    """One evaluated inequality: bound value, optional observation, verdict."""

    theorem_id: str
    inputs: dict
    bound_value: float
    observed: Optional[float] = None
    satisfied: Optional[bool] = None
    tol: float = 0.0

    def __post_init__(self):
        if self.bound_value < 0.0:
            raise ValueError(f"bound value must be nonnegative, got {self.bound_value}")
        if (self.observed is None) != (self.satisfied is None):
            raise ValueError("satisfied must be set exactly when observed is")


def _report(theorem_id, inputs, bound, observed=None, tol=0.0) -> BoundReport:
    satisfied = None if observed is None else bool(observed <= bound + tol)
    return BoundReport(theorem_id, dict(inputs), bound, observed, satisfied, tol)


@dataclass(frozen=True)
class StepPlan:
    """Step size and iteration count sufficient for a target accuracy."""

    eps: float
    k: int
    delta: float
    regime: str

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("iteration count must be at least 1")
        if not (self.eps > 0.0):
            raise ValueError("step size must be positive")


@dataclass(frozen=True)
class GrowthFunction:
    """Bias modulus g(eps) = c * eps**p with an analytic inverse."""

    c: float
    p: float = 2.0

    def __post_init__(self):
        if not (self.c > 0.0 and self.p > 0.0):
            raise ValueError("growth function needs c > 0 and p > 0")

    def __call__(self, eps: float) -> float:
        if eps < 0.0:
            raise ValueError("eps must be nonnegative")
        return self.c * eps**self.p

    def inverse(self, delta: float) -> float:
        if not (delta > 0.0):
            raise ValueError("delta must be positive")
        return (delta / self.c) ** (1.0 / self.p)

    @classmethod
    def gaussian_bias(cls, n: int, alpha: float, order: float, eps_max: float) -> "GrowthFunction":
        """Quadratic envelope of the exact Gaussian Renyi bias on (0, eps_max].

        The exact bias of the isotropic Gaussian biased limit is bounded by
        n alpha^2 q^2 eps^2 / (8 (q-1) (1 - q eps alpha / 2)); freezing the
        denominator at eps_max gives a valid c * eps^2 envelope on the window.
        """
        if order <= 1.0:
            raise ValueError("bias order must exceed 1")
        if not (0.0 < eps_max and order * eps_max * alpha < 2.0):
            raise ValueError("need q * eps_max * alpha < 2 for a finite envelope")
        c = (
            n
            * alpha**2
            * order**2
            / (8.0 * (order - 1.0) * (1.0 - 0.5 * order * eps_max * alpha))
        )
        return cls(c=c, p=2.0)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not (value > 0.0):
            raise ValueError(f"{name} must be positive, got {value}")


def _kl_window(alpha, L, eps, check_window):
    cap = alpha / (4.0 * L * L)
    if check_window:
        if alpha > L + 1e-12:
            raise ValueError(f"the KL analysis assumes alpha <= L, got alpha={alpha}, L={L}")
        if eps > cap:
            raise ValueError(f"eps={eps} exceeds the admissible cap alpha/(4 L^2) = {cap}")


def kl_ula_bound(alpha, L, n, eps, k, H0, observed=None, tol=0.0, check_window=True) -> BoundReport:
    """KL bound along ULA: exp(-alpha eps k) H0 + 8 eps n L^2 / alpha."""
    _check_positive(alpha=alpha, L=L, n=n, eps=eps)
    if H0 < 0.0 or k < 0:
        raise ValueError("H0 and k must be nonnegative")
    _kl_window(alpha, L, eps, check_window)
    bound = math.exp(-alpha * eps * k) * H0 + 8.0 * eps * n * L * L / alpha
    inputs = dict(alpha=alpha, L=L, n=n, eps=eps, k=k, H0=H0)
    return _report("kl-ula", inputs, bound, observed, tol)


def one_step_bound(alpha, L, n, eps, Hk, observed=None, tol=0.0, check_window=True) -> BoundReport:
    """One-step KL recursion: exp(-alpha eps) Hk + 6 eps^2 n L^2."""
    _check_positive(alpha=alpha, L=L, n=n, eps=eps)
    if Hk < 0.0:
        raise ValueError("Hk must be nonnegative")
    _kl_window(alpha, L, eps, check_window)
    bound = math.exp(-alpha * eps) * Hk + 6.0 * eps * eps * n * L * L
    inputs = dict(alpha=alpha, L=L, n=n, eps=eps, Hk=Hk)
    return _report("kl-one-step", inputs, bound, observed, tol)


def plan_kl(alpha, L, n, delta, H0) -> StepPlan:
    """Step size and iteration count reaching KL error delta.

    eps = (alpha / 4L^2) min(1, delta / 4n) and
    k = ceil(log(2 H0 / delta) / (alpha eps)), floored at 1.
    """
    _check_positive(alpha=alpha, L=L, n=n, delta=delta, H0=H0)
    eps = alpha / (4.0 * L * L) * min(1.0, delta / (4.0 * n))
    k = max(1, math.ceil(math.log(2.0 * H0 / delta) / (alpha * eps)))
    return StepPlan(eps=eps, k=k, delta=delta, regime="LSI-KL")


def langevin_kl_rate(alpha, t, H0, observed_H=None, observed_w2=None, tol=0.0):
    """Continuous-time rates under LSI: KL and W2 bounds as a report pair."""
    _check_positive(alpha=alpha)
    if t < 0.0 or H0 < 0.0:
        raise ValueError("t and H0 must be nonnegative")
    kl = math.exp(-2.0 * alpha * t) * H0
    w2 = math.sqrt(2.0 * H0 / alpha) * math.exp(-alpha * t)
    inputs = dict(alpha=alpha, t=t, H0=H0)
    return (
        _report("langevin-kl", inputs, kl, observed_H, tol),
        _report("langevin-w2", inputs, w2, observed_w2, tol),
    )


def renyi_ld_rate(alpha, q, t, R0, observed=None, tol=0.0) -> BoundReport:
    """Renyi decay along Langevin flow under LSI: exp(-2 alpha t / q) R0."""
    _check_positive(alpha=alpha)
    if q < 1.0:
        raise ValueError("the LSI Renyi rate needs q >= 1")
    if t < 0.0 or R0 < 0.0:
        raise ValueError("t and R0 must be nonnegative")
    bound = math.exp(-2.0 * alpha * t / q) * R0
    return _report("renyi-langevin-lsi", dict(alpha=alpha, q=q, t=t, R0=R0), bound, observed, tol)


def two_phase_bound(R0: float, slope: float, u: float) -> float:
    """Linear-then-exponential decay used by the Poincare rates.

    Decays linearly at ``slope`` from R0 until hitting 1 at
    u1 = (R0 - 1)/slope, then exponentially with the same rate; starts
    exponential immediately when R0 <= 1.  Continuous at the crossing.
    """
    if R0 <= 1.0:
        return math.exp(-slope * u) * R0
    u1 = (R0 - 1.0) / slope
    if u <= u1:
        return R0 - slope * u
    return math.exp(-slope * (u - u1))


def renyi_lp_rate(alpha, q, t, R0, observed=None, tol=0.0) -> BoundReport:
    """Renyi decay along Langevin flow under Poincare: two-phase bound."""
    _check_positive(alpha=alpha)
    if q < 2.0:
        raise ValueError("the Poincare Renyi rate needs q >= 2")
    if t < 0.0 or R0 < 0.0:
        raise ValueError("t and R0 must be nonnegative")
    bound = two_phase_bound(R0, 2.0 * alpha / q, t)
    return _report("renyi-langevin-pi", dict(alpha=alpha, q=q, t=t, R0=R0), bound, observed, tol)


def hypercontractivity_schedule(alpha, q0, t) -> float:
    """Order schedule q_t = 1 + exp(2 alpha t) (q0 - 1) along Langevin flow."""
    _check_positive(alpha=alpha)
    if q0 <= 1.0:
        raise ValueError("hypercontractivity needs q0 > 1")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    return 1.0 + math.exp(2.0 * alpha * t) * (q0 - 1.0)


def renyi_waiting_time(alpha, q0, q) -> float:
    """Time t0 = log((q-1)/(q0-1)) / (2 alpha) after which order q is reached."""
    _check_positive(alpha=alpha)
    if q0 <= 1.0:
        raise ValueError("hypercontractivity needs q0 > 1")
    if q < q0:
        raise ValueError("target order must satisfy q >= q0")
    return math.log((q - 1.0) / (q0 - 1.0)) / (2.0 * alpha)


def renyi_decomp_bound(R_2q_biased: float, R_2qm1_bias: float, q: float) -> float:
    """Decomposition bound ((q - 1/2)/(q - 1)) R_{2q,biased} + bias term.

    Propagates +inf; both terms must be nonnegative extended reals.
    """
    if q <= 1.0:
        raise ValueError("the decomposition needs q > 1")
    for name, v in (("R_2q_biased", R_2q_biased), ("R_2qm1_bias", R_2qm1_bias)):
        if math.isnan(v) or v < 0.0:
            raise ValueError(f"{name} must be a nonnegative extended real, got {v}")
    prefactor = (q - 0.5) / (q - 1.0)
    return prefactor * R_2q_biased + R_2qm1_bias


def _renyi_window(L, beta, eps, check_window):
    if check_window:
        cap = min(1.0 / (3.0 * L), 1.0 / (9.0 * beta))
        if eps > cap:
            raise ValueError(
                f"eps={eps} exceeds the admissible cap min(1/(3L), 1/(9 beta)) = {cap}"
            )


def renyi_ula_lsi_bound(
    beta, L, q, eps, k, R0_2q, g: GrowthFunction, observed=None, tol=0.0, check_window=True
) -> BoundReport:
    """Renyi-to-target bound along ULA when the biased limit satisfies LSI."""
    _check_positive(beta=beta, L=L, eps=eps)
    if q <= 1.0:
        raise ValueError("needs q > 1")
    if R0_2q < 0.0 or k < 0:
        raise ValueError("R0_2q and k must be nonnegative")
    _renyi_window(L, beta, eps, check_window)
    prefactor = (q - 0.5) / (q - 1.0)
    bound = prefactor * R0_2q * math.exp(-beta * eps * k / (2.0 * q)) + g(eps)
    inputs = dict(beta=beta, L=L, q=q, eps=eps, k=k, R0_2q=R0_2q)
    return _report("renyi-ula-lsi", inputs, bound, observed, tol)


def renyi_ula_pi_bound(
    beta, L, q, eps, k, R0_2q, g: GrowthFunction, observed=None, tol=0.0, check_window=True
) -> BoundReport:
    """Renyi-to-target bound along ULA when the biased limit satisfies PI.

    Only valid after the linear phase: k0 = (2q / (beta eps)) (R0_2q - 1)
    iterations; a smaller k raises with k0 in the message.  The report's
    inputs include k0.
    """
    _check_positive(beta=beta, L=L, eps=eps)
    if q <= 1.0:
        raise ValueError("needs q > 1")
    if R0_2q < 1.0:
        raise ValueError("the Poincare route needs R0_2q >= 1")
    _renyi_window(L, beta, eps, check_window)
    k0 = 2.0 * q * (R0_2q - 1.0) / (beta * eps)
    if k < k0:
        raise ValueError(f"k={k} is inside the linear phase; need k >= k0 = {k0}")
    prefactor = (q - 0.5) / (q - 1.0)
    bound = prefactor * math.exp(-beta * eps * (k - k0) / (2.0 * q)) + g(eps)
    inputs = dict(beta=beta, L=L, q=q, eps=eps, k=k, R0_2q=R0_2q, k0=k0)
    return _report("renyi-ula-pi", inputs, bound, observed, tol)


def biased_limit_renyi_rate(
    beta, L, q, eps, k, R0, kind="LSI", observed=None, tol=0.0, check_window=True
) -> BoundReport:
    """Renyi decay toward the biased limit along ULA.

    LSI variant (q >= 1): exp(-beta eps k / q) R0.  PI variant (q >= 2):
    linear-then-exponential in k with slope beta eps / q.
    """
    _check_positive(beta=beta, L=L, eps=eps)
    if k < 0 or R0 < 0.0:
        raise ValueError("k and R0 must be nonnegative")
    _renyi_window(L, beta, eps, check_window)
    if kind == "LSI":
        if q < 1.0:
            raise ValueError("LSI variant needs q >= 1")
        bound = math.exp(-beta * eps * k / q) * R0
    elif kind == "PI":
        if q < 2.0:
            raise ValueError("PI variant needs q >= 2")
        bound = two_phase_bound(R0, beta * eps / q, k)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    inputs = dict(beta=beta, L=L, q=q, eps=eps, k=k, R0=R0, kind=kind)
    return _report("renyi-biased-limit", inputs, bound, observed, tol)


def grad_moment_bounds(alpha, L, n, H=None):
    """Gradient second-moment bounds: (nL, 4 L^2 H / alpha + 2 n L or None)."""
    _check_positive(alpha=alpha, L=L, n=n)
    stationary = n * L
    if H is None:
        return stationary, None
    if H < 0.0:
        raise ValueError("H must be nonnegative")
    return stationary, 4.0 * L * L * H / alpha + 2.0 * n * L


def gaussian_start_bound(f_star, n, L) -> float:
    """KL and Renyi bound for the start rho0 = N(x*, I/L): f* + (n/2) log(L / 2 pi)."""
    _check_positive(L=L, n=n)
    return f_star + 0.5 * n * math.log(L / (2.0 * math.pi))
