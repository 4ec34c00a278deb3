"""Exact evolution of Gaussian laws for quadratic potentials.

For a Gaussian target N(m, P**-1) the law of the ULA iterate, the
continuous-time Langevin (Ornstein-Uhlenbeck) flow, and plain heat flow all
stay Gaussian and evolve in closed form.  These routines are the oracles
that make the convergence inequalities checkable without sampling error.

All matrix functions go through the symmetric eigendecomposition of P,
which is exact and stable at desk scale (n <= 50 or so).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .targets import GaussianTargetSpec, _check_symmetric

__all__ = [
    "GaussianMeasure",
    "GaussianChainState",
    "UnstableStepWarning",
    "ula_step_gaussian",
    "ula_stationary_gaussian",
    "ou_flow_gaussian",
    "heat_flow_gaussian",
    "affine_pushforward_gaussian",
    "ula_chain_advance",
    "ula_track",
]


class UnstableStepWarning(UserWarning):
    """Step size is in the divergent regime eps >= 2/lambda_max(P)."""


@dataclass(frozen=True)
class GaussianMeasure:
    """Gaussian law N(mean, cov) with symmetric positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).copy()
        cov = _check_symmetric(np.atleast_2d(np.asarray(self.cov, float)), "covariance")
        if cov.shape[0] != mean.shape[0]:
            raise ValueError("mean and covariance dimensions disagree")
        if np.linalg.eigvalsh(cov)[0] <= 0.0:
            raise ValueError("covariance is not positive definite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class GaussianChainState:
    """Exact law of the ULA iterate at a given step index."""

    step_index: int
    law: GaussianMeasure

    def __post_init__(self):
        if self.step_index < 0:
            raise ValueError("step index must be nonnegative")


def ula_step_gaussian(law: GaussianMeasure, target: GaussianTargetSpec, eps: float) -> GaussianMeasure:
    """Exact law after one ULA step x -> x - eps*P(x - m) + sqrt(2 eps) z.

    A step size at or beyond 2/lambda_max(P) is legal but divergent; it emits
    an :class:`UnstableStepWarning` rather than an error so the instability
    can be demonstrated.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if eps == 0.0:
        return law
    lam_max = target.smoothness
    if eps >= 2.0 / lam_max:
        warnings.warn(
            f"eps={eps} is outside the stable window (0, {2.0 / lam_max}); "
            "the ULA law diverges",
            UnstableStepWarning,
            stacklevel=2,
        )
    n = target.dimension
    A = np.eye(n) - eps * target.precision
    mean = target.mean + A @ (law.mean - target.mean)
    cov = A @ law.cov @ A.T + 2.0 * eps * np.eye(n)
    return GaussianMeasure(mean, cov)


def ula_stationary_gaussian(target: GaussianTargetSpec, eps: float) -> GaussianMeasure:
    """Fixed point of the exact ULA step: the biased limit nu_eps.

    Solved in the eigenbasis of P, where the stationary covariance is
    diagonal with entries 1 / (lam_i (1 - eps lam_i / 2)).
    """
    lam_max = target.smoothness
    if not (0.0 < eps < 2.0 / lam_max):
        raise ValueError(
            f"eps={eps} outside the stability window (0, {2.0 / lam_max}) "
            "required for a ULA fixed point"
        )
    evals, vecs = target.eigh
    diag = 1.0 / (evals * (1.0 - 0.5 * eps * evals))
    cov = (vecs * diag) @ vecs.T
    return GaussianMeasure(target.mean.copy(), cov)


def ou_flow_gaussian(law0: GaussianMeasure, target: GaussianTargetSpec, t: float) -> GaussianMeasure:
    """Exact law at time t of the Langevin diffusion dX = -P(X-m) dt + sqrt(2) dW."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return law0
    evals, vecs = target.eigh
    decay = np.exp(-evals * t)
    E = (vecs * decay) @ vecs.T
    steady = (vecs * ((1.0 - decay**2) / evals)) @ vecs.T
    mean = target.mean + E @ (law0.mean - target.mean)
    cov = E @ law0.cov @ E.T + steady
    return GaussianMeasure(mean, cov)


def heat_flow_gaussian(law: GaussianMeasure, t: float) -> GaussianMeasure:
    """Convolution with N(0, 2tI): mean fixed, covariance + 2tI."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return law
    return GaussianMeasure(law.mean, law.cov + 2.0 * t * np.eye(law.dim))


def affine_pushforward_gaussian(law: GaussianMeasure, A: np.ndarray, b: np.ndarray) -> GaussianMeasure:
    """Law of Ax + b for x ~ law; A must be invertible."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if abs(np.linalg.det(A)) <= 1e-300:
        raise ValueError("pushforward map is singular")
    return GaussianMeasure(A @ law.mean + b, A @ law.cov @ A.T)


def ula_chain_advance(state: GaussianChainState, target: GaussianTargetSpec, eps: float) -> GaussianChainState:
    """One ULA step of the tracked chain; the step index increments by one."""
    return GaussianChainState(state.step_index + 1, ula_step_gaussian(state.law, target, eps))


def ula_track(law0: GaussianMeasure, target: GaussianTargetSpec, eps: float, steps: int):
    """Exact ULA laws rho_0 .. rho_steps as a list (length steps + 1)."""
    laws = [law0]
    law = law0
    for _ in range(steps):
        law = ula_step_gaussian(law, target, eps)
        laws.append(law)
    return laws
