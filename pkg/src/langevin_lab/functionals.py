"""Divergence and information functionals.

KL divergence, Renyi divergence R_q and its moment F_q, relative Fisher
information J, Renyi information G_q, and the quadratic Wasserstein
distance -- each with a closed form for Gaussian pairs and trapezoidal
quadrature for 1D grid densities.

Every divergence returns an extended real: a finite nonnegative float or
``math.inf``.  NaN is never a value; a NaN intermediate raises.  Quadrature
noise in [-1e-12, 0) is clipped to 0; anything more negative raises.
"""

from __future__ import annotations

import math

import numpy as np

from .gaussian_dynamics import GaussianMeasure
from .grid1d import GridDensity1D

__all__ = [
    "kl_gaussian",
    "renyi_gaussian",
    "fisher_gaussian",
    "renyi_info_gaussian",
    "w2_gaussian",
    "kl_grid",
    "renyi_grid",
    "fisher_grid",
    "renyi_info_grid",
]

_CLIP = 1e-12


def _guard(value: float, clip: float = _CLIP) -> float:
    if math.isnan(value):
        raise FloatingPointError("divergence computation produced NaN")
    if value < 0.0:
        if value < -clip:
            raise FloatingPointError(f"divergence computation produced {value} < -{clip}")
        return 0.0
    return float(value)


# ---------------------------------------------------------------------------
# Gaussian closed forms
# ---------------------------------------------------------------------------


def kl_gaussian(rho: GaussianMeasure, nu: GaussianMeasure) -> float:
    """KL divergence between Gaussians (always finite)."""
    n = rho.dim
    dmu = nu.mean - rho.mean
    nu_inv = np.linalg.inv(nu.cov)
    _, ld_nu = np.linalg.slogdet(nu.cov)
    _, ld_rho = np.linalg.slogdet(rho.cov)
    val = 0.5 * (
        float(np.trace(nu_inv @ rho.cov)) - n + float(dmu @ nu_inv @ dmu) + ld_nu - ld_rho
    )
    return _guard(val)


def _mixture_cov(rho: GaussianMeasure, nu: GaussianMeasure, q: float):
    """q*Sigma_nu + (1-q)*Sigma_rho with a scale-aware positivity verdict."""
    sig_q = q * nu.cov + (1.0 - q) * rho.cov
    scale = max(
        abs(q) * float(np.linalg.eigvalsh(nu.cov)[-1]),
        abs(1.0 - q) * float(np.linalg.eigvalsh(rho.cov)[-1]),
    )
    lam_min = float(np.linalg.eigvalsh(0.5 * (sig_q + sig_q.T))[0])
    return sig_q, lam_min > _CLIP * scale


def renyi_gaussian(rho: GaussianMeasure, nu: GaussianMeasure, q: float) -> float:
    """Renyi divergence of order q between Gaussians.

    Finite exactly when the mixture covariance q*Sigma_nu + (1-q)*Sigma_rho
    is positive definite (a covariance within 1e-12 of degenerate counts as
    degenerate, since that is the divergence threshold); returns inf
    otherwise.  q = 1 dispatches to the KL limit.
    """
    if not (q > 0.0):
        raise ValueError("Renyi order must be positive")
    if q == 1.0:
        return kl_gaussian(rho, nu)
    sig_q, ok = _mixture_cov(rho, nu, q)
    if not ok:
        return math.inf
    dmu = rho.mean - nu.mean
    _, ld_q = np.linalg.slogdet(sig_q)
    _, ld_rho = np.linalg.slogdet(rho.cov)
    _, ld_nu = np.linalg.slogdet(nu.cov)
    val = 0.5 * q * float(dmu @ np.linalg.solve(sig_q, dmu)) - (
        ld_q - (1.0 - q) * ld_rho - q * ld_nu
    ) / (2.0 * (q - 1.0))
    return _guard(val)


def fisher_gaussian(rho: GaussianMeasure, nu: GaussianMeasure) -> float:
    """Relative Fisher information J (finite for any Gaussian pair)."""
    nu_inv = np.linalg.inv(nu.cov)
    rho_inv = np.linalg.inv(rho.cov)
    A = nu_inv - rho_inv
    dmu = rho.mean - nu.mean
    val = float(np.trace(A @ rho.cov @ A)) + float(np.sum((nu_inv @ dmu) ** 2))
    return _guard(val)


def renyi_info_gaussian(rho: GaussianMeasure, nu: GaussianMeasure, q: float) -> float:
    """Renyi information G_q = E_nu[(rho/nu)^q ||grad log(rho/nu)||^2].

    The integrand is a Gaussian-weighted quadratic: with precisions
    Lam_rho, Lam_nu, the tilted measure pi_q has precision
    q*Lam_rho + (1-q)*Lam_nu and the gradient of the log-ratio is affine,
    so G_q = F_q * E_pi_q[||Bx + c||^2].  Infinite exactly when F_q is.
    """
    if q < 1.0:
        raise ValueError("Renyi information requires q >= 1")
    r_q = renyi_gaussian(rho, nu, q)
    if math.isinf(r_q):
        return math.inf
    f_q = math.exp((q - 1.0) * r_q) if q != 1.0 else 1.0
    lam_rho = np.linalg.inv(rho.cov)
    lam_nu = np.linalg.inv(nu.cov)
    lam_mix = q * lam_rho + (1.0 - q) * lam_nu
    B = lam_nu - lam_rho
    c = lam_rho @ rho.mean - lam_nu @ nu.mean
    mu_mix = np.linalg.solve(lam_mix, q * lam_rho @ rho.mean + (1.0 - q) * lam_nu @ nu.mean)
    cov_mix = np.linalg.inv(lam_mix)
    quad = float(np.sum((B @ mu_mix + c) ** 2)) + float(np.trace(B @ cov_mix @ B))
    return _guard(f_q * quad)


def w2_gaussian(rho: GaussianMeasure, nu: GaussianMeasure) -> float:
    """Quadratic Wasserstein distance between Gaussians."""
    dmu = rho.mean - nu.mean
    evals, vecs = np.linalg.eigh(nu.cov)
    root_nu = (vecs * np.sqrt(evals)) @ vecs.T
    inner = root_nu @ rho.cov @ root_nu
    cross = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.T)), 0.0, None)).sum()
    w2sq = float(dmu @ dmu) + float(np.trace(rho.cov) + np.trace(nu.cov)) - 2.0 * float(cross)
    scale = float(np.trace(rho.cov) + np.trace(nu.cov)) + float(dmu @ dmu)
    if math.isnan(w2sq):
        raise FloatingPointError("W2 computation produced NaN")
    if w2sq < -1e-9 * max(1.0, scale):
        raise FloatingPointError(f"W2 squared came out {w2sq} < 0")
    return math.sqrt(max(w2sq, 0.0))


# ---------------------------------------------------------------------------
# 1D grid quadrature
# ---------------------------------------------------------------------------


def _check_pair(rho: GridDensity1D, nu: GridDensity1D):
    if rho.lo != nu.lo or rho.hi != nu.hi or rho.m != nu.m:
        raise ValueError("grid densities live on different grids")
    if nu.values.min() <= 0.0:
        raise ValueError("reference density must be strictly positive on the grid")
    # both densities must carry negligible domain-truncation mass
    for name, d in (("rho", rho), ("nu", nu)):
        tail = (float(d.values[0]) + float(d.values[-1])) * d.h * 100.0
        if tail > 1e-10:
            raise ValueError(
                f"estimated truncation mass {tail:.3e} of {name} exceeds 1e-10; "
                "enlarge the grid domain"
            )


def _edge_check(integrand: np.ndarray, h: float, total: float):
    # An endpoint contribution visible against the total means the quadrature
    # is truncation-dominated, i.e. the underlying integral diverges (the
    # densities themselves were already checked for negligible tail mass).
    edge = (abs(float(integrand[0])) + abs(float(integrand[-1]))) * h * 100.0
    if edge > 1e-6 * max(1.0, abs(total)):
        raise ValueError(
            f"endpoint integrand mass {edge:.3e} is not negligible against "
            f"{total:.3e}: the integral diverges on this pair (or the domain "
            "is far too small)"
        )


def _log_ratio_derivative(rho: GridDensity1D, nu: GridDensity1D):
    """Central-difference d/dx log(rho/nu) where rho > 0 (0 elsewhere)."""
    pos = rho.values > 0.0
    with np.errstate(divide="ignore"):
        u = np.where(pos, np.log(np.where(pos, rho.values, 1.0)) - np.log(nu.values), 0.0)
    du = np.empty_like(u)
    h = rho.h
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    du[0] = (u[1] - u[0]) / h
    du[-1] = (u[-1] - u[-2]) / h
    # a zero-density neighbour invalidates the difference; those points carry
    # zero weight in every integrand that uses du
    ok = pos.copy()
    ok[1:-1] &= pos[2:] & pos[:-2]
    return np.where(ok, du, 0.0), pos


def kl_grid(rho: GridDensity1D, nu: GridDensity1D, q: float = 1.0) -> float:
    """KL divergence by trapezoidal quadrature."""
    if q != 1.0:
        raise ValueError("kl_grid is the q = 1 functional")
    _check_pair(rho, nu)
    pos = rho.values > 0.0
    with np.errstate(divide="ignore"):
        logr = np.where(
            pos, np.log(np.where(pos, rho.values, 1.0)) - np.log(nu.values), 0.0
        )
    integrand = rho.values * logr
    total = float(np.trapezoid(integrand, dx=rho.h))
    _edge_check(integrand, rho.h, total)
    return _guard(total)


def renyi_grid(rho: GridDensity1D, nu: GridDensity1D, q: float) -> float:
    """Renyi divergence of order q by trapezoidal quadrature of F_q."""
    if not (q > 0.0):
        raise ValueError("Renyi order must be positive")
    _check_pair(rho, nu)
    if q == 1.0:
        return kl_grid(rho, nu)
    pos = rho.values > 0.0
    with np.errstate(divide="ignore", over="ignore"):
        log_int = np.where(
            pos,
            q * np.log(np.where(pos, rho.values, 1.0)) + (1.0 - q) * np.log(nu.values),
            -np.inf,
        )
        integrand = np.exp(log_int)
    if np.isinf(integrand).any():
        return math.inf
    f_q = float(np.trapezoid(integrand, dx=rho.h))
    _edge_check(integrand, rho.h, f_q)
    if f_q <= 0.0:
        return math.inf if q > 1.0 else 0.0
    return _guard(math.log(f_q) / (q - 1.0))


def fisher_grid(rho: GridDensity1D, nu: GridDensity1D) -> float:
    """Relative Fisher information with central-difference gradients."""
    _check_pair(rho, nu)
    du, _ = _log_ratio_derivative(rho, nu)
    integrand = rho.values * du * du
    total = float(np.trapezoid(integrand, dx=rho.h))
    _edge_check(integrand, rho.h, total)
    return _guard(total)


def renyi_info_grid(rho: GridDensity1D, nu: GridDensity1D, q: float) -> float:
    """Renyi information G_q with central-difference gradients."""
    if q < 1.0:
        raise ValueError("Renyi information requires q >= 1")
    _check_pair(rho, nu)
    du, pos = _log_ratio_derivative(rho, nu)
    with np.errstate(divide="ignore", over="ignore"):
        log_w = np.where(
            pos,
            q * np.log(np.where(pos, rho.values, 1.0)) + (1.0 - q) * np.log(nu.values),
            -np.inf,
        )
        weight = np.exp(log_w)
    integrand = np.where(pos, weight * du * du, 0.0)
    if np.isinf(integrand).any():
        return math.inf
    total = float(np.trapezoid(integrand, dx=rho.h))
    _edge_check(integrand, rho.h, total)
    return _guard(total)
