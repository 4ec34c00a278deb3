"""Catalog of target distributions nu = exp(-f) with certified metadata.

A :class:`Target` bundles the potential/gradient oracles with a smoothness
bound L, optional strong convexity, and optional isoperimetry certificates.
Built-in factories cover Gaussians (everything exact) and strictly positive
Gaussian mixtures (the non-logconcave family; L certified by a dense-grid
Hessian scan with a 1.1 safety factor).

Oracle conventions (built-in targets):

* n >= 2: points live on the last axis, so ``potential`` maps ``(..., n)``
  to ``(...)``, ``gradient`` maps ``(..., n)`` to ``(..., n)`` and
  ``hessian`` maps ``(..., n)`` to ``(..., n, n)``.
* n == 1: oracles are elementwise scalar fields -- any array of abscissae
  maps to the same shape (``hessian`` returns the scalar second derivative).

Potentials of built-in targets include the log-normalizer
(``normalized=True``) so KL against grid densities is absolute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import isoperimetry
from ._kernels import mixture_grad_1d
from .isoperimetry import IsoperimetryCert

__all__ = [
    "Target",
    "GaussianTargetSpec",
    "MixtureTargetSpec",
    "make_gaussian_target",
    "make_mixture_target",
    "find_stationary_point",
    "StationaryPointError",
]


class StationaryPointError(RuntimeError):
    """Gradient descent hit its iteration cap before reaching the tolerance."""

    def __init__(self, last_point, grad_norm, iterations):
        self.last_point = last_point
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"no stationary point within {iterations} iterations; "
            f"last gradient norm {grad_norm:.3e} at {last_point}"
        )


def _check_symmetric(mat: np.ndarray, what: str, tol: float = 1e-12) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.T).max() > tol * scale:
        raise ValueError(f"{what} is not symmetric to {tol}")
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True)
class Target:
    """A target distribution nu = exp(-f) seen through its oracles.

    ``hessian`` is optional; built-in targets provide the analytic Hessian,
    which the grid engine uses for the pushforward Jacobian.
    """

    potential: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    dimension: int
    smoothness: float
    strong_convexity: Optional[float] = None
    lsi: Optional[IsoperimetryCert] = None
    poincare: Optional[IsoperimetryCert] = None
    stationary_point: Optional[np.ndarray] = None
    normalized: bool = False
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    smoothness_cert: Optional[dict] = None
    spec: object = None

    def __post_init__(self):
        if not (self.smoothness > 0.0):
            raise ValueError(f"smoothness must be positive, got {self.smoothness}")
        if self.strong_convexity is not None:
            if self.strong_convexity < 0.0:
                raise ValueError("strong convexity must be nonnegative")
            if self.strong_convexity > self.smoothness + 1e-12:
                raise ValueError("strong convexity cannot exceed smoothness")
        if self.stationary_point is not None:
            g = np.linalg.norm(self.gradient(np.asarray(self.stationary_point, float)))
            if g > 1e-8:
                raise ValueError(f"gradient norm {g:.3e} at declared stationary point")


@dataclass(frozen=True)
class GaussianTargetSpec:
    """Gaussian nu = N(mean, precision**-1); f is the normalized quadratic."""

    mean: np.ndarray
    precision: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        prec = _check_symmetric(np.atleast_2d(np.asarray(self.precision, float)), "precision")
        if prec.shape[0] != mean.shape[0]:
            raise ValueError("mean and precision dimensions disagree")
        evals = np.linalg.eigvalsh(prec)
        if evals[0] <= 0.0:
            raise ValueError(
                f"precision is not positive definite: smallest eigenvalue {evals[0]:.6e}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", prec)

    @cached_property
    def eigh(self):
        return np.linalg.eigh(self.precision)

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]

    @property
    def smoothness(self) -> float:
        return float(self.eigh[0][-1])

    @property
    def strong_convexity(self) -> float:
        return float(self.eigh[0][0])

    @property
    def covariance(self) -> np.ndarray:
        evals, vecs = self.eigh
        return (vecs / evals) @ vecs.T


@dataclass(frozen=True)
class MixtureTargetSpec:
    """Gaussian mixture with strictly positive weights summing to one."""

    components: tuple  # of (weight, mean, covariance)

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("mixture needs at least one component")
        comps = []
        dim = None
        for w, m, c in self.components:
            w = float(w)
            if w <= 0.0:
                raise ValueError(f"mixture weights must be positive, got {w}")
            m = np.atleast_1d(np.asarray(m, dtype=float))
            c = _check_symmetric(np.atleast_2d(np.asarray(c, float)), "component covariance")
            if np.linalg.eigvalsh(c)[0] <= 0.0:
                raise ValueError("component covariance is not positive definite")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise ValueError("mixture components have inconsistent dimensions")
            if c.shape[0] != dim:
                raise ValueError("component covariance dimension disagrees with mean")
            comps.append((w, m, c))
        total = sum(w for w, _, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", tuple(comps))

    @property
    def dimension(self) -> int:
        return self.components[0][1].shape[0]


def make_gaussian_target(spec: GaussianTargetSpec) -> Target:
    """Target for a Gaussian: exact L, strong convexity, and LSI/PI certs."""
    m = spec.mean
    prec = spec.precision
    n = spec.dimension
    _, logdet = np.linalg.slogdet(prec)
    log_norm = 0.5 * (n * math.log(2.0 * math.pi) - logdet)

    if n == 1:
        m0 = float(m[0])
        p0 = float(prec[0, 0])

        def potential(x):
            d = np.asarray(x, dtype=float) - m0
            return 0.5 * p0 * d * d + log_norm

        def gradient(x):
            return p0 * (np.asarray(x, dtype=float) - m0)

        def hessian(x):
            return np.full_like(np.asarray(x, dtype=float), p0)

    else:

        def potential(x):
            d = np.asarray(x, dtype=float) - m
            return 0.5 * np.einsum("...i,ij,...j->...", d, prec, d) + log_norm

        def gradient(x):
            return (np.asarray(x, dtype=float) - m) @ prec

        def hessian(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(prec, x.shape[:-1] + prec.shape).copy()

    lsi = isoperimetry.bakry_emery(spec.strong_convexity)
    return Target(
        potential=potential,
        gradient=gradient,
        dimension=n,
        smoothness=spec.smoothness,
        strong_convexity=spec.strong_convexity,
        lsi=lsi,
        poincare=isoperimetry.lsi_implies_pi(lsi),
        stationary_point=m.copy(),
        normalized=True,
        hessian=hessian,
        spec=spec,
    )


def make_mixture_target(spec: MixtureTargetSpec) -> Target:
    """Target whose potential is -log of the mixture density.

    The gradient comes from posterior responsibilities; the smoothness bound
    is certified by a finite-difference Hessian scan over a deterministic
    grid (step 1e-3 in 1D) times a 1.1 safety factor, recorded in
    ``smoothness_cert``.  A single-component mixture degenerates to the exact
    Gaussian construction.
    """
    if len(spec.components) == 1:
        _, m, c = spec.components[0]
        gauss = make_gaussian_target(GaussianTargetSpec(mean=m, precision=np.linalg.inv(c)))
        object.__setattr__(gauss, "spec", spec)
        return gauss

    n = spec.dimension
    if n == 1:
        potential, gradient, hessian = _mixture_oracles_1d(spec)
    else:
        potential, gradient, hessian = _mixture_oracles_nd(spec)

    scan = _certify_mixture_smoothness(spec, gradient)
    lsi = _mixture_lsi_cert(spec, potential) if n == 1 else None
    return Target(
        potential=potential,
        gradient=gradient,
        dimension=n,
        smoothness=scan["smoothness"],
        strong_convexity=None,
        lsi=lsi,
        poincare=isoperimetry.lsi_implies_pi(lsi) if lsi is not None else None,
        stationary_point=None,
        normalized=True,
        hessian=hessian,
        smoothness_cert=scan,
        spec=spec,
    )


def _mixture_oracles_1d(spec: MixtureTargetSpec):
    weights = np.array([w for w, _, _ in spec.components])
    means = np.array([m[0] for _, m, _ in spec.components])
    variances = np.array([c[0, 0] for _, _, c in spec.components])
    log_wnorm = np.log(weights) - 0.5 * np.log(2.0 * math.pi * variances)

    def _log_terms(x):
        d = x[..., None] - means
        return log_wnorm - 0.5 * d * d / variances, d

    def potential(x):
        x = np.asarray(x, dtype=float)
        lt, _ = _log_terms(x)
        shift = lt.max(axis=-1)
        return -(shift + np.log(np.exp(lt - shift[..., None]).sum(axis=-1)))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        flat = np.ascontiguousarray(x.reshape(-1))
        return mixture_grad_1d(flat, weights, means, variances).reshape(x.shape)

    def hessian(x):
        # f'' = sum_k r_k (1 - d_k^2 / v_k) / v_k + (f')^2
        x = np.asarray(x, dtype=float)
        lt, d = _log_terms(x)
        shift = lt.max(axis=-1, keepdims=True)
        r = np.exp(lt - shift)
        r /= r.sum(axis=-1, keepdims=True)
        g = (r * d / variances).sum(axis=-1)
        curv = (r * (1.0 - d * d / variances) / variances).sum(axis=-1)
        return curv + g * g

    return potential, gradient, hessian


def _mixture_oracles_nd(spec: MixtureTargetSpec):
    weights = np.array([w for w, _, _ in spec.components])
    means = np.stack([m for _, m, _ in spec.components])
    covs = np.stack([c for _, _, c in spec.components])
    precs = np.stack([np.linalg.inv(c) for c in covs])
    logdets = np.array([np.linalg.slogdet(c)[1] for c in covs])
    n = spec.dimension
    log_wnorm = np.log(weights) - 0.5 * (n * math.log(2.0 * math.pi) + logdets)

    def _log_terms(x):
        d = x[..., None, :] - means  # (..., K, n)
        quad = np.einsum("...ki,kij,...kj->...k", d, precs, d)
        return log_wnorm - 0.5 * quad, d

    def _resp(x):
        lt, d = _log_terms(x)
        shift = lt.max(axis=-1, keepdims=True)
        r = np.exp(lt - shift)
        r /= r.sum(axis=-1, keepdims=True)
        return r, d

    def potential(x):
        x = np.asarray(x, dtype=float)
        lt, _ = _log_terms(x)
        shift = lt.max(axis=-1)
        return -(shift + np.log(np.exp(lt - shift[..., None]).sum(axis=-1)))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        r, d = _resp(x)
        return np.einsum("...k,kij,...kj->...i", r, precs, d)

    def hessian(x):
        # Hess f = sum_k r_k (P_k - P_k d_k d_k' P_k) + grad grad'
        x = np.asarray(x, dtype=float)
        r, d = _resp(x)
        pd = np.einsum("kij,...kj->...ki", precs, d)
        g = np.einsum("...k,...ki->...i", r, pd)
        term = np.einsum("...k,kij->...ij", r, precs) - np.einsum(
            "...k,...ki,...kj->...ij", r, pd, pd
        )
        return term + g[..., :, None] * g[..., None, :]

    return potential, gradient, hessian


def _scan_box(spec: MixtureTargetSpec):
    sig = [math.sqrt(np.linalg.eigvalsh(c)[-1]) for _, _, c in spec.components]
    pad = 6.0 * max(sig)
    means = np.stack([m for _, m, _ in spec.components])
    return means.min(axis=0) - pad, means.max(axis=0) + pad


def _certify_mixture_smoothness(spec: MixtureTargetSpec, gradient) -> dict:
    n = spec.dimension
    lo, hi = _scan_box(spec)
    if n == 1:
        step = 1e-3
        xs = np.arange(lo[0], hi[0] + 0.5 * step, step)
        fd = 1e-3
        opnorm = float(
            np.abs((gradient(xs + fd) - gradient(xs - fd)) / (2.0 * fd)).max()
        )
    elif n == 2:
        step = float((hi - lo).max()) / 200.0
        g0 = np.arange(lo[0], hi[0] + 0.5 * step, step)
        g1 = np.arange(lo[1], hi[1] + 0.5 * step, step)
        xs = np.stack(np.meshgrid(g0, g1, indexing="ij"), axis=-1).reshape(-1, 2)
        fd = step / 2.0
        cols = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = fd
            cols.append((gradient(xs + e) - gradient(xs - e)) / (2.0 * fd))
        hess = np.stack(cols, axis=-1)
        hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
        opnorm = float(np.abs(np.linalg.eigvalsh(hess)).max())
    else:
        raise NotImplementedError(
            "mixture smoothness certification scans a dense grid; only n <= 2 supported"
        )
    factor = 1.1
    return {
        "method": "finite-difference Hessian scan",
        "domain_lo": np.asarray(lo).tolist(),
        "domain_hi": np.asarray(hi).tolist(),
        "step": step,
        "fd_step": fd,
        "scan_max": opnorm,
        "safety_factor": factor,
        "smoothness": opnorm * factor,
    }


def _mixture_lsi_cert(spec: MixtureTargetSpec, potential) -> IsoperimetryCert:
    """Holley-Stroock certificate against the moment-matched Gaussian.

    The oscillation of the log-density gap is measured by a grid scan over
    the certification box; the certificate is NONTIGHT by construction.
    """
    weights = np.array([w for w, _, _ in spec.components])
    means = np.array([m[0] for _, m, _ in spec.components])
    variances = np.array([c[0, 0] for _, _, c in spec.components])
    mu = float(weights @ means)
    var = float(weights @ (variances + (means - mu) ** 2))
    lo, hi = _scan_box(spec)
    xs = np.arange(lo[0], hi[0] + 5e-4, 1e-3)
    f_base = 0.5 * (xs - mu) ** 2 / var + 0.5 * math.log(2.0 * math.pi * var)
    gap = potential(xs) - f_base
    osc = float(gap.max() - gap.min())
    base = isoperimetry.bakry_emery(1.0 / var)
    return isoperimetry.bounded_perturbation(base, osc)


def find_stationary_point(target: Target, x0, tol: float, max_iter: int = 10**6) -> np.ndarray:
    """Gradient descent with step 1/L until the gradient norm drops below tol."""
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if target.dimension == 1 and x.shape != (1,):
        raise ValueError("x0 must be a single point")
    step = 1.0 / target.smoothness
    g = np.atleast_1d(target.gradient(x))
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return x
        x = x - step * g
        g = np.atleast_1d(target.gradient(x))
    raise StationaryPointError(x, float(np.linalg.norm(g)), max_iter)
