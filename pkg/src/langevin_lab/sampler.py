"""Monte Carlo ULA chain engine: seeded, reproducible, embarrassingly parallel.

Randomness is counter-based Philox: the normal variate consumed by chain i
at step k in coordinate j is a pure function of (seed, i, k, j), so the
result cannot depend on how chains are scheduled.  Concretely, step k uses
a Philox stream keyed by the 128-bit pack (seed, k); chain i's draws sit at
a fixed counter offset inside that stream, and normals come from the
inverse CDF of fixed-width uniforms (one raw 64-bit word per variate).
:func:`noise_block` exposes the per-chain-range draw any scheduler would use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .targets import Target

__all__ = [
    "ChainConfig",
    "ChainSummary",
    "run_chains",
    "noise_block",
    "exact_gaussian_samples",
    "estimate_grad_moment",
    "DivergedChainError",
]

_MASK64 = (1 << 64) - 1


class DivergedChainError(RuntimeError):
    """A chain iterate became non-finite (step size in the divergent regime)."""

    def __init__(self, chain, step):
        self.chain = chain
        self.step = step
        super().__init__(f"chain {chain} diverged to a non-finite iterate at step {step}")


@dataclass(frozen=True)
class ChainConfig:
    """Deterministic ULA ensemble configuration.

    ``init_mean``/``init_sigma`` define the Gaussian initialization
    N(init_mean, init_sigma**2 I).  ``bin_edges`` (1D targets only) fixes the
    histogram bins recorded with each summary.
    """

    eps: float
    steps: int
    chains: int
    seed: int
    init_mean: np.ndarray
    init_sigma: float
    bin_edges: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.eps >= 0.0):
            raise ValueError("eps must be nonnegative")
        if self.chains < 1 or self.steps < 0:
            raise ValueError("need chains >= 1 and steps >= 0")
        object.__setattr__(
            self, "init_mean", np.atleast_1d(np.asarray(self.init_mean, dtype=float))
        )
        if not (self.init_sigma >= 0.0):
            raise ValueError("init_sigma must be nonnegative")
        if self.bin_edges is not None:
            edges = np.asarray(self.bin_edges, dtype=float)
            if edges.ndim != 1 or edges.shape[0] < 2 or (np.diff(edges) <= 0).any():
                raise ValueError("bin_edges must be increasing with >= 2 entries")
            object.__setattr__(self, "bin_edges", edges)


@dataclass(frozen=True)
class ChainSummary:
    """Per-recorded-step empirical moments (and 1D histograms)."""

    steps: tuple
    means: tuple  # of (n,) arrays
    covs: tuple  # of (n, n) arrays
    hists: Optional[tuple]  # of count arrays, 1D targets with bin_edges only
    bin_edges: Optional[np.ndarray]
    final_step: int
    final_samples: np.ndarray  # (chains, n) iterates at final_step
    chains: int
    dim: int


def _philox_key(seed: int, step_slot: int) -> int:
    return ((int(seed) & _MASK64) << 64) | (step_slot & _MASK64)


def noise_block(seed: int, step_slot: int, lo: int, hi: int, dim: int) -> np.ndarray:
    """Standard normals for chains [lo, hi) at one step, shape (hi-lo, dim).

    Chain i occupies ceil(dim/4) Philox counter blocks starting at
    i * ceil(dim/4), so any partition of the chain range draws identical
    values.  Uniforms are (raw >> 11 + 0.5) * 2**-53, strictly inside (0, 1).
    """
    blocks = (dim + 3) // 4
    bg = Philox(key=_philox_key(seed, step_slot), counter=lo * blocks)
    raw = bg.random_raw((hi - lo) * blocks * 4).reshape(hi - lo, blocks * 4)[:, :dim]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def run_chains(target: Target, cfg: ChainConfig, record_at) -> ChainSummary:
    """Simulate independent ULA chains, summarizing at the requested steps."""
    record = sorted(set(int(k) for k in record_at))
    if record and (record[0] < 0 or record[-1] > cfg.steps):
        raise ValueError("record indices must lie in [0, steps]")
    n = target.dimension
    if cfg.init_mean.shape[0] != n:
        raise ValueError("init_mean dimension disagrees with the target")
    if cfg.bin_edges is not None and n != 1:
        raise ValueError("histograms are recorded for 1D targets only")

    x = cfg.init_mean + cfg.init_sigma * noise_block(cfg.seed, 0, 0, cfg.chains, n)
    one_d = n == 1
    grad = target.gradient
    sqrt2eps = np.sqrt(2.0 * cfg.eps)

    steps_rec, means, covs, hists = [], [], [], []

    def _record(k):
        steps_rec.append(k)
        means.append(x.mean(axis=0))
        covs.append(np.atleast_2d(np.cov(x, rowvar=False, ddof=1)))
        if cfg.bin_edges is not None:
            hists.append(np.histogram(x[:, 0], bins=cfg.bin_edges)[0])

    want = set(record)
    if 0 in want:
        _record(0)
    for k in range(1, cfg.steps + 1):
        z = noise_block(cfg.seed, k, 0, cfg.chains, n)
        # overflow on a diverging chain is reported as DivergedChainError below
        with np.errstate(over="ignore", invalid="ignore"):
            if one_d:
                g = grad(x[:, 0])[:, None]
            else:
                g = grad(x)
            x = x - cfg.eps * g + sqrt2eps * z
        if not np.isfinite(x).all():
            bad = int(np.argwhere(~np.isfinite(x).all(axis=1))[0, 0])
            raise DivergedChainError(bad, k)
        if k in want:
            _record(k)

    return ChainSummary(
        steps=tuple(steps_rec),
        means=tuple(means),
        covs=tuple(covs),
        hists=tuple(hists) if cfg.bin_edges is not None else None,
        bin_edges=cfg.bin_edges,
        final_step=cfg.steps,
        final_samples=x,
        chains=cfg.chains,
        dim=n,
    )


def exact_gaussian_samples(mean, cov, n_samples: int, seed: int) -> np.ndarray:
    """Exact N(mean, cov) samples through the same counter-based stream."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    n = mean.shape[0]
    z = noise_block(seed, 0, 0, n_samples, n)
    evals, vecs = np.linalg.eigh(cov)
    if evals.min() <= 0.0:
        raise ValueError("covariance must be positive definite")
    root = (vecs * np.sqrt(evals)) @ vecs.T
    return mean + z @ root


def estimate_grad_moment(target: Target, samples_from, min_samples: int = 10**4):
    """Monte Carlo estimate of E ||grad f||^2 with a jackknife standard error.

    ``samples_from`` is a :class:`ChainSummary` (its final-step iterates are
    used) or a sample array of shape (N, n) / (N,) for 1D targets.
    """
    if isinstance(samples_from, ChainSummary):
        samples = samples_from.final_samples
    else:
        samples = np.asarray(samples_from, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
    n_samples = samples.shape[0]
    if n_samples < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n_samples}")
    if target.dimension == 1:
        g = np.asarray(target.gradient(samples[:, 0]), dtype=float)
        vals = g * g
    else:
        g = np.asarray(target.gradient(samples), dtype=float)
        vals = (g * g).sum(axis=1)
    mean = vals.mean()
    # delete-1 jackknife of the mean
    loo = (vals.sum() - vals) / (n_samples - 1)
    se = np.sqrt((n_samples - 1) / n_samples * ((loo - loo.mean()) ** 2).sum())
    return float(mean), float(se)
