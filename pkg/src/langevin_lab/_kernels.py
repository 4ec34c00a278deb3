"""Hot numeric kernels, each in a numba ``@njit`` and a pure-numpy variant.

The two implementations of a kernel compute the same arithmetic (the numba
one as an explicit loop, the numpy one vectorized); ``tests/test_kernels.py``
pins them against each other.  ``benchmarks/bench_backends.py`` times both.
"""

import numpy as np

from ._backend import HAS_NUMBA, USE_NUMBA

if HAS_NUMBA:
    from numba import njit


# ---------------------------------------------------------------------------
# Fokker-Planck explicit finite-volume stepping
#
# PDE: drho/dt = d/dx(rho f' + drho/dx), zero-flux boundaries, node-centered
# cells (half cells at the ends, so conserved mass == trapezoid integral).
# Each step clips negative undershoot to 0 and renormalizes; the clipped
# trapezoid mass is accumulated and returned.
# ---------------------------------------------------------------------------


def _fp_steps_numpy(values, drift_mid, h, dt, nsteps):
    v = values.copy()
    m = v.shape[0]
    clipped = 0.0
    half = 0.5 * h
    for _ in range(nsteps):
        flux = -(0.5 * (v[1:] + v[:-1]) * drift_mid + (v[1:] - v[:-1]) / h)
        v[0] -= (dt / half) * flux[0]
        v[1:-1] -= (dt / h) * (flux[1:] - flux[:-1])
        v[m - 1] += (dt / half) * flux[m - 2]
        neg = v < 0.0
        if neg.any():
            clipped += -(
                np.trapezoid(np.where(neg, v, 0.0), dx=h)
            )
            v[neg] = 0.0
        mass = np.trapezoid(v, dx=h)
        v /= mass
    return v, clipped


if HAS_NUMBA:

    @njit(cache=True)
    def _fp_steps_numba(values, drift_mid, h, dt, nsteps):  # pragma: no cover
        v = values.copy()
        m = v.shape[0]
        flux = np.empty(m - 1)
        clipped = 0.0
        half = 0.5 * h
        for _ in range(nsteps):
            for i in range(m - 1):
                flux[i] = -(
                    0.5 * (v[i + 1] + v[i]) * drift_mid[i] + (v[i + 1] - v[i]) / h
                )
            v[0] -= (dt / half) * flux[0]
            for i in range(1, m - 1):
                v[i] -= (dt / h) * (flux[i] - flux[i - 1])
            v[m - 1] += (dt / half) * flux[m - 2]
            # clip undershoot, tracking the trapezoid mass removed
            neg_mass = 0.0
            for i in range(m):
                if v[i] < 0.0:
                    w = h if 0 < i < m - 1 else half
                    neg_mass += -v[i] * w
                    v[i] = 0.0
            clipped += neg_mass
            mass = 0.0
            for i in range(m - 1):
                mass += 0.5 * (v[i] + v[i + 1]) * h
            for i in range(m):
                v[i] /= mass
        return v, clipped


fp_steps = _fp_steps_numba if USE_NUMBA else _fp_steps_numpy


# ---------------------------------------------------------------------------
# Gradient of the potential -log p for a 1D Gaussian mixture
#
# grad f(x) = sum_k r_k(x) (x - m_k) / v_k   with responsibilities
# r_k = w_k N(x; m_k, v_k) / p(x), computed with a max-shift for stability.
# ---------------------------------------------------------------------------


def _mixture_grad_1d_numpy(x, weights, means, variances):
    d = x[:, None] - means[None, :]
    logphi = -0.5 * d * d / variances[None, :] - 0.5 * np.log(
        2.0 * np.pi * variances[None, :]
    )
    logw = np.log(weights)[None, :] + logphi
    shift = logw.max(axis=1, keepdims=True)
    r = np.exp(logw - shift)
    r /= r.sum(axis=1, keepdims=True)
    return (r * d / variances[None, :]).sum(axis=1)


if HAS_NUMBA:

    @njit(cache=True)
    def _mixture_grad_1d_numba(x, weights, means, variances):  # pragma: no cover
        npts = x.shape[0]
        ncomp = weights.shape[0]
        out = np.empty(npts)
        logw = np.empty(ncomp)
        for i in range(npts):
            shift = -np.inf
            for k in range(ncomp):
                d = x[i] - means[k]
                logw[k] = (
                    np.log(weights[k])
                    - 0.5 * d * d / variances[k]
                    - 0.5 * np.log(2.0 * np.pi * variances[k])
                )
                if logw[k] > shift:
                    shift = logw[k]
            total = 0.0
            acc = 0.0
            for k in range(ncomp):
                r = np.exp(logw[k] - shift)
                total += r
                acc += r * (x[i] - means[k]) / variances[k]
            out[i] = acc / total
        return out


mixture_grad_1d = _mixture_grad_1d_numba if USE_NUMBA else _mixture_grad_1d_numpy
