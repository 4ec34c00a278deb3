"""Kernel backend selection: numba-jitted hot loops with a pure-numpy fallback.

The environment variable ``LANGEVIN_LAB_BACKEND`` selects the backend:

* unset or ``"numba"`` -- use numba ``@njit`` kernels (falls back to numpy
  with a warning only when numba is not importable and the variable is unset)
* ``"numpy"`` -- force the vectorized numpy implementations

Both implementations of every kernel are always importable from
``langevin_lab._kernels`` so they can be benchmarked against each other;
the flag only decides which one the package itself calls.
"""

import os
import warnings

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_ENV_VAR = "LANGEVIN_LAB_BACKEND"
_requested = os.environ.get(_ENV_VAR, "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"{_ENV_VAR}={_requested!r} is not a valid backend; use 'numba' or 'numpy'"
    )
if _requested == "numba" and not HAS_NUMBA:
    raise ImportError(f"{_ENV_VAR}=numba requested but numba is not importable")
if _requested == "" and not HAS_NUMBA:  # pragma: no cover
    warnings.warn("numba not importable; falling back to the numpy backend")

USE_NUMBA = HAS_NUMBA and _requested != "numpy"


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
