"""Grid sweep kernels with a numba fast path and a pure-NumPy fallback.

The backend is chosen once at import time from the ``SPECTILE_BACKEND``
environment variable:

  * ``auto`` (default): numba if it imports, NumPy otherwise
  * ``numba``: require numba, raise if unavailable
  * ``numpy``: force the pure-NumPy path

``BACKEND`` records the active choice. ``benchmarks/bench_kernels.py``
compares both implementations on a large instance.
"""

import os

_requested = os.environ.get("SPECTILE_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"SPECTILE_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy as _impl

        BACKEND = "numpy"

cover_counts = _impl.cover_counts
lambda_hits = _impl.lambda_hits
boundary_hits = _impl.boundary_hits
fiber_phases = _impl.fiber_phases
phase_matrices = _impl.phase_matrices

__all__ = [
    "BACKEND",
    "cover_counts",
    "lambda_hits",
    "boundary_hits",
    "fiber_phases",
    "phase_matrices",
]
