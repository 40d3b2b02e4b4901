"""Optional cap on BLAS/OpenMP parallelism via the MOMT_THREADS env var.

BLAS thread pools size themselves from environment variables at the time
numpy is first imported, so the cap is applied as an env shim that must
run before that first import.  The package __init__ calls it as its very
first statement, which covers both the ``momt`` command-line entry point
and ordinary library imports.  Variables already set by the user are left
untouched.
"""

from __future__ import annotations

import os

_BLAS_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def apply_thread_cap() -> int | None:
    """Read MOMT_THREADS and propagate it to the BLAS thread-count vars.

    Returns the cap as an int, or None when the variable is unset or
    unusable (non-integer or < 1 values are ignored rather than fatal:
    a bad cap should never prevent a computation from running).
    """
    raw = os.environ.get("MOMT_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        return None
    if cap < 1:
        return None
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(cap))
    return cap
