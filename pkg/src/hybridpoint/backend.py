"""Kernel backend selection.

The hot per-pixel kernels exist twice: a numba @njit build and a pure
numpy build with matching semantics. HYBRIDPOINT_BACKEND picks one at
import time:

  * unset or "auto"  -- numba when importable, else numpy
  * "numba"          -- require numba, fail loudly if missing
  * "numpy"          -- force the pure-numpy fallback

`benchmarks/bench_backends.py` compares the two.
"""

import os

_requested = os.environ.get("HYBRIDPOINT_BACKEND", "auto").strip().lower() or "auto"

if _requested == "numpy":
    from . import _kernels_numpy as kernels

    BACKEND = "numpy"
elif _requested == "numba":
    from . import _kernels_numba as kernels

    BACKEND = "numba"
elif _requested == "auto":
    try:
        from . import _kernels_numba as kernels

        BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as kernels

        BACKEND = "numpy"
else:
    raise ValueError(
        f"HYBRIDPOINT_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND
