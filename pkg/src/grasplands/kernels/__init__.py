"""Hot numeric kernels with two interchangeable backends.

The numba backend compiles the inner loops with ``@njit``; the numpy
backend is a vectorized pure-numpy implementation of the same math.
Both produce identical outputs (asserted in tests/test_kernels.py).

Backend selection:
  * ``GRASPLANDS_DISABLE_NUMBA=1`` in the environment forces the numpy path.
  * If numba is not importable the numpy path is used automatically.
"""

import os

_flag = os.environ.get("GRASPLANDS_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

if not _disabled:
    try:
        from . import backend_numba as backend
        BACKEND = "numba"
    except ImportError:
        from . import backend_numpy as backend
        BACKEND = "numpy"
else:
    from . import backend_numpy as backend
    BACKEND = "numpy"

fps_select = backend.fps_select
render_rays = backend.render_rays
landscape_eval = backend.landscape_eval
cell_eval = backend.cell_eval


def set_num_threads(n: int) -> None:
    """Limit worker threads for the active backend (no-op for numpy)."""
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
