"""DTW kernel selection.

Prefers the compiled extension and falls back to the pure-Python twin.
Set F0ENTRAIN_PURE_PYTHON=1 to force the fallback (the benchmark and the
backend-equivalence tests use this). ``BACKEND`` names the active kernel.
Both kernels run the identical recurrence in the identical order, so
results are bit-equal either way.
"""

from __future__ import annotations

import os

import numpy as np

from f0entrain.kernels import _core_py

if os.environ.get("F0ENTRAIN_PURE_PYTHON") == "1":
    _impl = None
else:
    try:
        from f0entrain.kernels import _core as _impl
    except ImportError:
        _impl = None

BACKEND = "python" if _impl is None else "cython"


if _impl is None:

    def dtw_distance(a, b) -> float:
        """DTW cost between two non-empty 1-D sequences (active kernel)."""
        if isinstance(a, np.ndarray):
            a = a.tolist()
        if isinstance(b, np.ndarray):
            b = b.tolist()
        return _core_py.dtw_distance(a, b)

else:

    def dtw_distance(a, b) -> float:
        """DTW cost between two non-empty 1-D sequences (active kernel)."""
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if a.size == 0 or b.size == 0:
            raise ValueError("dtw_distance requires non-empty sequences")
        return _impl.dtw_distance(a, b)


__all__ = ["BACKEND", "dtw_distance"]
