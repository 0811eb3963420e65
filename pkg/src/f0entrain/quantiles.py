"""Shared quantile routine.

Every quantile in the toolkit (outlier fences, feature percentiles,
normalization) goes through this one function so that a single convention
applies everywhere: linear interpolation between order statistics at
position h = (n - 1) * p, i.e. the "type 7" rule.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def quantile(values: Sequence[float] | np.ndarray, p: float) -> float:
    """Type-7 quantile of ``values`` at probability ``p`` in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"quantile probability must be in [0, 1], got {p}")
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("quantile of empty sequence")
    h = (n - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


def iqr_fences(values: Sequence[float] | np.ndarray, k: float = 1.5) -> tuple[float, float]:
    """Tukey fences [q25 - k*IQR, q75 + k*IQR]."""
    q25 = quantile(values, 0.25)
    q75 = quantile(values, 0.75)
    spread = q75 - q25
    return q25 - k * spread, q75 + k * spread
