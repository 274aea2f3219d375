"""Small shared numeric helpers."""

from __future__ import annotations

import numpy as np


def minmax_rescale(values: np.ndarray) -> np.ndarray:
    """Rescale to [0, 1]; a constant vector maps to all zeros."""
    values = np.asarray(values, dtype=float)
    lo = float(values.min())
    hi = float(values.max())
    if hi - lo <= 0.0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def stable_bucket(token: str, buckets: int) -> int:
    """Deterministic token-to-bucket hash (stable across processes)."""
    import zlib

    return zlib.crc32(token.encode("utf-8")) % buckets
