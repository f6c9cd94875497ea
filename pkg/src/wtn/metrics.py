"""Kendall tau distance between two rankings of the same entities."""
from __future__ import annotations

from typing import Sequence

import numpy as np


def _as_positions(t: Sequence[int]) -> np.ndarray:
    pos = np.asarray(t)
    if pos.ndim != 1 or not np.issubdtype(pos.dtype, np.integer):
        raise ValueError("a ranking must be a 1-d sequence of integer positions")
    if not np.array_equal(np.sort(pos), np.arange(1, pos.size + 1)):
        raise ValueError("positions must be a permutation of 1..N")
    return pos


def kendall_distance(t1: Sequence[int], t2: Sequence[int]) -> float:
    """Normalized Kendall tau distance, 0 for identical and 1 for reversed lists.

    ``t1[i]`` and ``t2[i]`` are the 1-based positions of entity ``i`` in the
    two lists.
    """
    a, b = _as_positions(t1), _as_positions(t2)
    if a.size != b.size:
        raise ValueError(f"rankings have different lengths ({a.size}, {b.size})")
    n = a.size
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, k=1)
    sa = np.sign(a[:, None] - a[None, :])[iu]
    sb = np.sign(b[:, None] - b[None, :])[iu]
    assert np.all(sa != 0) and np.all(sb != 0)
    return float(np.sum(1 - sa * sb)) / (n * (n - 1))
