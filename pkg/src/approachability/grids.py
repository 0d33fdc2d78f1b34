"""Simplex discretisations shared by the value solver and the reduction."""

from __future__ import annotations

import numpy as np


def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All weight vectors with entries that are multiples of 1/(resolution-1).

    Returns an array of shape (count, n) sorted lexicographically ascending,
    so "first index attaining the optimum" realises lexicographic
    tie-breaking.  Vertices of the simplex are always included.
    """
    if n < 1:
        raise ValueError("need at least one action")
    if n == 1:
        return np.ones((1, 1))
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    steps = resolution - 1

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, parts - 1):
                yield (head, *tail)

    counts = np.array(sorted(compositions(steps, n)), dtype=float)
    return counts / steps
