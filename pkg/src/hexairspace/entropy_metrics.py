"""Shannon entropy (nats) of edge-pair usage, per cell and over the grid."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._jit import NUMBA_ENABLED, njit

MAX_CELL_ENTROPY = math.log(36.0)


class GridEntropy(NamedTuple):
    value: float
    cells_counted: int

    @property
    def mean_per_active_cell(self) -> float:
        return self.value / self.cells_counted if self.cells_counted else 0.0


if NUMBA_ENABLED:

    @njit
    def cell_entropies(counts):
        n = counts.shape[0]
        out = np.zeros(n)
        for c in range(n):
            total = 0
            for i in range(6):
                for j in range(6):
                    total += counts[c, i, j]
            if total == 0:
                continue
            h = 0.0
            for i in range(6):
                for j in range(6):
                    t = counts[c, i, j]
                    if t > 0:
                        p = t / total
                        h -= p * math.log(p)
            out[c] = h
        return out

else:

    def cell_entropies(counts):
        counts = np.asarray(counts, dtype=np.float64).reshape(len(counts), 36)
        total = counts.sum(axis=1, keepdims=True)
        p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
        logs = np.log(p, out=np.zeros_like(p), where=p > 0)
        return -(p * logs).sum(axis=1)


def cell_entropy(t) -> float:
    """Entropy of one 6x6 traffic matrix; the empty matrix scores 0."""
    t = np.asarray(t, dtype=np.int64)
    if t.shape != (6, 6):
        raise ValueError("traffic matrix must be 6x6")
    if (t < 0).any():
        raise ValueError("traffic counts must be non-negative")
    return float(cell_entropies(t.reshape(1, 6, 6))[0])


def grid_entropy(tmap) -> GridEntropy:
    """Unweighted sum of cell entropies over every cell with traffic."""
    counts = tmap.counts if hasattr(tmap, "counts") else np.asarray(tmap)
    if len(counts) == 0:
        return GridEntropy(0.0, 0)
    per_cell = cell_entropies(counts)
    active = int((counts.reshape(len(counts), -1).sum(axis=1) > 0).sum())
    return GridEntropy(float(per_cell.sum()), active)
