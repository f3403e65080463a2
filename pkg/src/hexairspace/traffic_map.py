"""Per-cell 6x6 counts of realised (entry edge, exit edge) traversals."""
from __future__ import annotations

import numpy as np

from .hexgrid import CellIndex, GridSpec, check_edge


class TrafficPatternMap:
    """Traffic matrices for every cell of a grid.

    ``counts[cell_id, i - 1, j - 1]`` is the number of completed traversals
    that entered through edge ``i`` and left through edge ``j``.  Entries only
    ever grow.
    """

    def __init__(self, grid: GridSpec, counts: np.ndarray | None = None):
        self.grid = grid
        shape = (grid.n_cells, 6, 6)
        if counts is None:
            counts = np.zeros(shape, dtype=np.int64)
        else:
            counts = np.array(counts, dtype=np.int64)
            if counts.shape != shape:
                raise ValueError(f"counts must have shape {shape}, got {counts.shape}")
            if (counts < 0).any():
                raise ValueError("traffic counts must be non-negative")
        self.counts = counts
        # bumped on every mutation so cost snapshots can be cached
        self.version = 0

    def record_traversal(self, c, entry: int, exit: int) -> None:
        check_edge(entry)
        check_edge(exit)
        try:
            cid = self.grid.cell_id(c)
        except KeyError:
            raise KeyError(f"traversal recorded for unknown cell {tuple(c)}") from None
        self.counts[cid, entry - 1, exit - 1] += 1
        self.version += 1

    def record_by_id(self, cid: int, entry: int, exit: int) -> None:
        self.counts[cid, entry - 1, exit - 1] += 1
        self.version += 1

    def matrix(self, c) -> np.ndarray:
        return self.counts[self.grid.cell_id(c)].copy()

    def total(self) -> int:
        return int(self.counts.sum())

    def snapshot(self) -> "TrafficPatternMap":
        return TrafficPatternMap(self.grid, self.counts.copy())

    def nonzero(self) -> list[tuple[CellIndex, int, int, int]]:
        """Sorted ``(cell, i, j, count)`` for every non-empty entry."""
        out = []
        for cid, i, j in zip(*np.nonzero(self.counts)):
            out.append((self.grid.cells[cid], int(i) + 1, int(j) + 1, int(self.counts[cid, i, j])))
        out.sort()
        return out

    @classmethod
    def from_triples(cls, grid: GridSpec, triples) -> "TrafficPatternMap":
        tmap = cls(grid)
        for (q, r), i, j, count in triples:
            if count < 0:
                raise ValueError("traffic counts must be non-negative")
            tmap.counts[grid.cell_id((q, r)), check_edge(i) - 1, check_edge(j) - 1] += count
        return tmap

    def __eq__(self, other):
        if not isinstance(other, TrafficPatternMap):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.counts, other.counts)


def normalized(t) -> np.ndarray:
    """Traffic matrix divided by its grand sum; the zero matrix stays zero.

    Works on a single 6x6 matrix or a stack ``(..., 6, 6)``.
    """
    t = np.asarray(t, dtype=np.float64)
    total = t.sum(axis=(-2, -1), keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, t / safe, 0.0)
