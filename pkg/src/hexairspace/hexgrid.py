"""Hexagonal tessellation of a flat rectangular airspace.

Conventions (fixed once, used everywhere):

* Pointy-top hexagons, axial ``(q, r)`` addressing, ``x`` east and ``y``
  north in miles.  Cell ``(q, r)`` is centred at
  ``(w * (q + r / 2), w * sqrt(3) / 2 * r)`` where ``w`` is the width across
  flats.
* Edge ``k`` (1..6) has its outward normal at ``(k - 1) * 60`` degrees
  counter-clockwise from east: 1=E, 2=NE, 3=NW, 4=W, 5=SW, 6=SE.
  Opposite edges differ by 3.
* The footprint is ``width_cells`` x ``height_cells`` in odd-r offset rows:
  row ``r`` holds columns ``0..width_cells-1`` with ``q = col - r // 2``, so
  odd rows sit half a cell to the east.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from ._jit import njit

SQRT3 = math.sqrt(3.0)
EDGES = (1, 2, 3, 4, 5, 6)

# axial step across edge k, index k - 1
AXIAL_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
_DIR_DQ = np.array([d[0] for d in AXIAL_DIRECTIONS], dtype=np.int64)
_DIR_DR = np.array([d[1] for d in AXIAL_DIRECTIONS], dtype=np.int64)
_NORMAL_X = np.array([math.cos(math.radians(60 * k)) for k in range(6)])
_NORMAL_Y = np.array([math.sin(math.radians(60 * k)) for k in range(6)])

# chord between two edge midpoints, as a fraction of the across-flats width,
# indexed by angular separation in 60-degree steps
_CHORD_FRACTION = (2.0, 0.5, SQRT3 / 2.0, 1.0)


class CellIndex(NamedTuple):
    q: int
    r: int


class Point2D(NamedTuple):
    x: float
    y: float


def check_edge(e: int) -> int:
    if e not in EDGES:
        raise ValueError(f"edge index must be in 1..6, got {e!r}")
    return e


def opposite_edge(e: int) -> int:
    return (check_edge(e) + 2) % 6 + 1


@dataclass(frozen=True)
class GridSpec:
    width_cells: int = 12
    height_cells: int = 12
    cell_width: float = 2.65

    def __post_init__(self):
        if int(self.width_cells) != self.width_cells or self.width_cells < 1:
            raise ValueError("width_cells must be a positive integer")
        if int(self.height_cells) != self.height_cells or self.height_cells < 1:
            raise ValueError("height_cells must be a positive integer")
        if not (self.cell_width > 0 and math.isfinite(self.cell_width)):
            raise ValueError("cell_width must be positive and finite")

    # -- topology ---------------------------------------------------------
    @property
    def q_min(self) -> int:
        return -((self.height_cells - 1) // 2)

    def in_bounds(self, c) -> bool:
        q, r = c
        return 0 <= r < self.height_cells and 0 <= q + r // 2 < self.width_cells

    @cached_property
    def cells(self) -> list[CellIndex]:
        """In-bounds cells sorted lexicographically by ``(q, r)``.

        The position in this list is the cell id used by every array-backed
        structure, so id order and ``(q, r)`` order agree.
        """
        out = [
            CellIndex(col - r // 2, r)
            for r in range(self.height_cells)
            for col in range(self.width_cells)
        ]
        return sorted(out)

    @property
    def n_cells(self) -> int:
        return self.width_cells * self.height_cells

    @cached_property
    def id_lookup(self) -> np.ndarray:
        """``lookup[q - q_min, r]`` -> cell id, -1 outside the footprint."""
        n_q = self.width_cells - self.q_min + 1
        lookup = np.full((n_q, self.height_cells), -1, dtype=np.int64)
        for cid, (q, r) in enumerate(self.cells):
            lookup[q - self.q_min, r] = cid
        return lookup

    def cell_id(self, c) -> int:
        if not self.in_bounds(c):
            raise KeyError(f"cell {tuple(c)} is outside the grid")
        return int(self.id_lookup[c[0] - self.q_min, c[1]])

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """``table[cell_id, k]`` -> neighbour id across edge ``k + 1``, or -1."""
        table = np.full((self.n_cells, 6), -1, dtype=np.int64)
        for cid, (q, r) in enumerate(self.cells):
            for k, (dq, dr) in enumerate(AXIAL_DIRECTIONS):
                nb = (q + dq, r + dr)
                if self.in_bounds(nb):
                    table[cid, k] = self.cell_id(nb)
        return table

    # -- geometry ---------------------------------------------------------
    def center(self, c) -> Point2D:
        q, r = c
        w = self.cell_width
        return Point2D(w * (q + r / 2.0), w * SQRT3 / 2.0 * r)

    @cached_property
    def centers(self) -> np.ndarray:
        return np.array([self.center(c) for c in self.cells], dtype=np.float64)

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        """``(n_cells, 6, 2)`` midpoints of every cell edge."""
        half = self.cell_width / 2.0
        offs = np.stack([_NORMAL_X, _NORMAL_Y], axis=1) * half
        return self.centers[:, None, :] + offs[None, :, :]


def locate(grid: GridSpec, p) -> Optional[CellIndex]:
    """Cell containing ``p``, or ``None`` when ``p`` is outside the footprint.

    Points on a shared boundary go to the lexicographically smallest
    ``(q, r)`` among the in-bounds cells touching them.
    """
    cid = locate_xy(float(p[0]), float(p[1]), grid.cell_width, grid.id_lookup, grid.q_min)
    if cid < 0:
        return None
    return grid.cells[cid]


@njit
def locate_xy(x, y, w, lookup, q_min):
    rf = y / (w * SQRT3 / 2.0)
    qf = x / w - rf / 2.0
    sf = -qf - rf
    q = round(qf)
    r = round(rf)
    s = round(sf)
    dq = abs(q - qf)
    dr = abs(r - rf)
    ds = abs(s - sf)
    if dq > dr and dq > ds:
        q = -r - s
    elif dr > ds:
        r = -q - s
    q0 = int(q)
    r0 = int(r)
    half = w / 2.0
    tol = 1e-9 * w
    best = -1
    for k in range(7):
        if k == 0:
            cq = q0
            cr = r0
        else:
            cq = q0 + _DIR_DQ[k - 1]
            cr = r0 + _DIR_DR[k - 1]
        iq = cq - q_min
        if iq < 0 or iq >= lookup.shape[0] or cr < 0 or cr >= lookup.shape[1]:
            continue
        cid = lookup[iq, cr]
        if cid < 0:
            continue
        cx = w * (cq + cr / 2.0)
        cy = w * SQRT3 / 2.0 * cr
        inside = True
        for m in range(3):
            if abs((x - cx) * _NORMAL_X[m] + (y - cy) * _NORMAL_Y[m]) > half + tol:
                inside = False
                break
        if inside and (best < 0 or cid < best):
            best = cid
    return best


def neighbor_across(grid: GridSpec, c, e: int) -> Optional[tuple[CellIndex, int]]:
    """The cell on the other side of edge ``e`` of ``c`` and that edge's
    number there, or ``None`` if the edge lies on the outer border."""
    check_edge(e)
    dq, dr = AXIAL_DIRECTIONS[e - 1]
    nb = CellIndex(c[0] + dq, c[1] + dr)
    if not grid.in_bounds(nb):
        return None
    return nb, opposite_edge(e)


def shared_edge(a, b) -> Optional[int]:
    """Edge number of ``a`` that is shared with cell ``b``, if adjacent."""
    d = (b[0] - a[0], b[1] - a[1])
    if d in AXIAL_DIRECTIONS:
        return AXIAL_DIRECTIONS.index(d) + 1
    return None


def axial_distance(a, b) -> int:
    dq = a[0] - b[0]
    dr = a[1] - b[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def edge_midpoint(grid: GridSpec, c, e: int) -> Point2D:
    check_edge(e)
    cx, cy = grid.center(c)
    half = grid.cell_width / 2.0
    return Point2D(cx + half * _NORMAL_X[e - 1], cy + half * _NORMAL_Y[e - 1])


def edge_pair_distance(grid: GridSpec, i: int, j: int) -> float:
    """Midpoint-to-midpoint distance for edges ``i`` and ``j`` of one cell.

    A U-turn (``i == j``) counts as twice the cell width.
    """
    check_edge(i)
    check_edge(j)
    sep = abs(i - j)
    sep = min(sep, 6 - sep)
    return grid.cell_width * _CHORD_FRACTION[sep]
