"""Least-cost routing over the graph of hexagon edges.

Every (cell, edge) pair is a node; node id ``cell_id * 6 + edge - 1`` so that
id order equals lexicographic ``(q, r, edge)`` order.  Inside a cell, node
``i`` reaches node ``j`` at the total cost ``c[i, j]`` (entry ``i``, exit
``j``; the matrix is not symmetric once traffic is recorded, so each
direction carries its own weight).  Coincident edges of neighbouring cells
are joined at zero cost.

Ties between equal-cost paths go to the path with fewer waypoints, then to
the lexicographically smallest node sequence.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from ._jit import NUMBA_ENABLED, njit
from .cost_model import DEFAULT_EPSILON, cell_costs
from .hexgrid import CellIndex, GridSpec, check_edge


class EdgeNode(NamedTuple):
    cell: CellIndex
    edge: int


@dataclass
class Route:
    waypoints: list[EdgeNode]
    total_cost: float

    def cells(self) -> list[CellIndex]:
        out = []
        for node in self.waypoints:
            if not out or out[-1] != node.cell:
                out.append(node.cell)
        return out


@dataclass
class RouteGraph:
    grid: GridSpec
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    # flat index into the (n_cells, 6, 6) cost stack, -1 for zero-cost links
    cost_index: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    def node_id(self, node) -> int:
        cell, edge = node
        check_edge(edge)
        return self.grid.cell_id(cell) * 6 + edge - 1

    def node(self, nid: int) -> EdgeNode:
        return EdgeNode(self.grid.cells[nid // 6], nid % 6 + 1)

    def arcs(self, nid: int):
        for a in range(self.indptr[nid], self.indptr[nid + 1]):
            yield int(self.indices[a]), float(self.weights[a])

    def with_costs(self, costs: np.ndarray) -> "RouteGraph":
        flat = costs.reshape(-1)
        weights = np.where(self.cost_index >= 0, flat[np.maximum(self.cost_index, 0)], 0.0)
        return RouteGraph(self.grid, self.indptr, self.indices, weights, self.cost_index)


@lru_cache(maxsize=16)
def _structure(grid: GridSpec):
    n_nodes = grid.n_cells * 6
    nbr = grid.neighbor_table
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    indices = []
    cost_index = []
    for cid in range(grid.n_cells):
        for i in range(6):
            arcs = []
            for j in range(6):
                if j != i:
                    arcs.append((cid * 6 + j, cid * 36 + i * 6 + j))
            other = nbr[cid, i]
            if other >= 0:
                arcs.append((other * 6 + (i + 3) % 6, -1))
            arcs.sort()
            indices.extend(a[0] for a in arcs)
            cost_index.extend(a[1] for a in arcs)
            indptr[cid * 6 + i + 1] = len(indices)
    return indptr, np.array(indices, dtype=np.int64), np.array(cost_index, dtype=np.int64)


def build_graph(grid: GridSpec, tmap=None, k_t: float = 0.0, epsilon: float = DEFAULT_EPSILON) -> RouteGraph:
    """Route graph weighted by the current traffic map (empty map if ``None``)."""
    indptr, indices, cost_index = _structure(grid)
    counts = np.zeros((grid.n_cells, 6, 6), dtype=np.int64) if tmap is None else tmap.counts
    g = RouteGraph(grid, indptr, indices, np.zeros(len(indices)), cost_index)
    return g.with_costs(cell_costs(grid, counts, k_t, epsilon))


if NUMBA_ENABLED:

    @njit
    def _key_less(d1, h1, n1, d2, h2, n2):
        if d1 != d2:
            return d1 < d2
        if h1 != h2:
            return h1 < h2
        return n1 < n2

    @njit
    def _path_less(pred, a, b, length, buf_a, buf_b):
        # both paths have ``length`` hops; compare from the start node
        for k in range(length, -1, -1):
            buf_a[k] = a
            buf_b[k] = b
            a = pred[a]
            b = pred[b]
        for k in range(length + 1):
            if buf_a[k] != buf_b[k]:
                return buf_a[k] < buf_b[k]
        return False

    @njit
    def dijkstra(indptr, indices, weights, start, goal):
        n = len(indptr) - 1
        dist = np.full(n, np.inf)
        hops = np.full(n, -1, dtype=np.int64)
        pred = np.full(n, -1, dtype=np.int64)
        done = np.zeros(n, dtype=np.bool_)
        cap = len(indices) + 2
        hd = np.empty(cap)
        hh = np.empty(cap, dtype=np.int64)
        hn = np.empty(cap, dtype=np.int64)
        buf_a = np.empty(n + 1, dtype=np.int64)
        buf_b = np.empty(n + 1, dtype=np.int64)
        size = 0

        dist[start] = 0.0
        hops[start] = 0
        hd[0] = 0.0
        hh[0] = 0
        hn[0] = start
        size = 1
        while size > 0:
            d = hd[0]
            h = hh[0]
            u = hn[0]
            size -= 1
            if size > 0:
                # sift the last entry down from the root
                ld = hd[size]
                lh = hh[size]
                ln = hn[size]
                i = 0
                while True:
                    c = 2 * i + 1
                    if c >= size:
                        break
                    if c + 1 < size and _key_less(hd[c + 1], hh[c + 1], hn[c + 1], hd[c], hh[c], hn[c]):
                        c += 1
                    if _key_less(hd[c], hh[c], hn[c], ld, lh, ln):
                        hd[i] = hd[c]
                        hh[i] = hh[c]
                        hn[i] = hn[c]
                        i = c
                    else:
                        break
                hd[i] = ld
                hh[i] = lh
                hn[i] = ln
            if done[u] or d != dist[u] or h != hops[u]:
                continue
            done[u] = True
            if u == goal:
                break
            for a in range(indptr[u], indptr[u + 1]):
                v = indices[a]
                if done[v]:
                    continue
                nd = d + weights[a]
                nh = h + 1
                if nd < dist[v] or (nd == dist[v] and nh < hops[v]):
                    dist[v] = nd
                    hops[v] = nh
                    pred[v] = u
                    # sift up
                    i = size
                    size += 1
                    while i > 0:
                        p = (i - 1) // 2
                        if _key_less(nd, nh, v, hd[p], hh[p], hn[p]):
                            hd[i] = hd[p]
                            hh[i] = hh[p]
                            hn[i] = hn[p]
                            i = p
                        else:
                            break
                    hd[i] = nd
                    hh[i] = nh
                    hn[i] = v
                elif nd == dist[v] and nh == hops[v] and _path_less(pred, u, pred[v], h, buf_a, buf_b):
                    pred[v] = u
        if not done[goal]:
            return np.inf, np.empty(0, dtype=np.int64)
        length = hops[goal]
        path = np.empty(length + 1, dtype=np.int64)
        node = goal
        for k in range(length, -1, -1):
            path[k] = node
            node = pred[node]
        return dist[goal], path

else:

    def _walk(pred, node, length):
        out = [0] * (length + 1)
        for k in range(length, -1, -1):
            out[k] = node
            node = pred[node]
        return out

    def dijkstra(indptr, indices, weights, start, goal):
        n = len(indptr) - 1
        dist = [math.inf] * n
        hops = [-1] * n
        pred = [-1] * n
        done = [False] * n
        indptr = indptr.tolist()
        indices = indices.tolist()
        weights = weights.tolist()
        dist[start] = 0.0
        hops[start] = 0
        heap = [(0.0, 0, start)]
        while heap:
            d, h, u = heapq.heappop(heap)
            if done[u] or d != dist[u] or h != hops[u]:
                continue
            done[u] = True
            if u == goal:
                break
            for a in range(indptr[u], indptr[u + 1]):
                v = indices[a]
                if done[v]:
                    continue
                nd = d + weights[a]
                nh = h + 1
                if nd < dist[v] or (nd == dist[v] and nh < hops[v]):
                    dist[v] = nd
                    hops[v] = nh
                    pred[v] = u
                    heapq.heappush(heap, (nd, nh, v))
                elif nd == dist[v] and nh == hops[v] and _walk(pred, u, h) < _walk(pred, pred[v], h):
                    pred[v] = u
        if not done[goal]:
            return math.inf, np.empty(0, dtype=np.int64)
        return dist[goal], np.array(_walk(pred, goal, hops[goal]), dtype=np.int64)


def shortest_path(g: RouteGraph, start, goal) -> Optional[Route]:
    """Least-cost route between two edge nodes, ``None`` if unreachable."""
    s = g.node_id(start)
    t = g.node_id(goal)
    cost, path = dijkstra(g.indptr, g.indices, g.weights, s, t)
    if not math.isfinite(cost):
        return None
    return Route([g.node(int(n)) for n in path], float(cost))


def replan(grid: GridSpec, tmap, k_t: float, epsilon: float, current, goal) -> Optional[Route]:
    return shortest_path(build_graph(grid, tmap, k_t, epsilon), current, goal)


def nearest_edge(grid: GridSpec, cell, point) -> int:
    """Edge of ``cell`` whose midpoint is closest to ``point`` (lowest on ties)."""
    mids = grid.edge_midpoints[grid.cell_id(cell)]
    d = np.hypot(mids[:, 0] - point[0], mids[:, 1] - point[1])
    return int(np.argmin(d)) + 1
