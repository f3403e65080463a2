"""Unimpeded, traffic and total transit cost matrices.

The total cost adds miles (unimpeded distance) to the dimensionless traffic
term as written; ``k_t`` sets the balance.  Costs are clamped at ``epsilon``
so that shortest-path search keeps non-negative arc weights.
"""
from __future__ import annotations

import numpy as np

from .hexgrid import EDGES, GridSpec, edge_pair_distance
from .traffic_map import normalized

DEFAULT_EPSILON = 1e-3


def unimpeded_matrix(grid: GridSpec) -> np.ndarray:
    """6x6 midpoint distances, ``2 * cell_width`` on the diagonal."""
    return np.array([[edge_pair_distance(grid, i, j) for j in EDGES] for i in EDGES])


def traffic_cost(t_hat, k_t: float) -> np.ndarray:
    if k_t < 0:
        raise ValueError("k_t must be non-negative")
    return 1.0 - k_t * np.asarray(t_hat, dtype=np.float64)


def total_cost(u, t_hat, k_t: float, epsilon: float = DEFAULT_EPSILON, clamp: bool = True) -> np.ndarray:
    """``max(epsilon, u + 1 - k_t * t_hat)``; broadcasts over cell stacks."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    raw = np.asarray(u, dtype=np.float64) + traffic_cost(t_hat, k_t)
    if not clamp:
        return raw
    return np.maximum(raw, epsilon)


def cell_costs(grid: GridSpec, counts: np.ndarray, k_t: float, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Total cost matrices ``(n_cells, 6, 6)`` for a whole traffic map."""
    return total_cost(unimpeded_matrix(grid), normalized(counts), k_t, epsilon)
