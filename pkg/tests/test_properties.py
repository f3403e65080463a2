import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hexairspace.cost_model import total_cost, unimpeded_matrix
from hexairspace.entropy_metrics import MAX_CELL_ENTROPY, cell_entropy, grid_entropy
from hexairspace.hexgrid import GridSpec, locate, neighbor_across, opposite_edge
from hexairspace.router import EdgeNode, build_graph, shortest_path
from hexairspace.traffic_map import TrafficPatternMap, normalized

from oracles import adjacency, exhaustive_min_cost

# first calls pay for jit compilation
settings.register_profile("hexairspace", deadline=None)
settings.load_profile("hexairspace")

grids = st.builds(GridSpec, st.integers(1, 5), st.integers(1, 5))
matrices = arrays(np.int64, (6, 6), elements=st.integers(0, 50))


@given(grids, st.data())
def test_locate_inverts_center(grid, data):
    c = data.draw(st.sampled_from(grid.cells))
    assert locate(grid, grid.center(c)) == c


@given(grids, st.data(), st.integers(1, 6))
def test_neighbor_across_is_an_involution(grid, data, e):
    c = data.draw(st.sampled_from(grid.cells))
    nb = neighbor_across(grid, c, e)
    if nb is not None:
        assert nb[1] == opposite_edge(e)
        assert neighbor_across(grid, nb[0], nb[1]) == (c, e)


@given(matrices, st.integers(1, 9))
def test_cell_entropy_bounds_and_scale_invariance(t, k):
    h = cell_entropy(t)
    assert 0.0 <= h <= MAX_CELL_ENTROPY + 1e-12
    assert math.isclose(cell_entropy(t * k), h, rel_tol=1e-12, abs_tol=1e-12)


@given(arrays(np.int64, (4, 6, 6), elements=st.integers(0, 5)))
def test_grid_entropy_is_sum_over_cells(counts):
    g = grid_entropy(counts)
    assert math.isclose(g.value, sum(cell_entropy(c) for c in counts), abs_tol=1e-12)
    assert g.cells_counted == sum(int(c.sum() > 0) for c in counts)


@given(matrices, st.floats(0.0, 10.0), st.floats(1e-6, 1.0))
def test_total_cost_floor(t, k_t, eps):
    u = unimpeded_matrix(GridSpec())
    c = total_cost(u, normalized(t), k_t, eps)
    assert (c >= eps).all()
    if k_t == 0.0:
        np.testing.assert_allclose(c, u + 1.0)


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(1, 3), st.floats(0.0, 6.0), st.integers(0, 2**32 - 1))
def test_router_matches_oracle(w, h, k_t, seed):
    grid = GridSpec(w, h)
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 4, size=(grid.n_cells, 6, 6))
    tmap = TrafficPatternMap(grid, counts)
    nodes = [EdgeNode(c, e) for c in grid.cells for e in range(1, 7)]
    s, t = (nodes[i] for i in rng.choice(len(nodes), 2, replace=False))
    route = shortest_path(build_graph(grid, tmap, k_t), s, t)
    expect = exhaustive_min_cost(adjacency(grid, counts, k_t), s, t)
    assert route is not None
    assert math.isclose(route.total_cost, expect, rel_tol=1e-12, abs_tol=1e-12)
    assert route.waypoints[0] == s and route.waypoints[-1] == t
    assert len(set(route.waypoints)) == len(route.waypoints)
