import math

import numpy as np
import pytest

from hexairspace.cost_model import unimpeded_matrix
from hexairspace.hexgrid import GridSpec, neighbor_across
from hexairspace.router import EdgeNode, build_graph, nearest_edge, replan, shortest_path
from hexairspace.traffic_map import TrafficPatternMap
from oracles import adjacency, all_min_paths, exhaustive_min_cost


def test_single_cell_graph():
    g = build_graph(GridSpec(1, 1))
    assert g.n_nodes == 6
    arcs = [(u, v, w) for u in range(6) for v, w in g.arcs(u)]
    # every ordered pair of distinct edges, no inter-cell links
    assert len(arcs) == 30
    assert all(u != v for u, v, _ in arcs)


def test_two_cells_share_one_zero_link():
    grid = GridSpec(2, 1)
    g = build_graph(grid)
    zero = [(u, v) for u in range(g.n_nodes) for v, w in g.arcs(u) if u // 6 != v // 6]
    assert len(zero) == 2  # one physical edge, both directions
    assert all(w == 0.0 for u in range(g.n_nodes) for v, w in g.arcs(u) if u // 6 != v // 6)


def test_gain_zero_weights():
    grid = GridSpec(2, 2)
    rng = np.random.default_rng(0)
    tm = TrafficPatternMap(grid, rng.integers(0, 5, size=(grid.n_cells, 6, 6)))
    u = unimpeded_matrix(grid)
    g = build_graph(grid, tm, 0.0)
    for a in range(g.n_nodes):
        for b, w in g.arcs(a):
            if a // 6 == b // 6:
                assert w == u[a % 6, b % 6] + 1


def test_trivial_routes():
    grid = GridSpec(1, 1)
    g = build_graph(grid, None, 2.0)
    r = shortest_path(g, EdgeNode((0, 0), 3), EdgeNode((0, 0), 3))
    assert r.waypoints == [EdgeNode((0, 0), 3)] and r.total_cost == 0.0
    r = shortest_path(g, EdgeNode((0, 0), 4), EdgeNode((0, 0), 2))
    assert len(r.waypoints) == 2
    assert r.total_cost == unimpeded_matrix(grid)[3, 1] + 1


def test_unknown_node():
    g = build_graph(GridSpec(2, 2))
    with pytest.raises(KeyError):
        shortest_path(g, EdgeNode((9, 9), 1), EdgeNode((0, 0), 1))
    with pytest.raises(ValueError):
        shortest_path(g, EdgeNode((0, 0), 8), EdgeNode((0, 0), 1))


def test_route_consistency_and_triangle():
    grid = GridSpec(4, 3)
    rng = np.random.default_rng(9)
    tm = TrafficPatternMap(grid, rng.integers(0, 3, size=(grid.n_cells, 6, 6)))
    g = build_graph(grid, tm, 2.0)
    nodes = [EdgeNode(c, e) for c in grid.cells for e in range(1, 7)]
    for _ in range(30):
        a, m, b = (nodes[i] for i in rng.integers(len(nodes), size=3))
        r = shortest_path(g, a, b)
        w = dict()
        total = 0.0
        for x, y in zip(r.waypoints, r.waypoints[1:]):
            w = dict(g.arcs(g.node_id(x)))
            assert g.node_id(y) in w
            total += w[g.node_id(y)]
        assert total == r.total_cost
        assert r.total_cost <= shortest_path(g, a, m).total_cost + shortest_path(g, m, b).total_cost + 1e-12


def test_matches_oracle_small():
    rng = np.random.default_rng(1)
    for _ in range(15):
        grid = GridSpec(*(int(v) for v in rng.integers(1, 4, 2)))
        counts = rng.integers(0, 4, size=(grid.n_cells, 6, 6)) * (rng.random((grid.n_cells, 6, 6)) < 0.3)
        k_t = float(rng.uniform(0, 5))
        s = (grid.cells[rng.integers(grid.n_cells)], int(rng.integers(1, 7)))
        t = (grid.cells[rng.integers(grid.n_cells)], int(rng.integers(1, 7)))
        r = shortest_path(build_graph(grid, TrafficPatternMap(grid, counts), k_t), EdgeNode(*s), EdgeNode(*t))
        assert r.total_cost == exhaustive_min_cost(adjacency(grid, counts, k_t), s, t)


def test_tie_break_prefers_fewer_hops_then_lexicographic():
    # empty history on a symmetric grid gives many equal-cost routes
    grid = GridSpec(2, 2)
    counts = np.zeros((grid.n_cells, 6, 6), dtype=np.int64)
    adj = adjacency(grid, counts, 0.0)
    g = build_graph(grid)
    ties = 0
    # these pairs have two exactly equal six-waypoint routes each
    pairs = [(((0, 0), 3), ((1, 1), 6)), (((0, 0), 4), ((1, 1), 1)),
             (((1, 1), 2), ((0, 0), 5)), (((1, 1), 3), ((0, 0), 6))]
    for s, t in pairs:
        best, paths = all_min_paths(adj, s, t)
        ties += len(paths) > 1
        want = min(paths, key=lambda p: (len(p), p))
        r = shortest_path(g, EdgeNode(*s), EdgeNode(*t))
        assert r.total_cost == best
        assert [tuple(n) for n in r.waypoints] == want
    assert ties == len(pairs)


def test_coincident_nodes_collapse():
    # routing into either copy of a shared edge costs the same
    grid = GridSpec(3, 3)
    rng = np.random.default_rng(4)
    tm = TrafficPatternMap(grid, rng.integers(0, 3, size=(grid.n_cells, 6, 6)))
    g = build_graph(grid, tm, 1.5)
    s = EdgeNode((0, 0), 4)
    for c in grid.cells:
        for e in range(1, 7):
            nb = neighbor_across(grid, c, e)
            if nb is None:
                continue
            assert shortest_path(g, s, EdgeNode(c, e)).total_cost == shortest_path(g, s, EdgeNode(*nb)).total_cost


def test_replan_and_corridor_attraction():
    grid = GridSpec(6, 6)
    tm = TrafficPatternMap(grid)
    start, goal = EdgeNode((0, 0), 4), EdgeNode((2, 5), 1)
    base = replan(grid, tm, 3.0, 1e-3, start, goal)
    assert replan(grid, tm, 3.0, 1e-3, start, goal) == base
    # a corridor up the west side: straight north-east crossings
    corridor = [(0, r) if r % 2 == 0 else (0, r) for r in range(6)]
    for c in corridor:
        for _ in range(4):
            tm.record_traversal(c, 5, 2)
    follow = replan(grid, tm, 3.0, 1e-3, start, goal)
    assert set(follow.cells()) & set(corridor) - set(base.cells())
    assert replan(grid, tm, 0.0, 1e-3, start, goal).waypoints == replan(grid, TrafficPatternMap(grid), 0.0, 1e-3, start, goal).waypoints


def test_nearest_edge():
    grid = GridSpec(3, 3)
    cx, cy = grid.center((1, 1))
    assert nearest_edge(grid, (1, 1), (cx + 1.0, cy)) == 1
    assert nearest_edge(grid, (1, 1), (cx - 1.0, cy)) == 4
    assert nearest_edge(grid, (1, 1), (cx - 0.5, cy - 0.8)) == 5
