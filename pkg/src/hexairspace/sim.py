"""Discrete-time world of staggered aircraft replanning over the hex grid.

One call to :func:`step` does, in fleet order:

1. activate pending aircraft whose entry time has come (plan from the edge
   of the origin cell nearest the origin point);
2. for every aircraft that crossed a cell boundary in the previous step,
   replan from the new entry edge against the traffic map as it stood at the
   start of this step, then record the completed traversal;
3. advance all active aircraft with the compiled fleet kernel: waypoint
   bookkeeping, repulsion, bounded heading update, motion, cell tracking and
   arrival.

Repulsion deviations also accumulate into a per-aircraft avoidance offset
that the path follower honours, so the planner does not undo them on the
next step.  The offset holds while some intruder is closing, relaxes with
``avoidance_relax_s`` otherwise, and never exceeds ``max_offset``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._jit import njit
from .conflict import RepulsionParams, repulsion_deviation
from .cost_model import DEFAULT_EPSILON, cell_costs
from .entropy_metrics import GridEntropy, grid_entropy
from .hexgrid import CellIndex, GridSpec, Point2D, locate_xy
from .router import _structure, dijkstra, nearest_edge
from .traffic_map import TrafficPatternMap

log = logging.getLogger(__name__)

PENDING, ACTIVE, ARRIVED = 0, 1, 2
STATUS_NAMES = ("pending", "active", "arrived")
MPH = 1.0 / 3600.0


@dataclass(frozen=True)
class SimParams:
    dt: float = 1.0
    k_t: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    repulsion: RepulsionParams = field(default_factory=RepulsionParams)
    max_turn: float = math.radians(12.0)  # rad/s
    arrival_radius: float = 0.5
    waypoint_radius: float = 0.25
    avoidance_relax_s: float = 30.0
    max_offset: float = math.radians(45.0)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.k_t < 0:
            raise ValueError("k_t must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if min(self.max_turn, self.arrival_radius, self.waypoint_radius, self.avoidance_relax_s) <= 0:
            raise ValueError("turn rate, radii and relaxation time must be positive")
        if not 0 <= self.max_offset <= math.pi:
            raise ValueError("max_offset must lie in [0, pi]")


@dataclass(frozen=True)
class FlightPlan:
    origin: Point2D
    destination: Point2D
    entry_time: float
    speed: float = 250.0 * MPH  # miles per second
    k_t: Optional[float] = None  # overrides the world-wide traffic-following factor


@dataclass
class AircraftState:
    id: int
    position: Point2D
    heading: float
    speed: float
    origin: Point2D
    destination: Point2D
    entry_time: float
    current_cell: Optional[CellIndex]
    entry_edge: Optional[int]
    route: list
    cumulative_heading_change: float
    status: str


@dataclass
class RunMetrics:
    travel_times: dict[int, float]
    entropy_timeline: list[tuple[float, float]]
    final_entropy: GridEntropy
    min_separation: float
    stragglers: list[int]
    anomalies: int
    clock: float

    @property
    def mean_travel_time(self) -> float:
        if not self.travel_times:
            return math.nan
        return float(np.mean([self.travel_times[k] for k in sorted(self.travel_times)]))


class World:
    """Grid, traffic map, fleet arrays and clock of one simulation."""

    def __init__(self, grid: GridSpec, flights: list[FlightPlan], params: SimParams = SimParams()):
        self.grid = grid
        self.params = params
        self.traffic = TrafficPatternMap(grid)
        self.flights = list(flights)
        self.clock = 0.0
        n = len(self.flights)
        self.n = n

        self.status = np.zeros(n, dtype=np.int8)
        self.x = np.array([f.origin[0] for f in self.flights], dtype=np.float64)
        self.y = np.array([f.origin[1] for f in self.flights], dtype=np.float64)
        self.heading = np.zeros(n)
        self.speed = np.array([f.speed for f in self.flights], dtype=np.float64)
        self.offset = np.zeros(n)
        self.cum_turn = np.zeros(n)
        self.cell = np.full(n, -1, dtype=np.int64)
        self.crossed_from = np.full(n, -1, dtype=np.int64)
        self.entry_edge = np.zeros(n, dtype=np.int64)
        self.dest_x = np.array([f.destination[0] for f in self.flights], dtype=np.float64)
        self.dest_y = np.array([f.destination[1] for f in self.flights], dtype=np.float64)
        self.goal_node = np.full(n, -1, dtype=np.int64)
        self.arrival_time = np.full(n, math.nan)
        self.entry_times = np.array([f.entry_time for f in self.flights], dtype=np.float64)
        self.k_t = np.array([params.k_t if f.k_t is None else f.k_t for f in self.flights], dtype=np.float64)
        if (self.k_t < 0).any():
            raise ValueError("k_t must be non-negative")

        max_targets = grid.n_cells + 2
        self.targets = np.zeros((n, max_targets, 2))
        self.n_targets = np.zeros(n, dtype=np.int64)
        self.target_idx = np.zeros(n, dtype=np.int64)
        self.routes: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * n
        self.cell_entries = np.zeros(n, dtype=np.int64)
        self.cell_history: list[list[int]] = [[] for _ in range(n)]

        self.min_separation = math.inf
        self.anomalies = 0
        self.replans = 0
        self.entropy_timeline: list[tuple[float, float]] = [(0.0, 0.0)]
        self._graph_cache: dict[float, np.ndarray] = {}
        self._graph_version = -1
        self._indptr, self._indices, self._cost_index = _structure(grid)

        for i, f in enumerate(self.flights):
            for label, p in (("origin", f.origin), ("destination", f.destination)):
                if self._locate(p[0], p[1]) < 0:
                    raise ValueError(f"aircraft {i}: {label} {tuple(p)} is outside the grid")
            if f.speed <= 0:
                raise ValueError(f"aircraft {i}: speed must be positive")

    # -- helpers ------------------------------------------------------------
    def _locate(self, x, y) -> int:
        g = self.grid
        return int(locate_xy(float(x), float(y), g.cell_width, g.id_lookup, g.q_min))

    def _weights(self, k_t: float) -> np.ndarray:
        if self._graph_version != self.traffic.version:
            self._graph_cache.clear()
            self._graph_version = self.traffic.version
        w = self._graph_cache.get(k_t)
        if w is None:
            costs = cell_costs(self.grid, self.traffic.counts, k_t, self.params.epsilon)
            flat = costs.reshape(-1)
            w = np.where(self._cost_index >= 0, flat[np.maximum(self._cost_index, 0)], 0.0)
            self._graph_cache[k_t] = w
        return w

    def _path_cost(self, weights: np.ndarray, path: np.ndarray) -> float:
        total = 0.0
        for u, v in zip(path[:-1], path[1:]):
            lo, hi = self._indptr[u], self._indptr[u + 1]
            total += weights[lo + np.searchsorted(self._indices[lo:hi], v)]
        return total

    def _plan(self, i: int, start_node: int) -> None:
        weights = self._weights(float(self.k_t[i]))
        cost, path = dijkstra(self._indptr, self._indices, weights, start_node, int(self.goal_node[i]))
        if not math.isfinite(cost):
            raise RuntimeError(f"aircraft {i}: destination unreachable")
        self.replans += 1
        # stay on the current route while it is still optimal; equal-cost
        # alternatives differ only by rounding and would make the aircraft
        # zigzag between them
        old = self.routes[i]
        hit = np.nonzero(old == start_node)[0]
        if len(hit):
            rest = old[hit[0]:]
            if self._path_cost(weights, rest) <= cost + 1e-9 * max(1.0, cost):
                path = rest
        self.routes[i] = path
        mids = self.grid.edge_midpoints
        k = 0
        for a, b in zip(path[:-1], path[1:]):
            if a // 6 != b // 6:
                self.targets[i, k] = mids[a // 6, a % 6]
                k += 1
        self.targets[i, k] = (self.dest_x[i], self.dest_y[i])
        self.n_targets[i] = k + 1
        self.target_idx[i] = 0

    def _activate(self, i: int) -> None:
        g = self.grid
        cid = self._locate(self.x[i], self.y[i])
        self.cell[i] = cid
        self.cell_history[i].append(cid)
        self.cell_entries[i] += 1
        dcell = self._locate(self.dest_x[i], self.dest_y[i])
        self.goal_node[i] = dcell * 6 + nearest_edge(g, g.cells[dcell], (self.dest_x[i], self.dest_y[i])) - 1
        start = cid * 6 + nearest_edge(g, g.cells[cid], (self.x[i], self.y[i])) - 1
        self._plan(i, start)
        tx, ty = self.targets[i, 0]
        self.heading[i] = math.atan2(tx - self.x[i], ty - self.y[i])
        self.status[i] = ACTIVE

    def _shared_edge(self, a: int, b: int) -> int:
        row = self.grid.neighbor_table[a]
        hits = np.nonzero(row == b)[0]
        if len(hits) != 1:
            raise RuntimeError(f"non-adjacent cell jump {self.grid.cells[a]} -> {self.grid.cells[b]}")
        return int(hits[0]) + 1

    def _handle_crossings(self, replan: bool = True) -> None:
        movers = np.nonzero(self.crossed_from >= 0)[0]
        if len(movers) == 0:
            return
        records = []
        for i in movers:
            a = int(self.crossed_from[i])
            b = int(self.cell[i])
            exit_edge = self._shared_edge(a, b)
            if self.entry_edge[i]:
                records.append((a, int(self.entry_edge[i]), exit_edge))
            self.entry_edge[i] = (exit_edge + 2) % 6 + 1
            self.crossed_from[i] = -1
            self.cell_entries[i] += 1
            self.cell_history[i].append(b)
            if replan and self.status[i] == ACTIVE:
                self._plan(i, b * 6 + int(self.entry_edge[i]) - 1)
        # replans above saw the start-of-step map; now publish the traversals
        for cid, entry, exit_edge in records:
            self.traffic.record_by_id(cid, entry, exit_edge)
        if records:
            self.entropy_timeline.append((self.clock, grid_entropy(self.traffic).value))

    # -- public -------------------------------------------------------------
    def counts_by_status(self) -> dict[str, int]:
        return {name: int((self.status == code).sum()) for code, name in enumerate(STATUS_NAMES)}

    def aircraft_state(self, i: int) -> AircraftState:
        g = self.grid
        f = self.flights[i]
        return AircraftState(
            id=i,
            position=Point2D(float(self.x[i]), float(self.y[i])),
            heading=float(self.heading[i]),
            speed=float(self.speed[i]),
            origin=f.origin,
            destination=f.destination,
            entry_time=f.entry_time,
            current_cell=g.cells[self.cell[i]] if self.cell[i] >= 0 else None,
            entry_edge=int(self.entry_edge[i]) or None,
            route=[(g.cells[n // 6], n % 6 + 1) for n in self.routes[i]],
            cumulative_heading_change=float(self.cum_turn[i]),
            status=STATUS_NAMES[self.status[i]],
        )

    @property
    def aircraft(self) -> list[AircraftState]:
        return [self.aircraft_state(i) for i in range(self.n)]

    def cell_sequence(self, i: int) -> list[CellIndex]:
        return [self.grid.cells[c] for c in self.cell_history[i]]

    def default_max_time(self) -> float:
        g = self.grid
        cx, cy = g.centers[:, 0], g.centers[:, 1]
        diag = math.hypot(cx.max() - cx.min() + g.cell_width, cy.max() - cy.min() + g.cell_width)
        if self.n == 0:
            return 0.0
        return 4.0 * diag / float(self.speed.min()) + float(self.entry_times.max()) + 40.0


def step(world: World, trace=None) -> World:
    """Advance ``world`` by one time step in place and return it."""
    p = world.params
    dt = p.dt
    for i in np.nonzero((world.status == PENDING) & (world.entry_times <= world.clock))[0]:
        world._activate(int(i))
    world._handle_crossings()
    was_active = world.status == ACTIVE
    rp = p.repulsion
    anomalies, min_sep = _advance_fleet(
        world.status, world.x, world.y, world.heading, world.speed, world.offset, world.cum_turn,
        world.cell, world.crossed_from, world.targets, world.n_targets, world.target_idx,
        world.dest_x, world.dest_y, world.arrival_time, world.clock, dt,
        rp.k_r, rp.k_rdot, rp.activation_radius, p.max_turn, p.arrival_radius, p.waypoint_radius,
        math.exp(-dt / p.avoidance_relax_s), p.max_offset,
        world.grid.cell_width, world.grid.id_lookup, world.grid.q_min,
    )
    if anomalies:
        log.warning("t=%.0f s: %d aircraft tried to leave the grid", world.clock, anomalies)
        world.anomalies += anomalies
    world.min_separation = min(world.min_separation, min_sep)
    world.clock += dt
    if trace is not None:
        trace.write_states(world, np.nonzero(was_active)[0])
    return world


def run(world: World, max_time: Optional[float] = None, trace=None) -> RunMetrics:
    """Step until every aircraft has arrived or ``max_time`` is reached."""
    if max_time is None:
        max_time = world.default_max_time()
    while world.clock < max_time and (world.status != ARRIVED).any():
        step(world, trace)
    # traversals completed on the final step still count
    world._handle_crossings(replan=False)
    stragglers = [int(i) for i in np.nonzero(world.status != ARRIVED)[0]]
    if stragglers:
        log.warning("max_time %.0f s reached with %d aircraft not arrived", max_time, len(stragglers))
    travel = {
        i: float(world.arrival_time[i] - world.entry_times[i])
        for i in range(world.n)
        if world.status[i] == ARRIVED
    }
    return RunMetrics(
        travel_times=travel,
        entropy_timeline=list(world.entropy_timeline),
        final_entropy=grid_entropy(world.traffic),
        min_separation=world.min_separation,
        stragglers=stragglers,
        anomalies=world.anomalies,
        clock=world.clock,
    )


@njit
def _wrap(a):
    return math.atan2(math.sin(a), math.cos(a))


@njit
def _advance_fleet(
    status, xs, ys, heading, speed, offset, cum_turn, cell, crossed_from,
    targets, n_targets, target_idx, dest_x, dest_y, arrival_time, clock, dt,
    k_r, k_rdot, radius, max_turn, arrival_radius, waypoint_radius, relax, max_offset,
    w, lookup, q_min,
):
    n = len(xs)
    vxs = np.empty(n)
    vys = np.empty(n)
    active = np.empty(n, dtype=np.bool_)
    moved = np.empty(n, dtype=np.bool_)
    for i in range(n):
        vxs[i] = speed[i] * math.sin(heading[i])
        vys[i] = speed[i] * math.cos(heading[i])
        active[i] = status[i] == 1
        moved[i] = active[i]
    lim = max_turn * dt
    turn_radius = speed / max_turn
    anomalies = 0
    for i in range(n):
        if status[i] != 1:
            continue
        x = xs[i]
        y = ys[i]
        while target_idx[i] < n_targets[i] - 1:
            k = target_idx[i]
            if math.hypot(targets[i, k, 0] - x, targets[i, k, 1] - y) <= waypoint_radius:
                target_idx[i] = k + 1
            else:
                break
        k = target_idx[i]
        tdx = targets[i, k, 0] - x
        tdy = targets[i, k, 1] - y
        desired = math.atan2(tdx, tdy)
        dev, closing = repulsion_deviation(i, xs, ys, vxs, vys, heading, active, k_r, k_rdot, radius, dt, max_turn)
        turn = _wrap(desired + offset[i] - heading[i])
        # a target inside the turning circle cannot be reached by turning
        # towards it; hold heading, and keep holding while it is aft, until
        # it lies clear of both circles
        tdist = math.hypot(tdx, tdy)
        if tdist < 2.0 * turn_radius[i] * abs(math.sin(turn)) or (
            abs(turn) > 0.5 * math.pi and tdist < 2.2 * turn_radius[i]
        ):
            turn = 0.0
        elif turn > lim:
            turn = lim
        elif turn < -lim:
            turn = -lim
        heading[i] = _wrap(heading[i] + turn + dev)
        cum_turn[i] += abs(turn + dev)
        if closing:
            offset[i] += dev
        else:
            offset[i] = offset[i] * relax + dev
        if offset[i] > max_offset:
            offset[i] = max_offset
        elif offset[i] < -max_offset:
            offset[i] = -max_offset
        nx = x + speed[i] * math.sin(heading[i]) * dt
        ny = y + speed[i] * math.cos(heading[i]) * dt
        c = locate_xy(nx, ny, w, lookup, q_min)
        if c < 0:
            heading[i] = _wrap(heading[i] + math.pi)
            anomalies += 1
        else:
            xs[i] = nx
            ys[i] = ny
            if c != cell[i]:
                crossed_from[i] = cell[i]
                cell[i] = c
        vxs[i] = speed[i] * math.sin(heading[i])
        vys[i] = speed[i] * math.cos(heading[i])
        if math.hypot(dest_x[i] - xs[i], dest_y[i] - ys[i]) <= arrival_radius:
            status[i] = 2
            active[i] = False
            arrival_time[i] = clock + dt
    min_sep = np.inf
    for i in range(n):
        if not moved[i]:
            continue
        for j in range(i + 1, n):
            if moved[j]:
                d = math.hypot(xs[i] - xs[j], ys[i] - ys[j])
                if d < min_sep:
                    min_sep = d
    return anomalies, min_sep
