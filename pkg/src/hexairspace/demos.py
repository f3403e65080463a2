"""Two small scripted scenarios: a convoy with an offset ownship, and a
head-on pair inside one hexagon."""
from __future__ import annotations

from dataclasses import dataclass

from .hexgrid import CellIndex, GridSpec, edge_midpoint
from .scenario import ScenarioConfig, run_scenario
from .sim import RunMetrics, World

# inward nudge so an entry point lies strictly inside its cell
_ENTRY_INSET = 0.05


def _cell(grid: GridSpec, col: int, row: int) -> CellIndex:
    return CellIndex(col - row // 2, row)


@dataclass
class ConvoyResult:
    world: World
    metrics: RunMetrics
    corridor: set
    corridor_interior: set
    ownship_cells: set

    @property
    def overlap(self) -> set:
        return self.ownship_cells & self.corridor_interior

    @property
    def overlap_fraction(self) -> float:
        if not self.corridor_interior:
            return 0.0
        return len(self.overlap) / len(self.corridor_interior)


def convoy_config(ownship_k_t: float, grid: GridSpec = GridSpec(), convoy_size: int = 4,
                  offset_cells: int = 3, stagger_s: float = 40.0,
                  ownship_entry_s: float = 720.0, **overrides) -> ScenarioConfig:
    """Convoy from the bottom-left cell to the top-right cell, all at k_t = 0,
    followed by an ownship whose origin and destination are shifted
    ``offset_cells`` columns east and rows south of the convoy's.

    The ownship enters once the convoy has crossed the grid (about 710 s on
    the default grid), so its whole corridor is already on the traffic map.
    """
    w, h = grid.width_cells, grid.height_cells
    if min(w, h) <= offset_cells + 1:
        raise ValueError("grid too small for the requested offset")
    origin = grid.center(_cell(grid, 0, 0))
    dest = grid.center(_cell(grid, w - 1, h - 1))
    flights = [(origin, dest, k * stagger_s, 0.0) for k in range(convoy_size)]
    own_origin = grid.center(_cell(grid, offset_cells, 0))
    own_dest = grid.center(_cell(grid, w - 1, h - 1 - offset_cells))
    flights.append((own_origin, own_dest, ownship_entry_s, float(ownship_k_t)))
    return ScenarioConfig(grid=grid, od_mode="fixed-list", n_aircraft=len(flights),
                          flights=tuple(flights), **overrides)


def run_convoy(ownship_k_t: float, trace=None, **kwargs) -> ConvoyResult:
    cfg = convoy_config(ownship_k_t, **kwargs)
    world, metrics = run_scenario(cfg, trace=trace)
    own = world.n - 1
    corridor = set()
    endpoints = set()
    for i in range(own):
        seq = world.cell_sequence(i)
        corridor.update(seq)
        endpoints.update((seq[0], seq[-1]))
    return ConvoyResult(world, metrics, corridor, corridor - endpoints, set(world.cell_sequence(own)))


def headon_config(grid: GridSpec = GridSpec(3, 3), **overrides) -> ScenarioConfig:
    """Two aircraft entering the east and west edges of the centre cell at
    the same time, each bound for the edge the other entered through."""
    centre = _cell(grid, grid.width_cells // 2, grid.height_cells // 2)
    east = edge_midpoint(grid, centre, 1)
    west = edge_midpoint(grid, centre, 4)
    east_in = (east.x - _ENTRY_INSET, east.y)
    west_in = (west.x + _ENTRY_INSET, west.y)
    flights = ((east_in, west, 0.0, None), (west_in, east, 0.0, None))
    return ScenarioConfig(grid=grid, od_mode="fixed-list", n_aircraft=2, flights=flights, **overrides)


def run_headon(trace=None, **kwargs) -> tuple[World, RunMetrics]:
    return run_scenario(headon_config(**kwargs), trace=trace)
