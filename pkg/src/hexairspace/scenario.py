"""Scenario generation, configuration files and seeded parameter sweeps."""
from __future__ import annotations

import dataclasses
import itertools
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conflict import RepulsionParams
from .hexgrid import SQRT3, GridSpec, Point2D
from .sim import MPH, FlightPlan, RunMetrics, SimParams, World, run

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

OD_MODES = ("opposite-sides", "fixed-list")
# endpoints are drawn inside the cell shrunk by this factor, away from its edges
ENDPOINT_SHRINK = 0.6


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    n_aircraft: int = 10
    k_t: float = 0.0
    k_r: float = 0.01
    k_rdot: float = 0.01
    activation_radius: float = 10.0
    speed_mph: float = 250.0
    dt: float = 1.0
    stagger_s: float = 40.0
    seed: int = 0
    epsilon_clamp: float = 1e-3
    max_turn_deg_s: float = 12.0
    arrival_radius: float = 0.5
    waypoint_radius: float = 0.25
    avoidance_relax_s: float = 30.0
    max_offset_deg: float = 45.0
    od_mode: str = "opposite-sides"
    max_time: Optional[float] = None
    # fixed-list mode: (origin, destination, entry_time, k_t or None)
    flights: tuple = ()

    def __post_init__(self):
        if self.od_mode not in OD_MODES:
            raise ConfigError(f"od_mode must be one of {OD_MODES}, got {self.od_mode!r}")
        if int(self.n_aircraft) != self.n_aircraft or self.n_aircraft < 0:
            raise ConfigError("n_aircraft must be a non-negative integer")
        positive = ("activation_radius", "speed_mph", "dt", "stagger_s", "epsilon_clamp",
                    "max_turn_deg_s", "arrival_radius", "waypoint_radius", "avoidance_relax_s")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("k_t", "k_r", "k_rdot"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.max_time is not None and self.max_time <= 0:
            raise ConfigError("max_time must be positive")
        if not 0 <= self.max_offset_deg <= 180:
            raise ConfigError("max_offset_deg must lie in [0, 180]")

    def sim_params(self) -> SimParams:
        return SimParams(
            dt=self.dt,
            k_t=self.k_t,
            epsilon=self.epsilon_clamp,
            repulsion=RepulsionParams(self.k_r, self.k_rdot, self.activation_radius),
            max_turn=math.radians(self.max_turn_deg_s),
            arrival_radius=self.arrival_radius,
            waypoint_radius=self.waypoint_radius,
            avoidance_relax_s=self.avoidance_relax_s,
            max_offset=math.radians(self.max_offset_deg),
        )

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _point_in_cell(rng: np.random.Generator, grid: GridSpec, cell) -> Point2D:
    cx, cy = grid.center(cell)
    half = grid.cell_width / 2.0 * ENDPOINT_SHRINK
    circ = grid.cell_width / SQRT3 * ENDPOINT_SHRINK
    while True:
        dx, dy = rng.uniform(-half, half), rng.uniform(-circ, circ)
        # the other two flat-edge normals of a pointy-top hexagon
        if abs(0.5 * dx + SQRT3 / 2 * dy) <= half and abs(-0.5 * dx + SQRT3 / 2 * dy) <= half:
            return Point2D(cx + dx, cy + dy)


def _edge_column_cell(grid: GridSpec, row: int, right: bool):
    col = grid.width_cells - 1 if right else 0
    return (col - row // 2, row)


def generate_flights(cfg: ScenarioConfig) -> list[FlightPlan]:
    speed = cfg.speed_mph * MPH
    if cfg.od_mode == "fixed-list":
        out = []
        for entry in cfg.flights:
            origin, dest, t0, k_t = entry
            out.append(FlightPlan(Point2D(*origin), Point2D(*dest), float(t0), speed, k_t))
        return out
    grid = cfg.grid
    if grid.width_cells < 3:
        raise ConfigError("opposite-sides scenarios need a grid at least 3 cells wide")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    out = []
    for i in range(cfg.n_aircraft):
        # even aircraft fly west -> east, odd ones east -> west
        eastbound = i % 2 == 0
        o_row = int(rng.integers(grid.height_cells))
        origin = _point_in_cell(rng, grid, _edge_column_cell(grid, o_row, right=not eastbound))
        d_row = int(rng.integers(grid.height_cells))
        dest = _point_in_cell(rng, grid, _edge_column_cell(grid, d_row, right=eastbound))
        out.append(FlightPlan(origin, dest, i * cfg.stagger_s, speed))
    return out


def generate_scenario(cfg: ScenarioConfig) -> World:
    return World(cfg.grid, generate_flights(cfg), cfg.sim_params())


def run_scenario(cfg: ScenarioConfig, trace=None) -> tuple[World, RunMetrics]:
    world = generate_scenario(cfg)
    metrics = run(world, cfg.max_time, trace=trace)
    if trace is not None:
        trace.write_traffic(world.traffic)
    return world, metrics


# -- sweeps -------------------------------------------------------------------

RESULT_COLUMNS = (
    "k_t", "n_aircraft", "seed", "mean_travel_time_s", "grid_entropy_nats",
    "mean_cell_entropy_nats", "active_cells", "min_separation_mi", "stragglers",
)
SUMMARY_METRICS = (
    "mean_travel_time_s", "grid_entropy_nats", "mean_cell_entropy_nats",
    "active_cells", "min_separation_mi", "stragglers",
)


@dataclass(frozen=True)
class SweepResultRow:
    k_t: float
    n_aircraft: int
    seed: int
    mean_travel_time_s: float
    grid_entropy_nats: float
    mean_cell_entropy_nats: float
    active_cells: int
    min_separation_mi: float
    stragglers: int
    error: Optional[str] = None

    @classmethod
    def from_metrics(cls, cfg: ScenarioConfig, m: RunMetrics) -> "SweepResultRow":
        return cls(
            k_t=cfg.k_t,
            n_aircraft=cfg.n_aircraft,
            seed=cfg.seed,
            mean_travel_time_s=m.mean_travel_time,
            grid_entropy_nats=m.final_entropy.value,
            mean_cell_entropy_nats=m.final_entropy.mean_per_active_cell,
            active_cells=m.final_entropy.cells_counted,
            min_separation_mi=m.min_separation,
            stragglers=len(m.stragglers),
        )

    @property
    def key(self):
        return (self.k_t, self.n_aircraft, self.seed)


@dataclass(frozen=True)
class SweepConfig:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    k_t_values: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    n_values: tuple = tuple(range(5, 101, 5))
    seeds: tuple = tuple(range(20))

    def tasks(self) -> list[ScenarioConfig]:
        return [
            self.base.replace(k_t=float(k), n_aircraft=int(n), seed=int(s))
            for k, n, s in itertools.product(self.k_t_values, self.n_values, self.seeds)
        ]


def run_one(cfg: ScenarioConfig) -> SweepResultRow:
    try:
        _, metrics = run_scenario(cfg)
    except Exception as exc:  # one failed run must not abort a sweep
        log.error("run k_t=%g N=%d seed=%d failed: %s", cfg.k_t, cfg.n_aircraft, cfg.seed, exc)
        nan = math.nan
        return SweepResultRow(cfg.k_t, cfg.n_aircraft, cfg.seed, nan, nan, nan, -1, nan, -1,
                              error=f"{type(exc).__name__}: {exc}")
    return SweepResultRow.from_metrics(cfg, metrics)


def run_sweep(sw: SweepConfig, parallelism: int = 1) -> list[SweepResultRow]:
    """One row per (k_t, N, seed), sorted by that key."""
    if parallelism < 1:
        raise ValueError("parallelism must be a positive integer")
    tasks = sw.tasks()
    if parallelism == 1 or len(tasks) <= 1:
        rows = [run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(run_one, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    return sorted(rows, key=lambda r: r.key)


def summarize(rows) -> list[dict]:
    """Mean and population SD of each metric per (k_t, N), failed runs excluded."""
    rows = list(rows)
    if not rows:
        raise ValueError("cannot summarize an empty result set")
    groups: dict[tuple, list[SweepResultRow]] = {}
    for row in rows:
        groups.setdefault((row.k_t, row.n_aircraft), []).append(row)
    out = []
    for (k_t, n), group in sorted(groups.items()):
        ok = [r for r in group if r.error is None]
        entry = {"k_t": k_t, "n_aircraft": n, "runs": len(ok), "failed": len(group) - len(ok)}
        for metric in SUMMARY_METRICS:
            vals = [float(getattr(r, metric)) for r in ok]
            vals = [v for v in vals if math.isfinite(v)]
            entry[f"{metric}_mean"] = statistics.fmean(vals) if vals else math.nan
            entry[f"{metric}_sd"] = statistics.pstdev(vals) if vals else math.nan
        out.append(entry)
    return out


# -- configuration files ------------------------------------------------------

_SECTIONS = {
    "grid": {"width_cells", "height_cells", "cell_width"},
    "scenario": {"n_aircraft", "k_t", "seed", "od_mode", "stagger_s", "speed_mph"},
    "repulsion": {"k_r", "k_rdot", "activation_radius", "max_turn_deg_s", "avoidance_relax_s",
                  "max_offset_deg"},
    "sim": {"dt", "epsilon_clamp", "arrival_radius", "waypoint_radius", "max_time"},
    "sweep": {"k_t_values", "n_values", "seeds", "n_seeds"},
}
_FLIGHT_KEYS = {"origin", "destination", "entry_time", "k_t"}


def parse_config(data: dict) -> tuple[ScenarioConfig, Optional[SweepConfig]]:
    """Build configs from a parsed TOML mapping; unknown keys are errors."""
    unknown = set(data) - set(_SECTIONS) - {"flights"}
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    flat = {}
    for section, allowed in _SECTIONS.items():
        values = data.get(section, {})
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        bad = set(values) - allowed
        if bad:
            raise ConfigError(f"unknown key(s) in [{section}]: {sorted(bad)}")
        if section != "sweep":
            flat.update(values)
    try:
        grid = GridSpec(**{k: flat.pop(k) for k in ("width_cells", "height_cells", "cell_width") if k in flat})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    flights = []
    for k, f in enumerate(data.get("flights", [])):
        bad = set(f) - _FLIGHT_KEYS
        if bad or not {"origin", "destination"} <= set(f):
            raise ConfigError(f"flight {k}: needs origin and destination, unknown keys {sorted(bad)}")
        flights.append((tuple(f["origin"]), tuple(f["destination"]), float(f.get("entry_time", 0.0)), f.get("k_t")))
    if flights:
        flat.setdefault("od_mode", "fixed-list")
        flat["n_aircraft"] = len(flights)
    try:
        base = ScenarioConfig(grid=grid, flights=tuple(flights), **flat)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

    sweep = None
    if "sweep" in data:
        s = data["sweep"]
        if "seeds" in s and "n_seeds" in s:
            raise ConfigError("give either seeds or n_seeds, not both")
        seeds = tuple(s["seeds"]) if "seeds" in s else tuple(range(int(s.get("n_seeds", 20))))
        sweep = SweepConfig(
            base=base,
            k_t_values=tuple(float(k) for k in s.get("k_t_values", SweepConfig.k_t_values)),
            n_values=tuple(int(n) for n in s.get("n_values", SweepConfig.n_values)),
            seeds=tuple(int(x) for x in seeds),
        )
    return base, sweep


def load_config(path) -> tuple[ScenarioConfig, Optional[SweepConfig]]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
