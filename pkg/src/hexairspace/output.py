"""File formats: trajectory traces, traffic-map dumps and sweep tables.

Every floating-point field is written with ``%.6g`` (six significant
digits); NaN is written as ``nan``.  Trace files are plain CSV lines whose
first field names the record type::

    state,clock,id,x,y,heading,q,r,status
    traffic,q,r,i,j,count

``heading`` is in degrees clockwise from north; ``x``/``y`` are miles;
``q``/``r`` is the aircraft's current cell (empty while pending).  Traffic
records list the non-zero traffic-matrix entries at the end of a run, sorted
by ``(q, r, i, j)``.  Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .hexgrid import GridSpec
from .sim import STATUS_NAMES
from .traffic_map import TrafficPatternMap

STATE_FIELDS = ("clock", "id", "x", "y", "heading", "q", "r", "status")
TRAFFIC_FIELDS = ("q", "r", "i", "j", "count")


def fmt(v) -> str:
    """Six-significant-digit text for floats, plain text for everything else."""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return "%.6g" % v
    return str(v)


class TraceWriter:
    """Streams state and traffic records to an open text file."""

    def __init__(self, fh: TextIO, header: bool = True):
        self.fh = fh
        if header:
            fh.write("# state," + ",".join(STATE_FIELDS) + "\n")
            fh.write("# traffic," + ",".join(TRAFFIC_FIELDS) + "\n")

    def write_states(self, world, idx: Iterable[int]) -> None:
        cells = world.grid.cells
        lines = []
        for i in idx:
            i = int(i)
            cid = int(world.cell[i])
            q, r = ("", "") if cid < 0 else cells[cid]
            heading = math.degrees(float(world.heading[i])) % 360.0
            fields = (
                float(world.clock), i, float(world.x[i]), float(world.y[i]), heading,
                q, r, STATUS_NAMES[int(world.status[i])],
            )
            lines.append("state," + ",".join(fmt(f) for f in fields) + "\n")
        self.fh.writelines(lines)

    def write_traffic(self, tmap: TrafficPatternMap) -> None:
        for (q, r), i, j, count in tmap.nonzero():
            self.fh.write(f"traffic,{q},{r},{i},{j},{count}\n")


def read_traffic(path, grid: GridSpec) -> TrafficPatternMap:
    """Traffic map from the ``traffic`` records of a trace or dump file."""
    triples = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#") or not line.startswith("traffic,"):
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: malformed traffic record")
            q, r, i, j, count = (int(p) for p in parts[1:])
            if count < 0:
                raise ValueError(f"{path}:{lineno}: negative count")
            triples.append(((q, r), i, j, count))
    return TrafficPatternMap.from_triples(grid, triples)


def write_rows_csv(rows, fh: TextIO, columns: Iterable[str]) -> None:
    columns = list(columns)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        get = row.get if isinstance(row, dict) else (lambda c, row=row: getattr(row, c))
        w.writerow([fmt(get(c)) for c in columns])


def write_results(rows, path) -> None:
    from .scenario import RESULT_COLUMNS

    with open(Path(path), "w", newline="") as fh:
        write_rows_csv(rows, fh, RESULT_COLUMNS)


def write_summary(summary: list[dict], path) -> None:
    if not summary:
        raise ValueError("empty summary")
    with open(Path(path), "w", newline="") as fh:
        write_rows_csv(summary, fh, summary[0].keys())
