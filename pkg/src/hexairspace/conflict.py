"""Pairwise repulsion between aircraft, turned into a heading deviation.

Headings are aviation-style: radians clockwise from north, so a positive
deviation is a right turn.  Positions are in miles, velocities in miles per
second.  Each intruder within the activation radius pushes the ownship to
turn away from its bearing; an intruder exactly ahead (or astern) pushes to
the right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import NUMBA_ENABLED, njit


@dataclass(frozen=True)
class RepulsionParams:
    k_r: float = 0.01
    k_rdot: float = 0.01
    activation_radius: float = 10.0

    def __post_init__(self):
        if min(self.k_r, self.k_rdot, self.activation_radius) < 0:
            raise ValueError("repulsion gains and radius must be non-negative")


class CoincidentAircraftError(ValueError):
    pass


def repulsion_magnitude(r_mn, rdot_mn, p: RepulsionParams) -> float:
    """Repulsion on the ownship from one intruder.

    ``r_mn`` points from the intruder to the ownship and ``rdot_mn`` is the
    ownship velocity minus the intruder velocity.  Only the closing part of
    the range rate contributes.
    """
    rx, ry = float(r_mn[0]), float(r_mn[1])
    dist = math.hypot(rx, ry)
    if dist == 0.0:
        raise CoincidentAircraftError("ownship and intruder occupy the same position")
    if dist > p.activation_radius:
        return 0.0
    closing = -(float(rdot_mn[0]) * rx + float(rdot_mn[1]) * ry) / dist
    return p.k_r / dist**2 + p.k_rdot * max(0.0, closing)


def heading_vector(heading: float) -> tuple[float, float]:
    return math.sin(heading), math.cos(heading)


if NUMBA_ENABLED:

    @njit
    def repulsion_deviation(m, xs, ys, vxs, vys, headings, active, k_r, k_rdot, radius, dt, max_turn):
        """Clamped heading deviation of aircraft ``m`` and whether any
        intruder inside the radius is closing."""
        hx = math.sin(headings[m])
        hy = math.cos(headings[m])
        total = 0.0
        closing_any = False
        for n in range(len(xs)):
            if n == m or not active[n]:
                continue
            rx = xs[m] - xs[n]
            ry = ys[m] - ys[n]
            dist = math.sqrt(rx * rx + ry * ry)
            if dist == 0.0:
                raise ValueError("ownship and intruder occupy the same position")
            if dist > radius:
                continue
            closing = -((vxs[m] - vxs[n]) * rx + (vys[m] - vys[n]) * ry) / dist
            if closing > 0.0:
                closing_any = True
            else:
                closing = 0.0
            mag = k_r / (dist * dist) + k_rdot * closing
            # intruder bearing relative to heading: cross > 0 means on the left
            cross = hx * (-ry) - hy * (-rx)
            if cross >= 0.0:
                total += mag
            else:
                total -= mag
        dev = total * dt
        lim = max_turn * dt
        if dev > lim:
            dev = lim
        elif dev < -lim:
            dev = -lim
        return dev, closing_any

else:

    def repulsion_deviation(m, xs, ys, vxs, vys, headings, active, k_r, k_rdot, radius, dt, max_turn):
        """Clamped heading deviation of aircraft ``m`` and whether any
        intruder inside the radius is closing."""
        mask = np.asarray(active, dtype=bool).copy()
        mask[m] = False
        rx = xs[m] - xs[mask]
        ry = ys[m] - ys[mask]
        dist = np.sqrt(rx * rx + ry * ry)
        if (dist == 0.0).any():
            raise ValueError("ownship and intruder occupy the same position")
        near = dist <= radius
        rx, ry, dist = rx[near], ry[near], dist[near]
        closing = -((vxs[m] - vxs[mask][near]) * rx + (vys[m] - vys[mask][near]) * ry) / dist
        closing_any = bool((closing > 0.0).any())
        mag = k_r / (dist * dist) + k_rdot * np.maximum(closing, 0.0)
        cross = math.sin(headings[m]) * (-ry) - math.cos(headings[m]) * (-rx)
        total = float(np.where(cross >= 0.0, mag, -mag).sum())
        lim = max_turn * dt
        return min(max(total * dt, -lim), lim), closing_any


def total_heading_deviation(own, others, p: RepulsionParams, dt: float, max_turn: float) -> float:
    """Signed heading deviation (radians, positive right) for ``own``.

    ``own`` and ``others`` need ``position``, ``heading`` and ``speed``
    attributes.  The result is clamped to ``max_turn * dt``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    fleet = [own, *others]
    xs = np.array([a.position[0] for a in fleet], dtype=np.float64)
    ys = np.array([a.position[1] for a in fleet], dtype=np.float64)
    hs = np.array([a.heading for a in fleet], dtype=np.float64)
    sp = np.array([a.speed for a in fleet], dtype=np.float64)
    active = np.ones(len(fleet), dtype=np.bool_)
    try:
        dev, _ = repulsion_deviation(
            0, xs, ys, sp * np.sin(hs), sp * np.cos(hs), hs, active,
            p.k_r, p.k_rdot, p.activation_radius, dt, max_turn,
        )
    except ValueError as exc:
        raise CoincidentAircraftError(str(exc)) from None
    return float(dev)
