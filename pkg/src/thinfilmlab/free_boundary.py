"""Discrete support detection and waiting-time measurement.

Support is thresholded relative to the profile maximum (refinement
stable, and immune to precursor films and positive dust in dry regions).
The waiting time at x0 is the first recorded instant at which x0 joins
the support (x0 initially outside) or at which a full margin around x0
is wetted (x0 initially on the free boundary).  The continuous-time
essential infimum is replaced by first crossing over recorded instants,
reported with its bracketing record times.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import GridError, Profile
from .solver import TimeSeries

__all__ = [
    "SupportInterval",
    "WaitingTimeEstimate",
    "support_interval",
    "waiting_time",
    "interface_positions",
    "write_interface_csv",
]

# must clear the default precursor film (1e-6 of max) with head room
DEFAULT_THETA_REL = 1e-4


@dataclass(frozen=True)
class SupportInterval:
    left: float
    right: float
    empty: bool = False

    def __post_init__(self):
        if not self.empty and self.left > self.right:
            raise ValueError("nonempty support needs left <= right")

    def contains(self, x: float) -> bool:
        return (not self.empty) and self.left <= x <= self.right

    def distance(self, x: float) -> float:
        if self.empty:
            return math.inf
        if x < self.left:
            return self.left - x
        if x > self.right:
            return x - self.right
        return 0.0


@dataclass(frozen=True)
class WaitingTimeEstimate:
    x0: float
    t_star: float  # inf when censored
    mode: str  # outside_support | on_boundary
    theta_used: float
    margin_used: float
    censored: bool
    t_prev: float  # last recorded time before the hit (nan if hit at t=0)
    t_end: float

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "t_star": None if math.isinf(self.t_star) else self.t_star,
            "mode": self.mode,
            "theta_used": self.theta_used,
            "margin_used": self.margin_used,
            "censored": self.censored,
            "t_prev": None if math.isnan(self.t_prev) else self.t_prev,
            "t_end": self.t_end,
        }

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def _support_of_values(x: np.ndarray, values: np.ndarray, theta_rel: float) -> SupportInterval:
    vmax = float(np.max(values))
    if vmax <= 0.0:
        return SupportInterval(left=math.nan, right=math.nan, empty=True)
    idx = np.flatnonzero(values > theta_rel * vmax)
    if idx.size == 0:
        return SupportInterval(left=math.nan, right=math.nan, empty=True)
    return SupportInterval(left=float(x[idx[0]]), right=float(x[idx[-1]]))


def support_interval(p: Profile, theta_rel: float = DEFAULT_THETA_REL) -> SupportInterval:
    """Smallest interval containing all nodes with u > theta_rel * max(u)."""
    if not 0.0 < theta_rel < 1.0:
        raise ValueError(f"theta_rel must lie in (0, 1), got {theta_rel}")
    return _support_of_values(p.grid.nodes, p.values, theta_rel)


def waiting_time(
    series: TimeSeries,
    x0: float,
    theta_rel: float = DEFAULT_THETA_REL,
    margin: Optional[float] = None,
    grid=None,
) -> WaitingTimeEstimate:
    """First recorded time at which the support reaches (or engulfs) x0.

    The detection mode is chosen from the initial record: outside_support
    when x0 sits farther than the margin from the initial support, else
    on_boundary, which requires every node of [x0 - margin, x0 + margin]
    to exceed the threshold.  Censored runs report t_star = inf.
    """
    if not series.records:
        raise ValueError("empty time series")
    if not 0.0 < theta_rel < 1.0:
        raise ValueError(f"theta_rel must lie in (0, 1), got {theta_rel}")
    rec0 = series.records[0]
    if grid is None:
        grid = series.grid
    if grid is None:
        raise ValueError("waiting_time needs the run's grid")
    x = grid.nodes
    h = grid.h
    if margin is None:
        margin = 4.0 * h
    if margin < 2.0 * h:
        raise GridError(f"margin {margin:g} under-resolved (need >= 2h = {2*h:g})")
    if not grid.contains(x0):
        raise GridError(f"x0 = {x0:g} outside grid")

    supp0 = _support_of_values(x, rec0.values, theta_rel)
    mode = "outside_support" if supp0.distance(x0) > margin else "on_boundary"
    window = (x >= x0 - margin) & (x <= x0 + margin)

    def hit(values: np.ndarray) -> bool:
        if mode == "outside_support":
            return _support_of_values(x, values, theta_rel).contains(x0)
        vmax = float(np.max(values))
        if vmax <= 0.0:
            return False
        return bool(np.all(values[window] > theta_rel * vmax))

    t_prev = math.nan
    for rec in series.records:
        if hit(rec.values):
            return WaitingTimeEstimate(
                x0=x0,
                t_star=rec.t,
                mode=mode,
                theta_used=theta_rel,
                margin_used=margin,
                censored=False,
                t_prev=t_prev,
                t_end=series.records[-1].t,
            )
        t_prev = rec.t
    return WaitingTimeEstimate(
        x0=x0,
        t_star=math.inf,
        mode=mode,
        theta_used=theta_rel,
        margin_used=margin,
        censored=True,
        t_prev=t_prev,
        t_end=series.records[-1].t,
    )


def interface_positions(series: TimeSeries, grid=None, theta_rel: float = DEFAULT_THETA_REL):
    """(t, left, right) per record; nan for empty support."""
    grid = grid or series.grid
    rows = []
    for rec in series.records:
        s = _support_of_values(grid.nodes, rec.values, theta_rel)
        rows.append((rec.t, s.left, s.right))
    return rows


def write_interface_csv(series: TimeSeries, path, grid=None, theta_rel: float = DEFAULT_THETA_REL) -> None:
    with open(path, "w") as f:
        f.write("t,left,right\n")
        for t, left, right in interface_positions(series, grid, theta_rel):
            f.write(f"{t:.17g},{left:.17g},{right:.17g}\n")
