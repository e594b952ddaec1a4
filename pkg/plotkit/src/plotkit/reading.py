"""Readers for the thinfilmlab CSV/JSON contracts.

Each reader validates the documented header before touching the data and
reports missing columns by name.
"""

from __future__ import annotations

import json
import os

import numpy as np


class SchemaError(Exception):
    """An input file does not match its documented schema."""


def _read_csv(path, required: tuple) -> dict:
    """CSV with a header row into a dict of float columns.

    An empty body is allowed (the caller decides what an empty figure
    looks like); a wrong header is not.
    """
    with open(path) as f:
        header = f.readline().strip()
        body = f.readline()
    cols = header.split(",") if header else []
    for name in required:
        if name not in cols:
            raise SchemaError(f"{os.path.basename(path)}: missing column {name!r}")
    if not body.strip():
        return {name: np.empty(0) for name in cols}
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(cols):
        raise SchemaError(
            f"{os.path.basename(path)}: {data.shape[1]} data columns for "
            f"{len(cols)} header fields"
        )
    return {name: data[:, i] for i, name in enumerate(cols)}


def read_profile(path) -> dict:
    """Two-column profile file `x,u`."""
    return _read_csv(path, ("x", "u"))


def read_series(path) -> dict:
    """Per-record scalar series; `t` plus whatever the run observed."""
    return _read_csv(path, ("t",))


def read_interface(path) -> dict:
    """Interface trajectories `t,left,right`."""
    return _read_csv(path, ("t", "left", "right"))


def read_criterion(path) -> dict:
    """Criterion-vs-radius table `r,value`."""
    return _read_csv(path, ("r", "value"))


def read_sweep_summary(path) -> dict:
    """summary.json of a kappa sweep study."""
    with open(path) as f:
        summary = json.load(f)
    for key in ("parameters", "t_stars", "slope", "n"):
        if key not in summary:
            raise SchemaError(f"{os.path.basename(path)}: missing field {key!r}")
    return summary


def profile_files(in_dir) -> list:
    """All `x,u` CSVs directly inside in_dir, sorted by name."""
    out = []
    for name in sorted(os.listdir(in_dir)):
        if not name.endswith(".csv"):
            continue
        path = os.path.join(in_dir, name)
        try:
            with open(path) as f:
                header = f.readline().strip()
        except OSError:
            continue
        if header == "x,u":
            out.append(path)
    return out


def snapshot_files(in_dir) -> list:
    snap_dir = os.path.join(in_dir, "snapshots")
    if not os.path.isdir(snap_dir):
        raise SchemaError("no snapshots/ directory in input")
    return [
        os.path.join(snap_dir, name)
        for name in sorted(os.listdir(snap_dir))
        if name.endswith(".csv")
    ]
