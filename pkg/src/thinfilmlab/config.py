"""Structured run configuration: strict YAML parsing with per-key
validation, defaults, and round-trip serialization.

The authoritative key list ships with the package as config_schema.txt;
unknown keys are rejected (no silent defaults for misspellings).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

__all__ = ["ConfigError", "parse_config", "serialize_config", "SCHEMA"]


class ConfigError(ValueError):
    pass


def _positive(v):
    return v > 0


def _nonnegative(v):
    return v >= 0


def _in_unit(v):
    return 0 < v < 1


def _mobility_range(v):
    return 0 < v < 3


# section -> key -> (type, default, validator, description)
SCHEMA: dict = {
    "grid": {
        "x_min": (float, -1.0, None, "left domain edge"),
        "x_max": (float, 3.0, None, "right domain edge (must exceed x_min)"),
        "n_nodes": (int, 512, lambda v: v >= 8, "node count, >= 8"),
    },
    "initial_data": {
        "kind": (
            str,
            "power_law",
            lambda v: v in ("power_law", "oscillatory", "concentrated", "file"),
            "generator: power_law | oscillatory | concentrated | file",
        ),
        "x0": (float, 0.0, None, "contact point of the generated data"),
        "beta": (float, 1.6, _positive, "growth exponent (power_law)"),
        "amplitude": (float, 1.0, _nonnegative, "height scale (power_law)"),
        "width": (float, 2.0, _positive, "support width"),
        "delta": (float, 0.3, _positive, "exponent offset (concentrated)"),
        "k_max": (int, 8, lambda v: v >= 2, "bump count cap (concentrated)"),
        "path": (str, "", None, "profile CSV path (kind = file)"),
        "precursor_rel": (
            float,
            1e-6,
            _nonnegative,
            "relative precursor film height added before time stepping",
        ),
    },
    "solver": {
        "n": (float, 2.5, _mobility_range, "mobility exponent, in (0, 3)"),
        "dt_init": (float, 1e-8, _positive, "initial time step"),
        "dt_min": (float, 1e-16, _positive, "hard failure below this step"),
        "dt_max": (float, 1e-2, _positive, "cap on the adaptive step"),
        "newton_tol": (float, 1e-11, _positive, "scaled-residual tolerance"),
        "newton_max_iter": (int, 12, _positive, "iteration cap per step"),
        "mobility_variant": (
            str,
            "entropy_consistent",
            lambda v: v in ("entropy_consistent", "arithmetic_mean", "regularized"),
            "face mobility mean",
        ),
        "mobility_eps": (float, 0.0, _nonnegative, "regularization height"),
        "support_threshold_rel": (float, 1e-7, _in_unit, "support threshold"),
        "t_end": (float, 0.1, _nonnegative, "simulated horizon"),
        "observe_every": (float, 0.0, _nonnegative, "snapshot cadence (0 = ends only)"),
    },
    "diagnostics": {
        "x0": (float, 0.0, None, "diagnostic point"),
        "R": (float, 0.5, _positive, "outer radius of the dyadic ladder"),
        "k_max": (int, 6, _positive, "dyadic depth"),
        "T": (float, 0.0, _nonnegative, "cylinder horizon (0 = t_end)"),
        "beta": (float, -1.0, None, "time-weight exponent (<0 = mode default)"),
        "mode": (str, "weak", lambda v: v in ("weak", "strong"), "cascade mode"),
        "alpha": (float, 0.05, _positive, "entropy exponent offset (strong mode)"),
        "eps": (float, 1.0, _positive, "degeneracy smallness constant"),
        "delta": (float, -1.0, None, "degeneracy exponent (<0 = mode default)"),
        "theta_rel": (float, 1e-4, _in_unit, "support threshold for waiting times"),
        "margin": (float, 0.0, _nonnegative, "waiting-time margin (0 = 4h)"),
        "p_exp": (float, 0.5, _in_unit, "p-norm criterion exponent"),
    },
    "output": {
        "snapshots": (bool, True, None, "write per-record profile CSVs"),
        "series": (bool, True, None, "write the scalar time-series CSV"),
        "interface": (bool, True, None, "write interface-position CSV"),
    },
    "sweep": {
        "kind": (str, "kappa", lambda v: v in ("kappa", "beta"), "sweep family"),
        "kappas": (list, [0.5, 1.0, 2.0, 4.0], None, "amplitudes (kappa sweep)"),
        "betas": (list, [1.3, 1.9], None, "growth exponents (beta sweep)"),
        "grids": (list, [129, 257, 513], None, "node counts (beta sweep)"),
        "t_max": (float, 1.0, _positive, "horizon budget"),
        "n_obs": (int, 300, _positive, "records per run"),
    },
    "validate": {
        "grids": (list, [129, 257, 513], None, "refinement ladder"),
        "t0": (float, 1.0, _positive, "start time of the exact solution"),
        "t1": (float, 1.8, _positive, "end time"),
        "order_low": (float, 1.58, None, "accepted fitted-order band, lower"),
        "order_high": (float, 2.33, None, "accepted fitted-order band, upper"),
    },
}


def parse_config(text: str) -> dict:
    """Parse and validate a YAML config; fill defaults, reject unknowns."""
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error{loc}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping of sections")
    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(
                f"unknown section {section!r}; expected one of {sorted(SCHEMA)}"
            )
    cfg: dict = {}
    for section, keys in SCHEMA.items():
        given = raw.get(section) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"section {section!r} must be a mapping")
        for key in given:
            if key not in keys:
                raise ConfigError(
                    f"unknown key {section}.{key}; expected one of {sorted(keys)}"
                )
        out = {}
        for key, (typ, default, check, _desc) in keys.items():
            val = given.get(key, default)
            if typ is float and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            if typ is list and isinstance(val, (list, tuple)):
                val = [float(v) for v in val]
            elif not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
                raise ConfigError(
                    f"{section}.{key} must be {typ.__name__}, got {val!r}"
                )
            if check is not None and not check(val):
                raise ConfigError(
                    f"{section}.{key} = {val!r} violates: {keys[key][3]}"
                )
            out[key] = val
        cfg[section] = out
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: dict) -> None:
    g = cfg["grid"]
    if g["x_max"] <= g["x_min"]:
        raise ConfigError("grid.x_max must exceed grid.x_min")
    s = cfg["solver"]
    if not s["dt_min"] <= s["dt_init"] <= s["dt_max"]:
        raise ConfigError("solver needs dt_min <= dt_init <= dt_max")
    ini = cfg["initial_data"]
    if ini["kind"] == "file" and not ini["path"]:
        raise ConfigError("initial_data.path required when kind = file")
    if cfg["diagnostics"]["theta_rel"] <= 10.0 * ini["precursor_rel"]:
        raise ConfigError(
            "diagnostics.theta_rel must exceed 10 * initial_data.precursor_rel "
            "(the support threshold has to clear the precursor film)"
        )


def serialize_config(cfg: dict) -> str:
    buf = io.StringIO()
    yaml.safe_dump(cfg, buf, sort_keys=True, default_flow_style=False)
    return buf.getvalue()


def schema_document() -> str:
    """Human-readable schema listing, one line per key."""
    lines = ["# thinfilmlab configuration schema", ""]
    for section, keys in SCHEMA.items():
        lines.append(f"{section}:")
        for key, (typ, default, _check, desc) in keys.items():
            lines.append(f"  {key}: {typ.__name__} = {default!r}  # {desc}")
        lines.append("")
    return "\n".join(lines)
