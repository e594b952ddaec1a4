"""Command-line front end.

Subcommands: run, criteria, diagnose, sweep, validate.  Every invocation
writes a manifest (config snapshot + content hash + file inventory) into
the output directory; failures additionally land in errors.json.  Exit
codes: 0 success, 1 run failure, 2 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import traceback

import numpy as np

from . import __version__
from .config import ConfigError, parse_config, schema_document, serialize_config
from .diagnostics import (
    cascade_to_csv,
    cascade_to_json,
    default_beta_strong,
    default_beta_weak,
    default_delta_weak,
    degeneracy_cascade,
    monotonicity_monitor,
)
from .free_boundary import waiting_time, write_interface_csv
from .grid import Profile, make_grid, read_profile_csv, write_profile_csv
from .initial_data import (
    concentrated,
    criterion_energy,
    criterion_mass,
    criterion_pnorm,
    dyadic_radii,
    oscillatory,
    power_law,
)
from .solver import SolverConfig, run as solver_run, with_precursor
from .experiments import beta_sweep, convergence_study, kappa_sweep, write_study


def _build_grid(cfg):
    g = cfg["grid"]
    return make_grid(g["x_min"], g["x_max"], int(g["n_nodes"]))


def _build_initial(cfg, grid):
    ini = cfg["initial_data"]
    n = cfg["solver"]["n"]
    kind = ini["kind"]
    if kind == "power_law":
        return power_law(grid, ini["x0"], ini["beta"], ini["amplitude"], ini["width"])
    if kind == "oscillatory":
        return oscillatory(grid, ini["x0"], n, ini["width"])
    if kind == "concentrated":
        return concentrated(grid, ini["x0"], n, ini["delta"], int(ini["k_max"]), ini["width"])
    return read_profile_csv(ini["path"])


def _solver_config(cfg, floor: float = 0.0) -> SolverConfig:
    s = cfg["solver"]
    return SolverConfig(
        n=s["n"],
        dt_init=s["dt_init"],
        dt_min=s["dt_min"],
        dt_max=s["dt_max"],
        newton_tol=s["newton_tol"],
        newton_max_iter=int(s["newton_max_iter"]),
        mobility_variant=s["mobility_variant"],
        mobility_eps=s["mobility_eps"],
        support_threshold_rel=s["support_threshold_rel"],
        positivity_floor=floor,
    )


def _write_manifest(out_dir, cfg, extra=None):
    text = serialize_config(cfg)
    digest = hashlib.sha256(text.encode()).hexdigest()
    inventory = sorted(
        os.path.relpath(os.path.join(root, f), out_dir)
        for root, _dirs, files in os.walk(out_dir)
        for f in files
        if f != "manifest.json"
    )
    manifest = {
        "tool": "thinfilmlab",
        "version": __version__,
        "config": cfg,
        "config_sha256": digest,
        "outputs": inventory,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_series_csv(series, path):
    keys = sorted({k for rec in series.records for k in rec.scalars})
    with open(path, "w") as f:
        f.write("t," + ",".join(keys) + "\n")
        for rec in series.records:
            vals = ",".join(
                f"{rec.scalars.get(k, float('nan')):.17g}" for k in keys
            )
            f.write(f"{rec.t:.17g},{vals}\n")


def _run_series(cfg, out_dir):
    grid = _build_grid(cfg)
    p0 = _build_initial(cfg, grid)
    floor = cfg["initial_data"]["precursor_rel"] * float(np.max(p0.values)) if np.max(p0.values) > 0 else 0.0
    solver_cfg = _solver_config(cfg, floor)
    series = solver_run(
        with_precursor(p0, floor),
        solver_cfg,
        t_end=cfg["solver"]["t_end"],
        observe_every=cfg["solver"]["observe_every"],
    )
    out = cfg["output"]
    if out["series"]:
        _write_series_csv(series, os.path.join(out_dir, "series.csv"))
    if out["interface"]:
        write_interface_csv(
            series, os.path.join(out_dir, "interface.csv"),
            theta_rel=cfg["diagnostics"]["theta_rel"],
        )
    if out["snapshots"]:
        snap_dir = os.path.join(out_dir, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        for i, rec in enumerate(series.records):
            prof = Profile(grid, rec.values, require_compact_support=False)
            write_profile_csv(prof, os.path.join(snap_dir, f"snapshot_{i:05d}.csv"))
    return grid, p0, series, solver_cfg


def cmd_run(cfg, out_dir, args):
    grid, p0, series, _ = _run_series(cfg, out_dir)
    est = waiting_time(
        series,
        cfg["diagnostics"]["x0"],
        theta_rel=cfg["diagnostics"]["theta_rel"],
        margin=cfg["diagnostics"]["margin"] or None,
    )
    est.write_json(os.path.join(out_dir, "waiting_time.json"))
    if not series.completed:
        with open(os.path.join(out_dir, "errors.json"), "w") as f:
            json.dump({"error": series.failure}, f, indent=2)
            f.write("\n")
        return 1
    return 0


def cmd_criteria(cfg, out_dir, args):
    grid = _build_grid(cfg)
    p0 = _build_initial(cfg, grid)
    d = cfg["diagnostics"]
    n = cfg["solver"]["n"]
    radii = dyadic_radii(d["R"], grid.h)
    reports = {
        "mass": criterion_mass(p0, d["x0"], radii, n),
        "energy": criterion_energy(p0, d["x0"], radii, n),
        "pnorm": criterion_pnorm(p0, d["x0"], d["p_exp"], radii, n),
    }
    summary = {}
    for name, rep in reports.items():
        rep.write_csv(os.path.join(out_dir, f"criterion_{name}.csv"))
        summary[name] = rep.to_dict()
    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return 0


def cmd_diagnose(cfg, out_dir, args):
    grid, p0, series, solver_cfg = _run_series(cfg, out_dir)
    d = cfg["diagnostics"]
    n = cfg["solver"]["n"]
    T = d["T"] if d["T"] > 0 else cfg["solver"]["t_end"]
    mode = d["mode"]
    beta = d["beta"]
    if beta < 0:
        beta = default_beta_weak(n) if mode == "weak" else default_beta_strong()
    delta = d["delta"]
    if delta < 0:
        delta = default_delta_weak(n) if mode == "weak" else 1.0
    reports = degeneracy_cascade(
        series, d["x0"], d["R"], int(d["k_max"]), T, beta, n,
        eps=d["eps"], delta=delta, mode=mode, alpha=d["alpha"],
        positivity_floor=solver_cfg.positivity_floor,
    )
    cascade_to_json(reports, os.path.join(out_dir, "cascade.json"))
    cascade_to_csv(reports, os.path.join(out_dir, "cascade.csv"))
    if 2.0 < n < 3.0:
        try:
            trace = monotonicity_monitor(
                series, d["x0"], n, support_theta=solver_cfg.support_threshold_rel
            )
            with open(os.path.join(out_dir, "monotonicity.json"), "w") as f:
                json.dump(
                    {
                        "times": list(trace.times),
                        "values": list(trace.values),
                        "violations": list(trace.violations),
                        "hypothesis_lost_at": trace.hypothesis_lost_at,
                    },
                    f, indent=2,
                )
                f.write("\n")
        except Exception as exc:  # x0 inside support: not applicable
            with open(os.path.join(out_dir, "monotonicity.json"), "w") as f:
                json.dump({"skipped": str(exc)}, f, indent=2)
                f.write("\n")
    return 0 if series.completed else 1


def cmd_sweep(cfg, out_dir, args):
    sw = cfg["sweep"]
    n = cfg["solver"]["n"]
    grid = _build_grid(cfg)
    solver_cfg = _solver_config(cfg)
    ini = cfg["initial_data"]
    if sw["kind"] == "kappa":
        def shape(g):
            return power_law(g, ini["x0"], 4.0 / n, 1.0, ini["width"])

        result = kappa_sweep(
            shape, [float(k) for k in sw["kappas"]], n, solver_cfg,
            t_max=sw["t_max"], grid=grid, x0=ini["x0"],
            theta_rel=cfg["diagnostics"]["theta_rel"],
            n_obs=int(sw["n_obs"]), workers=args.workers,
            precursor_rel=ini["precursor_rel"],
        )
        runs = {
            f"kappa_{m['kappa']:g}": [
                {"theta": th, "t_star": est[0], "censored": est[1]}
                for th, est in m["estimates"].items()
            ]
            for m in result.manifests
        }
        write_study(out_dir, {"sweep": sw, "n": n}, result.to_dict(), runs)
        return 0
    result = beta_sweep(
        [float(b) for b in sw["betas"]], n, solver_cfg, t_max=sw["t_max"],
        grids=[int(g) for g in sw["grids"]],
        domain=(cfg["grid"]["x_min"], cfg["grid"]["x_max"]),
        x0=ini["x0"], width=ini["width"],
        theta_rels=(cfg["diagnostics"]["theta_rel"],),
        n_obs=int(sw["n_obs"]), precursor_rel=ini["precursor_rel"],
    )
    summary = {
        "critical_beta": result["critical_beta"],
        "n": n,
        "classifications": {
            f"{row['beta']:g}": row["classification"] for row in result["table"]
        },
    }
    runs = {
        f"beta_{row['beta']:g}": row["runs"] for row in result["table"]
    }
    write_study(out_dir, {"sweep": sw, "n": n}, summary, runs)
    return 0


def cmd_validate(cfg, out_dir, args):
    v = cfg["validate"]
    res = convergence_study([int(g) for g in v["grids"]], t0=v["t0"], t1=v["t1"])
    order = res["orders_l1"][-1]
    ok = v["order_low"] <= order <= v["order_high"]
    summary = {
        "fitted_order_l1": order,
        "orders_l1": res["orders_l1"],
        "orders_sup": res["orders_sup"],
        "accepted_band": [v["order_low"], v["order_high"]],
        "passed": ok,
    }
    write_study(out_dir, {"validate": v}, summary,
                {"errors": res["rows"]})
    return 0 if ok else 1


COMMANDS = {
    "run": cmd_run,
    "criteria": cmd_criteria,
    "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="thinfilmlab",
        description="1D thin-film equation laboratory",
    )
    parser.add_argument("command", choices=sorted(COMMANDS) + ["schema"])
    parser.add_argument("--config", help="YAML configuration path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="sweep parallelism")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized-corpus checks")
    args = parser.parse_args(argv)

    if args.command == "schema":
        print(schema_document())
        return 0

    try:
        if args.config:
            with open(args.config) as f:
                text = f.read()
        else:
            text = ""
        cfg = parse_config(text)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    np.random.seed(args.seed % (2**32))
    try:
        code = COMMANDS[args.command](cfg, args.out, args)
    except Exception as exc:
        with open(os.path.join(args.out, "errors.json"), "w") as f:
            json.dump(
                {"error": str(exc), "traceback": traceback.format_exc()}, f, indent=2
            )
            f.write("\n")
        print(f"run failure: {exc}", file=sys.stderr)
        return 1
    _write_manifest(args.out, cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
