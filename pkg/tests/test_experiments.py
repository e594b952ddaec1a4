"""Experiment-harness tests that run at desk scale."""

import math

import numpy as np
import pytest

from thinfilmlab.grid import make_grid, mass
from thinfilmlab.experiments import (
    _classify_refinement,
    exact_source_n1,
    exact_source_profile,
    run_until_detection,
    write_study,
)


def test_exact_source_satisfies_pde_symbolically():
    # substitution oracle: u_t + (u u_xxx)_x must vanish identically on
    # the wetted region for u = t^(-1/5) (a^2 - eta^2)^2 / 120
    import sympy as sp

    x, t, a = sp.symbols("x t a", positive=True)
    eta = x * t ** sp.Rational(-1, 5)
    u = t ** sp.Rational(-1, 5) * (a**2 - eta**2) ** 2 / 120
    resid = sp.diff(u, t) + sp.diff(u * sp.diff(u, x, 3), x)
    assert sp.simplify(resid) == 0


def test_exact_source_mass_constant_in_time():
    x = np.linspace(-3.0, 3.0, 20001)
    m1 = np.trapezoid(exact_source_n1(x, 1.0), x)
    m2 = np.trapezoid(exact_source_n1(x, 2.7), x)
    assert m2 == pytest.approx(m1, rel=1e-10)


def test_exact_source_support_grows_like_t_to_fifth():
    for t in (1.0, 2.0, 32.0):
        x_edge = t**0.2
        assert exact_source_n1(x_edge * 0.999, t) > 0.0
        assert exact_source_n1(x_edge * 1.001, t) == 0.0


def test_exact_source_profile_is_clamped():
    g = make_grid(-2.0, 2.0, 257)
    p = exact_source_profile(g, 1.0)
    assert np.all(p.values[:2] == 0.0)
    assert np.all(p.values >= 0.0)
    assert mass(p) > 0.0


def test_classify_refinement():
    assert _classify_refinement([0.1, 0.04, 0.015]) == "instantaneous"
    assert _classify_refinement([0.1, 0.09, 0.085]) == "waiting"
    assert _classify_refinement([math.inf, 0.1, 0.09]) == "unresolved"
    assert _classify_refinement([0.1]) == "unresolved"
    # slow power-law tail: keeps shrinking ~x1.5 per halving, never settles
    assert _classify_refinement([0.22, 0.10, 0.068]) == "instantaneous"
    # converging ladder: decrements collapse, finest pair within a third
    assert _classify_refinement([0.16, 0.085, 0.070]) == "waiting"
    # non-monotone shrinking ladder is suspect
    assert _classify_refinement([0.05, 0.10, 0.068]) == "unresolved"


def test_run_until_detection_stops_early():
    # steep droplet with linear mobility spreads at once, so the chunked
    # driver must detect arrival at the edge and bail out after one chunk
    from thinfilmlab.grid import Profile
    from thinfilmlab.solver import SolverConfig, with_precursor

    g = make_grid(-2.0, 2.0, 129)
    v = np.maximum(1.0 - g.nodes**2, 0.0) ** 0.25
    v[:2] = 0.0
    v[-2:] = 0.0
    floor = 1e-6
    cfg = SolverConfig(n=1.0, dt_max=1e-3, positivity_floor=floor)
    p = with_precursor(Profile(g, v), floor)
    est, series = run_until_detection(p, cfg, x0=-1.0, t_max=1.0,
                                      observe_every=1e-3)
    assert not est.censored
    assert est.t_star > 0.0
    times = series.times()
    assert np.all(np.diff(times) > 0)
    assert times[-1] <= 0.1 + 1e-12  # stopped after the first chunk


def test_write_study_layout(tmp_path):
    out = tmp_path / "study"
    write_study(
        out,
        {"kind": "demo"},
        {"slope": -2.5, "ok": True},
        {"runs_a": [{"t": 0.0, "v": 1.0}, {"t": 1.0, "v": 2.0}]},
    )
    assert (out / "manifest.json").exists()
    assert (out / "summary.json").exists()
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 2
    run_lines = (out / "runs" / "runs_a.csv").read_text().splitlines()
    assert run_lines[0] == "t,v"
    assert len(run_lines) == 3
