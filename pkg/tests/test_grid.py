"""Grid, quadrature, and profile-container tests."""

import math

import numpy as np
import pytest

from thinfilmlab.grid import (
    Grid1D,
    GridError,
    Profile,
    ball_integral,
    dirichlet_energy,
    face_third_derivative,
    local_average,
    make_grid,
    mass,
    read_profile_csv,
    write_profile_csv,
)


def test_make_grid_basic():
    g = make_grid(-1.0, 1.0, 9)
    assert g.n_nodes == 9
    assert g.h == pytest.approx(0.25)
    assert g.nodes[0] == -1.0
    assert g.nodes[-1] == pytest.approx(1.0)


def test_make_grid_too_few_nodes():
    with pytest.raises(GridError):
        make_grid(0.0, 1.0, 4)


def test_profile_requires_clamped_edges():
    g = make_grid(0.0, 1.0, 16)
    u = np.ones(16)
    with pytest.raises(GridError):
        Profile(g, u)
    u[:2] = 0.0
    u[-2:] = 0.0
    Profile(g, u)  # fine now


def test_mass_of_hat():
    # trapezoid rule integrates piecewise-linear data exactly
    g = make_grid(0.0, 1.0, 101)
    u = np.maximum(0.0, 0.25 - np.abs(g.nodes - 0.5))
    p = Profile(g, u)
    assert mass(p) == pytest.approx(0.25**2, rel=1e-12)


def test_dirichlet_energy_linear_profile():
    # 0.5 * int |u_x|^2 with u = x on (0, 1) equals exactly 1/2
    g = make_grid(0.0, 1.0, 33)
    p = Profile(g, g.nodes.copy(), require_compact_support=False)
    assert dirichlet_energy(p) == pytest.approx(0.5, abs=1e-14)


def test_face_third_derivative_cubic():
    # u = x^3 has u_xxx = 6 exactly for the 4-point face stencil
    g = make_grid(-1.0, 1.0, 21)
    d3 = face_third_derivative(g.nodes**3, g.h)
    assert np.allclose(d3, 6.0, atol=1e-9)


def test_ball_integral_linear_exact():
    # partial-cell trapezoid quadrature is exact on linear integrands
    g = make_grid(0.0, 2.0, 401)
    u = 3.0 * g.nodes + 1.0
    p = Profile(g, u, require_compact_support=False)
    r = 0.3711  # deliberately not a multiple of h
    x0 = 1.0
    exact = 2.0 * r * (3.0 * x0 + 1.0)
    assert ball_integral(p, x0, r) == pytest.approx(exact, rel=1e-12)


def test_local_average_constant():
    g = make_grid(0.0, 1.0, 64)
    p = Profile(g, np.full(64, 2.5), require_compact_support=False)
    assert local_average(p, 0.5, 0.2) == pytest.approx(2.5, rel=1e-13)


def test_local_average_one_sided():
    # one-sided mean of u = x over (x0, x0 + r) is x0 + r/2
    g = make_grid(0.0, 1.0, 501)
    p = Profile(g, g.nodes.copy(), require_compact_support=False)
    got = local_average(p, 0.25, 0.3, one_sided=True)
    assert got == pytest.approx(0.25 + 0.15, rel=1e-10)


def test_ball_integral_rejects_underresolved_radius():
    g = make_grid(0.0, 1.0, 64)
    p = Profile(g, np.zeros(64))
    with pytest.raises(GridError):
        ball_integral(p, 0.5, 0.5 * g.h)


def test_ball_integral_rejects_exiting_ball():
    g = make_grid(0.0, 1.0, 64)
    p = Profile(g, np.zeros(64))
    with pytest.raises(GridError):
        ball_integral(p, 0.05, 0.5)


def test_profile_csv_round_trip(tmp_path):
    g = make_grid(-1.0, 1.0, 33)
    u = np.maximum(0.0, 1.0 - g.nodes**2)
    u[:2] = 0.0
    u[-2:] = 0.0
    p = Profile(g, u)
    path = tmp_path / "p.csv"
    write_profile_csv(p, path)
    q = read_profile_csv(path)
    assert np.array_equal(p.values, q.values)
    assert q.grid.h == pytest.approx(g.h, rel=1e-15)
