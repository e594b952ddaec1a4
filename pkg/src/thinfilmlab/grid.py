"""Uniform 1D grids, nonnegative film-height profiles, and the discrete
calculus (quadrature, difference operators, ball averages) shared by the
rest of the package.

Conventions
-----------
* Node values, not cell averages: a profile stores u(x_i) at the nodes
  x_i = x_min + i*h.
* Quadrature is trapezoidal (second order, sign preserving); ball
  averages use exact partial end cells obtained by linear interpolation
  at the cut points.
* Gradient quadrature uses face differences (u_{i+1} - u_i)/h with
  midpoint weights, which is exact for affine profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridError",
    "Grid1D",
    "Profile",
    "make_grid",
    "mass",
    "dirichlet_energy",
    "local_average",
    "ball_integral",
    "face_gradient",
    "node_gradient",
    "face_third_derivative",
    "write_profile_csv",
    "read_profile_csv",
]

MIN_NODES = 8


class GridError(ValueError):
    """Invalid grid, profile, or out-of-domain request."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh x_i = x_min + i*h, i = 0..n_nodes-1."""

    x_min: float
    h: float
    n_nodes: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.h)):
            raise GridError("grid bounds must be finite")
        if self.h <= 0:
            raise GridError(f"grid spacing must be positive, got {self.h}")
        if self.n_nodes < MIN_NODES:
            raise GridError(f"need at least {MIN_NODES} nodes, got {self.n_nodes}")

    @property
    def x_max(self) -> float:
        return self.x_min + self.h * (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_nodes)

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max


def make_grid(x_min: float, x_max: float, n_nodes: int) -> Grid1D:
    """Uniform grid on [x_min, x_max] with n_nodes nodes."""
    if not (np.isfinite(x_min) and np.isfinite(x_max)):
        raise GridError("grid bounds must be finite")
    if x_max <= x_min:
        raise GridError(f"x_max must exceed x_min, got [{x_min}, {x_max}]")
    if n_nodes < MIN_NODES:
        raise GridError(f"need at least {MIN_NODES} nodes, got {n_nodes}")
    h = (x_max - x_min) / (n_nodes - 1)
    return Grid1D(x_min=x_min, h=h, n_nodes=n_nodes)


@dataclass(frozen=True)
class Profile:
    """Nonnegative film height sampled at grid nodes.

    By default construction enforces compact support inside the grid
    interior (u = 0 on the two outermost nodes at each end), which the
    time integrator relies on.  Diagnostic-only profiles (e.g. window
    restrictions for inequality checks) may opt out.
    """

    grid: Grid1D
    values: np.ndarray
    require_compact_support: bool = field(default=True, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_nodes,):
            raise GridError(
                f"profile length {v.shape} does not match grid ({self.grid.n_nodes},)"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("profile values must be finite")
        # tolerate small contact-line dips: on a precursor film the time
        # integrator keeps undershoots in the state (up to 1% of the
        # maximum height) so that mass is conserved exactly while the
        # front advances; support detection only sees positive heights
        if v.size and v.min() < -1e-2 * max(float(v.max()), 0.0):
            raise GridError(f"profile values must be nonnegative (min {v.min():g})")
        if self.require_compact_support:
            edge = np.concatenate([v[:2], v[-2:]])
            if np.any(edge != 0.0):
                raise GridError("profile must vanish on the two outermost nodes")

    def with_values(self, values: np.ndarray) -> "Profile":
        return Profile(self.grid, values, self.require_compact_support)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes


def mass(p: Profile) -> float:
    """Trapezoidal quadrature of u over the grid."""
    return float(np.trapezoid(p.values, dx=p.grid.h))


def face_gradient(values: np.ndarray, h: float) -> np.ndarray:
    """du/dx at the n-1 cell faces."""
    return np.diff(values) / h


def node_gradient(values: np.ndarray, h: float) -> np.ndarray:
    """Centered du/dx at nodes, one-sided at the two ends."""
    g = np.empty_like(values)
    g[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    g[0] = (values[1] - values[0]) / h
    g[-1] = (values[-1] - values[-2]) / h
    return g


def face_third_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """u_xxx at interior faces i+1/2 for i = 1..n-3.

    4-point stencil (u_{i+2} - 3 u_{i+1} + 3 u_i - u_{i-1}) / h^3, second
    order at the face midpoint.  Returned array has length n-3.
    """
    return (values[3:] - 3.0 * values[2:-1] + 3.0 * values[1:-2] - values[:-3]) / h**3


def dirichlet_energy(p: Profile) -> float:
    """(1/2) * integral of |u_x|^2 via face differences with midpoint weights.

    Exact for affine data; zero iff u is constant.
    """
    g = face_gradient(p.values, p.grid.h)
    return float(0.5 * p.grid.h * np.sum(g * g))


def _cut_integral(x: np.ndarray, v: np.ndarray, h: float, a: float, b: float) -> float:
    """Trapezoid integral of the piecewise-linear interpolant of v over [a, b].

    [a, b] must lie inside the grid; end cells are handled exactly by
    interpolating at the cut points.
    """
    va = float(np.interp(a, x, v))
    vb = float(np.interp(b, x, v))
    i_lo = int(np.searchsorted(x, a, side="right"))
    i_hi = int(np.searchsorted(x, b, side="left"))
    if i_lo > i_hi - 1:
        # a and b fall in the same cell
        return 0.5 * (va + vb) * (b - a)
    total = 0.5 * (va + v[i_lo]) * (x[i_lo] - a)
    total += 0.5 * (v[i_hi - 1] + vb) * (b - x[i_hi - 1])
    if i_hi - 1 > i_lo:
        total += float(np.trapezoid(v[i_lo:i_hi], dx=h))
    return total


def ball_integral(p: Profile, x0: float, r: float, one_sided: bool = False) -> float:
    """Integral of u over B_r(x0) (or (x0, x0+r) in one-sided mode)."""
    grid = p.grid
    if r < 2.0 * grid.h:
        raise GridError(f"radius {r:g} under-resolved (need >= 2h = {2*grid.h:g})")
    a = x0 if one_sided else x0 - r
    b = x0 + r
    if a < grid.x_min or b > grid.x_max:
        raise GridError(
            f"ball [{a:g}, {b:g}] exits grid [{grid.x_min:g}, {grid.x_max:g}]"
        )
    return _cut_integral(grid.nodes, p.values, grid.h, a, b)


def local_average(p: Profile, x0: float, r: float, one_sided: bool = False) -> float:
    """(1/|B_r|) * integral of u over B_r(x0); partial end cells exact."""
    width = r if one_sided else 2.0 * r
    return ball_integral(p, x0, r, one_sided=one_sided) / width


def write_profile_csv(p: Profile, path) -> None:
    """Two-column CSV `x,u`, full double precision."""
    with open(path, "w") as f:
        f.write("x,u\n")
        for x, u in zip(p.grid.nodes, p.values):
            f.write(f"{x:.17g},{u:.17g}\n")


def read_profile_csv(path, require_compact_support: bool = True) -> Profile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, u = data[:, 0], data[:, 1]
    if len(x) < MIN_NODES:
        raise GridError("profile file too short")
    h = (x[-1] - x[0]) / (len(x) - 1)
    if not np.allclose(np.diff(x), h, rtol=1e-12, atol=1e-12 * abs(h)):
        raise GridError("profile file is not on a uniform grid")
    grid = Grid1D(x_min=float(x[0]), h=float(h), n_nodes=len(x))
    return Profile(grid, u, require_compact_support=require_compact_support)
