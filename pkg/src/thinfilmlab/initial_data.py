"""Initial-data families for the thin-film free-boundary studies and the
growth criteria measuring how fast data rise off their contact point.

Three criteria are implemented on dyadic radius ladders:

* mass criterion        r^(-4/n) * (ball average of u)
* energy criterion      r^(-4/n+1) * (ball average of |u_x|^2)^(1/2)
* p-norm criterion      r^(-4/n) * (ball average of u^p)^(1/p), 0 < p < 1

The mass criterion's supremum kappa feeds the waiting-time bound pair
lower_T = c_est * kappa^(-n), upper_T = C_est * kappa^(-n).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, GridError, Profile, face_gradient, local_average

__all__ = [
    "CriterionReport",
    "BoundPair",
    "smoother_step",
    "bump",
    "dyadic_radii",
    "power_law",
    "oscillatory",
    "concentrated",
    "criterion_mass",
    "criterion_energy",
    "criterion_pnorm",
    "theorem_bounds",
]


def smoother_step(s: np.ndarray) -> np.ndarray:
    """C^3 ramp 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7, clipped to [0, 1]."""
    s = np.clip(s, 0.0, 1.0)
    return s**4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s**3)


def bump(s: np.ndarray) -> np.ndarray:
    """Smooth bump supported on [0, 1], max 1 at s = 1/2.

    Built from two mirrored smoother-step ramps; C^3 across the whole
    line, so reproducible bit-for-bit wherever it is evaluated.
    """
    s = np.asarray(s, dtype=float)
    up = smoother_step(2.0 * s)
    down = smoother_step(2.0 * (1.0 - s))
    return np.where(s < 0.5, up, down) * ((s > 0.0) & (s < 1.0))


def _outer_taper(xi: np.ndarray, width: float) -> np.ndarray:
    """C^3 cutoff: 1 on [0, 0.9 w], rolls to 0 over the last 10% of w."""
    ramp = (xi - 0.9 * width) / (0.1 * width)
    return 1.0 - smoother_step(ramp)


def _check_support(grid: Grid1D, x0: float, width: float) -> None:
    # two clamped nodes at each end must stay dry
    if x0 < grid.x_min + 2.0 * grid.h or x0 + width > grid.x_max - 2.0 * grid.h:
        raise GridError(
            f"support [{x0:g}, {x0 + width:g}] exits grid interior "
            f"[{grid.x_min + 2 * grid.h:g}, {grid.x_max - 2 * grid.h:g}]"
        )


def power_law(grid: Grid1D, x0: float, beta: float, amplitude: float, width: float) -> Profile:
    """u = amplitude * (x - x0)_+^beta on [x0, x0 + width], tapered outer edge."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amplitude}")
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    _check_support(grid, x0, width)
    xi = grid.nodes - x0
    inside = (xi > 0.0) & (xi <= width)
    u = np.zeros(grid.n_nodes)
    u[inside] = amplitude * xi[inside] ** beta * _outer_taper(xi[inside], width)
    return Profile(grid, u)


def oscillatory(grid: Grid1D, x0: float, n: float, width: float) -> Profile:
    """u = (2 + sin(1/(x - x0))) * (x - x0)_+^(4/n), tapered outer edge.

    Bounded between 1x and 3x the critical power law but with unbounded
    local slope oscillation toward the contact point, so its energy
    criterion diverges while its mass criterion stays finite.
    """
    if not 0.0 < n < 3.0:
        raise ValueError(f"mobility exponent must lie in (0, 3), got {n}")
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    _check_support(grid, x0, width)
    xi = grid.nodes - x0
    inside = (xi > 0.0) & (xi <= width)
    xin = xi[inside]
    u = np.zeros(grid.n_nodes)
    u[inside] = (2.0 + np.sin(1.0 / xin)) * xin ** (4.0 / n) * _outer_taper(xin, width)
    return Profile(grid, u)


def concentrated(
    grid: Grid1D,
    x0: float,
    n: float,
    delta: float,
    k_max: int,
    width: float,
) -> Profile:
    """Critical power law plus accumulating bumps at x0 + 1/k, k = 2..k_max.

    Bump k has height factor k^2 and width 1/k^2, carrying mass of order
    (x - x0)^(4/n - delta) near its location; for delta > 0 the mass
    criterion supremum grows with k_max while sub-unit p-norm averages
    stay tame.
    """
    if not 0.0 < n < 3.0:
        raise ValueError(f"mobility exponent must lie in (0, 3), got {n}")
    if not 0.0 < delta < 4.0 / n:
        raise ValueError(f"delta must lie in (0, 4/n) = (0, {4.0 / n:g}), got {delta}")
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    if k_max * k_max * grid.h > 0.5:
        raise GridError(
            f"narrowest bump (width {1.0 / k_max**2:g}) under-resolved at h = {grid.h:g}; "
            f"need k_max^2 * h <= 0.5"
        )
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    _check_support(grid, x0, width)
    xi = grid.nodes - x0
    inside = (xi > 0.0) & (xi <= width)
    xin = xi[inside]
    base = xin ** (4.0 / n)
    bumps = np.zeros_like(xin)
    for k in range(2, k_max + 1):
        bumps += k * k * bump(k * k * (xin - 1.0 / k))
    u = np.zeros(grid.n_nodes)
    u[inside] = (base + xin ** (4.0 / n - delta) * bumps) * _outer_taper(xin, width)
    return Profile(grid, u)


def dyadic_radii(R: float, h: float, r_min_factor: float = 4.0) -> list[float]:
    """Dyadic ladder R, R/2, R/4, ... down to r_min_factor * h."""
    if R < r_min_factor * h:
        raise GridError(f"R = {R:g} below the resolution floor {r_min_factor * h:g}")
    radii = []
    r = R
    while r >= r_min_factor * h:
        radii.append(r)
        r /= 2.0
    return radii


@dataclass(frozen=True)
class CriterionReport:
    """Per-radius values of a growth criterion at x0 plus their supremum.

    The supremum is over the supplied (resolved) radii only; r_min records
    the smallest radius that entered it.
    """

    x0: float
    kind: str
    radii: tuple
    values: tuple
    supremum: float
    r_min: float

    def __post_init__(self):
        if len(self.radii) != len(self.values):
            raise ValueError("radii/values length mismatch")
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly decreasing")

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "kind": self.kind,
            "supremum": self.supremum,
            "r_min": self.r_min,
        }

    def write_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("r,value\n")
            for r, v in zip(self.radii, self.values):
                f.write(f"{r:.17g},{v:.17g}\n")

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def _make_report(kind, x0, radii, values) -> CriterionReport:
    values = [float(v) for v in values]
    return CriterionReport(
        x0=float(x0),
        kind=kind,
        radii=tuple(float(r) for r in radii),
        values=tuple(values),
        supremum=max(values) if values else 0.0,
        r_min=min(radii) if radii else math.nan,
    )


def criterion_mass(
    p: Profile, x0: float, radii, n: float, one_sided: bool = False
) -> CriterionReport:
    """r^(-4/n) * (average of u over B_r(x0)) per radius."""
    values = [
        r ** (-4.0 / n) * local_average(p, x0, r, one_sided=one_sided) for r in radii
    ]
    return _make_report("mass", x0, radii, values)


def criterion_energy(
    p: Profile, x0: float, radii, n: float, one_sided: bool = False
) -> CriterionReport:
    """r^(-4/n+1) * (average of |u_x|^2 over B_r(x0))^(1/2) per radius."""
    grid = p.grid
    g = face_gradient(p.values, grid.h)
    # gradient-squared lives at faces; re-sample to nodes for ball averaging
    g2 = np.zeros(grid.n_nodes)
    g2[1:-1] = 0.5 * (g[:-1] ** 2 + g[1:] ** 2)
    g2[0] = g[0] ** 2
    g2[-1] = g[-1] ** 2
    q = Profile(grid, g2, require_compact_support=False)
    values = [
        r ** (-4.0 / n + 1.0)
        * math.sqrt(local_average(q, x0, r, one_sided=one_sided))
        for r in radii
    ]
    return _make_report("energy", x0, radii, values)


def criterion_pnorm(
    p: Profile, x0: float, p_exp: float, radii, n: float, one_sided: bool = False
) -> CriterionReport:
    """r^(-4/n) * (average of u^p over B_r(x0))^(1/p) per radius."""
    if not 0.0 < p_exp < 1.0:
        raise ValueError(f"p exponent must lie in (0, 1), got {p_exp}")
    q = Profile(p.grid, np.maximum(p.values, 0.0) ** p_exp, require_compact_support=False)
    values = [
        r ** (-4.0 / n)
        * local_average(q, x0, r, one_sided=one_sided) ** (1.0 / p_exp)
        for r in radii
    ]
    return _make_report(f"pnorm({p_exp:g})", x0, radii, values)


@dataclass(frozen=True)
class BoundPair:
    """Waiting-time bracket c_est * kappa^(-n) <= T* <= C_est * kappa^(-n).

    The calibration constants are empirical stand-ins estimated from
    sweeps, never theory-supplied.  kappa = 0 means no forward motion is
    implied at all: both bounds are infinite and the marker is set.
    """

    kappa: float
    n: float
    lower_T: float
    upper_T: float
    no_forward_motion_implied: bool = False


def theorem_bounds(kappa: float, n: float, c_est: float, C_est: float) -> BoundPair:
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if not 0.0 < n < 3.0:
        raise ValueError(f"mobility exponent must lie in (0, 3), got {n}")
    if c_est > C_est:
        raise ValueError(f"c_est = {c_est:g} exceeds C_est = {C_est:g}")
    if kappa == 0.0:
        return BoundPair(
            kappa=0.0,
            n=n,
            lower_T=math.inf,
            upper_T=math.inf,
            no_forward_motion_implied=True,
        )
    scale = kappa ** (-n)
    return BoundPair(kappa=kappa, n=n, lower_T=c_est * scale, upper_T=C_est * scale)
