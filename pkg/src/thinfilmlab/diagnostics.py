"""Functionals and inequality monitors evaluated on profiles and runs.

Covers the singular-weight entropy with its monotone-in-time behavior,
the localized mass / weighted-energy / weighted-entropy quantities on
dyadic parabolic cylinders with their degeneracy normalizations, and the
discrete versions of the interpolation and weighted-energy inequalities
used as empirical checkers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import Grid1D, GridError, Profile, face_gradient, node_gradient
from .solver import TimeSeries

__all__ = [
    "MonotonicityParams",
    "CylinderReport",
    "MonotonicityTrace",
    "monotonicity_params",
    "weighted_entropy",
    "monotonicity_monitor",
    "cylinder_quantities",
    "degeneracy_cascade",
    "default_beta_weak",
    "default_beta_strong",
    "default_delta_weak",
    "gns_theta",
    "gns_check",
    "bernis_gruen_check",
    "energy_balance_monitor",
]

BRANCH_POINT = 32.0 / 11.0


@dataclass(frozen=True)
class MonotonicityParams:
    """Exponent pair (alpha, gamma) of the monotone singular-weight entropy."""

    alpha: float
    gamma: float
    n: float

    def __post_init__(self):
        if not -1.0 < self.alpha < 0.0:
            raise ValueError(f"alpha must lie in (-1, 0), got {self.alpha}")
        if not self.gamma < -1.0:
            raise ValueError(f"gamma must be < -1, got {self.gamma}")


def monotonicity_params(n: float) -> MonotonicityParams:
    """Exponents of the monotone entropy for mobility exponent n in (2, 3).

    Below the branch point 32/11: alpha = -11n/20 + 12/20, gamma = -2;
    from 32/11 on: alpha = (1-n)/2, gamma = -11/10.
    """
    if not 2.0 < n < 3.0:
        raise ValueError(f"monotone-entropy exponents need n in (2, 3), got {n}")
    if n < BRANCH_POINT:
        return MonotonicityParams(alpha=-11.0 * n / 20.0 + 12.0 / 20.0, gamma=-2.0, n=n)
    return MonotonicityParams(alpha=(1.0 - n) / 2.0, gamma=-11.0 / 10.0, n=n)


def weighted_entropy(p: Profile, x0: float, alpha: float, gamma: float,
                     support_theta: float = 0.0) -> float:
    """Trapezoid quadrature of u^(1+alpha) |x - x0|^gamma over supp u.

    x0 must keep a distance of at least 2h from the support (the weight
    is singular there); support_theta > 0 discounts a precursor film.
    """
    if 1.0 + alpha <= 0.0:
        raise ValueError(f"need 1 + alpha > 0, got alpha = {alpha}")
    v = p.values
    vmax = float(np.max(v))
    if vmax <= 0.0:
        return 0.0
    x = p.grid.nodes
    thresh = support_theta * vmax
    supp = np.flatnonzero(v > thresh)
    lo, hi = x[supp[0]], x[supp[-1]]
    if lo - 2.0 * p.grid.h <= x0 <= hi + 2.0 * p.grid.h:
        raise GridError(
            f"x0 = {x0:g} touches the support [{lo:g}, {hi:g}] of the profile"
        )
    # evaluate the singular weight only on the support (x0 is outside,
    # but the grid may contain the singular node itself)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.abs(x - x0) ** gamma
        integrand = np.where(
            v > thresh, np.maximum(v, 0.0) ** (1.0 + alpha) * weight, 0.0
        )
    return float(np.trapezoid(integrand, dx=p.grid.h))


@dataclass(frozen=True)
class MonotonicityTrace:
    times: tuple
    values: tuple
    violations: tuple  # indices i with values[i+1] < values[i] - tol
    tol: float
    hypothesis_lost_at: Optional[float]  # t of the first record with support at x0

    @property
    def ok(self) -> bool:
        return not self.violations


def monotonicity_monitor(series: TimeSeries, x0: float, n: float,
                         support_theta: float = 0.0) -> MonotonicityTrace:
    """Monotone-entropy values per record, with decrease flags.

    Truncates with a hypothesis-lost marker as soon as the support
    reaches the 2h-neighborhood of x0.
    """
    params = monotonicity_params(n)
    grid = series.grid
    times, values = [], []
    lost_at = None
    for rec in series.records:
        p = Profile(grid, rec.values, require_compact_support=False)
        try:
            val = weighted_entropy(p, x0, params.alpha, params.gamma, support_theta)
        except GridError:
            lost_at = rec.t
            break
        times.append(rec.t)
        values.append(val)
    tol = 1e-6 * max(values, default=0.0)
    violations = tuple(
        i for i in range(len(values) - 1) if values[i + 1] < values[i] - tol
    )
    return MonotonicityTrace(
        times=tuple(times),
        values=tuple(values),
        violations=violations,
        tol=tol,
        hypothesis_lost_at=lost_at,
    )


# ---------------------------------------------------------------------------
# parabolic-cylinder quantities and the degeneracy cascade


def default_beta_weak(n: float, d: int = 1) -> float:
    """Weight exponent for the weighted-energy mode: inside (1/2, (3+d)/(3+nd))."""
    upper = (3.0 + d) / (3.0 + n * d)
    return min(0.6, 0.5 * (0.5 + upper))


def default_beta_strong() -> float:
    """Weight exponent for the weighted-entropy mode (needs beta < 1/9)."""
    return 0.1


def default_delta_weak(n: float, d: int = 1) -> float:
    """Midpoint of the admissible window ((dn+6-3n)/(dn+3), 2 - n/2)."""
    lo = (d * n + 6.0 - 3.0 * n) / (d * n + 3.0)
    hi = 2.0 - n / 2.0
    return 0.5 * (lo + hi)


def _ball_mask(x: np.ndarray, x0: float, r: float) -> np.ndarray:
    return np.abs(x - x0) <= r


def _ball_quad(x: np.ndarray, integrand: np.ndarray, h: float, x0: float, r: float) -> float:
    """Trapezoid integral of integrand over B_r(x0) with exact partial cells."""
    from .grid import _cut_integral

    a = max(x0 - r, x[0])
    b = min(x0 + r, x[-1])
    if b <= a:
        return 0.0
    return _cut_integral(x, integrand, h, a, b)


def _restricted_third_derivative_sq(values: np.ndarray, h: float, n: float,
                                    floor: float) -> np.ndarray:
    """u^n |u_xxx|^2 at nodes, zero wherever u <= floor.

    u_xxx at a node is averaged from the two adjacent face stencils; the
    positivity restriction mirrors the flux being supported on {u > 0}.
    """
    from .grid import face_third_derivative

    d3f = face_third_derivative(values, h)  # faces i+1/2, i = 1..n-3
    d3n = np.zeros_like(values)
    d3n[2:-2] = 0.5 * (d3f[:-1] + d3f[1:])
    wet = values > floor
    out = np.zeros_like(values)
    out[wet] = values[wet] ** n * d3n[wet] ** 2
    return out


def _grad_sq_nodes(values: np.ndarray, h: float, exponent: float = 1.0,
                   power: float = 2.0) -> np.ndarray:
    """|d/dx (u^exponent)|^power at nodes via face differences."""
    v = np.maximum(values, 0.0) ** exponent
    g = face_gradient(v, h)
    out = np.zeros_like(values)
    out[1:-1] = 0.5 * (np.abs(g[:-1]) ** power + np.abs(g[1:]) ** power)
    out[0] = np.abs(g[0]) ** power
    out[-1] = np.abs(g[-1]) ** power
    return out


@dataclass(frozen=True)
class CylinderReport:
    """Localized quantities on the parabolic cylinder B_{R/2^k}(x0) x [0, T]."""

    x0: float
    R: float
    k: int
    r_k: float
    T: float
    beta: float
    mode: str  # weak | strong
    alpha: Optional[float]
    M_k: float
    E_k: Optional[float]
    S_k: Optional[float]
    normalized_M: float
    normalized_E: Optional[float]
    normalized_S: Optional[float]


def cylinder_quantities(
    series: TimeSeries,
    x0: float,
    R: float,
    k: int,
    T: float,
    beta: float,
    n: float,
    mode: str = "weak",
    alpha: float = 0.05,
    eps: float = 1.0,
    delta: float = 1.0,
    positivity_floor: float = 0.0,
) -> CylinderReport:
    """Local mass and weighted energy (weak mode) or entropy (strong mode).

    Sups are over recorded instants in [0, T]; time integrals use the
    trapezoid rule on those instants.  Normalized ratios divide by the
    degeneracy scalings (d = 1):

        M:  eps       * T^(-1/n)         * r_k^(4/n+1)
        E:  eps^delta * T^beta T^(-2/n)  * r_k^(8/n-1)
        S:  eps^delta * T^beta T^(-(1+alpha)/n) * r_k^(4(alpha+1)/n+1)
    """
    grid = series.grid
    h = grid.h
    x = grid.nodes
    r_k = R / 2.0**k
    if r_k < 4.0 * h:
        raise GridError(f"radius R/2^{k} = {r_k:g} under-resolved (< 4h)")
    recs = [r for r in series.records if r.t <= T * (1.0 + 1e-12)]
    if not recs or recs[-1].t < T * (1.0 - 1e-9):
        raise ValueError(f"series does not cover [0, T = {T:g}]")
    if mode not in ("weak", "strong"):
        raise ValueError(f"mode must be weak or strong, got {mode!r}")

    times = np.array([r.t for r in recs])
    masses, sup_terms, diss_terms = [], [], []
    for rec in recs:
        v = rec.values
        masses.append(_ball_quad(x, v, h, x0, r_k))
        tb = rec.t**beta
        if mode == "weak":
            g2 = _grad_sq_nodes(v, h, 1.0, 2.0)
            sup_terms.append(tb * _ball_quad(x, g2, h, x0, r_k))
            diss = _grad_sq_nodes(v, h, (n + 2.0) / 6.0, 6.0)
            diss = diss + _restricted_third_derivative_sq(v, h, n, positivity_floor)
            diss_terms.append(tb * _ball_quad(x, diss, h, x0, r_k))
        else:
            ent = np.maximum(v, 0.0) ** (alpha + 1.0)
            sup_terms.append(tb * _ball_quad(x, ent, h, x0, r_k))
            diss = _grad_sq_nodes(v, h, (n + alpha + 4.0) / 4.0, 4.0)
            diss_terms.append(tb * _ball_quad(x, diss, h, x0, r_k))

    M_k = float(np.max(masses))
    sup_part = float(np.max(sup_terms))
    int_part = float(np.trapezoid(diss_terms, times))
    norm_M = eps * T ** (-1.0 / n) * r_k ** (4.0 / n + 1.0)
    if mode == "weak":
        E_k = sup_part + int_part
        norm_E = eps**delta * T**beta * T ** (-2.0 / n) * r_k ** (8.0 / n - 1.0)
        return CylinderReport(
            x0=x0, R=R, k=k, r_k=r_k, T=T, beta=beta, mode=mode, alpha=None,
            M_k=M_k, E_k=E_k, S_k=None,
            normalized_M=M_k / norm_M, normalized_E=E_k / norm_E, normalized_S=None,
        )
    S_k = sup_part + int_part
    norm_S = (
        eps**delta * T**beta * T ** (-(1.0 + alpha) / n)
        * r_k ** (4.0 * (alpha + 1.0) / n + 1.0)
    )
    return CylinderReport(
        x0=x0, R=R, k=k, r_k=r_k, T=T, beta=beta, mode=mode, alpha=alpha,
        M_k=M_k, E_k=None, S_k=S_k,
        normalized_M=M_k / norm_M, normalized_E=None, normalized_S=S_k / norm_S,
    )


def degeneracy_cascade(
    series: TimeSeries,
    x0: float,
    R: float,
    k_max: int,
    T: float,
    beta: float,
    n: float,
    eps: float,
    delta: float,
    mode: str = "weak",
    alpha: float = 0.05,
    positivity_floor: float = 0.0,
) -> list[CylinderReport]:
    """Cylinder reports for k = 1..k_max (stopping at the resolution floor).

    A level is degenerate when both normalized ratios are <= 1; the
    ratios themselves are the margins.
    """
    reports = []
    for k in range(1, k_max + 1):
        if R / 2.0**k < 4.0 * series.grid.h:
            break
        reports.append(
            cylinder_quantities(
                series, x0, R, k, T, beta, n, mode=mode, alpha=alpha,
                eps=eps, delta=delta, positivity_floor=positivity_floor,
            )
        )
    return reports


def cascade_to_json(reports: list[CylinderReport], path) -> None:
    payload = []
    for rep in reports:
        payload.append(
            {
                "k": rep.k,
                "r_k": rep.r_k,
                "mode": rep.mode,
                "M_k": rep.M_k,
                "E_k": rep.E_k,
                "S_k": rep.S_k,
                "normalized_M": rep.normalized_M,
                "normalized_E": rep.normalized_E,
                "normalized_S": rep.normalized_S,
                "degenerate": bool(
                    rep.normalized_M <= 1.0
                    and (rep.normalized_E if rep.mode == "weak" else rep.normalized_S) <= 1.0
                ),
            }
        )
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def cascade_to_csv(reports: list[CylinderReport], path) -> None:
    with open(path, "w") as f:
        f.write("k,r_k,M_k,E_k,S_k,normalized_M,normalized_E,normalized_S\n")
        for rep in reports:
            def fmt(v):
                return "" if v is None else f"{v:.17g}"
            f.write(
                f"{rep.k},{rep.r_k:.17g},{fmt(rep.M_k)},{fmt(rep.E_k)},{fmt(rep.S_k)},"
                f"{fmt(rep.normalized_M)},{fmt(rep.normalized_E)},{fmt(rep.normalized_S)}\n"
            )


# ---------------------------------------------------------------------------
# interpolation-inequality checkers


def gns_theta(d: int, k: int, q: float, p: float, r: float) -> float:
    """Interpolation weight (1/q - 1/p) / (1/q + k/d - 1/r)."""
    if not 0.0 < q < p:
        raise ValueError(f"need 0 < q < p, got q = {q}, p = {p}")
    if r < 1.0:
        raise ValueError(f"need r >= 1, got {r}")
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    theta = (1.0 / q - 1.0 / p) / (1.0 / q + k / d - inv_r)
    if not 0.0 < theta < 1.0:
        raise ValueError(f"inadmissible exponents: theta = {theta:g} outside (0, 1)")
    return theta


def _window_slice(grid: Grid1D, window) -> slice:
    a, b = window
    if a < grid.x_min or b > grid.x_max or b <= a:
        raise GridError(f"window [{a:g}, {b:g}] invalid for grid")
    x = grid.nodes
    i0 = int(np.searchsorted(x, a, side="left"))
    i1 = int(np.searchsorted(x, b, side="right"))
    if i1 - i0 < 5:
        raise GridError("window too narrow for derivative quadrature")
    return slice(i0, i1)


def _lp_norm(v: np.ndarray, h: float, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(v)))
    return float(np.trapezoid(np.abs(v) ** p, dx=h) ** (1.0 / p))


def gns_check(p: Profile, k: int, p_exp: float, q_exp: float, r_exp: float,
              window) -> dict:
    """Both sides of the interpolation inequality with C1 = C2 = 1.

    Returns lhs = ||v||_p, the two right-hand terms, and the ratio
    lhs / (||D^k v||_r^theta ||v||_q^(1-theta) + ||v||_q) used to
    estimate the empirical constant over corpora.
    """
    if k not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {k}")
    sl = _window_slice(p.grid, window)
    h = p.grid.h
    v = p.values[sl]
    theta = gns_theta(1, k, q_exp, p_exp, r_exp)
    dv = node_gradient(v, h)
    if k == 2:
        dv = node_gradient(dv, h)
    lhs = _lp_norm(v, h, p_exp)
    norm_d = _lp_norm(dv, h, r_exp)
    norm_q = _lp_norm(v, h, q_exp)
    rhs = norm_d**theta * norm_q ** (1.0 - theta) + norm_q
    return {
        "theta": theta,
        "lhs": lhs,
        "interp_term": norm_d**theta * norm_q ** (1.0 - theta),
        "lower_order_term": norm_q,
        "ratio": 0.0 if lhs == 0.0 else lhs / rhs,
    }


def bernis_gruen_check(p: Profile, cutoff: np.ndarray, n: float) -> dict:
    """Discrete weighted interpolation check for strictly positive profiles.

    lhs: integral of phi^6 u^(n-4) |u_x|^6 plus phi^6 u^(n-2) |u_xx|^2 |u_x|^2;
    rhs: integral of phi^6 u^n |u_xxx|^2 plus u^(n+2) |phi_x|^6 on {phi > 0}.
    Returns the term values and the ratio lhs/rhs for empirical-constant
    estimation.
    """
    lower = 2.0 - math.sqrt(8.0 / 9.0)
    if not lower < n < 3.0:
        raise ValueError(f"need n in ({lower:.4g}, 3), got {n}")
    cutoff = np.asarray(cutoff, dtype=float)
    if cutoff.shape != p.values.shape:
        raise ValueError("cutoff length must match the grid")
    if np.any(cutoff < 0):
        raise ValueError("cutoff must be nonnegative")
    v = p.values
    on = cutoff > 0.0
    if np.any(v[on] <= 0.0):
        raise GridError("profile must be strictly positive on the cutoff support")
    h = p.grid.h
    ux = node_gradient(v, h)
    uxx = node_gradient(ux, h)
    uxxx = node_gradient(uxx, h)
    phi6 = cutoff**6
    phix = node_gradient(cutoff, h)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(on, phi6 * v ** (n - 4.0) * ux**6, 0.0)
        t2 = np.where(on, phi6 * v ** (n - 2.0) * uxx**2 * ux**2, 0.0)
    t3 = np.where(on, phi6 * np.maximum(v, 0.0) ** n * uxxx**2, 0.0)
    t4 = np.where(on, np.maximum(v, 0.0) ** (n + 2.0) * np.abs(phix) ** 6, 0.0)
    lhs1 = float(np.trapezoid(t1, dx=h))
    lhs2 = float(np.trapezoid(t2, dx=h))
    rhs1 = float(np.trapezoid(t3, dx=h))
    rhs2 = float(np.trapezoid(t4, dx=h))
    lhs = lhs1 + lhs2
    rhs = rhs1 + rhs2
    return {
        "lhs_terms": (lhs1, lhs2),
        "rhs_terms": (rhs1, rhs2),
        "lhs": lhs,
        "rhs": rhs,
        "ratio": 0.0 if lhs == 0.0 else lhs / rhs,
    }


def energy_balance_monitor(series: TimeSeries, cutoff: np.ndarray, beta: float,
                           n: float, positivity_floor: float = 0.0) -> dict:
    """Weighted-energy balance residuals per record interval.

    With psi = t^beta * phi (phi the supplied spatial cutoff), compares
    the change of the weighted energy (1/2) |u_x|^2 psi against the
    weight-derivative gain, the weighted dissipation, and the commutator
    flux terms.  Signed residual = LHS change - RHS; nonpositive up to
    quadrature error for the inequality form.  Needs at least 2 records.

    All three terms are built from the same face discretization the time
    stepper uses (face-gradient energy, entropy face mobility, 4-point
    face third derivative).  The energy is convex quadratic in u, so an
    implicit Euler step dissipates at least the face-rate integral and
    the residual stays one-sided instead of merely small: a node-based
    u^n u_xxx^2 quadrature overstates the dissipation near a contact
    line by orders of magnitude (the flux there is throttled by the
    entropy mobility of the dry side, not by u^n of the wet node).
    """
    from .grid import face_third_derivative
    from .solver import face_mobility

    grid = series.grid
    if len(series.records) < 2:
        raise ValueError("need at least 2 records per monitored interval")
    cutoff = np.asarray(cutoff, dtype=float)
    if cutoff.shape != (grid.n_nodes,):
        raise ValueError("cutoff length must match the grid")
    h = grid.h
    phi_face = 0.5 * (cutoff[:-1] + cutoff[1:])

    def energy_of(values: np.ndarray) -> float:
        dv = np.diff(values) / h
        return float(np.sum(0.5 * phi_face * dv * dv) * h)

    def weighted_energy_of(values: np.ndarray, t: float) -> float:
        return energy_of(values) * t**beta

    def rate_terms(values: np.ndarray) -> tuple[float, float]:
        """(weighted dissipation, commutator) without the t^beta factor.

        -(diss + comm) is exactly <dE_phi/du, du/dt> of the semi-discrete
        scheme, by summation by parts against the face fluxes (the two
        outermost faces per end carry no flux).
        """
        v = values
        if positivity_floor > 0.0:
            d = v - positivity_floor
            vv = positivity_floor + 0.5 * (
                d + np.sqrt(d * d + (0.5 * positivity_floor) ** 2)
            )
        else:
            vv = np.maximum(v, 0.0)
        mob = face_mobility(vv[1:-2], vv[2:-1], n)
        d3f = face_third_derivative(v, h)
        # dE_phi/du at node i is -h * div(phi_face * face_gradient)_i
        dv = np.diff(v) / h
        w = np.zeros_like(v)
        w[1:-1] = -(phi_face[1:] * dv[1:] - phi_face[:-1] * dv[:-1]) / h
        w[0] = phi_face[0] * dv[0] / h
        w[-1] = -phi_face[-1] * dv[-1] / h
        grad_w = (w[2:-1] - w[1:-2]) / h
        diss = float(np.sum(mob * d3f * d3f * phi_face[1:-1]) * h)
        comm = -float(np.sum(mob * d3f * grad_w) * h) - diss
        return diss, comm

    rows = []
    prev = series.records[0]
    prev_E = weighted_energy_of(prev.values, prev.t)
    prev_g2 = float(
        np.trapezoid(0.5 * _grad_sq_nodes(prev.values, h, 1.0, 2.0) * cutoff, dx=h)
    )
    prev_diss, prev_comm = rate_terms(prev.values)
    for rec in series.records[1:]:
        E = weighted_energy_of(rec.values, rec.t)
        g2 = float(np.trapezoid(0.5 * _grad_sq_nodes(rec.values, h, 1.0, 2.0) * cutoff, dx=h))
        diss, comm = rate_terms(rec.values)
        dt = rec.t - prev.t
        # d/dt (t^beta) E term: trapezoid of beta t^(beta-1) * (1/2)|u_x|^2 phi
        tb_prev = beta * prev.t ** (beta - 1.0) if prev.t > 0.0 else 0.0
        tb_rec = beta * rec.t ** (beta - 1.0) if rec.t > 0.0 else 0.0
        weight_gain = 0.5 * dt * (tb_prev * prev_g2 + tb_rec * g2)
        diss_int = 0.5 * dt * (
            prev.t**beta * prev_diss + rec.t**beta * diss
        )
        comm_int = 0.5 * dt * (
            prev.t**beta * prev_comm + rec.t**beta * comm
        )
        lhs = E - prev_E - weight_gain
        rhs = -diss_int - comm_int
        scale = abs(weight_gain) + diss_int + abs(comm_int) + abs(E - prev_E)
        rows.append(
            {
                "t0": prev.t,
                "t1": rec.t,
                "lhs_change": lhs,
                "dissipation": diss_int,
                "commutator": comm_int,
                "residual": lhs - rhs,
                "scale": scale,
            }
        )
        prev, prev_E, prev_g2, prev_diss, prev_comm = rec, E, g2, diss, comm
    return {"beta": beta, "n": n, "intervals": rows}
