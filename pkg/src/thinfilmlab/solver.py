"""Implicit time integrator for the 1D thin-film equation

    u_t = -(u^n u_xxx)_x

in conservative face-flux form with an entropy-consistent mobility mean,
Newton iteration on a banded Jacobian, and adaptive step control.

Structure the downstream diagnostics rely on:

* exact discrete mass conservation per accepted step (flux telescoping),
* nonnegativity enforced by step rejection plus a round-off clamp,
* exact amplitude-time covariance u -> lam*u, t -> lam^(-n)*t of the
  discrete flux (the mobility mean is homogeneous of degree n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .grid import Profile, face_third_derivative, mass

__all__ = [
    "SolverConfig",
    "StepStats",
    "TimeRecord",
    "TimeSeries",
    "SolverError",
    "StepRejected",
    "DomainExhausted",
    "face_mobility",
    "residual",
    "step",
    "run",
]

MACHINE_EPS = float(np.finfo(float).eps)

# deepest contact-line dip tolerated on a precursor film, relative to the
# maximum film height; dips are kept in the state (mass-conserving) and
# stay invisible to support detection, which only sees positive heights
DIP_ALLOWANCE_REL = 1e-2


class SolverError(RuntimeError):
    pass


class StepRejected(SolverError):
    """Newton failed to converge or positivity was violated; retry with smaller dt."""


class DomainExhausted(SolverError):
    """Support reached the clamped domain boundary; the run cannot continue."""


@dataclass(frozen=True)
class SolverConfig:
    n: float = 2.5
    dt_init: float = 1e-8
    dt_min: float = 1e-16
    dt_max: float = 1e-2
    newton_tol: float = 1e-11
    newton_max_iter: int = 12
    mobility_variant: str = "entropy_consistent"  # or arithmetic_mean, regularized
    mobility_eps: float = 0.0
    support_threshold_rel: float = 1e-7
    positivity_floor: float = 0.0
    dt_grow: float = 1.5
    dt_shrink: float = 0.5
    easy_iters: int = 3

    def __post_init__(self):
        if not 0.0 < self.n < 3.0:
            raise ValueError(f"mobility exponent must lie in (0, 3), got {self.n}")
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})"
            )
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.mobility_variant not in ("entropy_consistent", "arithmetic_mean", "regularized"):
            raise ValueError(f"unknown mobility variant {self.mobility_variant!r}")
        if self.mobility_eps < 0:
            raise ValueError("mobility_eps must be nonnegative")
        if not 0.0 < self.support_threshold_rel < 1.0:
            raise ValueError("support_threshold_rel must lie in (0, 1)")


@dataclass(frozen=True)
class StepStats:
    dt_used: float
    newton_iters: int
    residual_final: float
    dt_rejections: int


@dataclass(frozen=True)
class TimeRecord:
    t: float
    values: np.ndarray
    scalars: dict


@dataclass
class TimeSeries:
    records: list = field(default_factory=list)
    grid: Optional[object] = None
    completed: bool = True
    failure: Optional[str] = None

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def __len__(self):
        return len(self.records)


def face_mobility(a, b, n: float, variant: str = "entropy_consistent", eps: float = 0.0):
    """Mobility mean M(a, b) at a face between heights a and b.

    entropy_consistent: difference-quotient mean (a-b)/(G'(a)-G'(b)) with
    G''(s) = s^(-n); reduces to a^n at a = b and vanishes when either side
    is dry (for n >= 1).  arithmetic_mean: (a^n + b^n)/2.  regularized:
    arithmetic mean of (.+eps)^n.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("face_mobility requires nonnegative heights")
    if variant == "arithmetic_mean":
        return 0.5 * (a**n + b**n)
    if variant == "regularized":
        return 0.5 * ((a + eps) ** n + (b + eps) ** n)

    # entropy-consistent branch; split on n = 1 where G'(s) = log s
    near = np.isclose(a, b, rtol=1e-9, atol=0.0) | (a == b)
    out = np.empty(np.broadcast(a, b).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        if n == 1.0:
            m = (a - b) / (np.log(a) - np.log(b))
        else:
            m = (a - b) * (1.0 - n) / (a ** (1.0 - n) - b ** (1.0 - n))
    mean = 0.5 * (a + b)
    out = np.where(near, np.broadcast_to(mean, out.shape) ** n, m)
    # a dry side kills the flux for n >= 1; for n < 1 the limit is finite
    if n >= 1.0:
        dry = (a == 0.0) | (b == 0.0)
        out = np.where(dry, 0.0, out)
    else:
        wet = np.where(a == 0.0, b, np.where(b == 0.0, a, np.inf))
        limit = (1.0 - n) * wet**n
        out = np.where(((a == 0.0) ^ (b == 0.0)), limit, out)
        out = np.where((a == 0.0) & (b == 0.0), 0.0, out)
    return out if out.shape else float(out)


def _interior_face_flux(values: np.ndarray, h: float, cfg: SolverConfig) -> np.ndarray:
    """Flux u^n u_xxx at interior faces i+1/2, i = 1..n-3.

    Negative heights (transient Newton iterates) are clipped inside the
    mobility so the residual stays defined.  On a precursor film the clip
    level is a small fraction of the film height rather than zero: a node
    clamped to exactly zero would kill both of its face mobilities
    (n >= 1) and become a permanent barrier that pins the apparent
    contact line, whereas a floored mobility lets it refill by flux,
    which conserves mass exactly.
    """
    floor = cfg.positivity_floor
    if floor > 0.0:
        # smooth clip: agrees with max(values, floor) away from the
        # kink but is C^inf, which keeps the Newton direction honest for
        # nodes hovering at the clip level (the contact-line dip)
        d = values - floor
        v = floor + 0.5 * (d + np.sqrt(d * d + (0.5 * floor) ** 2))
    else:
        v = np.maximum(values, 0.0)
    mob = face_mobility(v[1:-2], v[2:-1], cfg.n, cfg.mobility_variant, cfg.mobility_eps)
    return mob * face_third_derivative(values, h)


def residual(p_new_values: np.ndarray, p_old_values: np.ndarray, dt: float, h: float,
             cfg: SolverConfig) -> np.ndarray:
    """Scaled implicit-Euler defect, one dimensionless entry per node.

    Interior nodes i = 2..n-3 carry the flux-form defect
    u_new - u_old + (dt/h)*(F_{i+1/2} - F_{i-1/2}) with F = u^n u_xxx
    evaluated at u_new; the two clamped nodes at each end carry the
    constraint defect u_new.  The whole vector is divided by the height
    scale max(|u_old|, |u_new|), so newton_tol bounds the relative height
    defect and is invariant under amplitude-time rescaling.
    """
    if p_new_values.shape != p_old_values.shape:
        raise ValueError("profile length mismatch")
    flux = _interior_face_flux(p_new_values, h, cfg)
    # no-flux walls: the two outermost faces at each end carry nothing,
    # so the node adjacent to the clamped band is inert (on a precursor
    # film it would otherwise drain through zero against the clamp
    # curvature and poison the Newton iteration)
    flux[0] = flux[1] = 0.0
    flux[-1] = flux[-2] = 0.0
    res = np.empty_like(p_new_values)
    res[:2] = p_new_values[:2]
    res[-2:] = p_new_values[-2:]
    res[2:-2] = (p_new_values[2:-2] - p_old_values[2:-2]) + (dt / h) * (
        flux[1:] - flux[:-1]
    )
    scale = max(
        float(np.max(np.abs(p_old_values))), float(np.max(np.abs(p_new_values))), 1e-300
    )
    return res / scale


_N_COLORS = 5  # residual row i touches columns i-2..i+2


def _banded_jacobian(values: np.ndarray, old: np.ndarray, dt: float, h: float,
                     cfg: SolverConfig, base: np.ndarray) -> np.ndarray:
    """Finite-difference Jacobian in scipy solve_banded (2, 2) layout.

    Columns are probed in 5 colors (pentadiagonal stencil), so the full
    Jacobian costs 5 residual evaluations.
    """
    n = len(values)
    scale = max(float(np.max(np.abs(values))), 1e-30)
    delta = math.sqrt(MACHINE_EPS) * scale
    ab = np.zeros((5, n))
    for color in range(_N_COLORS):
        pert = values.copy()
        cols = np.arange(color, n, _N_COLORS)
        pert[cols] += delta
        dres = (residual(pert, old, dt, h, cfg) - base) / delta
        for j in cols:
            lo, hi = max(0, j - 2), min(n, j + 3)
            rows = np.arange(lo, hi)
            ab[2 + rows - j, j] = dres[lo:hi]
    return ab


def step(
    p: Profile, dt: float, cfg: SolverConfig, guess: Optional[np.ndarray] = None
) -> tuple[Profile, StepStats]:
    """One implicit-Euler step of size dt.

    guess, if given, seeds the Newton iteration (e.g. a time-extrapolated
    predictor); the default is the current profile.  Raises StepRejected
    on Newton failure or positivity violation (the caller halves dt),
    DomainExhausted if support touches the clamped boundary region.
    """
    h = p.grid.h
    old = p.values
    umax = float(np.max(old))
    if umax > 0.0:
        # a precursor film (positivity_floor > 0) is not support
        thresh = max(cfg.support_threshold_rel * umax, 10.0 * cfg.positivity_floor)
        if np.any(old[:3] > thresh) or np.any(old[-3:] > thresh):
            raise DomainExhausted("support reached the clamped domain boundary")

    u = old.copy() if guess is None else np.asarray(guess, dtype=float).copy()
    res = residual(u, old, dt, h, cfg)
    res_norm = float(np.max(np.abs(res)))
    iters = 0
    while res_norm > cfg.newton_tol and iters < cfg.newton_max_iter:
        ab = _banded_jacobian(u, old, dt, h, cfg, res)
        try:
            du = solve_banded((2, 2), ab, res)
        except np.linalg.LinAlgError:
            raise StepRejected("singular Newton system") from None
        # damped update: backtrack while the residual fails to decrease
        lam = 1.0
        for _ in range(6):
            trial = u - lam * du
            trial_res = residual(trial, old, dt, h, cfg)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm or trial_norm <= cfg.newton_tol:
                break
            lam *= 0.5
        else:
            raise StepRejected("Newton line search stagnated")
        u, res, res_norm = trial, trial_res, trial_norm
        iters += 1
    if iters == 0:
        iters = 1  # trivial fixed point still counts one evaluation
    if res_norm > cfg.newton_tol:
        raise StepRejected(f"Newton residual {res_norm:.3e} > tol after {iters} iters")

    new_umax = float(np.max(u)) if np.max(u) > 0 else 0.0
    # on a precursor film the advancing contact line digs a capillary dip
    # one cell ahead of itself, of depth set by the touchdown curvature
    # (~ h^2), not by the film thickness; rejecting such dips freezes the
    # front in a rejection storm, so tolerate them up to a small fraction
    # of the film height and let the front advance over and refill them
    if cfg.positivity_floor > 0.0:
        neg_floor = -max(DIP_ALLOWANCE_REL * max(new_umax, umax), cfg.positivity_floor)
    else:
        neg_floor = -10.0 * MACHINE_EPS * max(new_umax, umax)
    if float(np.min(u)) < neg_floor:
        raise StepRejected(f"positivity violated (min {float(np.min(u)):.3e})")
    if cfg.positivity_floor > 0.0:
        # keep sub-floor undershoots in the state: clamping them would
        # inject mass every step while the contact line drains the
        # precursor, and the floored mobility lets them refill by flux
        pass
    else:
        # strictly positive regime: clamp round-off negatives only
        u = np.where(u < 0.0, 0.0, u)
    u[:2] = 0.0
    u[-2:] = 0.0
    return (
        p.with_values(u),
        StepStats(dt_used=dt, newton_iters=iters, residual_final=res_norm, dt_rejections=0),
    )


def run(
    u0: Profile,
    cfg: SolverConfig,
    t_end: float,
    observe_every: float = 0.0,
    observers: Optional[dict] = None,
) -> TimeSeries:
    """Adaptive implicit-Euler loop over [0, t_end].

    Records a snapshot (with mass, Dirichlet energy, and any observer
    scalars) at t = 0, every observe_every of simulated time, and at
    t_end.  observers maps names to callables Profile -> float.
    Deterministic: same inputs give a bit-identical series.
    """
    from .grid import dirichlet_energy

    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    observers = observers or {}

    series = TimeSeries(grid=u0.grid)

    def record(t: float, p: Profile, stats: Optional[StepStats]) -> None:
        scalars = {
            "mass": mass(p),
            "dirichlet_energy": dirichlet_energy(p),
            "min_u": float(np.min(p.values)),
            "max_u": float(np.max(p.values)),
        }
        if stats is not None:
            scalars["dt_used"] = stats.dt_used
            scalars["newton_iters"] = float(stats.newton_iters)
        for name, fn in observers.items():
            scalars[name] = float(fn(p))
        series.records.append(TimeRecord(t=t, values=p.values.copy(), scalars=scalars))

    p = u0
    t = 0.0
    record(t, p, None)
    if t_end == 0.0:
        return series

    dt = cfg.dt_init
    next_obs = observe_every if observe_every > 0.0 else t_end
    rejections_this_step = 0
    slope = None  # time derivative estimate from the last accepted step
    while t < t_end:
        dt = min(dt, t_end - t, cfg.dt_max)
        # land exactly on the observation instant
        if observe_every > 0.0 and t + dt > next_obs:
            dt = next_obs - t
        # extrapolated predictor: seeds Newton much closer to the new
        # state, which is what sets the workable dt at steep fronts
        guess = None if slope is None else p.values + dt * slope
        try:
            p_new, stats = step(p, dt, cfg, guess=guess)
        except StepRejected:
            dt *= cfg.dt_shrink
            rejections_this_step += 1
            if dt < cfg.dt_min:
                series.completed = False
                series.failure = f"dt underflow below dt_min at t = {t:.6g}"
                record(t, p, None)
                return series
            continue
        except DomainExhausted as exc:
            series.completed = False
            series.failure = str(exc)
            record(t, p, None)
            return series
        slope = (p_new.values - p.values) / dt
        t += dt
        p = p_new
        if t >= next_obs - 1e-12 * max(t_end, 1.0) or t >= t_end:
            record(
                t,
                p,
                StepStats(stats.dt_used, stats.newton_iters, stats.residual_final,
                          rejections_this_step),
            )
            while next_obs <= t + 1e-12 * max(t_end, 1.0):
                next_obs += observe_every if observe_every > 0.0 else t_end
        rejections_this_step = 0
        if stats.newton_iters <= cfg.easy_iters:
            dt = min(dt * cfg.dt_grow, cfg.dt_max)
    return series


def with_precursor(p: Profile, floor: float) -> Profile:
    """Lift a profile onto a thin precursor film of absolute height floor.

    Strictly positive data keeps the degenerate mobility away from its
    zero and lets the apparent contact line move; the film is thin enough
    to sit far below any support-detection threshold.  The clamped
    boundary nodes stay at zero.
    """
    if floor < 0:
        raise ValueError("precursor floor must be nonnegative")
    u = np.maximum(p.values, floor)
    u[:2] = 0.0
    u[-2:] = 0.0
    return p.with_values(u)


def rescaled_config(cfg: SolverConfig, lam: float) -> SolverConfig:
    """Time-rescaled config matching the amplitude map u -> lam * u.

    Under u -> lam*u the thin-film flow is exactly the original flow run
    at rate lam^n, so matched discrete trajectories use dt -> lam^(-n) dt.
    The scaled Newton residual is invariant under this map, so the
    tolerance carries over unchanged.
    """
    s = lam ** (-cfg.n)
    return replace(
        cfg,
        dt_init=cfg.dt_init * s,
        dt_min=cfg.dt_min * s,
        dt_max=cfg.dt_max * s,
    )
