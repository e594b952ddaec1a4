"""1D thin-film equation laboratory: solver, free-boundary waiting times,
growth criteria, and functional-inequality monitors."""

__version__ = "0.1.0"

from .grid import (
    Grid1D,
    GridError,
    Profile,
    dirichlet_energy,
    local_average,
    make_grid,
    mass,
)
from .initial_data import (
    BoundPair,
    CriterionReport,
    concentrated,
    criterion_energy,
    criterion_mass,
    criterion_pnorm,
    dyadic_radii,
    oscillatory,
    power_law,
    theorem_bounds,
)
from .solver import (
    DomainExhausted,
    SolverConfig,
    SolverError,
    StepRejected,
    StepStats,
    TimeRecord,
    TimeSeries,
    face_mobility,
    run,
    step,
)

__all__ = [
    "Grid1D",
    "GridError",
    "Profile",
    "make_grid",
    "mass",
    "dirichlet_energy",
    "local_average",
    "BoundPair",
    "CriterionReport",
    "power_law",
    "oscillatory",
    "concentrated",
    "criterion_mass",
    "criterion_energy",
    "criterion_pnorm",
    "dyadic_radii",
    "theorem_bounds",
    "SolverConfig",
    "SolverError",
    "StepRejected",
    "DomainExhausted",
    "StepStats",
    "TimeRecord",
    "TimeSeries",
    "face_mobility",
    "step",
    "run",
]
