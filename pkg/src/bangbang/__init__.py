"""Closed-form minimum-time speed profiles for a vehicle with linear and quadratic drag."""

from .arc import (
    Arc,
    ArcDomain,
    ArcInput,
    CaseKind,
    DragParams,
    acceleration,
    build_arc,
    space,
    state,
    velocity,
)
from .errors import (
    BangBangError,
    ConvergenceError,
    DomainError,
    InfeasibleProblemError,
    InvalidInputError,
    NoCrossingError,
)
from .inverse import InversionResult, InversionSettings, time_at_space, velocity_at_space
from .ocp import (
    BangBangProblem,
    BangBangSolution,
    Feasibility,
    Phase,
    Verdict,
    feasibility,
    sample_trajectory,
    solve,
)

__all__ = [
    "Arc", "ArcDomain", "ArcInput", "CaseKind", "DragParams",
    "acceleration", "build_arc", "space", "state", "velocity",
    "BangBangError", "ConvergenceError", "DomainError", "InfeasibleProblemError",
    "InvalidInputError", "NoCrossingError",
    "InversionResult", "InversionSettings", "time_at_space", "velocity_at_space",
    "BangBangProblem", "BangBangSolution", "Feasibility", "Phase", "Verdict",
    "feasibility", "sample_trajectory", "solve",
]
__version__ = "0.1.0"
