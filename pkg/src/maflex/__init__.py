"""Movable-antenna beamforming in the radiating near field.

Position and weight design for beam nulling and multi-beam forming with a
linear array of movable antennas, closed-form layouts, benchmark schemes,
and worst-case analysis of antenna position errors.
"""

from .errors import (
    DegenerateDirection,
    EmptyFeasibleSet,
    Infeasible,
    InfeasibleInput,
    MaflexError,
    RankDeficient,
    SolverFailure,
)
from .geometry import ArrayLimits, PolarTarget, beam_gain, steering_vector

__version__ = "0.1.0"

__all__ = [
    "ArrayLimits",
    "DegenerateDirection",
    "EmptyFeasibleSet",
    "Infeasible",
    "InfeasibleInput",
    "MaflexError",
    "PolarTarget",
    "RankDeficient",
    "SolverFailure",
    "beam_gain",
    "steering_vector",
]
