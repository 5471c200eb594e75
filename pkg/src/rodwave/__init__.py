"""Numerical laboratory for a semilinear damped wave equation on a rod with a
dynamic tip-mass boundary condition."""

__version__ = "0.1.0"

from .fem import AssembledOperators, Mesh1D, assemble
from .model import InitialData, ModelParams, make_initial_data, validate
from .thresholds import ThresholdConstants, compute_thresholds
from .timestepping import StepControl, State, Trajectory, run

__all__ = [
    "__version__",
    "AssembledOperators", "Mesh1D", "assemble",
    "InitialData", "ModelParams", "make_initial_data", "validate",
    "ThresholdConstants", "compute_thresholds",
    "StepControl", "State", "Trajectory", "run",
]
