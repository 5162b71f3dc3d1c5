"""1D Lagrangian reacting-flow solver with a theorem-audit diagnostics layer."""

from .grid import BoundaryCondition, Mesh, State, StepControl, Trajectory
from .model import FluidParams, ReactionRate

__all__ = [
    "BoundaryCondition",
    "FluidParams",
    "Mesh",
    "ReactionRate",
    "State",
    "StepControl",
    "Trajectory",
]

__version__ = "0.1.0"
