"""Joint electron/TLS wavefunction solver."""

from ._backend import BACKEND
from .grid import Grid, SizingError, StepPlan, build_grid, plan_steps
from .solver import CouplingTable, EvolveResult, StabilityError, evolve
from .state import (DensityMatrixError, JointState, TlsDensityMatrix, initial_joint_state,
                    p2_of, trace_out_electron)
from .train import Passage, RunRecord, SolverOptions, p2_series, run_single, run_train

__all__ = [
    "BACKEND", "CouplingTable", "DensityMatrixError", "EvolveResult", "Grid", "JointState",
    "Passage", "RunRecord", "SizingError", "SolverOptions", "StabilityError", "StepPlan",
    "TlsDensityMatrix", "build_grid", "evolve", "initial_joint_state", "p2_of", "p2_series",
    "plan_steps", "run_single", "run_train", "trace_out_electron",
]
