"""Solver and verification harness for the dual fractional operator ``d_t^alpha + (-Delta)^s``."""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    AntisymmetricField,
    Conclusion,
    ExperimentReport,
    FracParams,
    FunctionDescriptor,
    HistoryField,
    Hypothesis,
    Separable,
    SpaceGrid,
    Tail,
    antisymmetric_difference,
    reflect_point,
)
from .frac_space import SpaceQuadratureConfig, SpatialField, frac_laplacian, frac_laplacian_field
from .frac_time import TimeQuadratureConfig, TimeTrace, marchaud, marchaud_levels
from .solver import Problem, ReactionSpec, SolveConfig, assemble_operator_matrix, residual, run_ivp, step

__all__ = [
    "__version__",
    "AntisymmetricField",
    "Conclusion",
    "ExperimentReport",
    "FracParams",
    "FunctionDescriptor",
    "HistoryField",
    "Hypothesis",
    "Separable",
    "SpaceGrid",
    "Tail",
    "antisymmetric_difference",
    "reflect_point",
    "SpaceQuadratureConfig",
    "SpatialField",
    "frac_laplacian",
    "frac_laplacian_field",
    "TimeQuadratureConfig",
    "TimeTrace",
    "marchaud",
    "marchaud_levels",
    "Problem",
    "ReactionSpec",
    "SolveConfig",
    "assemble_operator_matrix",
    "residual",
    "run_ivp",
    "step",
]
