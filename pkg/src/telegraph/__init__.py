"""Spectral solver and verification toolkit for the time-periodic Neumann
problem of the damped wave (telegraph) equation and its correlated random
walk form."""

from .spectral import (
    Basis,
    GridField,
    ProblemParams,
    SpectralField,
    analyze,
    dt,
    dx,
    inner,
    norm_U,
    norm_V,
    norm_Z,
    sobolev_norm,
    synthesize,
    trace_x,
)
from .telegraph import (
    SolveReport,
    apply_LTE,
    apply_LTE_tilde,
    kernel_basis,
    multiplier,
    smoothing_report,
    solvability_check,
    solve_LTE,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "GridField",
    "ProblemParams",
    "SolveReport",
    "SpectralField",
    "analyze",
    "apply_LTE",
    "apply_LTE_tilde",
    "dt",
    "dx",
    "inner",
    "kernel_basis",
    "multiplier",
    "norm_U",
    "norm_V",
    "norm_Z",
    "smoothing_report",
    "sobolev_norm",
    "solvability_check",
    "solve_LTE",
    "synthesize",
    "trace_x",
]
