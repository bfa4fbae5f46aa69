"""Absolute stability analysis of discrete-time Lur'e feedback systems.

The library decides absolute stability of the interconnection of an LTI
block ``G = (A, B, C, D)`` with a repeated slope-restricted (optionally odd)
static nonlinearity, using static O'Shea-Zames-Falb multiplier LMIs.  When
the stability LMI fails, the dual LMI is solved, a rank-1 certificate is
extracted, and an explicit destabilizing piecewise-linear nonlinearity is
constructed and demonstrated by simulation.
"""

from .errors import (
    AssumptionViolatedError,
    CertificateInconsistentError,
    ConeViolationError,
    InternalContradictionError,
    LurestabError,
    NumericFailureError,
    StructuralError,
    UnsupportedModeError,
)
from .linalg import EigSystem, numerical_rank_and_factor, spectral_norm, sym_eig, symmetrize
from .system import (
    NonlinearityClass,
    SlopeBand,
    StateSpaceSystem,
    ValidationReport,
    spectral_radius,
    validate,
)
from .cones import ConeTag, abs_d, is_member, proj_split, random_member
from .multipliers import Multiplier, build_multiplier, quad_form
from .lmi import LmiKind, SdpFeasibilityProblem, build_dual, build_primal
from .engine import Residuals, SolveResult, SolverSettings, reduce_rank, solve
from .pwl import PiecewiseLinearMap, SlopeReport, eval_pwl, verify_slope
from .detector import DualCertificate, Inconclusive, build_pwl, extract_certificate
from .simulate import Trajectory, simulate, solve_loop, vector_field
from .report import AnalysisReport, analyze

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "AssumptionViolatedError",
    "CertificateInconsistentError",
    "ConeTag",
    "ConeViolationError",
    "DualCertificate",
    "EigSystem",
    "Inconclusive",
    "InternalContradictionError",
    "LmiKind",
    "LurestabError",
    "Multiplier",
    "NonlinearityClass",
    "NumericFailureError",
    "PiecewiseLinearMap",
    "Residuals",
    "SdpFeasibilityProblem",
    "SlopeBand",
    "SlopeReport",
    "SolveResult",
    "SolverSettings",
    "StateSpaceSystem",
    "StructuralError",
    "Trajectory",
    "UnsupportedModeError",
    "ValidationReport",
    "abs_d",
    "analyze",
    "build_dual",
    "build_multiplier",
    "build_primal",
    "build_pwl",
    "eval_pwl",
    "extract_certificate",
    "is_member",
    "numerical_rank_and_factor",
    "proj_split",
    "quad_form",
    "random_member",
    "reduce_rank",
    "simulate",
    "solve",
    "solve_loop",
    "spectral_norm",
    "spectral_radius",
    "sym_eig",
    "symmetrize",
    "validate",
    "vector_field",
    "verify_slope",
]
