"""Linear and nonlinear Schrodinger equations on the quarter-plane by the unified
transform, with function-space norms, a Picard solver and a finite-difference
oracle."""

from .exceptions import (BOutOfRange, CornerMismatchWarning, FarWallLeak, GridMismatch,
                         InsufficientGrid, NoConvergence, NonDecayingTrace,
                         ParameterOutOfRange, ParseError, QuadratureFailure, QwaveError,
                         ResolutionWarning, SlowDecay, SupportViolation, TruncationWarning,
                         ValidationError, VerificationFailure)
from .families import (Bump1D, ExpDecay1D, Gaussian1D, Profile, SeparableField,
                       SeparableForcing, free_gaussian)
from .linear import (GridForcing, LinearProblem, SolutionBundle, UTMSolver,
                     global_relation_residual, inverse_quarter_plane, utm_solve)
from .nls import (IterationLog, Lifespan, NlsProblem, PicardSolver, fixed_point_residual,
                  lifespan_bound, nonlinear_estimate_ratio, picard_solve, picard_step)
from .problem import ProblemFile, load_problem, serialize
from .quadrature import ContourPath, QuadratureConfig
from .reference import CrankNicolsonSolver, FdConfig, cn_solve, compare_fields
from .spaces import (AdmissiblePair, NormReport, PlaneField, admissible_pair,
                     bessel_potential_norm, boundary_space_norm, extension_bound_ratio,
                     hardy_quotient, linear_estimate_ratio, norm_report, slobodecki_seminorm,
                     sobolev_norm_plane, strichartz_norm, zero_extension_norm)
from .transforms import (BoundaryTrace, WaveField, dispersion, half_line_ft,
                         quarter_plane_ft, tilde_transform)
from .verify import run_verification

__all__ = [
    "BOutOfRange", "CornerMismatchWarning", "FarWallLeak", "GridMismatch",
    "InsufficientGrid", "NoConvergence", "NonDecayingTrace", "ParameterOutOfRange",
    "ParseError", "QuadratureFailure", "QwaveError", "ResolutionWarning", "SlowDecay",
    "SupportViolation", "TruncationWarning", "ValidationError", "VerificationFailure",
    "Bump1D", "ExpDecay1D", "Gaussian1D", "Profile", "SeparableField", "SeparableForcing",
    "free_gaussian", "GridForcing", "LinearProblem", "SolutionBundle", "UTMSolver",
    "global_relation_residual", "inverse_quarter_plane", "utm_solve", "IterationLog",
    "Lifespan", "NlsProblem", "PicardSolver", "fixed_point_residual", "lifespan_bound",
    "nonlinear_estimate_ratio", "picard_solve", "picard_step", "ProblemFile",
    "load_problem", "serialize", "ContourPath", "QuadratureConfig", "CrankNicolsonSolver",
    "FdConfig", "cn_solve", "compare_fields", "AdmissiblePair", "NormReport", "PlaneField",
    "admissible_pair", "bessel_potential_norm", "boundary_space_norm",
    "extension_bound_ratio", "hardy_quotient", "linear_estimate_ratio", "norm_report",
    "slobodecki_seminorm", "sobolev_norm_plane", "strichartz_norm", "zero_extension_norm",
    "BoundaryTrace", "WaveField", "dispersion", "half_line_ft", "quarter_plane_ft",
    "tilde_transform", "run_verification",
]

__version__ = "0.1.0"
