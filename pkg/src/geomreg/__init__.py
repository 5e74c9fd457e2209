"""Geometric-mean fixed-point regularization for linear inverse problems.

The estimator is the fixed point of ``w -> (F'F + eps^2 W^-2)^-1 F'y`` with
``W = diag(V'w)`` in the right singular basis of F.  Classical spectral
baselines (pseudoinverse, Tikhonov, TSVD, MAP), L-curve parameter selection
and verification utilities live alongside it.
"""
from ._backend import backend_name
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DecompositionError,
    DomainError,
    GeomRegError,
    NoRootError,
    NotApplicableError,
    ShapeError,
    SingularPointError,
    StageError,
)
from .experiments import BenchmarkReport, ConvergenceStudy, convergence_study, relative_error, run_benchmark
from .geomfix import (
    apply_A_eps,
    attractivity_check,
    closed_form_fixed_point,
    covariance_consistency_check,
    error_decomposition,
    fixed_point_modes,
    geometric_mean_value_and_grad,
    iterate_fixed_point,
    jacobian_A_eps,
    tangency_check,
)
from .lcurve import LCurve, lcurve_corner, lcurve_generate, parameter_grid
from .linalg import SingularSystem, pseudo_solve, read_csv_matrix, read_csv_vector, svd, write_csv
from .problem import InverseProblem, SimulationConfig, load_problem, save_problem, simulate
from .regularizers import (
    SolutionEstimate,
    discrepancy_principle_gamma,
    map_estimate,
    pinv_solve,
    tikhonov_solve,
    tsvd_solve,
)

__version__ = "0.1.0"
