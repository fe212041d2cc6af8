"""Variable projection solvers for separable nonlinear least squares with
Tikhonov regularization on the linear variables and differentiable
regularization on the nonlinear parameters, applied to semi-blind Gaussian
deblurring."""

from .exact import (
    ReducedEval,
    SolverConfig,
    SolverError,
    SolverTrace,
    evaluate_reduced,
    jacobian_f,
    residual_f,
    solve_exact,
    solve_x,
)
from .inexact import InexactEval, ToleranceSchedule, inexact_evaluate, schedule_epsilon, solve_inexact
from .linalg import LinOp, LsqrResult, dense_normal_solve, estimate_op_norm, lsqr_solve, solve_spd
from .operators import (
    GaussianBlur1D,
    GaussianBlur2D,
    OperatorFamily,
    PeriodicGaussianBlur1D,
    RegOperator,
    bccb_apply,
    gaussian_column_1d,
    gaussian_psf_2d,
    laplacian_apply,
    toeplitz_apply_1d,
)
from .problem import ModelError, TikhonovProblem
from .regularizers import (
    DomainError,
    LogBarrierRegularizer,
    NoRegularizer,
    QuadraticRegularizer,
    RegStack,
    Regularizer,
)
from .spectral import (
    FourierSymbols,
    SpectralKernel,
    check_noblur_conditions,
    dphi_spectral,
    fourier_symbols,
    gaussian_spectral_kernel,
    phi_spectral,
)

__all__ = [
    "ReducedEval", "SolverConfig", "SolverError", "SolverTrace",
    "evaluate_reduced", "jacobian_f", "residual_f", "solve_exact", "solve_x",
    "InexactEval", "ToleranceSchedule", "inexact_evaluate", "schedule_epsilon",
    "solve_inexact",
    "LinOp", "LsqrResult", "dense_normal_solve", "estimate_op_norm",
    "lsqr_solve", "solve_spd",
    "GaussianBlur1D", "GaussianBlur2D", "OperatorFamily",
    "PeriodicGaussianBlur1D", "RegOperator", "bccb_apply",
    "gaussian_column_1d", "gaussian_psf_2d", "laplacian_apply",
    "toeplitz_apply_1d",
    "ModelError", "TikhonovProblem",
    "DomainError", "LogBarrierRegularizer", "NoRegularizer",
    "QuadraticRegularizer", "RegStack", "Regularizer",
    "FourierSymbols", "SpectralKernel", "check_noblur_conditions",
    "dphi_spectral", "fourier_symbols", "gaussian_spectral_kernel",
    "phi_spectral",
]

__version__ = "0.1.0"
