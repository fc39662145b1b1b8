"""Tikhonov regularization with L1 data fitting for discretized inverse problems.

The package covers the full pipeline of the underlying study: the midpoint
discretization of the Green's-function integral operator, matrix-free linear
algebra, the splitting solvers for the absolute-deviation objective and the
least-squares baseline, impulsive/Gaussian noise models with moment-bound
verification, closed-form rate calculators, and a reproducible Monte Carlo
harness that estimates convergence rates against the 3/8 reference slope.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, NumericalError
from .experiment import (
    METHODS,
    ExperimentConfig,
    MethodFit,
    RateCell,
    RateReport,
    alpha_grid,
    fit_loglog_slope,
    monte_carlo_rate_study,
    run_replicate,
)
from .linop import (
    DiscretizedOperator,
    Grid,
    assemble_operator,
    exact_data,
    green_kernel,
    identity_operator,
    make_midpoint_grid,
    true_solution,
)
from .noise import (
    ImpulsiveDecomposition,
    NoiseModel,
    decompose,
    empirical_moments,
    gaussian,
    gaussian_moment_bounds,
    gaussian_with_outliers,
    moment_samples,
    sample_noise,
)
from .numlin import CGResult, WeightedSpace, conjugate_gradient, power_iteration
from .solvers import (
    SolveResult,
    SolverConfig,
    adlpmm_solve,
    admm_solve,
    l2_tikhonov_solve,
    objective_l1,
    objective_l2,
    resolve_beta,
    soft_threshold,
)
from .theory import (
    HolderIndexFunction,
    RateExponents,
    SmoothnessParams,
    consistency_check_a_smoothing,
    effective_noise_level,
    optimal_gaussian_rate,
    phi_app_holder,
    rate_exponents,
)

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "METHODS",
    "ExperimentConfig",
    "MethodFit",
    "RateCell",
    "RateReport",
    "alpha_grid",
    "fit_loglog_slope",
    "monte_carlo_rate_study",
    "run_replicate",
    "DiscretizedOperator",
    "Grid",
    "assemble_operator",
    "exact_data",
    "green_kernel",
    "identity_operator",
    "make_midpoint_grid",
    "true_solution",
    "ImpulsiveDecomposition",
    "NoiseModel",
    "decompose",
    "empirical_moments",
    "gaussian",
    "gaussian_moment_bounds",
    "gaussian_with_outliers",
    "moment_samples",
    "sample_noise",
    "CGResult",
    "WeightedSpace",
    "conjugate_gradient",
    "power_iteration",
    "SolveResult",
    "SolverConfig",
    "adlpmm_solve",
    "admm_solve",
    "l2_tikhonov_solve",
    "objective_l1",
    "objective_l2",
    "resolve_beta",
    "soft_threshold",
    "__version__",
]
