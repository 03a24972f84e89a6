"""Gaussian process posterior-variance bounds, convergence diagnostics,
and averaged learning-curve estimates for one-dimensional inputs."""

from .kernels import (ALL_KINDS, ISOTROPIC_KINDS, MATERN_HALF, NEURAL_NETWORK,
                      PERIODIC, POLYNOMIAL, RATIONAL_QUADRATIC,
                      SQUARED_EXPONENTIAL, Kernel, KernelError,
                      LipschitzEstimate, kernel_matrix, kernel_vector,
                      lipschitz_constant, make_kernel, matern_half,
                      neural_network, periodic, polynomial,
                      rational_quadratic, squared_exponential)
from .gp import (FactorizationError, GPPosterior, PosteriorQuery, TrainingSet,
                 posterior_mean, posterior_variance)
from .bounds import (BallCount, BoundError, BoundReport, RadiusSchedule,
                     ball_count, bound_report, isotropic_bound,
                     lipschitz_bound, one_point_bound, radius_at,
                     two_point_bound)
from .convergence import (ConvergenceVerdict, Density, DensityError, GrowthRow,
                          ball_probability, bernoulli_central_moment,
                          binomial_moment_bound, check_corollary33,
                          check_theorem32, empirical_ball_growth, tabulated,
                          uniform, vanishing)
from .curves import (CurveError, CurveRow, LearningCurveTable, QuadratureError,
                     SegmentPlan, e1_bound, e2_bound, e_rho_bound,
                     greedy_select_n, i_n_integral, monte_carlo_curve,
                     segment_plan, spacing_density)
from .experiments import (ConfigError, ExperimentConfig, PRESETS, log_grid,
                          load_config, parse_config_text, plot_script,
                          preset_config, run_convergence_check,
                          run_learning_curve, run_variance_experiment)

__version__ = "0.1.0"

__all__ = [
    "ALL_KINDS", "ISOTROPIC_KINDS", "MATERN_HALF", "NEURAL_NETWORK",
    "PERIODIC", "POLYNOMIAL", "RATIONAL_QUADRATIC", "SQUARED_EXPONENTIAL",
    "Kernel", "KernelError", "LipschitzEstimate", "kernel_matrix",
    "kernel_vector", "lipschitz_constant", "make_kernel", "matern_half",
    "neural_network", "periodic", "polynomial", "rational_quadratic",
    "squared_exponential",
    "FactorizationError", "GPPosterior", "PosteriorQuery", "TrainingSet",
    "posterior_mean", "posterior_variance",
    "BallCount", "BoundError", "BoundReport", "RadiusSchedule", "ball_count",
    "bound_report", "isotropic_bound", "lipschitz_bound", "one_point_bound",
    "radius_at", "two_point_bound",
    "ConvergenceVerdict", "Density", "DensityError", "GrowthRow",
    "ball_probability", "bernoulli_central_moment", "binomial_moment_bound",
    "check_corollary33", "check_theorem32", "empirical_ball_growth",
    "tabulated", "uniform", "vanishing",
    "CurveError", "CurveRow", "LearningCurveTable", "QuadratureError",
    "SegmentPlan", "e1_bound", "e2_bound", "e_rho_bound", "greedy_select_n",
    "i_n_integral", "monte_carlo_curve", "segment_plan", "spacing_density",
    "ConfigError", "ExperimentConfig", "PRESETS", "log_grid", "load_config",
    "parse_config_text", "plot_script", "preset_config",
    "run_convergence_check", "run_learning_curve", "run_variance_experiment",
    "__version__",
]
