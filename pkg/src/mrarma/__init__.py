"""Integer-valued ARMA models built on mean-preserving stochastic rounding.

The package covers the exact calculus of the rounding operator, Skellam and
user-defined integer innovations, model simulation and moments, numerical
stationary marginal laws, four estimation routes with model selection, and
residual diagnostics. ``mrarma.cli`` exposes everything as a command-line
tool.
"""

from .alt_model import (MrarmaStarSpec, cond_pgf_star, cond_var_star,
                        simulate_star, transition_pmf_star)
from .diagnostics import (ResidualReport, pearson_residuals,
                          pearson_residuals_approx, sample_acf, sample_pacf)
from .errors import (InsufficientDataError, MrarmaError, NonConvergenceError,
                     NumericalError, TruncationError, UnsupportedModelError,
                     WindowTooSmallError, ZeroVarianceError)
from .estimation import (FitResult, InfoCriteria, aic_bic, fit_3sls_mrarma,
                         fit_cls_mrar, fit_mle_mrar, fit_mm_mrar, loglik_mrar,
                         mle_se, sample_acvf)
from .innovations import InnovationModel, Skellam, skellam_log_pmf
from .model import (MrarmaSpec, SimOutput, StationarityCheck, YuleWalkerBands,
                    check_invertible, check_stationary, cond_mean, cond_pgf,
                    cond_var, simulate, transition_pmf, uncond_mean,
                    yule_walker)
from .rounding import (FractionalSplit, TwoPointDist, round_dist, round_sample,
                       scaled_round_pmf, split)
from .stationary import (StationaryDist, exact_lag1_autocov,
                         mrar1_stationary, mrar1_transition_matrix,
                         mrma1_marginal, solve_invariant)
from .study import StudyConfig, StudyResult, run_study

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # rounding operator
    "FractionalSplit", "TwoPointDist", "split", "round_dist", "round_sample",
    "scaled_round_pmf",
    # innovations
    "InnovationModel", "Skellam", "skellam_log_pmf",
    # model
    "MrarmaSpec", "StationarityCheck", "SimOutput", "YuleWalkerBands",
    "check_stationary", "check_invertible", "simulate", "cond_mean",
    "cond_var", "uncond_mean", "yule_walker", "transition_pmf", "cond_pgf",
    # per-term rounding variant
    "MrarmaStarSpec", "simulate_star", "cond_var_star", "transition_pmf_star",
    "cond_pgf_star",
    # stationary laws
    "StationaryDist", "mrar1_transition_matrix", "solve_invariant",
    "mrar1_stationary", "mrma1_marginal", "exact_lag1_autocov",
    # estimation
    "FitResult", "InfoCriteria", "sample_acvf", "fit_mm_mrar", "fit_cls_mrar",
    "loglik_mrar", "fit_mle_mrar", "mle_se", "aic_bic", "fit_3sls_mrarma",
    # diagnostics
    "ResidualReport", "sample_acf", "sample_pacf", "pearson_residuals",
    "pearson_residuals_approx",
    # studies
    "StudyConfig", "StudyResult", "run_study",
    # errors
    "MrarmaError", "NumericalError", "TruncationError", "WindowTooSmallError",
    "InsufficientDataError", "ZeroVarianceError", "UnsupportedModelError",
    "NonConvergenceError",
]
