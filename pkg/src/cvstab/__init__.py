"""cvstab: loss-stability estimation and cross-validation CI diagnostics
for soft-thresholded least squares, ridge, and the Lasso under a Gaussian
linear model.
"""

from ._version import __version__
from .cv import (
    ConfInterval,
    CvRun,
    FoldPlan,
    ci_diff_conservative,
    ci_single,
    clt_statistic,
    cv_error,
    cv_test_error,
    make_folds,
    normal_quantile,
    within_fold_variance,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateSigmaError,
    SingularDesignError,
)
from .estimators import (
    EstimatorConfig,
    FitResult,
    PenaltyRule,
    fit_lasso,
    fit_ols,
    fit_ridge,
    fit_st,
    select_lambda_inner_cv,
    soft_threshold,
)
from .linmodel import (
    DataPoint,
    Dataset,
    ModelSpec,
    cond_risk_diff,
    cond_risk_single,
    loss_diff,
    loss_single,
    sample_dataset,
)
from .stability import (
    RateFit,
    StabilityEstimate,
    mc_constant_C,
    mc_gamma,
    mc_sigma2,
    rate_fit,
    relative_stability,
)

__all__ = [
    "__version__",
    "ModelSpec", "Dataset", "DataPoint",
    "sample_dataset", "loss_single", "loss_diff", "cond_risk_single", "cond_risk_diff",
    "PenaltyRule", "EstimatorConfig", "FitResult",
    "fit_ols", "fit_st", "fit_ridge", "fit_lasso", "soft_threshold", "select_lambda_inner_cv",
    "FoldPlan", "CvRun", "ConfInterval",
    "make_folds", "cv_error", "cv_test_error", "within_fold_variance",
    "clt_statistic", "ci_single", "ci_diff_conservative", "normal_quantile",
    "StabilityEstimate", "RateFit",
    "mc_sigma2", "mc_gamma", "mc_constant_C", "relative_stability", "rate_fit",
    "ConfigurationError", "ConvergenceError", "DegenerateSigmaError", "SingularDesignError",
]
