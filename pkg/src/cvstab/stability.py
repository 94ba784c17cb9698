"""Monte-Carlo estimation of the loss-stability quantities.

sigma^2 uses the product rewriting E[h(Z0,Z)(h(Z0,Z~) - h(Z~0,Z~))]; gamma
uses the closed-form conditional risks in place of E[h | Z]. Contributions
are computed by the active kernel backend, which samples each replication's
sufficient statistics directly (exact for this model family), then reduced
here with compensated summation in replication order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import Stream, rep_keys
from .errors import ConfigurationError, ConvergenceError, SingularDesignError
from .estimators import EstimatorConfig
from .kernels import get_backend
from .linmodel import ModelSpec

_FAMILY_CODE = {"ols": 0, "st": 1, "ridge": 2, "lasso": 3}

_STATUS_MESSAGES = {
    1: "singular or badly conditioned system",
    2: "coordinate descent did not converge",
    3: "gamma sampler exhausted its counter budget",
}


@dataclass(frozen=True)
class StabilityEstimate:
    """Monte-Carlo point estimate with its standard error."""

    value: float
    std_err: float
    replications: int
    quantity: str  # "sigma2" | "gamma" | "r" | "C"

    @property
    def per_rep_std(self) -> float:
        return self.std_err * math.sqrt(self.replications)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple


def _reduce(contrib: np.ndarray, quantity: str) -> StabilityEstimate:
    M = contrib.size
    mean = math.fsum(contrib) / M
    var = math.fsum((contrib - mean) ** 2) / (M - 1) if M > 1 else 0.0
    se = math.sqrt(var / M)
    if quantity in ("sigma2", "C") and mean < -3.0 * se:
        warnings.warn(
            f"{quantity} estimate {mean:g} is below -3 standard errors; "
            "the target quantity is nonnegative"
        )
    return StabilityEstimate(mean, se, M, quantity)


def _raise_status(status: np.ndarray) -> None:
    bad = np.nonzero(status)[0]
    if bad.size == 0:
        return
    r = int(bad[0])
    code = int(status[r])
    msg = f"replication {r}: {_STATUS_MESSAGES.get(code, f'error {code}')}"
    if code == 2:
        raise ConvergenceError(msg)
    raise SingularDesignError(msg)


def _validate(spec: ModelSpec, est1: EstimatorConfig, est2: Optional[EstimatorConfig], n: int, M: int):
    if n <= spec.p:
        raise ConfigurationError(f"stability estimation needs n > p, got n={n}, p={spec.p}")
    if M < 2:
        raise ConfigurationError("M must be >= 2")
    inner1 = est1.family == "lasso" and est1.penalty.kind == "inner-cv"
    if est2 is not None:
        inner2 = est2.family == "lasso" and est2.penalty.kind == "inner-cv"
        if inner1 != inner2:
            raise ConfigurationError("cannot mix inner-CV and deterministic penalties in a comparison")
        if inner1 and est1.penalty.inner_folds != est2.penalty.inner_folds:
            raise ConfigurationError("comparison configs disagree on the inner fold count")
    return inner1


def _run_batch(kind: str, spec, est1, est2, n, M, stream):
    backend = get_backend()
    keys = rep_keys(stream, M)
    beta = spec.beta_star
    mode = 0 if est2 is None else 1
    inner = _validate(spec, est1, est2, n, M)
    tol, max_iter = 1e-8, 10_000
    if inner:
        kf = est1.penalty.inner_folds
        if not 2 <= kf <= n:
            raise ConfigurationError(f"inner fold count {kf} invalid for n={n}")
        d2 = est2.delta if est2 is not None else 0.0
        fn = backend.sigma2_innercv_batch if kind == "sigma2" else backend.gamma_innercv_batch
        contrib, _, status = fn(keys, n, beta, spec.tau, mode, kf, est1.delta, d2, tol, max_iter)
    else:
        f1 = _FAMILY_CODE[est1.family]
        lam1 = est1.effective_penalty(n)
        f2 = _FAMILY_CODE[est2.family] if est2 is not None else f1
        lam2 = est2.effective_penalty(n) if est2 is not None else lam1
        fn = backend.sigma2_batch if kind == "sigma2" else backend.gamma_batch
        contrib, status = fn(keys, n, beta, spec.tau, mode, f1, lam1, f2, lam2, tol, max_iter)
    _raise_status(status)
    return contrib


def mc_sigma2(
    spec: ModelSpec,
    est1: EstimatorConfig,
    est2: Optional[EstimatorConfig],
    n: int,
    M: int,
    stream: Stream,
) -> StabilityEstimate:
    """Estimate sigma^2(h_n) = Var(E[h | Z0]); est2 switches to the difference loss."""
    contrib = _run_batch("sigma2", spec, est1, est2, n, M, stream)
    return _reduce(contrib, "sigma2")


def mc_gamma(
    spec: ModelSpec,
    est1: EstimatorConfig,
    est2: Optional[EstimatorConfig],
    n: int,
    M: int,
    stream: Stream,
) -> StabilityEstimate:
    """Estimate the loss stability gamma(h_n) under first-point replacement."""
    contrib = _run_batch("gamma", spec, est1, est2, n, M, stream)
    est = _reduce(contrib, "gamma")
    # mean of squares: exact nonnegativity is part of the estimator's contract
    assert est.value >= 0.0
    return est


def mc_constant_C(spec: ModelSpec, M: int, stream: Stream) -> StabilityEstimate:
    """Estimate the limiting constant of n^2 gamma(h_n) for a single fit.

    Mean of (2 (Y0 - X0'b*) X0'V)^2 over independent draws, where V is the
    replacement increment (Y1'-X1'b*) X1' - (Y1-X1'b*) X1; no fitting involved.
    """
    if M < 1:
        raise ConfigurationError("M must be >= 1")
    backend = get_backend()
    keys = rep_keys(stream, M)
    contrib = backend.constant_c_batch(keys, spec.beta_star, spec.tau)
    return _reduce(contrib, "C")


def relative_stability(sigma2: StabilityEstimate, gamma: StabilityEstimate, n: int) -> StabilityEstimate:
    """r(h_n) = n gamma / sigma^2, with a delta-method standard error.

    With x = gamma (per-replication std sigma_x) and y = sigma^2 (std
    sigma_y), SE = sqrt(n^2 sigma_x^2 / y^2 + n^2 x^2 sigma_y^2 / y^4) / sqrt(M).
    """
    if not sigma2.value > 0:
        raise ValueError("sigma^2 estimate must be positive to form the ratio")
    if sigma2.replications != gamma.replications:
        raise ConfigurationError("delta-method SE assumes a common replication count")
    M = sigma2.replications
    x, sig_x = gamma.value, gamma.per_rep_std
    y, sig_y = sigma2.value, sigma2.per_rep_std
    value = n * x / y
    se = math.sqrt(n**2 * sig_x**2 / y**2 + n**2 * x**2 * sig_y**2 / y**4) / math.sqrt(M)
    return StabilityEstimate(value, se, M, "r")


def rate_fit(points) -> RateFit:
    """OLS of log(value) on log(n); slope is the empirical rate exponent."""
    pts = [(int(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise ValueError("rate fitting needs at least 3 points")
    if any(v <= 0 for _, v in pts):
        raise ValueError("rate fitting needs positive values")
    ln = np.log([n for n, _ in pts])
    lv = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(ln, lv, 1)
    resid = lv - (slope * ln + intercept)
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, tuple(pts))
