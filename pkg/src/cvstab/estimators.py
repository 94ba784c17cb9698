"""The four learners (OLS, soft-thresholded least squares, ridge, Lasso),
penalty schedules, and adaptive inner-CV penalty selection.

All fits for p << n are driven by the Gram statistics G = X'X and c = X'y;
coordinate descent in Gram form performs the exact cyclic updates of the
residual form at O(p^2) per sweep instead of O(np).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._rng import Stream, philox
from .errors import ConfigurationError, ConvergenceError, SingularDesignError
from .linmodel import Dataset

COND_LIMIT = 1e12
CD_TOL = 1e-8
CD_MAX_ITER = 10_000

# Adaptive grid search: integer powers of 10, then 4 refinement rounds of 10
# log-spaced values spanning one decade either side of the incumbent.
GRID_LOG10_LO = -3
GRID_LOG10_HI = 6
GRID_REFINEMENTS = 4
GRID_POINTS = 10

FAMILIES = ("ols", "st", "ridge", "lasso")


@dataclass(frozen=True)
class PenaltyRule:
    """Penalty schedule: a fixed value, a power law c*n^a, or inner-CV search."""

    kind: str  # "fixed" | "power-law" | "inner-cv"
    c: float = 1.0
    a: float = 0.0
    fixed_value: float = 0.0
    inner_folds: int = 9  # (k-1)-fold selection split; used by kind="inner-cv" only

    def __post_init__(self):
        if self.kind not in ("fixed", "power-law", "inner-cv"):
            raise ConfigurationError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "power-law" and not self.c > 0:
            raise ConfigurationError("power-law coefficient c must be positive")
        if self.kind == "fixed" and self.fixed_value < 0:
            raise ConfigurationError("fixed penalty must be nonnegative")
        if self.kind == "inner-cv" and self.inner_folds < 2:
            raise ConfigurationError("inner-cv needs at least 2 folds")

    def value(self, n: int) -> float:
        if self.kind == "fixed":
            return self.fixed_value
        if self.kind == "power-law":
            return self.c * float(n) ** self.a
        raise ConfigurationError("inner-cv penalties are resolved per training set, not per n")


def sqrt_n_rule() -> PenaltyRule:
    return PenaltyRule(kind="power-law", c=1.0, a=0.5)


@dataclass(frozen=True)
class EstimatorConfig:
    """A learner plus its penalty schedule and comparison offset delta."""

    family: str
    penalty: Optional[PenaltyRule] = None
    delta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")
        if self.family == "ols":
            if self.penalty is not None:
                raise ConfigurationError("OLS takes no penalty rule")
        elif self.penalty is None:
            raise ConfigurationError(f"{self.family} requires a penalty rule")
        if self.delta < 0:
            raise ConfigurationError("delta must be nonnegative")

    def effective_penalty(self, n: int) -> float:
        """penalty(n) + delta; 0 for OLS."""
        if self.family == "ols":
            return 0.0
        return self.penalty.value(n) + self.delta


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    lambda_used: float
    iterations: int
    converged: bool


def _grams(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    return data.X.T @ data.X, data.X.T @ data.y


def _solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cholesky solve with a condition guard at COND_LIMIT."""
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as e:
        raise SingularDesignError("Gram matrix is not positive definite") from e
    if np.linalg.cond(A) > COND_LIMIT:
        raise SingularDesignError(f"Gram matrix condition number exceeds {COND_LIMIT:g}")
    u = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, u)


def fit_ols(data: Dataset) -> FitResult:
    """Ordinary least squares via the normal equations."""
    if data.n <= data.p:
        raise SingularDesignError(f"OLS needs n > p, got n={data.n}, p={data.p}")
    G, c = _grams(data)
    return FitResult(_solve_spd(G, c), 0.0, 0, True)


def soft_threshold(beta_ols: np.ndarray, lam: float, n: int) -> np.ndarray:
    """Coordinate-wise shrink of beta_ols toward zero by lam/n."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    beta_ols = np.asarray(beta_ols, dtype=np.float64)
    return np.sign(beta_ols) * np.maximum(np.abs(beta_ols) - lam / n, 0.0)


def fit_st(data: Dataset, config: EstimatorConfig) -> FitResult:
    """Soft-thresholded least squares at the config's resolved penalty."""
    if config.family != "st":
        raise ConfigurationError(f"fit_st asked to fit family {config.family!r}")
    lam = config.effective_penalty(data.n)
    ols = fit_ols(data)
    return FitResult(soft_threshold(ols.beta_hat, lam, data.n), lam, 0, True)


def fit_ridge(data: Dataset, config: EstimatorConfig) -> FitResult:
    """Ridge regression beta = (X'X + lam I)^(-1) X'y."""
    if config.family != "ridge":
        raise ConfigurationError(f"fit_ridge asked to fit family {config.family!r}")
    lam = config.effective_penalty(data.n)
    G, c = _grams(data)
    beta = _solve_spd(G + lam * np.eye(data.p), c)
    return FitResult(beta, lam, 0, True)


def lasso_objective(G: np.ndarray, c: np.ndarray, yy: float, beta: np.ndarray, lam: float) -> float:
    """(1/2)||y - X beta||^2 + lam ||beta||_1 from Gram statistics."""
    return 0.5 * (yy - 2.0 * c @ beta + beta @ G @ beta) + lam * np.abs(beta).sum()


def lasso_cd_gram(
    G: np.ndarray,
    c: np.ndarray,
    lam: float,
    beta0: Optional[np.ndarray] = None,
    tol: float = CD_TOL,
    max_iter: int = CD_MAX_ITER,
) -> tuple[np.ndarray, int, bool]:
    """Cyclic coordinate descent on the Gram form of the Lasso objective.

    Stops when the largest coordinate update in a sweep falls below tol.
    Returns (beta, sweeps, converged).
    """
    p = c.size
    beta = np.zeros(p) if beta0 is None else beta0.astype(np.float64).copy()
    Gbeta = G @ beta
    for sweep in range(1, max_iter + 1):
        delta_max = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                raise SingularDesignError("zero-norm column in coordinate descent")
            old = beta[j]
            rho = c[j] - Gbeta[j] + gjj * old
            new = math.copysign(max(abs(rho) - lam, 0.0), rho) / gjj
            if new != old:
                beta[j] = new
                Gbeta += (new - old) * G[:, j]
                delta_max = max(delta_max, abs(new - old))
        if delta_max < tol:
            return beta, sweep, True
    return beta, max_iter, False


def fit_lasso(
    data: Dataset,
    config: EstimatorConfig,
    tol: float = CD_TOL,
    max_iter: int = CD_MAX_ITER,
    check_objective: bool = True,
) -> FitResult:
    """Lasso via cyclic coordinate descent, warm-started from zero.

    With check_objective, the objective value is asserted non-increasing
    across sweeps (a property of exact cyclic CD; violations signal a bug
    or catastrophic conditioning).
    """
    if config.family != "lasso":
        raise ConfigurationError(f"fit_lasso asked to fit family {config.family!r}")
    if not tol > 0 or max_iter < 1:
        raise ConfigurationError("tol must be > 0 and max_iter >= 1")
    if config.penalty.kind == "inner-cv":
        raise ConfigurationError(
            "fit_lasso needs a resolved penalty; run select_lambda_inner_cv first"
        )
    lam = config.effective_penalty(data.n)
    G, c = _grams(data)
    if not check_objective:
        beta, iters, converged = lasso_cd_gram(G, c, lam, tol=tol, max_iter=max_iter)
    else:
        yy = float(data.y @ data.y)
        beta = np.zeros(data.p)
        obj = lasso_objective(G, c, yy, beta, lam)
        converged = False
        iters = 0
        for sweep in range(1, max_iter + 1):
            beta, _, done = lasso_cd_gram(G, c, lam, beta0=beta, tol=tol, max_iter=1)
            new_obj = lasso_objective(G, c, yy, beta, lam)
            if new_obj > obj + 1e-9 * (1.0 + abs(obj)):
                raise ConvergenceError(
                    f"coordinate descent objective increased ({obj} -> {new_obj})"
                )
            obj = new_obj
            iters = sweep
            if done:
                converged = True
                break
    if not converged:
        raise ConvergenceError(f"lasso did not converge within {max_iter} sweeps")
    return FitResult(beta, lam, iters, converged)


def initial_grid() -> np.ndarray:
    return 10.0 ** np.arange(GRID_LOG10_LO, GRID_LOG10_HI + 1, dtype=np.float64)


def refined_grid(center: float) -> np.ndarray:
    lg = math.log10(center)
    return np.logspace(lg - 1.0, lg + 1.0, GRID_POINTS)


def fold_gram_stats(
    X: np.ndarray, y: np.ndarray, folds: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-fold (G, c, yy, size) sufficient statistics."""
    kf = len(folds)
    p = X.shape[1]
    Gf = np.empty((kf, p, p))
    cf = np.empty((kf, p))
    yyf = np.empty(kf)
    sizes = np.empty(kf, dtype=np.int64)
    for j, idx in enumerate(folds):
        Xj = X[idx]
        yj = y[idx]
        Gf[j] = Xj.T @ Xj
        cf[j] = Xj.T @ yj
        yyf[j] = yj @ yj
        sizes[j] = idx.size
    return Gf, cf, yyf, sizes


def select_lambda_from_stats(
    Gf: np.ndarray,
    cf: np.ndarray,
    yyf: np.ndarray,
    tol: float = CD_TOL,
    max_iter: int = CD_MAX_ITER,
) -> float:
    """Adaptive grid search for the Lasso penalty from per-fold Gram stats.

    Minimizes the (k-1)-fold CV squared error; each grid round is evaluated
    at descending lam with warm starts, and ties break toward the smaller lam.
    """
    kf = Gf.shape[0]
    p = cf.shape[1]
    G_tot = Gf.sum(axis=0)
    c_tot = cf.sum(axis=0)

    def cv_error(grid: np.ndarray) -> np.ndarray:
        order = np.argsort(grid)[::-1]
        errs = np.zeros(grid.size)
        for j in range(kf):
            G_tr = G_tot - Gf[j]
            c_tr = c_tot - cf[j]
            beta = np.zeros(p)
            for pos in order:
                beta, _, ok = lasso_cd_gram(G_tr, c_tr, grid[pos], beta0=beta, tol=tol, max_iter=max_iter)
                if not ok:
                    raise ConvergenceError("lasso did not converge during penalty selection")
                errs[pos] += yyf[j] - 2.0 * cf[j] @ beta + beta @ Gf[j] @ beta
        return errs

    grid = initial_grid()
    best = 0.0
    for _ in range(GRID_REFINEMENTS + 1):
        errs = cv_error(grid)
        order = np.argsort(grid)[::-1]
        best_err = math.inf
        for pos in order:  # descending lam; "<=" keeps ties at the smaller lam
            if errs[pos] <= best_err:
                best_err = errs[pos]
                best = grid[pos]
        grid = refined_grid(best)
    return float(best)


def partition_indices(n: int, kf: int, perm: np.ndarray) -> list[np.ndarray]:
    """Split a permutation of [n] into kf folds, remainder spread one per fold."""
    sizes = np.full(kf, n // kf, dtype=np.int64)
    sizes[: n % kf] += 1
    out = []
    start = 0
    for s in sizes:
        out.append(np.sort(perm[start : start + s]))
        start += s
    return out


def select_lambda_inner_cv(
    train: Dataset,
    k_minus_1: int,
    stream: Stream,
    folds: Optional[Sequence[np.ndarray]] = None,
    tol: float = CD_TOL,
    max_iter: int = CD_MAX_ITER,
) -> float:
    """Pick the Lasso penalty by (k-1)-fold CV with adaptive grid refinement.

    Folds default to a stream-drawn partition of the training rows; callers
    that already hold a fold structure (the outer CV loop) can pass it in.
    """
    if k_minus_1 < 2:
        raise ConfigurationError("inner CV needs at least 2 folds")
    if train.n < k_minus_1:
        raise ConfigurationError(f"cannot split {train.n} rows into {k_minus_1} folds")
    if folds is None:
        perm = philox(stream).permutation(train.n)
        folds = partition_indices(train.n, k_minus_1, perm)
    if any(f.size == 0 for f in folds):
        raise ConfigurationError("degenerate inner fold of size 0")
    Gf, cf, yyf, _ = fold_gram_stats(train.X, train.y, folds)
    return _selection_impl(Gf, cf, yyf, tol=tol, max_iter=max_iter)


def _selection_impl(Gf, cf, yyf, tol: float = CD_TOL, max_iter: int = CD_MAX_ITER) -> float:
    """Grid search via the active kernel backend (same math, jitted when available)."""
    from .kernels import get_backend

    lam, status = get_backend().select_lambda_stats(Gf, cf, yyf, tol, max_iter)
    if status == 2:
        raise ConvergenceError("lasso did not converge during penalty selection")
    if status != 0:
        raise SingularDesignError("penalty selection hit a singular system")
    return float(lam)


def fit(data: Dataset, config: EstimatorConfig) -> FitResult:
    """Dispatch on family; penalties must already be resolvable."""
    if config.family == "ols":
        return fit_ols(data)
    if config.family == "st":
        return fit_st(data, config)
    if config.family == "ridge":
        return fit_ridge(data, config)
    return fit_lasso(data, config, check_objective=False)


def fit_gram(
    family: str,
    G: np.ndarray,
    c: np.ndarray,
    n: int,
    lam: float,
    tol: float = CD_TOL,
    max_iter: int = CD_MAX_ITER,
) -> np.ndarray:
    """Fit any family from Gram statistics; lets callers share one G = X'X."""
    if family == "ridge":
        return _solve_spd(G + lam * np.eye(c.size), c)
    if family == "lasso":
        beta, _, converged = lasso_cd_gram(G, c, lam, tol=tol, max_iter=max_iter)
        if not converged:
            raise ConvergenceError(f"lasso did not converge within {max_iter} sweeps")
        return beta
    beta = _solve_spd(G, c)
    if family == "st":
        beta = soft_threshold(beta, lam, n)
    return beta


FitterFn = Callable[..., np.ndarray]


def make_single_fitter(config: EstimatorConfig) -> FitterFn:
    """Fitter callable for CV machinery: (X, y, inner_folds, stream) -> beta.

    Deterministic penalties ignore the fold structure and stream; inner-CV
    Lasso selects its penalty on the given training set first.
    """

    def fitter(X, y, inner_folds=None, stream=None):
        n = X.shape[0]
        if config.family == "lasso" and config.penalty.kind == "inner-cv":
            _inner_fold_count(inner_folds)
            Gf, cf, yyf, _ = fold_gram_stats(X, y, inner_folds)
            lam_base = _selection_impl(Gf, cf, yyf)
            beta = fit_gram("lasso", Gf.sum(axis=0), cf.sum(axis=0), n, lam_base + config.delta)
            return beta, lam_base
        G, c = X.T @ X, X.T @ y
        return fit_gram(config.family, G, c, n, config.effective_penalty(n))

    return fitter


def make_pair_fitter(
    config1: EstimatorConfig,
    config2: EstimatorConfig,
    lambda_pairing: str = "shared",
) -> FitterFn:
    """Fitter returning a (2, p) array of both algorithms' coefficients.

    For inner-CV Lasso pairs, "shared" selects one penalty and fits at
    (lam, lam + delta2); "independent" runs a second selection with its own
    fold randomness before applying delta2.
    """
    if lambda_pairing not in ("shared", "independent"):
        raise ConfigurationError(f"unknown lambda pairing {lambda_pairing!r}")

    inner_cv = config1.family == "lasso" and config1.penalty.kind == "inner-cv"
    if inner_cv and config2.family != "lasso":
        raise ConfigurationError("inner-CV comparison requires two lasso configs")

    def fitter(X, y, inner_folds=None, stream=None):
        n = X.shape[0]
        if not inner_cv:
            G, c = X.T @ X, X.T @ y
            b1 = fit_gram(config1.family, G, c, n, config1.effective_penalty(n))
            b2 = fit_gram(config2.family, G, c, n, config2.effective_penalty(n))
            return np.stack([b1, b2])
        kf = _inner_fold_count(inner_folds)
        Gf, cf, yyf, _ = fold_gram_stats(X, y, inner_folds)
        lam1 = _selection_impl(Gf, cf, yyf)
        if lambda_pairing == "shared":
            lam2 = lam1
        else:
            if stream is None:
                raise ConfigurationError("independent lambda pairing needs an explicit stream")
            alt = np.random.SeedSequence((_entropy_of(stream), 0x1D))
            lam2 = select_lambda_inner_cv(Dataset(X, y), kf, alt, folds=None)
        G, c = Gf.sum(axis=0), cf.sum(axis=0)
        b1 = fit_gram("lasso", G, c, n, lam1 + config1.delta)
        b2 = fit_gram("lasso", G, c, n, lam2 + config2.delta)
        return np.stack([b1, b2]), lam1

    return fitter


def _inner_fold_count(inner_folds) -> int:
    if inner_folds is None:
        raise ConfigurationError("inner-CV fitter needs a fold count or explicit folds")
    return len(inner_folds)


def _entropy_of(stream: Stream) -> int:
    ss = stream if isinstance(stream, np.random.SeedSequence) else np.random.SeedSequence(stream)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
