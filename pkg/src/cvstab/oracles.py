"""Brute-force reference estimators for validating the Monte-Carlo machinery.

These deliberately avoid the kernel backends and the closed-form risk
shortcuts: fits go through the public estimator API on explicitly sampled
datasets, and conditional expectations are replaced by fresh-sample
averages with explicit bias corrections. They are slow and exist only as
independent cross-checks.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ._rng import Stream, as_seedseq, philox
from .estimators import EstimatorConfig, fit
from .linmodel import Dataset, ModelSpec, sample_dataset


def _fit_betas(data: Dataset, est1: EstimatorConfig, est2: Optional[EstimatorConfig]):
    b1 = fit(data, est1).beta_hat
    if est2 is None:
        return b1, None
    return b1, fit(data, est2).beta_hat


def _losses(X: np.ndarray, y: np.ndarray, b1, b2) -> np.ndarray:
    r1 = y - X @ b1
    h = r1 * r1
    if b2 is not None:
        r2 = y - X @ b2
        h = h - r2 * r2
    return h


def brute_force_sigma2(
    spec: ModelSpec,
    est1: EstimatorConfig,
    est2: Optional[EstimatorConfig],
    n: int,
    n_test: int,
    n_train_sets: int,
    batches: int,
    stream: Stream,
) -> tuple[float, float]:
    """Var(E[h | Z0]) estimated directly from its definition.

    For each batch: draw n_test test points and n_train_sets independent
    training sets, form the loss matrix, and take the variance of the row
    means minus the E[Var(h | Z0)] / n_train_sets inflation. Returns the
    mean and standard error across batches.
    """
    root = as_seedseq(stream)
    vals = []
    for b, ss in enumerate(root.spawn(batches)):
        rng = philox(ss)
        X0 = rng.standard_normal((n_test, spec.p))
        y0 = X0 @ spec.beta_star + spec.tau * rng.standard_normal(n_test)
        H = np.empty((n_test, n_train_sets))
        for t in range(n_train_sets):
            Xt = rng.standard_normal((n, spec.p))
            yt = Xt @ spec.beta_star + spec.tau * rng.standard_normal(n)
            b1, b2 = _fit_betas(Dataset(Xt, yt), est1, est2)
            H[:, t] = _losses(X0, y0, b1, b2)
        row_means = H.mean(axis=1)
        inflation = np.mean(H.var(axis=1, ddof=1)) / n_train_sets
        vals.append(np.var(row_means, ddof=1) - inflation)
    vals = np.asarray(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(batches))


def nested_mc_gamma(
    spec: ModelSpec,
    est1: EstimatorConfig,
    est2: Optional[EstimatorConfig],
    n: int,
    reps: int,
    n_inner: int,
    stream: Stream,
) -> tuple[float, float]:
    """gamma(h_n) with the conditional expectations replaced by fresh-sample
    averages instead of the closed form.

    The inner average uses common test points for the pre- and post-
    replacement fits, and the induced upward bias Var(inner error) is
    removed with the inner sample variance. Returns (estimate, SE).
    """
    root = as_seedseq(stream)
    contrib = np.empty(reps)
    for r, ss in enumerate(root.spawn(reps)):
        rng = philox(ss)
        X = rng.standard_normal((n, spec.p))
        y = X @ spec.beta_star + spec.tau * rng.standard_normal(n)
        x1p = rng.standard_normal(spec.p)
        y1p = x1p @ spec.beta_star + spec.tau * rng.standard_normal()
        Xp = X.copy()
        yp = y.copy()
        Xp[0] = x1p
        yp[0] = y1p
        ba1, ba2 = _fit_betas(Dataset(X, y), est1, est2)
        bb1, bb2 = _fit_betas(Dataset(Xp, yp), est1, est2)
        x0 = rng.standard_normal(spec.p)
        y0 = x0 @ spec.beta_star + spec.tau * rng.standard_normal()
        h = _losses(x0[None, :], np.array([y0]), ba1, ba2)[0]
        hp = _losses(x0[None, :], np.array([y0]), bb1, bb2)[0]
        Xt = rng.standard_normal((n_inner, spec.p))
        yt = Xt @ spec.beta_star + spec.tau * rng.standard_normal(n_inner)
        inner_diff = _losses(Xt, yt, ba1, ba2) - _losses(Xt, yt, bb1, bb2)
        d = (h - hp) - inner_diff.mean()
        contrib[r] = d * d - inner_diff.var(ddof=1) / n_inner
    return float(contrib.mean()), float(contrib.std(ddof=1) / math.sqrt(reps))


def nested_mc_cond_risk(
    spec: ModelSpec, beta_hat: np.ndarray, n_test: int, stream: Stream
) -> tuple[float, float]:
    """E[h(Z0) | fit] by averaging the loss over fresh test points."""
    rng = philox(stream)
    X0 = rng.standard_normal((n_test, spec.p))
    y0 = X0 @ spec.beta_star + spec.tau * rng.standard_normal(n_test)
    h = _losses(X0, y0, np.asarray(beta_hat), None)
    return float(h.mean()), float(h.std(ddof=1) / math.sqrt(n_test))


def orthogonal_design(n: int, p: int, stream: Stream) -> np.ndarray:
    """n x p design with X'X = n I exactly (scaled orthonormal columns)."""
    if n < p:
        raise ValueError("orthogonal design needs n >= p")
    rng = philox(stream)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return Q * math.sqrt(n)
