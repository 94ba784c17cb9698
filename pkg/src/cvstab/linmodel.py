"""Ground-truth Gaussian linear model: data generation, losses, conditional risks.

The model is y = x'beta_star + eps with isotropic standard-normal features
and eps ~ N(0, tau^2). Isotropy is what makes the conditional risk of a
linear predictor available in closed form (tau^2 + ||beta_star - beta_hat||^2),
which the stability estimators rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import Stream, philox


@dataclass(frozen=True)
class ModelSpec:
    """True coefficient vector and noise scale of the simulation oracle."""

    beta_star: np.ndarray
    tau: float

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=np.float64)
        if beta.ndim != 1 or beta.size < 1:
            raise ValueError("beta_star must be a nonempty 1-d vector")
        if not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "beta_star", beta)

    @property
    def p(self) -> int:
        return self.beta_star.size

    def sparsity(self) -> int:
        """Number of exact zeros in beta_star."""
        return int(np.sum(self.beta_star == 0.0))

    def nonzeros(self) -> int:
        return self.p - self.sparsity()


@dataclass(frozen=True)
class DataPoint:
    x: np.ndarray
    y: float


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X must be n x p with y of length n")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])


def sample_dataset(spec: ModelSpec, n: int, stream: Stream) -> Dataset:
    """Draw n i.i.d. points from the model; deterministic given stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = philox(stream)
    X = rng.standard_normal((n, spec.p))
    eps = rng.standard_normal(n)
    return Dataset(X, X @ spec.beta_star + spec.tau * eps)


def _check_dim(x: np.ndarray, beta: np.ndarray) -> None:
    if x.shape != beta.shape:
        raise ValueError(f"dimension mismatch: point has {x.shape}, coefficients {beta.shape}")


def loss_single(z0: DataPoint, beta_hat: np.ndarray) -> float:
    """Squared prediction error of one linear predictor at one test point."""
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    x = np.asarray(z0.x, dtype=np.float64)
    _check_dim(x, beta_hat)
    r = z0.y - x @ beta_hat
    return float(r * r)


def loss_diff(z0: DataPoint, beta1: np.ndarray, beta2: np.ndarray) -> float:
    """Loss of predictor 1 minus loss of predictor 2; negative favors 1."""
    return loss_single(z0, beta1) - loss_single(z0, beta2)


def cond_risk_single(beta_hat: np.ndarray, spec: ModelSpec) -> float:
    """Expected squared error over a fresh test point, given the fit.

    Closed form tau^2 + ||beta_star - beta_hat||^2, exact for isotropic
    standard-normal features.
    """
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    _check_dim(beta_hat, spec.beta_star)
    d = spec.beta_star - beta_hat
    return float(spec.tau**2 + d @ d)


def cond_risk_diff(beta1: np.ndarray, beta2: np.ndarray, spec: ModelSpec) -> float:
    """Conditional risk gap ||beta_star-beta1||^2 - ||beta_star-beta2||^2.

    Computed as the difference of the single risks so the noise term cancels
    identically (the comparison target is exactly the gap of the single
    targets, to the bit).
    """
    return cond_risk_single(beta1, spec) - cond_risk_single(beta2, spec)
