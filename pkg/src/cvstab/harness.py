"""Experiment orchestration: rate experiments, CLT-sample experiments,
coverage experiments, scenario presets, configuration handling, result
serialization, and the on-disk cache of Monte-Carlo stability estimates.

Stream layout: every run derives substreams from SeedSequence
((seed, tag, n, mode)) with fixed tags per quantity, so any experiment is
reproducible from its config alone and independent quantities never share
replications.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import philox
from ._version import __version__
from .cv import (
    ci_diff_conservative,
    ci_single,
    clt_statistic,
    ks_distance_to_normal,
    make_folds,
    run_cv,
    run_cv_comparison,
)
from .errors import ConfigurationError, DegenerateSigmaError
from .estimators import (
    EstimatorConfig,
    PenaltyRule,
    make_pair_fitter,
    make_single_fitter,
    sqrt_n_rule,
)
from .kernels import backend_name
from .linmodel import Dataset, ModelSpec
from .stability import StabilityEstimate, mc_gamma, mc_sigma2, rate_fit, relative_stability

TAG_SIGMA2 = 1
TAG_GAMMA = 2
TAG_C = 3
TAG_CLT = 4
TAG_COVERAGE = 5

BETA_SPARSE = (3.0, 1.0, -5.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
BETA_NONSPARSE = (3.0, 1.0, -5.0, 3.0, 4.0, -3.0, 10.0, 8.0, 5.0, 2.0)
TAU_DEFAULT = 10.0

SCENARIOS = {
    "st-fixed": {"family": "st", "beta": BETA_SPARSE},
    "lasso-innercv": {"family": "lasso", "beta": BETA_SPARSE},
    "ridge-fixed": {"family": "ridge", "beta": BETA_SPARSE},
    "st-nonsparse": {"family": "st", "beta": BETA_NONSPARSE},
}

DEFAULT_N_GRID = (90, 900, 9000)
LARGE_N = 90_000
M_STABILITY_DET = 200_000
M_STABILITY_INNERCV = 20_000
M_CLT_DEFAULT = 2000

RATES_COLUMNS = [
    "scenario", "mode", "n", "sigma2", "sigma2_se", "gamma", "gamma_se",
    "r", "r_se", "slope_sigma2", "slope_gamma", "slope_r",
]
CLT_COLUMNS = ["scenario", "mode", "n", "rep", "stat_true_sigma", "stat_hat_sigma"]
COVERAGE_COLUMNS = [
    "scenario", "mode", "n", "method", "covered_count", "total", "coverage", "binomial_se",
]
STABILITY_COLUMNS = ["scenario", "mode", "n", "quantity", "value", "std_err", "replications"]
_SCHEMAS = {
    "rates": RATES_COLUMNS,
    "clt-samples": CLT_COLUMNS,
    "coverage": COVERAGE_COLUMNS,
    "stability": STABILITY_COLUMNS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    mode: str  # "single" | "comparison"
    spec: ModelSpec
    k: int = 10
    n_grid: tuple = DEFAULT_N_GRID
    penalty: PenaltyRule = field(default_factory=sqrt_n_rule)
    delta: float = 1.0
    M_stability: int = M_STABILITY_DET
    M_clt: int = M_CLT_DEFAULT
    alpha: float = 0.05
    seed: int = 20240
    lambda_pairing: str = "shared"
    normalize_at: Optional[int] = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                f"scenario: unknown value {self.scenario!r}; pick one of {sorted(SCENARIOS)}"
            )
        if self.mode not in ("single", "comparison"):
            raise ConfigurationError(f"mode: must be 'single' or 'comparison', got {self.mode!r}")
        if self.k < 2:
            raise ConfigurationError("k: must be >= 2")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha: must be in (0, 1)")
        if self.M_stability < 2 or self.M_clt < 2:
            raise ConfigurationError("M_stability and M_clt: must be >= 2")
        if self.delta < 0:
            raise ConfigurationError("delta: must be nonnegative")
        grid = tuple(int(n) for n in self.n_grid)
        if list(grid) != sorted(grid):
            raise ConfigurationError("n_grid: must be sorted ascending")
        for n in grid:
            if n % (self.k - 1) != 0:
                raise ConfigurationError(f"n_grid: k-1={self.k - 1} must divide every n, got {n}")
        object.__setattr__(self, "n_grid", grid)
        if self.scenario == "st-nonsparse" and self.spec.sparsity() != 0:
            raise ConfigurationError("scenario: st-nonsparse requires a fully dense beta_star")
        if self.lambda_pairing not in ("shared", "independent"):
            raise ConfigurationError("lambda_pairing: must be 'shared' or 'independent'")

    @property
    def family(self) -> str:
        return SCENARIOS[self.scenario]["family"]

    def estimator(self, which: int) -> EstimatorConfig:
        """Algorithm 1 (which=0) or the delta-offset algorithm 2 (which=1)."""
        delta = 0.0 if which == 0 else self.delta
        return EstimatorConfig(self.family, self.penalty, delta=delta)

    def full_size(self, n: int) -> int:
        return n * self.k // (self.k - 1)


def build_config(scenario: str, mode: str, **overrides) -> ExperimentConfig:
    """Scenario preset plus overrides; unknown override keys are errors."""
    if scenario not in SCENARIOS:
        raise ConfigurationError(
            f"scenario: unknown value {scenario!r}; pick one of {sorted(SCENARIOS)}"
        )
    preset = SCENARIOS[scenario]
    known = {
        "k", "n_grid", "seed", "alpha", "delta", "M_stability", "M_clt",
        "beta_star", "tau", "penalty", "lambda_pairing", "normalize_at",
    }
    unknown = set(overrides) - known
    if unknown:
        raise ConfigurationError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    beta = overrides.pop("beta_star", preset["beta"])
    tau = overrides.pop("tau", TAU_DEFAULT)
    spec = ModelSpec(np.asarray(beta, dtype=np.float64), float(tau))
    k = overrides.get("k", 10)
    penalty = overrides.pop("penalty", None)
    if penalty is None:
        if preset["family"] == "lasso":
            penalty = PenaltyRule("inner-cv", inner_folds=k - 1)
        else:
            penalty = sqrt_n_rule()
    elif isinstance(penalty, dict):
        bad = set(penalty) - {"kind", "c", "a", "fixed_value", "inner_folds"}
        if bad:
            raise ConfigurationError(f"unknown penalty field(s): {', '.join(sorted(bad))}")
        penalty = PenaltyRule(**penalty)
    if "M_stability" not in overrides:
        overrides["M_stability"] = (
            M_STABILITY_INNERCV if penalty.kind == "inner-cv" else M_STABILITY_DET
        )
    return ExperimentConfig(scenario=scenario, mode=mode, spec=spec, penalty=penalty, **overrides)


def load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return raw


@dataclass
class ExperimentResult:
    kind: str  # "rates" | "clt-samples" | "coverage" | "stability"
    rows: list
    metadata: dict

    def column_order(self) -> list:
        return _SCHEMAS[self.kind]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(result: ExperimentResult, path: str) -> None:
    """Fixed-schema CSV with 17-significant-digit floats; byte-deterministic."""
    cols = result.column_order()
    lines = [",".join(cols)]
    for row in result.rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    with open(path, "wb") as f:
        f.write(("\n".join(lines) + "\n").encode("utf-8"))


def write_metadata(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(result.metadata, f, indent=2, sort_keys=True, default=str)
        f.write("\n")


class StabilityCache:
    """Tiny JSON-file cache of stability estimates keyed by config hash."""

    def __init__(self, cache_dir: Optional[str]):
        self.cache_dir = cache_dir
        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)

    def _path(self, descriptor: dict) -> Optional[str]:
        if not self.cache_dir:
            return None
        key = hashlib.sha256(json.dumps(descriptor, sort_keys=True).encode()).hexdigest()[:24]
        return os.path.join(self.cache_dir, f"{descriptor['quantity']}-{key}.json")

    def get_or_compute(self, descriptor: dict, compute) -> StabilityEstimate:
        path = self._path(descriptor)
        if path and os.path.exists(path):
            with open(path) as f:
                d = json.load(f)
            return StabilityEstimate(d["value"], d["std_err"], d["replications"], d["quantity"])
        est = compute()
        if path:
            with open(path, "w") as f:
                json.dump(
                    {"value": est.value, "std_err": est.std_err,
                     "replications": est.replications, "quantity": est.quantity,
                     "descriptor": descriptor},
                    f, indent=2, sort_keys=True,
                )
        return est


def _estimator_descriptor(config: ExperimentConfig) -> dict:
    pen = config.penalty
    return {
        "beta_star": list(config.spec.beta_star),
        "tau": config.spec.tau,
        "family": config.family,
        "penalty": [pen.kind, pen.c, pen.a, pen.fixed_value, pen.inner_folds],
        "delta": config.delta,
        "mode": config.mode,
        "seed": config.seed,
        "backend": backend_name(),
        "version": __version__,
    }


def _mode_code(config: ExperimentConfig) -> int:
    return 0 if config.mode == "single" else 1


def _stability_stream(config: ExperimentConfig, tag: int, n: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((config.seed, tag, n, _mode_code(config)))


def stability_at(config: ExperimentConfig, n: int, cache: Optional[StabilityCache] = None):
    """(sigma2, gamma, r) estimates for one sample size, cached when possible."""
    est1 = config.estimator(0)
    est2 = config.estimator(1) if config.mode == "comparison" else None
    cache = cache or StabilityCache(None)
    base = _estimator_descriptor(config)

    def desc(quantity):
        return {**base, "quantity": quantity, "n": n, "M": config.M_stability}

    sigma2 = cache.get_or_compute(
        desc("sigma2"),
        lambda: mc_sigma2(config.spec, est1, est2, n, config.M_stability,
                          _stability_stream(config, TAG_SIGMA2, n)),
    )
    gamma = cache.get_or_compute(
        desc("gamma"),
        lambda: mc_gamma(config.spec, est1, est2, n, config.M_stability,
                         _stability_stream(config, TAG_GAMMA, n)),
    )
    r = relative_stability(sigma2, gamma, n)
    return sigma2, gamma, r


def run_rate_experiment(config: ExperimentConfig, cache_dir: Optional[str] = None) -> ExperimentResult:
    """sigma^2, gamma, r across the n grid plus fitted log-log slopes."""
    if len(config.n_grid) < 3:
        raise ConfigurationError("n_grid: rate experiments need at least 3 sizes")
    t0 = time.time()
    cache = StabilityCache(cache_dir)
    per_n = {n: stability_at(config, n, cache) for n in config.n_grid}
    slopes = {}
    for qi, quantity in enumerate(("sigma2", "gamma", "r")):
        pts = [(n, per_n[n][qi].value) for n in config.n_grid]
        slopes[quantity] = rate_fit(pts)

    ref = config.normalize_at
    if ref is not None and ref not in per_n:
        raise ConfigurationError(f"normalize_at: {ref} is not in the n grid")
    rows = []
    for n in config.n_grid:
        s2, g, r = per_n[n]
        scale = [1.0, 1.0, 1.0]
        if ref is not None:
            s2r, gr, rr = per_n[ref]
            scale = [s2r.value, gr.value, rr.value]
        rows.append({
            "scenario": config.scenario, "mode": config.mode, "n": n,
            "sigma2": s2.value / scale[0], "sigma2_se": s2.std_err / abs(scale[0]),
            "gamma": g.value / scale[1], "gamma_se": g.std_err / abs(scale[1]),
            "r": r.value / scale[2], "r_se": r.std_err / abs(scale[2]),
            "slope_sigma2": slopes["sigma2"].slope,
            "slope_gamma": slopes["gamma"].slope,
            "slope_r": slopes["r"].slope,
        })
    meta = _metadata(config, t0)
    meta["slopes"] = {q: {"slope": f.slope, "r_squared": f.r_squared} for q, f in slopes.items()}
    return ExperimentResult("rates", rows, meta)


def _replication_streams(config: ExperimentConfig, tag: int, n: int, count: int):
    root = np.random.SeedSequence((config.seed, tag, n, _mode_code(config)))
    return root.spawn(count)


def _sample_full(config: ExperimentConfig, N: int, ss) -> Dataset:
    rng = philox(ss)
    X = rng.standard_normal((N, config.spec.p))
    y = X @ config.spec.beta_star + config.spec.tau * rng.standard_normal(N)
    return Dataset(X, y)


def _cv_replication(config: ExperimentConfig, n: int, ss):
    """One full CV replication; returns runs keyed by loss."""
    N = config.full_size(n)
    data_ss, fold_ss, fit_ss = ss.spawn(3)
    data = _sample_full(config, N, data_ss)
    plan = make_folds(N, config.k, fold_ss)
    if config.mode == "single":
        fitter = make_single_fitter(config.estimator(0))
        run = run_cv(data, plan, fitter, "single", spec=config.spec, stream=fit_ss)
        return {"single": run}
    pair = make_pair_fitter(config.estimator(0), config.estimator(1), config.lambda_pairing)
    diff, one, two = run_cv_comparison(data, plan, pair, spec=config.spec, stream=fit_ss)
    return {"diff": diff, "one": one, "two": two}


def run_clt_experiment(
    config: ExperimentConfig, n: Optional[int] = None, cache_dir: Optional[str] = None
) -> ExperimentResult:
    """Raw samples of the two normalized CV-error statistics at one n.

    The "true sigma" denominator is the Monte-Carlo sigma(h_n) estimate,
    computed once (or loaded from cache); the second statistic divides by
    the within-fold estimate of each replication.
    """
    n = n if n is not None else config.n_grid[-1]
    t0 = time.time()
    cache = StabilityCache(cache_dir)
    est1 = config.estimator(0)
    est2 = config.estimator(1) if config.mode == "comparison" else None
    base = _estimator_descriptor(config)
    sigma2_true = cache.get_or_compute(
        {**base, "quantity": "sigma2", "n": n, "M": config.M_stability},
        lambda: mc_sigma2(config.spec, est1, est2, n, config.M_stability,
                          _stability_stream(config, TAG_SIGMA2, n)),
    )
    if not sigma2_true.value > 0:
        raise DegenerateSigmaError(
            f"sigma^2 Monte-Carlo estimate is {sigma2_true.value:g}; "
            "the comparison is degenerate (identical algorithms?)"
        )
    sigma_true = math.sqrt(sigma2_true.value)
    N = config.full_size(n)
    key = "single" if config.mode == "single" else "diff"

    rows = []
    stats_true = np.empty(config.M_clt)
    stats_hat = np.empty(config.M_clt)
    sig2_hats = np.empty(config.M_clt)
    for rep, ss in enumerate(_replication_streams(config, TAG_CLT, n, config.M_clt)):
        run = _cv_replication(config, n, ss)[key]
        if run.sigma_hat_sq is None or not run.sigma_hat_sq > 0:
            raise DegenerateSigmaError(f"replication {rep}: within-fold variance is degenerate")
        s_true = clt_statistic(run.r_hat, run.r_cond, sigma_true, N)
        s_hat = clt_statistic(run.r_hat, run.r_cond, math.sqrt(run.sigma_hat_sq), N)
        stats_true[rep] = s_true
        stats_hat[rep] = s_hat
        sig2_hats[rep] = run.sigma_hat_sq
        rows.append({
            "scenario": config.scenario, "mode": config.mode, "n": n, "rep": rep,
            "stat_true_sigma": s_true, "stat_hat_sigma": s_hat,
        })

    meta = _metadata(config, t0)
    meta["n"] = n
    meta["sigma2_true"] = sigma2_true.value
    meta["sigma2_true_se"] = sigma2_true.std_err
    meta["summary"] = {
        "stat_true_sigma": _moment_summary(stats_true),
        "stat_hat_sigma": _moment_summary(stats_hat),
        "mean_sigma_hat_sq": float(np.mean(sig2_hats)),
        "var_sqrtN_err": float(np.var(stats_true, ddof=1) * sigma2_true.value),
    }
    return ExperimentResult("clt-samples", rows, meta)


def _moment_summary(x: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(x)),
        "variance": float(np.var(x, ddof=1)),
        "ks_to_normal": ks_distance_to_normal(x),
    }


def run_coverage_experiment(
    config: ExperimentConfig, n: Optional[int] = None, cache_dir: Optional[str] = None
) -> ExperimentResult:
    """Empirical CI coverage of the k-fold test error (or its difference)."""
    n = n if n is not None else config.n_grid[-1]
    t0 = time.time()
    N = config.full_size(n)
    alpha = config.alpha
    methods = ["single"] if config.mode == "single" else ["naive-diff", "prop1-diff"]
    covered = {m: 0 for m in methods}
    total = config.M_clt
    for rep, ss in enumerate(_replication_streams(config, TAG_COVERAGE, n, total)):
        runs = _cv_replication(config, n, ss)
        if config.mode == "single":
            run = runs["single"]
            ci = ci_single(run.r_hat, math.sqrt(run.sigma_hat_sq), N, alpha)
            covered["single"] += ci.covers(run.r_cond)
        else:
            diff, one, two = runs["diff"], runs["one"], runs["two"]
            ci = ci_single(diff.r_hat, math.sqrt(diff.sigma_hat_sq), N, alpha)
            covered["naive-diff"] += ci.covers(diff.r_cond)
            ci1 = ci_single(one.r_hat, math.sqrt(one.sigma_hat_sq), N, alpha / 2.0)
            ci2 = ci_single(two.r_hat, math.sqrt(two.sigma_hat_sq), N, alpha / 2.0)
            covered["prop1-diff"] += ci_diff_conservative(ci1, ci2).covers(diff.r_cond)

    rows = []
    for m in methods:
        p_hat = covered[m] / total
        rows.append({
            "scenario": config.scenario, "mode": config.mode, "n": n, "method": m,
            "covered_count": covered[m], "total": total, "coverage": p_hat,
            "binomial_se": math.sqrt(p_hat * (1.0 - p_hat) / total),
        })
    meta = _metadata(config, t0)
    meta["n"] = n
    return ExperimentResult("coverage", rows, meta)


def run_stability_oneshot(
    config: ExperimentConfig, n: int, cache_dir: Optional[str] = None
) -> ExperimentResult:
    """sigma^2, gamma, and r at a single n (the CLI `stability` subcommand)."""
    t0 = time.time()
    s2, g, r = stability_at(config, n, StabilityCache(cache_dir))
    rows = [
        {"scenario": config.scenario, "mode": config.mode, "n": n, "quantity": q,
         "value": e.value, "std_err": e.std_err, "replications": e.replications}
        for q, e in (("sigma2", s2), ("gamma", g), ("r", r))
    ]
    return ExperimentResult("stability", rows, _metadata(config, t0))


def _metadata(config: ExperimentConfig, t0: float) -> dict:
    pen = config.penalty
    return {
        "config": {
            "scenario": config.scenario, "mode": config.mode,
            "beta_star": list(config.spec.beta_star), "tau": config.spec.tau,
            "k": config.k, "n_grid": list(config.n_grid),
            "penalty": {"kind": pen.kind, "c": pen.c, "a": pen.a,
                        "fixed_value": pen.fixed_value, "inner_folds": pen.inner_folds},
            "delta": config.delta, "M_stability": config.M_stability,
            "M_clt": config.M_clt, "alpha": config.alpha, "seed": config.seed,
            "lambda_pairing": config.lambda_pairing,
        },
        "version": __version__,
        "backend": backend_name(),
        "wall_clock_s": round(time.time() - t0, 3),
    }
