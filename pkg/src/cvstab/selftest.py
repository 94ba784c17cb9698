"""Small-instance oracle checks behind the `cvstab selftest` subcommand.

Each check returns (name, passed, detail). The full-size versions live in
the test suite; these run in seconds and are meant as an installed-package
sanity gate.
"""

from __future__ import annotations

import numpy as np

from .estimators import (
    EstimatorConfig,
    PenaltyRule,
    fit_lasso,
    fit_ols,
    fit_st,
    soft_threshold,
)
from .kernels import backend_name, get_backend
from .linmodel import Dataset, ModelSpec, cond_risk_single
from .oracles import (
    brute_force_sigma2,
    nested_mc_cond_risk,
    nested_mc_gamma,
    orthogonal_design,
)
from ._rng import rep_keys
from .stability import mc_gamma, mc_sigma2


def _check_st_properties():
    rng = np.random.default_rng(101)
    for _ in range(2000):
        p = rng.integers(1, 8)
        beta = rng.standard_normal(p) * 10.0 ** float(rng.integers(-3, 3))
        lam = float(rng.uniform(0, 5))
        delta = float(rng.uniform(0, 5))
        n = int(rng.integers(1, 1000))
        a = soft_threshold(beta, lam, n)
        b = soft_threshold(beta, lam + delta, n)
        if np.any(np.abs(a) > np.abs(beta)):
            return False, "shrinkage violated"
        # exact in real arithmetic; fp rounding of the two thresholds needs ulp slack
        slack = 4.0 * np.finfo(float).eps * (np.abs(beta) + (lam + delta) / n)
        if np.any(np.abs(a - b) > delta / n + slack):
            return False, "delta/n Lipschitz bound violated"
        if np.any((b != 0) & (a == 0)):
            return False, "support monotonicity violated"
    return True, "shrinkage, Lipschitz, support monotonicity on 2000 cases"


def _check_orthogonal_equivalence():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        n, p = 40, 5
        X = orthogonal_design(n, p, int(rng.integers(1 << 30)))
        beta = rng.standard_normal(p) * 3
        y = X @ beta + rng.standard_normal(n)
        lam = float(rng.uniform(0.1, 2.0) * n)
        st = fit_st(Dataset(X, y), EstimatorConfig("st", PenaltyRule("fixed", fixed_value=lam)))
        la = fit_lasso(Dataset(X, y), EstimatorConfig("lasso", PenaltyRule("fixed", fixed_value=lam)))
        worst = max(worst, float(np.max(np.abs(st.beta_hat - la.beta_hat))))
    return worst < 1e-7, f"max |ST - Lasso| = {worst:.2e} on orthogonal designs"


def _check_cond_risk():
    spec = ModelSpec(np.array([1.0, -2.0, 0.5]), 1.5)
    rng = np.random.default_rng(11)
    beta_hat = rng.standard_normal(3)
    mc, se = nested_mc_cond_risk(spec, beta_hat, 400_000, 12345)
    exact = cond_risk_single(beta_hat, spec)
    z = abs(mc - exact) / se
    return z < 3.0, f"closed form within {z:.2f} SE of a 4e5-point average"


def _check_sigma2_rewriting():
    spec = ModelSpec(np.array([2.0]), 1.0)
    est = EstimatorConfig("ols")
    direct = mc_sigma2(spec, est, None, 3, 40_000, 5150)
    brute, brute_se = brute_force_sigma2(spec, est, None, 3, 400, 400, 8, 5151)
    z = abs(direct.value - brute) / (direct.std_err**2 + brute_se**2) ** 0.5
    return z < 3.0, f"product rewriting within {z:.2f} combined SE of Var(E[h|Z0])"


def _check_gamma_lemma():
    spec = ModelSpec(np.array([1.0]), 1.0)
    est = EstimatorConfig("ols")
    lemma = mc_gamma(spec, est, None, 2, 40_000, 616)
    nested, nested_se = nested_mc_gamma(spec, est, None, 2, 1500, 20_000, 617)
    z = abs(lemma.value - nested) / (lemma.std_err**2 + nested_se**2) ** 0.5
    return z < 3.0, f"closed-form conditioning within {z:.2f} combined SE of nested MC"


def _check_determinism():
    spec = ModelSpec(np.array([3.0, 1.0, -5.0, 3.0, 0.0]), 10.0)
    est = EstimatorConfig("st", PenaltyRule("power-law", c=1.0, a=0.5))
    a = mc_sigma2(spec, est, None, 50, 5000, 99)
    if backend_name() == "numba":
        import numba

        old = numba.get_num_threads()
        numba.set_num_threads(max(1, min(2, numba.config.NUMBA_NUM_THREADS)))
        b = mc_sigma2(spec, est, None, 50, 5000, 99)
        numba.set_num_threads(old)
    else:
        b = mc_sigma2(spec, est, None, 50, 5000, 99)
    ok = a.value == b.value and a.std_err == b.std_err
    return ok, "bit-identical across repeated runs and thread counts"


def _check_ols_residual():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((50, 3))
    y = rng.standard_normal(50)
    beta = fit_ols(Dataset(X, y)).beta_hat
    resid = X.T @ (y - X @ beta)
    bound = 1e-8 * (1.0 + np.max(np.abs(X.T @ y)))
    ok = np.max(np.abs(resid)) <= bound
    return ok, f"normal-equation residual {np.max(np.abs(resid)):.2e} <= {bound:.2e}"


def run_all():
    get_backend()  # fail early if the requested backend cannot load
    checks = [
        ("soft-threshold properties", _check_st_properties),
        ("lasso = ST on orthogonal designs", _check_orthogonal_equivalence),
        ("conditional risk closed form", _check_cond_risk),
        ("sigma^2 product rewriting", _check_sigma2_rewriting),
        ("gamma closed-form conditioning", _check_gamma_lemma),
        ("determinism", _check_determinism),
        ("OLS stationarity", _check_ols_residual),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as e:  # an oracle crash is a failure, not an abort
            ok, detail = False, f"raised {type(e).__name__}: {e}"
        results.append((name, ok, detail))
    return results
