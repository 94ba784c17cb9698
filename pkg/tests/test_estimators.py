import math

import numpy as np
import pytest

from cvstab import (
    ConfigurationError,
    Dataset,
    EstimatorConfig,
    ModelSpec,
    PenaltyRule,
    SingularDesignError,
    fit_lasso,
    fit_ols,
    fit_ridge,
    fit_st,
    sample_dataset,
    select_lambda_inner_cv,
    soft_threshold,
)
from cvstab.errors import ConvergenceError
from cvstab.estimators import lasso_objective, make_pair_fitter, make_single_fitter, sqrt_n_rule
from cvstab.oracles import orthogonal_design


# ---------------------------------------------------------------- penalties

def test_penalty_rules():
    assert PenaltyRule("fixed", fixed_value=3.0).value(10) == 3.0
    assert PenaltyRule("power-law", c=2.0, a=0.5).value(100) == pytest.approx(20.0)
    with pytest.raises(ConfigurationError):
        PenaltyRule("power-law", c=-1.0)
    with pytest.raises(ConfigurationError):
        PenaltyRule("nope")
    with pytest.raises(ConfigurationError):
        PenaltyRule("inner-cv").value(10)


def test_estimator_config_validation():
    with pytest.raises(ConfigurationError):
        EstimatorConfig("ols", sqrt_n_rule())
    with pytest.raises(ConfigurationError):
        EstimatorConfig("st")
    with pytest.raises(ConfigurationError):
        EstimatorConfig("st", sqrt_n_rule(), delta=-1.0)
    cfg = EstimatorConfig("st", sqrt_n_rule(), delta=1.0)
    assert cfg.effective_penalty(900) == pytest.approx(31.0)


# ---------------------------------------------------------------------- OLS

def test_ols_identity_design():
    X = np.eye(4)
    y = np.array([2.0, -1.0, 0.5, 3.0])
    # n == p needs a PD gram; identity qualifies but n > p is required: pad rows
    X = np.vstack([X, np.zeros((1, 4))])
    y = np.append(y, 0.0)
    beta = fit_ols(Dataset(X, y)).beta_hat
    assert np.allclose(beta, y[:4], atol=1e-12)


def test_ols_noiseless_recovery():
    spec = ModelSpec(np.array([2.0, -3.0, 0.0, 1.5]), 0.0)
    data = sample_dataset(spec, 50, 3)
    beta = fit_ols(data).beta_hat
    assert np.max(np.abs(beta - spec.beta_star)) < 1e-8


def test_ols_matches_explicit_3x3_inverse():
    rng = np.random.default_rng(17)
    X = rng.standard_normal((50, 3))
    y = rng.standard_normal(50)
    G = X.T @ X
    c = X.T @ y
    # cofactor-expansion inverse, independent of any solver
    det = (
        G[0, 0] * (G[1, 1] * G[2, 2] - G[1, 2] * G[2, 1])
        - G[0, 1] * (G[1, 0] * G[2, 2] - G[1, 2] * G[2, 0])
        + G[0, 2] * (G[1, 0] * G[2, 1] - G[1, 1] * G[2, 0])
    )
    adj = np.array([
        [G[1, 1] * G[2, 2] - G[1, 2] * G[2, 1], G[0, 2] * G[2, 1] - G[0, 1] * G[2, 2], G[0, 1] * G[1, 2] - G[0, 2] * G[1, 1]],
        [G[1, 2] * G[2, 0] - G[1, 0] * G[2, 2], G[0, 0] * G[2, 2] - G[0, 2] * G[2, 0], G[0, 2] * G[1, 0] - G[0, 0] * G[1, 2]],
        [G[1, 0] * G[2, 1] - G[1, 1] * G[2, 0], G[0, 1] * G[2, 0] - G[0, 0] * G[2, 1], G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]],
    ])
    expected = adj @ c / det
    beta = fit_ols(Dataset(X, y)).beta_hat
    assert np.max(np.abs(beta - expected)) < 1e-10


def test_ols_stationarity_residual():
    rng = np.random.default_rng(18)
    X = rng.standard_normal((200, 6))
    y = rng.standard_normal(200)
    beta = fit_ols(Dataset(X, y)).beta_hat
    resid = X.T @ (y - X @ beta)
    assert np.max(np.abs(resid)) <= 1e-8 * (1.0 + np.max(np.abs(X.T @ y)))


def test_ols_singular_design_raises():
    X = np.ones((10, 2))  # perfectly collinear columns
    y = np.arange(10.0)
    with pytest.raises(SingularDesignError):
        fit_ols(Dataset(X, y))
    with pytest.raises(SingularDesignError):
        fit_ols(Dataset(np.zeros((2, 3)), np.zeros(2)))  # n <= p


# ----------------------------------------------------------- soft threshold

def test_soft_threshold_examples():
    beta = np.array([2.0, -0.5, 0.0])
    assert np.array_equal(soft_threshold(beta, 0.0, 7), beta)
    assert np.array_equal(soft_threshold(beta, 10.0, 10), np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(soft_threshold(beta, 3.0, 1), np.zeros(3))


def test_soft_threshold_property_suite():
    # shrinkage and sign/support exactly; the delta/n Lipschitz bound with
    # ulp slack for the rounded thresholds (exact in real arithmetic)
    rng = np.random.default_rng(101)
    eps = np.finfo(float).eps
    for _ in range(10_000):
        p = int(rng.integers(1, 8))
        beta = rng.standard_normal(p) * 10.0 ** float(rng.integers(-3, 4))
        lam = float(rng.uniform(0.0, 10.0))
        delta = float(rng.uniform(0.0, 10.0))
        n = int(rng.integers(1, 10_000))
        a = soft_threshold(beta, lam, n)
        b = soft_threshold(beta, lam + delta, n)
        assert np.all(np.abs(a) <= np.abs(beta))
        assert np.all((a == 0) | (np.sign(a) == np.sign(beta)))
        slack = 4.0 * eps * (np.abs(beta) + (lam + delta) / n)
        assert np.all(np.abs(a - b) <= delta / n + slack)
        assert not np.any((b != 0) & (a == 0))  # monotone support


def test_fit_st_paper_schedule(paper_spec):
    data = sample_dataset(paper_spec, 900, 4)
    cfg = EstimatorConfig("st", sqrt_n_rule())
    res = fit_st(data, cfg)
    assert res.lambda_used == pytest.approx(30.0)
    ols = fit_ols(data).beta_hat
    assert np.allclose(res.beta_hat, soft_threshold(ols, 30.0, 900), atol=0)
    offset = fit_st(data, EstimatorConfig("st", sqrt_n_rule(), delta=1.0))
    assert offset.lambda_used - res.lambda_used == pytest.approx(1.0)


def test_fit_st_noiseless_support_recovery():
    spec = ModelSpec(np.array([3.0, -2.0, 0.0, 0.0, 1.0]), 0.0)
    data = sample_dataset(spec, 200, 5)
    lam = 0.5 * 200  # threshold 0.5 < min nonzero |beta*| = 1
    res = fit_st(data, EstimatorConfig("st", PenaltyRule("fixed", fixed_value=lam)))
    assert np.array_equal(res.beta_hat == 0, spec.beta_star == 0)


# -------------------------------------------------------------------- ridge

def test_ridge_limits():
    rng = np.random.default_rng(19)
    X = rng.standard_normal((60, 4))
    y = rng.standard_normal(60)
    b0 = fit_ridge(Dataset(X, y), EstimatorConfig("ridge", PenaltyRule("fixed", fixed_value=0.0))).beta_hat
    assert np.max(np.abs(b0 - fit_ols(Dataset(X, y)).beta_hat)) < 1e-8
    big = fit_ridge(Dataset(X, y), EstimatorConfig("ridge", PenaltyRule("fixed", fixed_value=1e12))).beta_hat
    assert np.max(np.abs(big)) <= 1e-6


def test_ridge_matches_2x2_closed_form():
    rng = np.random.default_rng(20)
    X = rng.standard_normal((20, 2))
    y = rng.standard_normal(20)
    lam = 3.7
    G = X.T @ X + lam * np.eye(2)
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    inv = np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]]) / det
    expected = inv @ (X.T @ y)
    got = fit_ridge(Dataset(X, y), EstimatorConfig("ridge", PenaltyRule("fixed", fixed_value=lam))).beta_hat
    assert np.max(np.abs(got - expected)) < 1e-10
    resid = (X.T @ X + lam * np.eye(2)) @ got - X.T @ y
    assert np.max(np.abs(resid)) <= 1e-8 * (1.0 + np.max(np.abs(X.T @ y)))


# -------------------------------------------------------------------- lasso

def _lasso_cfg(lam):
    return EstimatorConfig("lasso", PenaltyRule("fixed", fixed_value=lam))


def test_lasso_zero_penalty_equals_ols():
    rng = np.random.default_rng(21)
    X = rng.standard_normal((80, 5))
    y = rng.standard_normal(80)
    tol = 1e-10
    res = fit_lasso(Dataset(X, y), _lasso_cfg(0.0), tol=tol)
    assert res.converged
    assert np.max(np.abs(res.beta_hat - fit_ols(Dataset(X, y)).beta_hat)) < 100 * tol


def test_lasso_null_threshold_gives_zero():
    rng = np.random.default_rng(22)
    X = rng.standard_normal((50, 4))
    y = rng.standard_normal(50)
    lam = float(np.max(np.abs(X.T @ y)))
    res = fit_lasso(Dataset(X, y), _lasso_cfg(lam * 1.0000001))
    assert np.array_equal(res.beta_hat, np.zeros(4))


def test_lasso_equals_st_on_orthogonal_designs():
    rng = np.random.default_rng(23)
    tol = 1e-8
    for trial in range(100):
        n = int(rng.integers(10, 60))
        p = int(rng.integers(1, min(n, 8)))
        X = orthogonal_design(n, p, int(rng.integers(1 << 40)))
        beta = rng.standard_normal(p) * 3.0
        y = X @ beta + rng.standard_normal(n)
        lam = float(rng.uniform(0.05, 1.5)) * n
        la = fit_lasso(Dataset(X, y), _lasso_cfg(lam), tol=tol)
        st = fit_st(Dataset(X, y), EstimatorConfig("st", PenaltyRule("fixed", fixed_value=lam)))
        assert np.max(np.abs(la.beta_hat - st.beta_hat)) <= 10 * tol


def test_lasso_kkt_conditions():
    rng = np.random.default_rng(24)
    tol = 1e-8
    for _ in range(20):
        X = rng.standard_normal((60, 6))
        y = X @ (rng.standard_normal(6) * 2) + rng.standard_normal(60)
        lam = float(rng.uniform(1.0, 50.0))
        res = fit_lasso(Dataset(X, y), _lasso_cfg(lam), tol=tol)
        grad = X.T @ (y - X @ res.beta_hat)
        colsq = (X * X).sum(axis=0)
        active = res.beta_hat != 0
        assert np.all(np.abs(grad[active] - lam * np.sign(res.beta_hat[active])) <= 10 * tol * colsq[active])
        assert np.all(np.abs(grad[~active]) <= lam + 10 * tol * colsq[~active])


def test_lasso_objective_monotone_per_sweep():
    rng = np.random.default_rng(25)
    X = rng.standard_normal((40, 5))
    y = rng.standard_normal(40)
    # check_objective=True raises if any sweep increases the objective
    res = fit_lasso(Dataset(X, y), _lasso_cfg(2.0), check_objective=True)
    assert res.converged
    G, c = X.T @ X, X.T @ y
    yy = float(y @ y)
    assert lasso_objective(G, c, yy, res.beta_hat, 2.0) <= lasso_objective(G, c, yy, np.zeros(5), 2.0)


def test_lasso_nonconvergence_raises():
    rng = np.random.default_rng(26)
    X = rng.standard_normal((30, 3))
    y = rng.standard_normal(30)
    with pytest.raises(ConvergenceError):
        fit_lasso(Dataset(X, y), _lasso_cfg(0.0), tol=1e-14, max_iter=1)


# ----------------------------------------------------------------- inner CV

def test_inner_cv_prefers_heavy_shrinkage_on_pure_noise():
    spec = ModelSpec(np.zeros(5), 20.0)
    train = sample_dataset(spec, 90, 31)
    lam = select_lambda_inner_cv(train, 9, 32)
    grid = 10.0 ** np.arange(-3, 7)
    assert lam >= np.median(grid)


def test_inner_cv_prefers_light_shrinkage_on_noiseless_signal():
    spec = ModelSpec(np.array([5.0, -4.0, 3.0]), 1e-12)
    train = sample_dataset(spec, 90, 33)
    lam = select_lambda_inner_cv(train, 9, 34)
    assert lam <= 1e-2


def test_inner_cv_validation():
    spec = ModelSpec(np.zeros(2), 1.0)
    train = sample_dataset(spec, 10, 35)
    with pytest.raises(ConfigurationError):
        select_lambda_inner_cv(train, 1, 36)
    with pytest.raises(ConfigurationError):
        select_lambda_inner_cv(train, 11, 36)


def test_pair_fitter_shared_vs_independent(paper_spec):
    data = sample_dataset(paper_spec, 90, 40)
    inner = [np.arange(j * 10, (j + 1) * 10) for j in range(9)]
    cfg1 = EstimatorConfig("lasso", PenaltyRule("inner-cv"), delta=0.0)
    cfg2 = EstimatorConfig("lasso", PenaltyRule("inner-cv"), delta=1.0)
    shared = make_pair_fitter(cfg1, cfg2, "shared")
    pair, lam = shared(data.X, data.y, inner_folds=inner, stream=np.random.SeedSequence(1))
    assert pair.shape == (2, 10) and lam > 0
    indep = make_pair_fitter(cfg1, cfg2, "independent")
    pair2, lam2 = indep(data.X, data.y, inner_folds=inner, stream=np.random.SeedSequence(1))
    assert pair2.shape == (2, 10) and lam2 == lam  # algorithm 1's selection is shared
    with pytest.raises(ConfigurationError):
        make_pair_fitter(cfg1, cfg2, "bogus")


def test_single_fitter_reports_selected_penalty(paper_spec):
    data = sample_dataset(paper_spec, 90, 41)
    inner = [np.arange(j * 10, (j + 1) * 10) for j in range(9)]
    fitter = make_single_fitter(EstimatorConfig("lasso", PenaltyRule("inner-cv")))
    beta, lam = fitter(data.X, data.y, inner_folds=inner)
    assert beta.shape == (10,) and lam > 0
    det = make_single_fitter(EstimatorConfig("st", sqrt_n_rule()))
    assert det(data.X, data.y).shape == (10,)
