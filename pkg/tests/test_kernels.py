"""Cross-backend checks: the numba and numpy lanes implement the same
kernel spec independently, consume identical uint64 streams, and must agree
to ulp-level tolerances on matched replication keys.
"""

import numpy as np
import pytest

from cvstab._rng import rep_keys
from cvstab.estimators import fold_gram_stats, lasso_cd_gram, partition_indices, select_lambda_from_stats
from cvstab.kernels import numba_backend as nb
from cvstab.kernels import numpy_backend as npb

BETA = np.array([3.0, 1.0, -5.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
TAU = 10.0
TOL, MAXIT = 1e-8, 10_000


def _close(a, b, rtol=1e-9, atol=1e-11):
    return np.allclose(a, b, rtol=rtol, atol=atol)


@pytest.mark.parametrize("fam,lam_of_n", [
    (0, lambda n: 0.0),        # ols
    (1, lambda n: n**0.5),     # st
    (2, lambda n: n**0.5),     # ridge
    (3, lambda n: n**0.5),     # lasso, fixed penalty
])
@pytest.mark.parametrize("mode", [0, 1])
def test_sigma2_lane_agreement(fam, lam_of_n, mode):
    keys = rep_keys((fam, mode, 1), 300)
    n = 60
    lam1 = lam_of_n(n)
    lam2 = lam1 + 1.0
    a, sa = nb.sigma2_batch(keys, n, BETA, TAU, mode, fam, lam1, fam, lam2, TOL, MAXIT)
    b, sb = npb.sigma2_batch(keys, n, BETA, TAU, mode, fam, lam1, fam, lam2, TOL, MAXIT)
    assert sa.sum() == 0 and sb.sum() == 0
    assert _close(a, b)


@pytest.mark.parametrize("fam,lam_of_n", [
    (0, lambda n: 0.0),
    (1, lambda n: n**0.5),
    (2, lambda n: n**0.5),
    (3, lambda n: n**0.5),
])
@pytest.mark.parametrize("mode", [0, 1])
def test_gamma_lane_agreement(fam, lam_of_n, mode):
    keys = rep_keys((fam, mode, 2), 300)
    n = 60
    lam1 = lam_of_n(n)
    a, sa = nb.gamma_batch(keys, n, BETA, TAU, mode, fam, lam1, fam, lam1 + 1.0, TOL, MAXIT)
    b, sb = npb.gamma_batch(keys, n, BETA, TAU, mode, fam, lam1, fam, lam1 + 1.0, TOL, MAXIT)
    assert sa.sum() == 0 and sb.sum() == 0
    assert _close(a, b)
    assert np.all(a >= 0) and np.all(b >= 0)


@pytest.mark.parametrize("n,kf", [(90, 9), (45, 9), (40, 4)])
@pytest.mark.parametrize("mode", [0, 1])
def test_innercv_lane_agreement(n, kf, mode):
    # covers Bartlett folds (n/kf >= p) and the explicit small-fold path
    keys = rep_keys((n, kf, mode), 40)
    a, la, sa = nb.sigma2_innercv_batch(keys, n, BETA, TAU, mode, kf, 0.0, 1.0, TOL, MAXIT)
    b, lb, sb = npb.sigma2_innercv_batch(keys, n, BETA, TAU, mode, kf, 0.0, 1.0, TOL, MAXIT)
    assert sa.sum() == 0 and sb.sum() == 0
    assert _close(la, lb, rtol=1e-9)
    assert _close(a, b, rtol=1e-7, atol=1e-12)
    g1, gl1, gs1 = nb.gamma_innercv_batch(keys, n, BETA, TAU, mode, kf, 0.0, 1.0, TOL, MAXIT)
    g2, gl2, gs2 = npb.gamma_innercv_batch(keys, n, BETA, TAU, mode, kf, 0.0, 1.0, TOL, MAXIT)
    assert gs1.sum() == 0 and gs2.sum() == 0
    assert _close(gl1, gl2, rtol=1e-9)
    assert _close(g1, g2, rtol=1e-7, atol=1e-14)


def test_constant_c_lane_agreement():
    keys = rep_keys(909, 5000)
    a = nb.constant_c_batch(keys, BETA, TAU)
    b = npb.constant_c_batch(keys, BETA, TAU)
    assert _close(a, b)


def test_identical_configs_give_exact_zero_in_both_lanes():
    keys = rep_keys(31, 50)
    lam = 60**0.5
    for mod in (nb, npb):
        c, s = mod.sigma2_batch(keys, 60, BETA, TAU, 1, 1, lam, 1, lam, TOL, MAXIT)
        assert np.all(c == 0.0) and s.sum() == 0
        g, s2 = mod.gamma_batch(keys, 60, BETA, TAU, 1, 1, lam, 1, lam, TOL, MAXIT)
        assert np.all(g == 0.0) and s2.sum() == 0


def test_selection_kernels_match_reference():
    rng = np.random.default_rng(77)
    for trial in range(5):
        n, p, kf = 72, 4, 9
        beta = rng.standard_normal(p) * 3.0
        X = rng.standard_normal((n, p))
        y = X @ beta + 5.0 * rng.standard_normal(n)
        folds = partition_indices(n, kf, rng.permutation(n))
        Gf, cf, yyf, _ = fold_gram_stats(X, y, folds)
        ref = select_lambda_from_stats(Gf, cf, yyf)
        lam_nb, st_nb = nb.select_lambda_stats(Gf, cf, yyf, TOL, MAXIT)
        lam_np, st_np = npb.select_lambda_stats(Gf, cf, yyf, TOL, MAXIT)
        assert st_nb == 0 and st_np == 0
        assert lam_nb == pytest.approx(ref, rel=1e-12)
        assert lam_np == pytest.approx(ref, rel=1e-12)


def test_lasso_cd_kernel_matches_public():
    rng = np.random.default_rng(78)
    X = rng.standard_normal((50, 6))
    y = rng.standard_normal(50)
    G, c = X.T @ X, X.T @ y
    lam = 7.5
    ref, sweeps_ref, ok = lasso_cd_gram(G, c, lam)
    assert ok
    for mod in (nb, npb):
        beta, sweeps = mod.lasso_cd(G, c, lam, np.zeros(6), TOL, MAXIT)
        assert sweeps > 0
        assert np.allclose(beta, ref, atol=1e-12)


def test_singular_system_reports_status():
    # n < p makes the OLS gram singular; the kernel must flag, not crash
    keys = rep_keys(5, 10)
    beta = np.zeros(3)
    c, s = npb.sigma2_batch(keys, 2, beta, 1.0, 0, 0, 0.0, 0, 0.0, TOL, MAXIT)
    assert np.all(s == npb.ERR_SINGULAR)


def test_thread_count_invariance():
    import numba

    keys = rep_keys(4242, 5000)
    n = 40
    a, _ = nb.sigma2_batch(keys, n, BETA, TAU, 0, 1, n**0.5, 1, n**0.5, TOL, MAXIT)
    old = numba.get_num_threads()
    try:
        numba.set_num_threads(max(1, min(2, numba.config.NUMBA_NUM_THREADS)))
        b, _ = nb.sigma2_batch(keys, n, BETA, TAU, 0, 1, n**0.5, 1, n**0.5, TOL, MAXIT)
    finally:
        numba.set_num_threads(old)
    assert np.array_equal(a, b)
