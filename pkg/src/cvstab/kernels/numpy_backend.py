"""Pure-numpy fallback for the Monte-Carlo stability kernels.

Mirrors the numba backend's counter consumption exactly (see _rng for the
layout conventions), so both backends draw bit-identical uint64 streams;
floating-point results agree to ulp-level libm differences. Replications
loop in Python here, so this lane is 1-2 orders of magnitude slower; it
exists for environments without a working numba and as an independently
written cross-check of the kernel math.
"""

from __future__ import annotations

import math

import numpy as np

from .._rng import GAMMA_STRIDE, U64, gamma as _rng_gamma, normals as _rng_normals

COND_LIMIT = 1e12

OK = 0
ERR_SINGULAR = 1
ERR_NO_CONVERGE = 2
ERR_GAMMA = 3

FAM_OLS = 0
FAM_ST = 1
FAM_RIDGE = 2
FAM_LASSO = 3

GRID_LOG10_LO = -3
GRID_LOG10_HI = 6
GRID_REFINEMENTS = 4
GRID_POINTS = 10


class _KernelError(Exception):
    def __init__(self, code):
        self.code = code


def _normals(key, cur, count):
    z, used = _rng_normals(key, int(cur), count)
    return z, cur + U64(used)


def _gamma(key, cur, shape):
    try:
        g = _rng_gamma(key, int(cur), shape)
    except RuntimeError:
        raise _KernelError(ERR_GAMMA)
    return g, cur + U64(GAMMA_STRIDE)


def _bartlett(key, cur, dof, p):
    ntri = p * (p - 1) // 2
    tri, cur = _normals(key, cur, ntri)
    A = np.zeros((p, p))
    t = 0
    for i in range(p):
        A[i, :i] = tri[t : t + i]
        t += i
    for i in range(p):
        g, cur = _gamma(key, cur, 0.5 * (dof - i))
        A[i, i] = math.sqrt(2.0 * g)
    return A, cur


def _stats_from_bartlett(key, cur, m, beta, tau, with_yy):
    p = beta.size
    A, cur = _bartlett(key, cur, float(m), p)
    z, cur = _normals(key, cur, p)
    W = A @ A.T
    Az = A @ z
    Wb = W @ beta
    b = Wb + tau * Az
    yy = None
    if with_yy:
        extra = 0.0
        if m - p > 0:
            g, cur = _gamma(key, cur, 0.5 * (m - p))
            extra = 2.0 * g
        yy = beta @ Wb + 2.0 * tau * beta @ Az + tau * tau * (z @ z + extra)
    return W, b, yy, cur


def _stats_explicit(key, cur, m, beta, tau):
    p = beta.size
    W = np.zeros((p, p))
    b = np.zeros(p)
    yy = 0.0
    for _ in range(m):
        pt, cur = _normals(key, cur, p + 1)
        x = pt[:p]
        y = x @ beta + tau * pt[p]
        W += np.outer(x, x)
        b += y * x
        yy += y * y
    return W, b, yy, cur


def _draw_fold(key, cur, m, beta, tau):
    if m >= beta.size:
        return _stats_from_bartlett(key, cur, m, beta, tau, True)
    return _stats_explicit(key, cur, m, beta, tau)


def _chol(W):
    try:
        L = np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise _KernelError(ERR_SINGULAR)
    d = np.diag(L)
    if (d.max() / d.min()) ** 2 > COND_LIMIT:
        raise _KernelError(ERR_SINGULAR)
    return L

def _chol_solve(L, rhs):
    u = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, u)


def _cd(G, c, lam, beta, tol, max_iter):
    p = c.size
    Gbeta = G @ beta
    for sweep in range(1, max_iter + 1):
        delta_max = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                raise _KernelError(ERR_SINGULAR)
            old = beta[j]
            rho = c[j] - Gbeta[j] + gjj * old
            mag = abs(rho) - lam
            new = (mag / gjj if rho > 0.0 else -mag / gjj) if mag > 0.0 else 0.0
            if new != old:
                beta[j] = new
                Gbeta += (new - old) * G[:, j]
                delta_max = max(delta_max, abs(new - old))
        if delta_max < tol:
            return beta, sweep
    raise _KernelError(ERR_NO_CONVERGE)


def _fit(fam, W, b, lam, n, tol, max_iter):
    p = b.size
    if fam == FAM_RIDGE:
        return _chol_solve(_chol(W + lam * np.eye(p)), b)
    if fam == FAM_LASSO:
        beta, _ = _cd(W, b, lam, np.zeros(p), tol, max_iter)
        return beta
    beta = _chol_solve(_chol(W), b)
    if fam == FAM_ST:
        t = lam / n
        beta = np.sign(beta) * np.maximum(np.abs(beta) - t, 0.0)
    return beta


def _loss(x0, y0, beta):
    r = y0 - x0 @ beta
    return r * r


def _cond_risk(beta_hat, beta, tau):
    d = beta - beta_hat
    return tau * tau + d @ d


def _test_point(key, cur, beta, tau):
    pt, cur = _normals(key, cur, beta.size + 1)
    x = pt[:beta.size]
    return x, x @ beta + tau * pt[beta.size], cur


def sigma2_batch(keys, n, beta, tau, mode, fam1, lam1, fam2, lam2, tol, max_iter):
    M = keys.size
    out = np.zeros(M)
    status = np.zeros(M, dtype=np.int64)
    if n < beta.size:
        status[:] = ERR_SINGULAR
        return out, status
    for r in range(M):
        key = keys[r]
        cur = U64(0)
        try:
            W, b, _, cur = _stats_from_bartlett(key, cur, n, beta, tau, False)
            b1 = _fit(fam1, W, b, lam1, n, tol, max_iter)
            b1b = _fit(fam2, W, b, lam2, n, tol, max_iter) if mode == 1 else None
            W, b, _, cur = _stats_from_bartlett(key, cur, n, beta, tau, False)
            b2 = _fit(fam1, W, b, lam1, n, tol, max_iter)
            b2b = _fit(fam2, W, b, lam2, n, tol, max_iter) if mode == 1 else None
            x0, y0, cur = _test_point(key, cur, beta, tau)
            x0t, y0t, cur = _test_point(key, cur, beta, tau)
            if mode == 0:
                u = _loss(x0, y0, b1)
                v = _loss(x0, y0, b2)
                w = _loss(x0t, y0t, b2)
            else:
                u = _loss(x0, y0, b1) - _loss(x0, y0, b1b)
                v = _loss(x0, y0, b2) - _loss(x0, y0, b2b)
                w = _loss(x0t, y0t, b2) - _loss(x0t, y0t, b2b)
            out[r] = u * (v - w)
        except _KernelError as e:
            status[r] = e.code
    return out, status


def gamma_batch(keys, n, beta, tau, mode, fam1, lam1, fam2, lam2, tol, max_iter):
    M = keys.size
    p = beta.size
    out = np.zeros(M)
    status = np.zeros(M, dtype=np.int64)
    if n - 1 < p:
        status[:] = ERR_SINGULAR
        return out, status
    for r in range(M):
        key = keys[r]
        cur = U64(0)
        try:
            pt1, cur = _normals(key, cur, p + 1)
            x1, y1 = pt1[:p], pt1[:p] @ beta + tau * pt1[p]
            pt1p, cur = _normals(key, cur, p + 1)
            x1p, y1p = pt1p[:p], pt1p[:p] @ beta + tau * pt1p[p]
            W2, b2vec, _, cur = _stats_from_bartlett(key, cur, n - 1, beta, tau, False)
            W = W2 + np.outer(x1, x1)
            Wp = W2 + np.outer(x1p, x1p)
            b = b2vec + y1 * x1
            bp = b2vec + y1p * x1p
            ba1 = _fit(fam1, W, b, lam1, n, tol, max_iter)
            bb1 = _fit(fam1, Wp, bp, lam1, n, tol, max_iter)
            if mode == 1:
                ba2 = _fit(fam2, W, b, lam2, n, tol, max_iter)
                bb2 = _fit(fam2, Wp, bp, lam2, n, tol, max_iter)
            x0, y0, cur = _test_point(key, cur, beta, tau)
            if mode == 0:
                d = (_loss(x0, y0, ba1) - _cond_risk(ba1, beta, tau)) - (
                    _loss(x0, y0, bb1) - _cond_risk(bb1, beta, tau)
                )
            else:
                hd = _loss(x0, y0, ba1) - _loss(x0, y0, ba2)
                hdp = _loss(x0, y0, bb1) - _loss(x0, y0, bb2)
                qd = _cond_risk(ba1, beta, tau) - _cond_risk(ba2, beta, tau)
                qdp = _cond_risk(bb1, beta, tau) - _cond_risk(bb2, beta, tau)
                d = (hd - qd) - (hdp - qdp)
            out[r] = d * d
        except _KernelError as e:
            status[r] = e.code
    return out, status


def constant_c_batch(keys, beta, tau):
    M = keys.size
    p = beta.size
    out = np.empty(M)
    for r in range(M):
        key = keys[r]
        cur = U64(0)
        x0, y0, cur = _test_point(key, cur, beta, tau)
        e0 = y0 - x0 @ beta
        x1, y1, cur = _test_point(key, cur, beta, tau)
        v = -(y1 - x1 @ beta) * x1
        x1p, y1p, cur = _test_point(key, cur, beta, tau)
        v = v + (y1p - x1p @ beta) * x1p
        g = 2.0 * e0 * (x0 @ v)
        out[r] = g * g
    return out


def _grid_round(grid, Gf, cf, yyf, tol, max_iter):
    kf = yyf.size
    p = cf.shape[1]
    errs = np.zeros(grid.size)
    G_tot = Gf.sum(axis=0)
    c_tot = cf.sum(axis=0)
    for j in range(kf):
        G_tr = G_tot - Gf[j]
        c_tr = c_tot - cf[j]
        beta = np.zeros(p)
        for gi in range(grid.size - 1, -1, -1):
            beta, _ = _cd(G_tr, c_tr, grid[gi], beta, tol, max_iter)
            errs[gi] += yyf[j] - 2.0 * cf[j] @ beta + beta @ Gf[j] @ beta
    return errs


def _select_lambda_dev(Gf, cf, yyf, tol, max_iter):
    grid = 10.0 ** np.arange(GRID_LOG10_LO, GRID_LOG10_HI + 1, dtype=np.float64)
    best = 0.0
    for _ in range(GRID_REFINEMENTS + 1):
        errs = _grid_round(grid, Gf, cf, yyf, tol, max_iter)
        best_err = math.inf
        for gi in range(grid.size - 1, -1, -1):  # descending lam; ties keep smaller
            if errs[gi] <= best_err:
                best_err = errs[gi]
                best = grid[gi]
        lg = math.log10(best)
        grid = np.array([10.0 ** (lg - 1.0 + 2.0 * i / (GRID_POINTS - 1)) for i in range(GRID_POINTS)])
    return best


def select_lambda_stats(Gf, cf, yyf, tol, max_iter):
    try:
        return _select_lambda_dev(Gf, cf, yyf, tol, max_iter), OK
    except _KernelError as e:
        return 0.0, e.code


def lasso_cd(G, c, lam, beta0, tol, max_iter):
    try:
        beta, sweeps = _cd(G, c, lam, beta0.copy(), tol, max_iter)
        return beta, sweeps
    except _KernelError as e:
        return beta0.copy(), -1 if e.code == ERR_NO_CONVERGE else -2


def _fold_sizes(n, kf):
    sizes = np.full(kf, n // kf, dtype=np.int64)
    sizes[: n % kf] += 1
    return sizes


def sigma2_innercv_batch(keys, n, beta, tau, mode, kf, delta1, delta2, tol, max_iter):
    M = keys.size
    p = beta.size
    out = np.zeros(M)
    lams = np.zeros(M)
    status = np.zeros(M, dtype=np.int64)
    sizes = _fold_sizes(n, kf)
    for r in range(M):
        key = keys[r]
        cur = U64(0)
        try:
            betas = []
            lam_first = 0.0
            for ds in range(2):
                Gf = np.empty((kf, p, p))
                cf = np.empty((kf, p))
                yyf = np.empty(kf)
                for j in range(kf):
                    Gf[j], cf[j], yyf[j], cur = _draw_fold(key, cur, int(sizes[j]), beta, tau)
                lam = _select_lambda_dev(Gf, cf, yyf, tol, max_iter)
                if ds == 0:
                    lam_first = lam
                W = Gf.sum(axis=0)
                b = cf.sum(axis=0)
                pair = [_fit(FAM_LASSO, W, b, lam + delta1, n, tol, max_iter)]
                if mode == 1:
                    pair.append(_fit(FAM_LASSO, W, b, lam + delta2, n, tol, max_iter))
                betas.append(pair)
            x0, y0, cur = _test_point(key, cur, beta, tau)
            x0t, y0t, cur = _test_point(key, cur, beta, tau)
            if mode == 0:
                u = _loss(x0, y0, betas[0][0])
                v = _loss(x0, y0, betas[1][0])
                w = _loss(x0t, y0t, betas[1][0])
            else:
                u = _loss(x0, y0, betas[0][0]) - _loss(x0, y0, betas[0][1])
                v = _loss(x0, y0, betas[1][0]) - _loss(x0, y0, betas[1][1])
                w = _loss(x0t, y0t, betas[1][0]) - _loss(x0t, y0t, betas[1][1])
            out[r] = u * (v - w)
            lams[r] = lam_first
        except _KernelError as e:
            status[r] = e.code
    return out, lams, status


def gamma_innercv_batch(keys, n, beta, tau, mode, kf, delta1, delta2, tol, max_iter):
    M = keys.size
    p = beta.size
    out = np.zeros(M)
    lams = np.zeros(M)
    status = np.zeros(M, dtype=np.int64)
    sizes = _fold_sizes(n, kf)
    for r in range(M):
        key = keys[r]
        cur = U64(0)
        try:
            pt1, cur = _normals(key, cur, p + 1)
            x1, y1 = pt1[:p], pt1[:p] @ beta + tau * pt1[p]
            pt1p, cur = _normals(key, cur, p + 1)
            x1p, y1p = pt1p[:p], pt1p[:p] @ beta + tau * pt1p[p]
            G0r, c0r, yy0r, cur = _draw_fold(key, cur, int(sizes[0]) - 1, beta, tau)
            Gf = np.empty((kf, p, p))
            cf = np.empty((kf, p))
            yyf = np.empty(kf)
            for j in range(1, kf):
                Gf[j], cf[j], yyf[j], cur = _draw_fold(key, cur, int(sizes[j]), beta, tau)
            betas = []
            lam_first = 0.0
            for rep_pt, (px, py) in enumerate(((x1, y1), (x1p, y1p))):
                Gf[0] = G0r + np.outer(px, px)
                cf[0] = c0r + py * px
                yyf[0] = yy0r + py * py
                lam = _select_lambda_dev(Gf, cf, yyf, tol, max_iter)
                if rep_pt == 0:
                    lam_first = lam
                W = Gf.sum(axis=0)
                b = cf.sum(axis=0)
                pair = [_fit(FAM_LASSO, W, b, lam + delta1, n, tol, max_iter)]
                if mode == 1:
                    pair.append(_fit(FAM_LASSO, W, b, lam + delta2, n, tol, max_iter))
                betas.append(pair)
            x0, y0, cur = _test_point(key, cur, beta, tau)
            if mode == 0:
                d = (_loss(x0, y0, betas[0][0]) - _cond_risk(betas[0][0], beta, tau)) - (
                    _loss(x0, y0, betas[1][0]) - _cond_risk(betas[1][0], beta, tau)
                )
            else:
                hd = _loss(x0, y0, betas[0][0]) - _loss(x0, y0, betas[0][1])
                hdp = _loss(x0, y0, betas[1][0]) - _loss(x0, y0, betas[1][1])
                qd = _cond_risk(betas[0][0], beta, tau) - _cond_risk(betas[0][1], beta, tau)
                qdp = _cond_risk(betas[1][0], beta, tau) - _cond_risk(betas[1][1], beta, tau)
                d = (hd - qd) - (hdp - qdp)
            out[r] = d * d
            lams[r] = lam_first
        except _KernelError as e:
            status[r] = e.code
    return out, lams, status
