"""numba kernels for the Monte-Carlo stability estimators.

Replications are prange iterations writing to their own output slot, with
all randomness derived from per-replication counter-based keys, so results
are bit-identical across runs and thread counts.

Instead of materializing n x p datasets, replications draw the estimators'
sufficient statistics directly: W = X'X via a Bartlett-factor Wishart,
X'eps as tau L z with z standard normal, and the residual sum of squares
via an independent chi-square. For the isotropic Gaussian model this is an
exact sampling of the joint law of every fitted coefficient vector, at a
per-replication cost independent of n. Folds of fewer than p points fall
back to summing explicit rank-one terms.

Counter layout conventions match cvstab._rng exactly; the numpy backend
mirrors every consumption order so both lanes see the same uint64 streams.
"""

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX_A = U64(0xBF58476D1CE4E5B9)
MIX_B = U64(0x94D049BB133111EB)
TWO_PI = 6.283185307179586476925286766559
INV_2_53 = 2.0 ** -53

GAMMA_STRIDE = 128
GAMMA_MAX_ROUNDS = 40
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


@njit(cache=True)
def _unif(key, i):
    z = key + (i + U64(1)) * GOLDEN
    z = (z ^ (z >> U64(30))) * MIX_A
    z = (z ^ (z >> U64(27))) * MIX_B
    z = z ^ (z >> U64(31))
    return ((z >> U64(11)) + U64(1)) * INV_2_53


@njit(cache=True)
def _norm_fill(key, cur, out, count):
    """Fill out[:count] with standard normals; returns the advanced cursor."""
    m = (count + 1) // 2
    j = 0
    for _ in range(m):
        u1 = _unif(key, cur)
        u2 = _unif(key, cur + U64(1))
        cur += U64(2)
        r = math.sqrt(-2.0 * math.log(u1))
        t = TWO_PI * u2
        out[j] = r * math.cos(t)
        if j + 1 < count:
            out[j + 1] = r * math.sin(t)
        j += 2
    return cur


@njit(cache=True)
def _gamma(key, cur, shape):
    """Gamma(shape, 1) from the GAMMA_STRIDE counters at cur; -1.0 on failure."""
    if shape <= 0.0:
        return -1.0
    boost = 1.0
    a = shape
    if a < 1.0:
        u = _unif(key, cur + U64(GAMMA_STRIDE - 2))
        boost = u ** (1.0 / a)
        a += 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    for t in range(GAMMA_MAX_ROUNDS):
        u1 = _unif(key, cur + U64(3 * t))
        u2 = _unif(key, cur + U64(3 * t + 1))
        x = math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _unif(key, cur + U64(3 * t + 2))
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return boost * d * v
    return -1.0


@njit(cache=True)
def _tri_count(p):
    c = p * (p - 1) // 2
    return 2 * ((c + 1) // 2)


@njit(cache=True)
def _bartlett(key, cur, dof, A, tri):
    """Lower-triangular Bartlett factor of Wishart(I_p, dof); A A' ~ W_p(I, dof).

    Draw order: all strictly-lower normals in one block, then p diagonal
    chi-squares. Returns (cursor, ok).
    """
    p = A.shape[0]
    ntri = p * (p - 1) // 2
    cur = _norm_fill(key, cur, tri, ntri)
    t = 0
    for i in range(p):
        for j in range(i):
            A[i, j] = tri[t]
            t += 1
        for j in range(i, p):
            A[i, j] = 0.0
    for i in range(p):
        g = _gamma(key, cur, 0.5 * (dof - i))
        cur += U64(GAMMA_STRIDE)
        if g < 0.0:
            return cur, False
        A[i, i] = math.sqrt(2.0 * g)
    return cur, True


@njit(cache=True)
def _stats_from_bartlett(key, cur, m, beta, tau, with_yy, W, b, A, tri, z):
    """Sufficient statistics (W, b[, yy]) of m model draws via Wishart sampling.

    W = A A', b = W beta + tau A z, yy = beta' W beta + 2 tau beta' A z
    + tau^2 (||z||^2 + chi2_{m-p}). Requires m >= p.
    """
    p = beta.size
    cur, ok = _bartlett(key, cur, float(m), A, tri)
    if not ok:
        return cur, -1.0, False
    cur = _norm_fill(key, cur, z, p)
    for i in range(p):
        for j in range(i + 1):
            s = 0.0
            for k in range(j + 1):
                s += A[i, k] * A[j, k]
            W[i, j] = s
            W[j, i] = s
    # Az computed first; reused by both b and yy
    bb = 0.0
    zz = 0.0
    for i in range(p):
        az = 0.0
        for k in range(i + 1):
            az += A[i, k] * z[k]
        wb = 0.0
        for j in range(p):
            wb += W[i, j] * beta[j]
        b[i] = wb + tau * az
        bb += beta[i] * (wb + 2.0 * tau * az)
        zz += z[i] * z[i]
    yy = -1.0
    if with_yy:
        extra = 0.0
        if m - p > 0:
            g = _gamma(key, cur, 0.5 * (m - p))
            cur += U64(GAMMA_STRIDE)
            if g < 0.0:
                return cur, -1.0, False
            extra = 2.0 * g
        yy = bb + tau * tau * (zz + extra)
    return cur, yy, True


@njit(cache=True)
def _stats_explicit(key, cur, m, beta, tau, W, b, pt):
    """(W, b, yy) of m model draws from explicit points; any m >= 0."""
    p = beta.size
    for i in range(p):
        b[i] = 0.0
        for j in range(p):
            W[i, j] = 0.0
    yy = 0.0
    for _ in range(m):
        cur = _norm_fill(key, cur, pt, p + 1)
        xb = 0.0
        for i in range(p):
            xb += pt[i] * beta[i]
        y = xb + tau * pt[p]
        for i in range(p):
            b[i] += y * pt[i]
            for j in range(p):
                W[i, j] += pt[i] * pt[j]
        yy += y * y
    return cur, yy


@njit(cache=True)
def _chol(W, L):
    """Cholesky with a diag-ratio condition guard; returns ok."""
    p = W.shape[0]
    dmin = 1e300
    dmax = 0.0
    for i in range(p):
        for j in range(i + 1):
            s = W[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if s <= 0.0:
                    return False
                d = math.sqrt(s)
                L[i, i] = d
                if d < dmin:
                    dmin = d
                if d > dmax:
                    dmax = d
            else:
                L[i, j] = s / L[j, j]
        for j in range(i + 1, p):
            L[i, j] = 0.0
    return (dmax / dmin) ** 2 <= COND_LIMIT


@njit(cache=True)
def _chol_solve(L, rhs, out):
    p = L.shape[0]
    for i in range(p):
        s = rhs[i]
        for k in range(i):
            s -= L[i, k] * out[k]
        out[i] = s / L[i, i]
    for i in range(p - 1, -1, -1):
        s = out[i]
        for k in range(i + 1, p):
            s -= L[k, i] * out[k]
        out[i] = s / L[i, i]


@njit(cache=True)
def _cd(G, c, lam, beta, Gbeta, tol, max_iter):
    """Cyclic coordinate descent on the Gram-form Lasso; beta updated in place.

    Returns sweep count, or -1 if not converged, -2 on a zero diagonal.
    """
    p = c.size
    for i in range(p):
        s = 0.0
        for j in range(p):
            s += G[i, j] * beta[j]
        Gbeta[i] = s
    for sweep in range(1, max_iter + 1):
        delta_max = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                return -2
            old = beta[j]
            rho = c[j] - Gbeta[j] + gjj * old
            mag = abs(rho) - lam
            if mag > 0.0:
                new = mag / gjj if rho > 0.0 else -mag / gjj
            else:
                new = 0.0
            if new != old:
                beta[j] = new
                d = new - old
                for i in range(p):
                    Gbeta[i] += d * G[i, j]
                ad = abs(d)
                if ad > delta_max:
                    delta_max = ad
        if delta_max < tol:
            return sweep
    return -1


@njit(cache=True)
def _fit(fam, W, b, lam, n, tol, max_iter, beta_out, L, work):
    """Fit one family from Gram statistics; returns ok."""
    p = b.size
    if fam == FAM_RIDGE:
        for i in range(p):
            for j in range(p):
                work[i, j] = W[i, j]
            work[i, i] += lam
        if not _chol(work, L):
            return ERR_SINGULAR
        _chol_solve(L, b, beta_out)
        return OK
    if fam == FAM_LASSO:
        for i in range(p):
            beta_out[i] = 0.0
        it = _cd(W, b, lam, beta_out, L[0], tol, max_iter)
        if it == -1:
            return ERR_NO_CONVERGE
        if it == -2:
            return ERR_SINGULAR
        return OK
    if not _chol(W, L):
        return ERR_SINGULAR
    _chol_solve(L, b, beta_out)
    if fam == FAM_ST:
        t = lam / n
        for i in range(p):
            v = beta_out[i]
            if v > t:
                beta_out[i] = v - t
            elif v < -t:
                beta_out[i] = v + t
            else:
                beta_out[i] = 0.0
    return OK


@njit(cache=True)
def _loss(x0, y0, beta):
    p = beta.size
    s = 0.0
    for i in range(p):
        s += x0[i] * beta[i]
    r = y0 - s
    return r * r


@njit(cache=True)
def _cond_risk(beta_hat, beta, tau):
    s = tau * tau
    for i in range(beta.size):
        d = beta[i] - beta_hat[i]
        s += d * d
    return s


@njit(cache=True)
def _test_point(key, cur, beta, tau, pt):
    cur = _norm_fill(key, cur, pt, beta.size + 1)
    xb = 0.0
    for i in range(beta.size):
        xb += pt[i] * beta[i]
    return cur, xb + tau * pt[beta.size]


@njit(cache=True)
def sigma2_batch(keys, n, beta, tau, mode, fam1, lam1, fam2, lam2, tol, max_iter):
    """Per-replication contributions h(Z0,Z) (h(Z0,Z~) - h(Z~0,Z~)).

    mode 0: single loss with (fam1, lam1); mode 1: difference of the
    (fam1, lam1) and (fam2, lam2) losses, both fit on the same data.
    """
    M = keys.size
    p = beta.size
    out = np.empty(M)
    status = np.zeros(M, dtype=np.int64)
    if n < p:
        status[:] = ERR_SINGULAR
        out[:] = 0.0
        return out, status
    for r in prange(M):
        key = keys[r]
        A = np.empty((p, p))
        W = np.empty((p, p))
        L = np.empty((p, p))
        work = np.empty((p, p))
        tri = np.empty(max(p * (p - 1) // 2, 1))
        z = np.empty(p)
        bvec = np.empty(p)
        pt = np.empty(p + 1)
        b1 = np.empty(p)
        b1b = np.empty(p)
        b2 = np.empty(p)
        b2b = np.empty(p)
        cur = U64(0)

        cur, _, ok = _stats_from_bartlett(key, cur, n, beta, tau, False, W, bvec, A, tri, z)
        if not ok:
            status[r] = ERR_GAMMA
            out[r] = 0.0
            continue
        st = _fit(fam1, W, bvec, lam1, n, tol, max_iter, b1, L, work)
        if st == OK and mode == 1:
            st = _fit(fam2, W, bvec, lam2, n, tol, max_iter, b1b, L, work)
        if st == OK:
            cur, _, ok = _stats_from_bartlett(key, cur, n, beta, tau, False, W, bvec, A, tri, z)
            if not ok:
                st = ERR_GAMMA
        if st == OK:
            st = _fit(fam1, W, bvec, lam1, n, tol, max_iter, b2, L, work)
        if st == OK and mode == 1:
            st = _fit(fam2, W, bvec, lam2, n, tol, max_iter, b2b, L, work)
        if st != OK:
            status[r] = st
            out[r] = 0.0
            continue

        cur, y0 = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            u = _loss(pt, y0, b1)
            v = _loss(pt, y0, b2)
        else:
            u = _loss(pt, y0, b1) - _loss(pt, y0, b1b)
            v = _loss(pt, y0, b2) - _loss(pt, y0, b2b)
        cur, y0t = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            w = _loss(pt, y0t, b2)
        else:
            w = _loss(pt, y0t, b2) - _loss(pt, y0t, b2b)
        out[r] = u * (v - w)
    return out, status


@njit(cache=True)
def gamma_batch(keys, n, beta, tau, mode, fam1, lam1, fam2, lam2, tol, max_iter):
    """Per-replication contributions of the loss-stability estimator.

    One training set Z and its copy Z' with the first point replaced; the
    conditional expectations are the closed-form conditional risks.
    """
    M = keys.size
    p = beta.size
    out = np.empty(M)
    status = np.zeros(M, dtype=np.int64)
    if n - 1 < p:
        status[:] = ERR_SINGULAR
        out[:] = 0.0
        return out, status
    for r in prange(M):
        key = keys[r]
        A = np.empty((p, p))
        W2 = np.empty((p, p))
        W = np.empty((p, p))
        Wp = np.empty((p, p))
        L = np.empty((p, p))
        work = np.empty((p, p))
        tri = np.empty(max(p * (p - 1) // 2, 1))
        z = np.empty(p)
        b2vec = np.empty(p)
        bvec = np.empty(p)
        bpvec = np.empty(p)
        pt1 = np.empty(p + 1)
        pt1p = np.empty(p + 1)
        pt = np.empty(p + 1)
        ba1 = np.empty(p)
        ba2 = np.empty(p)
        bb1 = np.empty(p)
        bb2 = np.empty(p)
        cur = U64(0)

        cur = _norm_fill(key, cur, pt1, p + 1)
        xb = 0.0
        for i in range(p):
            xb += pt1[i] * beta[i]
        y1 = xb + tau * pt1[p]
        cur = _norm_fill(key, cur, pt1p, p + 1)
        xb = 0.0
        for i in range(p):
            xb += pt1p[i] * beta[i]
        y1p = xb + tau * pt1p[p]

        cur, _, ok = _stats_from_bartlett(key, cur, n - 1, beta, tau, False, W2, b2vec, A, tri, z)
        if not ok:
            status[r] = ERR_GAMMA
            out[r] = 0.0
            continue
        for i in range(p):
            for j in range(p):
                W[i, j] = W2[i, j] + pt1[i] * pt1[j]
                Wp[i, j] = W2[i, j] + pt1p[i] * pt1p[j]
            bvec[i] = b2vec[i] + y1 * pt1[i]
            bpvec[i] = b2vec[i] + y1p * pt1p[i]

        st = _fit(fam1, W, bvec, lam1, n, tol, max_iter, ba1, L, work)
        if st == OK:
            st = _fit(fam1, Wp, bpvec, lam1, n, tol, max_iter, bb1, L, work)
        if st == OK and mode == 1:
            st = _fit(fam2, W, bvec, lam2, n, tol, max_iter, ba2, L, work)
            if st == OK:
                st = _fit(fam2, Wp, bpvec, lam2, n, tol, max_iter, bb2, L, work)
        if st != OK:
            status[r] = st
            out[r] = 0.0
            continue

        cur, y0 = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            d = (_loss(pt, y0, ba1) - _cond_risk(ba1, beta, tau)) - (
                _loss(pt, y0, bb1) - _cond_risk(bb1, beta, tau)
            )
        else:
            hd = _loss(pt, y0, ba1) - _loss(pt, y0, ba2)
            hdp = _loss(pt, y0, bb1) - _loss(pt, y0, bb2)
            qd = _cond_risk(ba1, beta, tau) - _cond_risk(ba2, beta, tau)
            qdp = _cond_risk(bb1, beta, tau) - _cond_risk(bb2, beta, tau)
            d = (hd - qd) - (hdp - qdp)
        out[r] = d * d
    return out, status


@njit(cache=True)
def constant_c_batch(keys, beta, tau):
    """Contributions (2 (Y0 - X0'b*) X0'V)^2 with V from two replacement points."""
    M = keys.size
    p = beta.size
    out = np.empty(M)
    for r in prange(M):
        key = keys[r]
        pt = np.empty(p + 1)
        v = np.empty(p)
        cur = U64(0)
        cur, y0 = _test_point(key, cur, beta, tau, pt)
        xb = 0.0
        for i in range(p):
            xb += pt[i] * beta[i]
        e0 = y0 - xb
        x0v = 0.0
        # V accumulates -(resid1) X1 then +(resid1') X1'
        pt2 = np.empty(p + 1)
        cur, y1 = _test_point(key, cur, beta, tau, pt2)
        xb = 0.0
        for i in range(p):
            xb += pt2[i] * beta[i]
        e1 = y1 - xb
        for i in range(p):
            v[i] = -e1 * pt2[i]
        cur, y1p = _test_point(key, cur, beta, tau, pt2)
        xb = 0.0
        for i in range(p):
            xb += pt2[i] * beta[i]
        e1p = y1p - xb
        for i in range(p):
            v[i] += e1p * pt2[i]
        for i in range(p):
            x0v += pt[i] * v[i]
        g = 2.0 * e0 * x0v
        out[r] = g * g
    return out


@njit(cache=True)
def _grid_round(grid, Gf, cf, yyf, G_tr, c_tr, bwork, Gbeta, errs, tol, max_iter):
    """CV error of every grid value; grid scanned at descending lam with warm starts."""
    kf = yyf.size
    p = cf.shape[1]
    m = grid.size
    for gi in range(m):
        errs[gi] = 0.0
    for j in range(kf):
        # training-set grams = sum over all folds but j
        for a in range(p):
            cacc = 0.0
            for jj in range(kf):
                if jj != j:
                    cacc += cf[jj, a]
            c_tr[a] = cacc
            for b in range(p):
                gacc = 0.0
                for jj in range(kf):
                    if jj != j:
                        gacc += Gf[jj, a, b]
                G_tr[a, b] = gacc
        for a in range(p):
            bwork[a] = 0.0
        for gi in range(m - 1, -1, -1):
            it = _cd(G_tr, c_tr, grid[gi], bwork, Gbeta, tol, max_iter)
            if it < 0:
                return it
            e = yyf[j]
            for a in range(p):
                e -= 2.0 * cf[j, a] * bwork[a]
                gb = 0.0
                for b in range(p):
                    gb += Gf[j, a, b] * bwork[b]
                e += bwork[a] * gb
            errs[gi] += e
    return 0


@njit(cache=True)
def _select_lambda_dev(Gf, cf, yyf, tol, max_iter):
    """Adaptive grid search; returns (lam_hat, status)."""
    p = cf.shape[1]
    ngrid = GRID_LOG10_HI - GRID_LOG10_LO + 1
    grid = np.empty(max(ngrid, GRID_POINTS))
    errs = np.empty(max(ngrid, GRID_POINTS))
    G_tr = np.empty((p, p))
    c_tr = np.empty(p)
    bwork = np.empty(p)
    Gbeta = np.empty(p)
    m = ngrid
    for i in range(ngrid):
        grid[i] = 10.0 ** (GRID_LOG10_LO + i)
    best = 0.0
    for _ in range(GRID_REFINEMENTS + 1):
        rc = _grid_round(grid[:m], Gf, cf, yyf, G_tr, c_tr, bwork, Gbeta, errs[:m], tol, max_iter)
        if rc == -1:
            return 0.0, ERR_NO_CONVERGE
        if rc == -2:
            return 0.0, ERR_SINGULAR
        best_err = 1e300
        for gi in range(m - 1, -1, -1):  # descending lam; ties keep the smaller
            if errs[gi] <= best_err:
                best_err = errs[gi]
                best = grid[gi]
        lg = math.log10(best)
        m = GRID_POINTS
        for i in range(GRID_POINTS):
            grid[i] = 10.0 ** (lg - 1.0 + 2.0 * i / (GRID_POINTS - 1))
    return best, OK


@njit(cache=True)
def select_lambda_stats(Gf, cf, yyf, tol, max_iter):
    """Public wrapper over the selection device function."""
    return _select_lambda_dev(Gf, cf, yyf, tol, max_iter)


@njit(cache=True)
def lasso_cd(G, c, lam, beta0, tol, max_iter):
    """Gram-form coordinate descent; returns (beta, sweeps) with sweeps < 0 on failure."""
    p = c.size
    beta = beta0.copy()
    Gbeta = np.empty(p)
    it = _cd(G, c, lam, beta, Gbeta, tol, max_iter)
    return beta, it


@njit(cache=True)
def _fold_sizes(n, kf, sizes):
    base = n // kf
    rem = n % kf
    for j in range(kf):
        sizes[j] = base + (1 if j < rem else 0)


@njit(cache=True)
def _draw_fold(key, cur, m, beta, tau, W, b, A, tri, z, pt):
    """Fold statistics with yy; Bartlett route for m >= p, explicit otherwise."""
    p = beta.size
    if m >= p:
        return _stats_from_bartlett(key, cur, m, beta, tau, True, W, b, A, tri, z)
    cur, yy = _stats_explicit(key, cur, m, beta, tau, W, b, pt)
    return cur, yy, True


@njit(cache=True)
def sigma2_innercv_batch(keys, n, beta, tau, mode, kf, delta1, delta2, tol, max_iter):
    """sigma^2 contributions for inner-CV Lasso; one selection per training draw.

    Comparison mode fits at (lam_hat + delta1, lam_hat + delta2) from the
    shared selection (the default pairing).
    """
    M = keys.size
    p = beta.size
    out = np.empty(M)
    lams = np.empty(M)
    status = np.zeros(M, dtype=np.int64)
    for r in prange(M):
        key = keys[r]
        A = np.empty((p, p))
        tri = np.empty(max(p * (p - 1) // 2, 1))
        z = np.empty(p)
        pt = np.empty(p + 1)
        Gf = np.empty((kf, p, p))
        cf = np.empty((kf, p))
        yyf = np.empty(kf)
        sizes = np.empty(kf, dtype=np.int64)
        W = np.empty((p, p))
        bvec = np.empty(p)
        L = np.empty((p, p))
        work = np.empty((p, p))
        b1 = np.empty(p)
        b1b = np.empty(p)
        b2 = np.empty(p)
        b2b = np.empty(p)
        _fold_sizes(n, kf, sizes)
        cur = U64(0)
        st = OK
        lam_first = 0.0

        for ds in range(2):
            for j in range(kf):
                cur, yy, ok = _draw_fold(key, cur, sizes[j], beta, tau, Gf[j], cf[j], A, tri, z, pt)
                if not ok:
                    st = ERR_GAMMA
                    break
                yyf[j] = yy
            if st != OK:
                break
            lam, sst = _select_lambda_dev(Gf, cf, yyf, tol, max_iter)
            if sst != OK:
                st = sst
                break
            if ds == 0:
                lam_first = lam
            for a in range(p):
                s = 0.0
                for j in range(kf):
                    s += cf[j, a]
                bvec[a] = s
                for bcol in range(p):
                    g = 0.0
                    for j in range(kf):
                        g += Gf[j, a, bcol]
                    W[a, bcol] = g
            t1 = b1 if ds == 0 else b2
            t2 = b1b if ds == 0 else b2b
            st = _fit(FAM_LASSO, W, bvec, lam + delta1, n, tol, max_iter, t1, L, work)
            if st == OK and mode == 1:
                st = _fit(FAM_LASSO, W, bvec, lam + delta2, n, tol, max_iter, t2, L, work)
            if st != OK:
                break
        if st != OK:
            status[r] = st
            out[r] = 0.0
            lams[r] = 0.0
            continue

        cur, y0 = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            u = _loss(pt, y0, b1)
            v = _loss(pt, y0, b2)
        else:
            u = _loss(pt, y0, b1) - _loss(pt, y0, b1b)
            v = _loss(pt, y0, b2) - _loss(pt, y0, b2b)
        cur, y0t = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            w = _loss(pt, y0t, b2)
        else:
            w = _loss(pt, y0t, b2) - _loss(pt, y0t, b2b)
        out[r] = u * (v - w)
        lams[r] = lam_first
    return out, lams, status


@njit(cache=True)
def gamma_innercv_batch(keys, n, beta, tau, mode, kf, delta1, delta2, tol, max_iter):
    """gamma contributions for inner-CV Lasso.

    The replaced training point sits in fold 0; the fold partition (the
    algorithm's internal randomness) is held fixed between Z and Z', and the
    penalty is re-selected on each training set.
    """
    M = keys.size
    p = beta.size
    out = np.empty(M)
    lams = np.empty(M)
    status = np.zeros(M, dtype=np.int64)
    for r in prange(M):
        key = keys[r]
        A = np.empty((p, p))
        tri = np.empty(max(p * (p - 1) // 2, 1))
        z = np.empty(p)
        pt = np.empty(p + 1)
        pt1 = np.empty(p + 1)
        pt1p = np.empty(p + 1)
        Gf = np.empty((kf, p, p))
        cf = np.empty((kf, p))
        yyf = np.empty(kf)
        G0r = np.empty((p, p))
        c0r = np.empty(p)
        sizes = np.empty(kf, dtype=np.int64)
        W = np.empty((p, p))
        bvec = np.empty(p)
        L = np.empty((p, p))
        work = np.empty((p, p))
        ba1 = np.empty(p)
        ba2 = np.empty(p)
        bb1 = np.empty(p)
        bb2 = np.empty(p)
        _fold_sizes(n, kf, sizes)
        cur = U64(0)
        st = OK

        cur = _norm_fill(key, cur, pt1, p + 1)
        xb = 0.0
        for i in range(p):
            xb += pt1[i] * beta[i]
        y1 = xb + tau * pt1[p]
        cur = _norm_fill(key, cur, pt1p, p + 1)
        xb = 0.0
        for i in range(p):
            xb += pt1p[i] * beta[i]
        y1p = xb + tau * pt1p[p]

        # fold 0 = replaced point + (size-1) common remainder; folds 1.. shared
        cur, yy0r, ok = _draw_fold(key, cur, sizes[0] - 1, beta, tau, G0r, c0r, A, tri, z, pt)
        if not ok:
            st = ERR_GAMMA
        if st == OK:
            for j in range(1, kf):
                cur, yy, ok = _draw_fold(key, cur, sizes[j], beta, tau, Gf[j], cf[j], A, tri, z, pt)
                if not ok:
                    st = ERR_GAMMA
                    break
                yyf[j] = yy
        lam_first = 0.0
        if st == OK:
            for rep_pt in range(2):
                if rep_pt == 0:
                    px, py = pt1, y1
                else:
                    px, py = pt1p, y1p
                for a in range(p):
                    cf[0, a] = c0r[a] + py * px[a]
                    for bcol in range(p):
                        Gf[0, a, bcol] = G0r[a, bcol] + px[a] * px[bcol]
                yyf[0] = yy0r + py * py
                lam, sst = _select_lambda_dev(Gf, cf, yyf, tol, max_iter)
                if sst != OK:
                    st = sst
                    break
                if rep_pt == 0:
                    lam_first = lam
                for a in range(p):
                    s = 0.0
                    for j in range(kf):
                        s += cf[j, a]
                    bvec[a] = s
                    for bcol in range(p):
                        g = 0.0
                        for j in range(kf):
                            g += Gf[j, a, bcol]
                        W[a, bcol] = g
                t1 = ba1 if rep_pt == 0 else bb1
                t2 = ba2 if rep_pt == 0 else bb2
                st = _fit(FAM_LASSO, W, bvec, lam + delta1, n, tol, max_iter, t1, L, work)
                if st == OK and mode == 1:
                    st = _fit(FAM_LASSO, W, bvec, lam + delta2, n, tol, max_iter, t2, L, work)
                if st != OK:
                    break
        if st != OK:
            status[r] = st
            out[r] = 0.0
            lams[r] = 0.0
            continue

        cur, y0 = _test_point(key, cur, beta, tau, pt)
        if mode == 0:
            d = (_loss(pt, y0, ba1) - _cond_risk(ba1, beta, tau)) - (
                _loss(pt, y0, bb1) - _cond_risk(bb1, beta, tau)
            )
        else:
            hd = _loss(pt, y0, ba1) - _loss(pt, y0, ba2)
            hdp = _loss(pt, y0, bb1) - _loss(pt, y0, bb2)
            qd = _cond_risk(ba1, beta, tau) - _cond_risk(ba2, beta, tau)
            qdp = _cond_risk(bb1, beta, tau) - _cond_risk(bb2, beta, tau)
            d = (hd - qd) - (hdp - qdp)
        out[r] = d * d
        lams[r] = lam_first
    return out, lams, status
