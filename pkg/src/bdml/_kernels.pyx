# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels.

Every routine here has a line-for-line counterpart in ``_pykernels`` and the
two are expected to agree to floating-point rounding. ``_backend`` picks one
of them at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow, fabs, sqrt, INFINITY
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t

cnp.import_array()

# status codes shared with _pykernels
cdef enum:
    ST_OK = 0
    ST_INFEASIBLE = 1
    ST_BOUNDARY = 2
    ST_ZERO = 3
    ST_NOCONV = 4

STATUS_OK = ST_OK
STATUS_INFEASIBLE = ST_INFEASIBLE
STATUS_BOUNDARY = ST_BOUNDARY
STATUS_ZERO = ST_ZERO
STATUS_NOCONV = ST_NOCONV


# ---------------------------------------------------------------------------
# Cressie-Read dual solve for a scalar moment
# ---------------------------------------------------------------------------

cdef struct GelOut:
    double tau
    double shift
    double log_w
    double resid
    int iterations


cdef inline double _cr_f(double v, double r, int kind) nogil:
    # kind: 0 -> r == -1, 1 -> r == -2, 2 -> generic r < 0, 3 -> clamped r > 0
    if kind == 0:
        return 1.0 / v
    elif kind == 1:
        return 1.0 / (v * v)
    elif kind == 2:
        return pow(v, r)
    if v <= 0.0:
        return 0.0
    return pow(v, r)


cdef void _gel_eval(const double* psi, Py_ssize_t n, double tau, double r,
                    int kind, bint etel, double* W, double* G, double* dG,
                    double* shift) noexcept nogil:
    cdef Py_ssize_t i
    cdef double w = 0.0, g = 0.0, dg = 0.0, f, v, m, x
    if etel:
        m = tau * psi[0]
        for i in range(1, n):
            x = tau * psi[i]
            if x > m:
                m = x
        for i in range(n):
            f = exp(tau * psi[i] - m)
            w += f
            g += psi[i] * f
            dg += psi[i] * psi[i] * f
        shift[0] = m
    else:
        for i in range(n):
            v = 1.0 + tau * psi[i]
            f = _cr_f(v, r, kind)
            w += f
            g += psi[i] * f
            if f > 0.0:
                dg += r * psi[i] * psi[i] * f / v
        shift[0] = 0.0
    W[0] = w
    G[0] = g
    dG[0] = dg


cdef int _gel_solve(const double* psi, Py_ssize_t n, double lam, double tau0,
                    int max_iter, GelOut* out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double pmin = psi[0], pmax = psi[0], amax = 0.0
    cdef bint etel = lam == -1.0
    cdef double r = 0.0
    cdef int kind = 0
    cdef double sgn = 1.0
    cdef double lo, hi, tau, W, G, dG, shift, h, dh, step, target, nt
    cdef int it, k
    cdef bint bounded

    for i in range(n):
        if psi[i] < pmin:
            pmin = psi[i]
        if psi[i] > pmax:
            pmax = psi[i]
        if fabs(psi[i]) > amax:
            amax = fabs(psi[i])
    out.iterations = 0
    out.tau = 0.0
    out.shift = 0.0
    out.resid = 0.0
    if amax == 0.0:
        out.log_w = log(<double> n)
        return ST_ZERO
    if pmin > 0.0 or pmax < 0.0:
        return ST_INFEASIBLE
    if pmin == 0.0 or pmax == 0.0:
        return ST_BOUNDARY

    if not etel:
        r = -1.0 / (1.0 + lam)
        if r == -1.0:
            kind = 0
        elif r == -2.0:
            kind = 1
        elif r < 0.0:
            kind = 2
        else:
            kind = 3
        if r < 0.0:
            sgn = -1.0

    # orient so that h = sgn * G is increasing in tau
    bounded = (not etel) and r < 0.0
    if bounded:
        lo = -1.0 / pmax
        hi = -1.0 / pmin
        tau = tau0 if (tau0 > lo and tau0 < hi) else 0.0
    else:
        tau = tau0
        lo = -INFINITY
        hi = INFINITY

    target = 1e-12 * amax
    if target > 1e-10:
        target = 1e-10

    _gel_eval(psi, n, tau, r, kind, etel, &W, &G, &dG, &shift)
    if not bounded:
        # grow a bracket geometrically around the start
        step = 1.0 / amax
        if sgn * G > 0.0:
            hi = tau
            for k in range(200):
                nt = tau - step
                _gel_eval(psi, n, nt, r, kind, etel, &W, &G, &dG, &shift)
                if sgn * G <= 0.0:
                    lo = nt
                    break
                hi = nt
                step *= 2.0
        else:
            lo = tau
            for k in range(200):
                nt = tau + step
                _gel_eval(psi, n, nt, r, kind, etel, &W, &G, &dG, &shift)
                if sgn * G >= 0.0:
                    hi = nt
                    break
                lo = nt
                step *= 2.0
        if lo == -INFINITY or hi == INFINITY:
            return ST_NOCONV
        tau = 0.5 * (lo + hi) if not (tau0 > lo and tau0 < hi) else tau0
        _gel_eval(psi, n, tau, r, kind, etel, &W, &G, &dG, &shift)

    for it in range(1, max_iter + 1):
        out.iterations = it
        h = sgn * G
        if fabs(G) <= target * W:
            break
        if h < 0.0:
            lo = tau
        else:
            hi = tau
        dh = sgn * dG
        if dh > 0.0:
            nt = tau - h / dh
        else:
            nt = 0.5 * (lo + hi)
        if not (nt > lo and nt < hi):
            nt = 0.5 * (lo + hi)
        if nt == tau or (hi - lo) <= 1e-16 * (fabs(lo) + fabs(hi)):
            break
        tau = nt
        _gel_eval(psi, n, tau, r, kind, etel, &W, &G, &dG, &shift)

    out.tau = tau
    out.shift = shift
    out.log_w = log(W)
    out.resid = fabs(G) / W
    if out.resid > 1e-8:
        return ST_NOCONV
    return ST_OK


cdef double _gel_log_profile(const double* psi, Py_ssize_t n, double lam,
                             GelOut* out, int status) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, r, v
    if status == ST_ZERO:
        return -n * log(<double> n)
    if status != ST_OK:
        return -INFINITY
    if lam == -1.0:
        for i in range(n):
            acc += out.tau * psi[i]
        return acc - n * (out.shift + out.log_w)
    r = -1.0 / (1.0 + lam)
    for i in range(n):
        v = 1.0 + out.tau * psi[i]
        if v <= 0.0:
            return -INFINITY
        acc += log(v)
    return r * acc - n * out.log_w


def gel_solve(const double[::1] psi, double lam, double tau0=0.0, int max_iter=200):
    """Solve the scalar-moment Cressie-Read dual.

    Returns ``(status, tau, shift, log_w, resid, iterations, log_profile)``.
    """
    cdef GelOut out
    cdef Py_ssize_t n = psi.shape[0]
    cdef int status
    cdef double lp
    with nogil:
        status = _gel_solve(&psi[0], n, lam, tau0, max_iter, &out)
        lp = _gel_log_profile(&psi[0], n, lam, &out, status)
    return status, out.tau, out.shift, out.log_w, out.resid, out.iterations, lp


def gel_log_profile_path(const double[::1] a, const double[::1] b, const double[::1] betas,
                         double lam, int max_iter=200):
    """Log profile likelihood at every beta in ``betas`` (nan on failure)."""
    cdef Py_ssize_t n = a.shape[0], m = betas.shape[0], i, j
    cdef double* psi = <double*> malloc(n * sizeof(double))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] res = np.empty(m)
    cdef GelOut out
    cdef int status
    cdef double tau = 0.0
    try:
        for j in range(m):
            for i in range(n):
                psi[i] = a[i] - betas[j] * b[i]
            status = _gel_solve(psi, n, lam, tau, max_iter, &out)
            if status == ST_NOCONV:
                res[j] = np.nan
                continue
            if status == ST_OK:
                tau = out.tau
            res[j] = _gel_log_profile(psi, n, lam, &out, status)
    finally:
        free(psi)
    return res


# ---------------------------------------------------------------------------
# Random-walk Metropolis over the profile posterior
# ---------------------------------------------------------------------------

cdef int _log_post(const double* a, const double* b, double* psi, Py_ssize_t n,
                   double beta, double lam, double pm, double pv,
                   double* tau, int max_iter, double* lp) noexcept nogil:
    cdef Py_ssize_t i
    cdef GelOut out
    cdef int status
    for i in range(n):
        psi[i] = a[i] - beta * b[i]
    status = _gel_solve(psi, n, lam, tau[0], max_iter, &out)
    if status == ST_NOCONV:
        return status
    if status == ST_OK:
        tau[0] = out.tau
    lp[0] = _gel_log_profile(psi, n, lam, &out, status) \
        - 0.5 * (beta - pm) * (beta - pm) / pv
    return status


def rw_chain(const double[::1] a, const double[::1] b, double lam, double prior_mean,
             double prior_var, double beta0, double step0,
             const double[::1] normals, const double[::1] log_u, Py_ssize_t n_burn,
             bint adapt, double target, int max_iter=200):
    """Gaussian random-walk Metropolis chain on beta.

    Returns ``(chain, accepted_after_burn, final_step, error_index)`` where
    ``error_index`` is -1 unless the dual solve failed at that step.
    """
    cdef Py_ssize_t n = a.shape[0], total = normals.shape[0], j
    cdef Py_ssize_t n_draws = total - n_burn
    cdef cnp.ndarray[cnp.float64_t, ndim=1] chain_arr = np.empty(n_draws)
    cdef double[::1] chain = chain_arr
    cdef double* psi = <double*> malloc(n * sizeof(double))
    cdef double beta = beta0, lp_cur, lp_prop, prop, log_alpha, acc_prob
    cdef double tau_cur = 0.0, tau_prop
    cdef double log_step = log(step0), step = step0
    cdef Py_ssize_t accepted = 0, err = -1
    cdef int status
    try:
        with nogil:
            status = _log_post(&a[0], &b[0], psi, n, beta, lam, prior_mean,
                               prior_var, &tau_cur, max_iter, &lp_cur)
            if status == ST_NOCONV or lp_cur == -INFINITY:
                err = -2
            else:
                for j in range(total):
                    prop = beta + step * normals[j]
                    tau_prop = tau_cur
                    status = _log_post(&a[0], &b[0], psi, n, prop, lam,
                                       prior_mean, prior_var, &tau_prop,
                                       max_iter, &lp_prop)
                    if status == ST_NOCONV:
                        err = j
                        break
                    log_alpha = lp_prop - lp_cur
                    if log_u[j] < log_alpha:
                        beta = prop
                        lp_cur = lp_prop
                        tau_cur = tau_prop
                        if j >= n_burn:
                            accepted += 1
                    if adapt and j < n_burn:
                        acc_prob = 1.0 if log_alpha >= 0.0 else exp(log_alpha)
                        log_step += (acc_prob - target) / pow(j + 1.0, 0.6)
                        step = exp(log_step)
                    if j >= n_burn:
                        chain[j - n_burn] = beta
    finally:
        free(psi)
    return chain_arr, accepted, step, err


# ---------------------------------------------------------------------------
# Weighted lasso coordinate descent
# ---------------------------------------------------------------------------

def lasso_cd(const double[::1, :] X, const double[::1] z, const double[::1] w, double[::1] beta,
             double b0, double[::1] resid, double lam, double tol,
             int max_sweeps, bint fit_intercept=True):
    """Coordinate descent for 0.5/n * sum w (z - b0 - X beta)^2 + lam |beta|_1.

    ``beta`` and ``resid`` (= z - b0 - X beta on entry) are updated in place.
    Returns ``(b0, sweeps)``.
    """
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], i, j
    cdef double* xwx = <double*> malloc(p * sizeof(double))
    cdef bint* active = <bint*> malloc(p * sizeof(bint))
    cdef double sw = 0.0, rho, old, new, d, maxd, acc, inv_n = 1.0 / n
    cdef int sweeps = 0
    cdef bint full = True, any_active
    try:
        with nogil:
            for i in range(n):
                sw += w[i]
            for j in range(p):
                acc = 0.0
                for i in range(n):
                    acc += w[i] * X[i, j] * X[i, j]
                xwx[j] = acc * inv_n
                active[j] = beta[j] != 0.0
            while sweeps < max_sweeps:
                sweeps += 1
                maxd = 0.0
                for j in range(p):
                    if not full and not active[j]:
                        continue
                    if xwx[j] <= 0.0:
                        continue
                    old = beta[j]
                    acc = 0.0
                    for i in range(n):
                        acc += w[i] * X[i, j] * resid[i]
                    rho = acc * inv_n + xwx[j] * old
                    if rho > lam:
                        new = (rho - lam) / xwx[j]
                    elif rho < -lam:
                        new = (rho + lam) / xwx[j]
                    else:
                        new = 0.0
                    if new != old:
                        d = new - old
                        for i in range(n):
                            resid[i] -= X[i, j] * d
                        beta[j] = new
                        if xwx[j] * d * d > maxd:
                            maxd = xwx[j] * d * d
                    if new != 0.0:
                        active[j] = True
                if fit_intercept and sw > 0.0:
                    acc = 0.0
                    for i in range(n):
                        acc += w[i] * resid[i]
                    d = acc / sw
                    if d != 0.0:
                        b0 += d
                        for i in range(n):
                            resid[i] -= d
                        if sw * inv_n * d * d > maxd:
                            maxd = sw * inv_n * d * d
                if maxd < tol:
                    if full:
                        break
                    full = True
                else:
                    full = False
    finally:
        free(xwx)
        free(active)
    return b0, sweeps


# ---------------------------------------------------------------------------
# Regression tree growing (variance reduction; Gini for 0/1 targets is the
# same criterion up to a factor of two)
# ---------------------------------------------------------------------------

cdef struct Pair:
    double v
    Py_ssize_t idx


cdef int _cmp_pair(const void* x, const void* y) noexcept nogil:
    cdef const Pair* a = <const Pair*> x
    cdef const Pair* b = <const Pair*> y
    if a.v < b.v:
        return -1
    if a.v > b.v:
        return 1
    if a.idx < b.idx:
        return -1
    if a.idx > b.idx:
        return 1
    return 0


cdef inline uint64_t _splitmix(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t> 0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t> 0x94D049BB133111EB
    return z ^ (z >> 31)


def grow_tree(const double[:, ::1] X, const double[::1] y, const Py_ssize_t[::1] rows,
              Py_ssize_t mtry, Py_ssize_t min_leaf, uint64_t seed):
    """Grow one tree on ``rows`` (may contain repeats).

    Returns flat arrays ``(feature, threshold, left, right, value)``;
    ``feature == -1`` marks a leaf.
    """
    cdef Py_ssize_t m = rows.shape[0], p = X.shape[1]
    cdef Py_ssize_t cap = 2 * m + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] feat_a = np.full(cap, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] thr_a = np.zeros(cap)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] left_a = np.full(cap, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] right_a = np.full(cap, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val_a = np.zeros(cap)
    cdef cnp.int64_t[::1] feat = feat_a
    cdef double[::1] thr = thr_a
    cdef cnp.int64_t[::1] left = left_a
    cdef cnp.int64_t[::1] right = right_a
    cdef double[::1] val = val_a

    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t* tmp = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t* perm = <Py_ssize_t*> malloc(p * sizeof(Py_ssize_t))
    cdef Pair* pairs = <Pair*> malloc(m * sizeof(Pair))
    # explicit stack of (node, start, end)
    cdef Py_ssize_t* st_node = <Py_ssize_t*> malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* st_lo = <Py_ssize_t*> malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* st_hi = <Py_ssize_t*> malloc(cap * sizeof(Py_ssize_t))
    cdef uint64_t state = seed
    cdef Py_ssize_t top = 0, n_nodes = 1, node, lo, hi, cnt, i, k, j, f, t
    cdef Py_ssize_t visited, best_f, best_pos, nl, q
    cdef double total, sl, score, best_score, base, best_thr, yv
    try:
        with nogil:
            for i in range(m):
                idx[i] = rows[i]
            st_node[0] = 0
            st_lo[0] = 0
            st_hi[0] = m
            top = 1
            while top > 0:
                top -= 1
                node = st_node[top]
                lo = st_lo[top]
                hi = st_hi[top]
                cnt = hi - lo
                total = 0.0
                for i in range(lo, hi):
                    total += y[idx[i]]
                val[node] = total / cnt
                if cnt < 2 * min_leaf:
                    continue
                base = total * total / cnt
                best_score = base + 1e-12 * fabs(base) + 1e-300
                best_f = -1
                best_pos = -1
                best_thr = 0.0
                for k in range(p):
                    perm[k] = k
                visited = 0
                for k in range(p):
                    if visited >= mtry:
                        break
                    j = k + <Py_ssize_t> (_splitmix(&state) % <uint64_t> (p - k))
                    t = perm[k]
                    perm[k] = perm[j]
                    perm[j] = t
                    f = perm[k]
                    for i in range(cnt):
                        pairs[i].v = X[idx[lo + i], f]
                        pairs[i].idx = idx[lo + i]
                    qsort(pairs, cnt, sizeof(Pair), _cmp_pair)
                    if pairs[0].v == pairs[cnt - 1].v:
                        continue
                    visited += 1
                    sl = 0.0
                    for i in range(cnt - 1):
                        sl += y[pairs[i].idx]
                        nl = i + 1
                        if nl < min_leaf:
                            continue
                        if cnt - nl < min_leaf:
                            break
                        if pairs[i].v == pairs[i + 1].v:
                            continue
                        score = sl * sl / nl + (total - sl) * (total - sl) / (cnt - nl)
                        if score > best_score:
                            best_score = score
                            best_f = f
                            best_pos = nl
                            best_thr = 0.5 * (pairs[i].v + pairs[i + 1].v)
                if best_f < 0:
                    continue
                # partition rows: x <= thr to the left, ties broken by index order
                nl = 0
                q = 0
                for i in range(lo, hi):
                    if X[idx[i], best_f] <= best_thr:
                        tmp[nl] = idx[i]
                        nl += 1
                for i in range(lo, hi):
                    if X[idx[i], best_f] > best_thr:
                        tmp[nl + q] = idx[i]
                        q += 1
                for i in range(cnt):
                    idx[lo + i] = tmp[i]
                feat[node] = best_f
                thr[node] = best_thr
                left[node] = n_nodes
                right[node] = n_nodes + 1
                st_node[top] = n_nodes + 1
                st_lo[top] = lo + nl
                st_hi[top] = hi
                top += 1
                st_node[top] = n_nodes
                st_lo[top] = lo
                st_hi[top] = lo + nl
                top += 1
                n_nodes += 2
    finally:
        free(idx)
        free(tmp)
        free(perm)
        free(pairs)
        free(st_node)
        free(st_lo)
        free(st_hi)
    return (feat_a[:n_nodes].copy(), thr_a[:n_nodes].copy(),
            left_a[:n_nodes].copy(), right_a[:n_nodes].copy(),
            val_a[:n_nodes].copy())


def predict_tree(const double[:, ::1] X, const cnp.int64_t[::1] feature,
                 const double[::1] threshold, const cnp.int64_t[::1] left,
                 const cnp.int64_t[::1] right, const double[::1] value,
                 double[::1] out):
    """Add the tree's prediction for every row of ``X`` into ``out``."""
    cdef Py_ssize_t m = X.shape[0], i, node
    with nogil:
        for i in range(m):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] += value[node]
