"""Pure-Python/NumPy versions of the routines in ``_kernels.pyx``.

Used when the compiled extension is unavailable or when ``BDML_PURE_PYTHON``
is set. Same algorithms, same status codes, same random streams.
"""

import math

import numpy as np

STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_BOUNDARY = 2
STATUS_ZERO = 3
STATUS_NOCONV = 4

_MASK64 = (1 << 64) - 1


def _cr_f(v, r, kind):
    if kind == 0:
        return 1.0 / v
    if kind == 1:
        return 1.0 / (v * v)
    if kind == 2:
        return v ** r
    out = np.zeros_like(v)
    pos = v > 0.0
    out[pos] = v[pos] ** r
    return out


def _gel_eval(psi, tau, r, kind, etel):
    if etel:
        x = tau * psi
        m = float(x.max())
        f = np.exp(x - m)
        return float(f.sum()), float(psi @ f), float((psi * psi) @ f), m
    v = 1.0 + tau * psi
    f = _cr_f(v, r, kind)
    pos = f > 0.0
    dg = float(r * np.sum(psi[pos] ** 2 * f[pos] / v[pos]))
    return float(f.sum()), float(psi @ f), dg, 0.0


def _gel_solve(psi, lam, tau0, max_iter):
    """Return ``(status, tau, shift, log_w, resid, iterations)``."""
    n = psi.shape[0]
    pmin = float(psi.min())
    pmax = float(psi.max())
    amax = float(np.abs(psi).max())
    if amax == 0.0:
        return STATUS_ZERO, 0.0, 0.0, math.log(n), 0.0, 0
    if pmin > 0.0 or pmax < 0.0:
        return STATUS_INFEASIBLE, 0.0, 0.0, 0.0, 0.0, 0
    if pmin == 0.0 or pmax == 0.0:
        return STATUS_BOUNDARY, 0.0, 0.0, 0.0, 0.0, 0

    etel = lam == -1.0
    r, kind, sgn = 0.0, 0, 1.0
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

    bounded = (not etel) and r < 0.0
    if bounded:
        lo, hi = -1.0 / pmax, -1.0 / pmin
        tau = tau0 if lo < tau0 < hi else 0.0
    else:
        tau, lo, hi = tau0, -math.inf, math.inf

    target = min(1e-12 * amax, 1e-10)
    W, G, dG, shift = _gel_eval(psi, tau, r, kind, etel)
    if not bounded:
        step = 1.0 / amax
        if sgn * G > 0.0:
            hi = tau
            for _ in range(200):
                nt = tau - step
                W, G, dG, shift = _gel_eval(psi, nt, r, kind, etel)
                if sgn * G <= 0.0:
                    lo = nt
                    break
                hi = nt
                step *= 2.0
        else:
            lo = tau
            for _ in range(200):
                nt = tau + step
                W, G, dG, shift = _gel_eval(psi, nt, r, kind, etel)
                if sgn * G >= 0.0:
                    hi = nt
                    break
                lo = nt
                step *= 2.0
        if lo == -math.inf or hi == math.inf:
            return STATUS_NOCONV, tau, 0.0, 0.0, math.inf, 0
        tau = tau0 if lo < tau0 < hi else 0.5 * (lo + hi)
        W, G, dG, shift = _gel_eval(psi, tau, r, kind, etel)

    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        h = sgn * G
        if abs(G) <= target * W:
            break
        if h < 0.0:
            lo = tau
        else:
            hi = tau
        dh = sgn * dG
        nt = tau - h / dh if dh > 0.0 else 0.5 * (lo + hi)
        if not (lo < nt < hi):
            nt = 0.5 * (lo + hi)
        if nt == tau or (hi - lo) <= 1e-16 * (abs(lo) + abs(hi)):
            break
        tau = nt
        W, G, dG, shift = _gel_eval(psi, tau, r, kind, etel)

    resid = abs(G) / W
    status = STATUS_NOCONV if resid > 1e-8 else STATUS_OK
    return status, tau, shift, math.log(W), resid, iterations


def _gel_log_profile(psi, lam, status, tau, shift, log_w):
    n = psi.shape[0]
    if status == STATUS_ZERO:
        return -n * math.log(n)
    if status != STATUS_OK:
        return -math.inf
    if lam == -1.0:
        return float(tau * psi.sum()) - n * (shift + log_w)
    v = 1.0 + tau * psi
    if np.any(v <= 0.0):
        return -math.inf
    return -1.0 / (1.0 + lam) * float(np.log(v).sum()) - n * log_w


def gel_solve(psi, lam, tau0=0.0, max_iter=200):
    psi = np.ascontiguousarray(psi, dtype=float)
    status, tau, shift, log_w, resid, iterations = _gel_solve(psi, lam, tau0, max_iter)
    lp = _gel_log_profile(psi, lam, status, tau, shift, log_w)
    return status, tau, shift, log_w, resid, iterations, lp


def gel_log_profile_path(a, b, betas, lam, max_iter=200):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = np.empty(len(betas))
    tau = 0.0
    for j, beta in enumerate(betas):
        psi = a - beta * b
        status, t, shift, log_w, _, _ = _gel_solve(psi, lam, tau, max_iter)
        if status == STATUS_NOCONV:
            res[j] = np.nan
            continue
        if status == STATUS_OK:
            tau = t
        res[j] = _gel_log_profile(psi, lam, status, t, shift, log_w)
    return res


def _log_post(a, b, beta, lam, pm, pv, tau, max_iter):
    psi = a - beta * b
    status, t, shift, log_w, _, _ = _gel_solve(psi, lam, tau, max_iter)
    if status == STATUS_NOCONV:
        return status, tau, -math.inf
    if status == STATUS_OK:
        tau = t
    lp = _gel_log_profile(psi, lam, status, t, shift, log_w)
    return status, tau, lp - 0.5 * (beta - pm) ** 2 / pv


def rw_chain(a, b, lam, prior_mean, prior_var, beta0, step0, normals, log_u,
             n_burn, adapt, target, max_iter=200):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    total = len(normals)
    chain = np.empty(total - n_burn)
    beta = beta0
    log_step = math.log(step0)
    step = step0
    accepted = 0
    status, tau_cur, lp_cur = _log_post(a, b, beta, lam, prior_mean, prior_var, 0.0, max_iter)
    if status == STATUS_NOCONV or lp_cur == -math.inf:
        return chain, 0, step, -2
    for j in range(total):
        prop = beta + step * normals[j]
        status, tau_prop, lp_prop = _log_post(
            a, b, prop, lam, prior_mean, prior_var, tau_cur, max_iter
        )
        if status == STATUS_NOCONV:
            return chain, accepted, step, j
        log_alpha = lp_prop - lp_cur
        if log_u[j] < log_alpha:
            beta, lp_cur, tau_cur = prop, lp_prop, tau_prop
            if j >= n_burn:
                accepted += 1
        if adapt and j < n_burn:
            acc_prob = 1.0 if log_alpha >= 0.0 else math.exp(log_alpha)
            log_step += (acc_prob - target) / (j + 1.0) ** 0.6
            step = math.exp(log_step)
        if j >= n_burn:
            chain[j - n_burn] = beta
    return chain, accepted, step, -1


def lasso_cd(X, z, w, beta, b0, resid, lam, tol, max_sweeps, fit_intercept=True):
    n, p = X.shape
    sw = float(w.sum())
    xwx = (w @ (X * X)) / n
    active = beta != 0.0
    sweeps = 0
    full = True
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in range(p):
            if (not full and not active[j]) or xwx[j] <= 0.0:
                continue
            old = beta[j]
            xj = X[:, j]
            rho = float(np.dot(w * xj, resid)) / n + xwx[j] * old
            if rho > lam:
                new = (rho - lam) / xwx[j]
            elif rho < -lam:
                new = (rho + lam) / xwx[j]
            else:
                new = 0.0
            if new != old:
                d = new - old
                resid -= xj * d
                beta[j] = new
                maxd = max(maxd, xwx[j] * d * d)
            if new != 0.0:
                active[j] = True
        if fit_intercept and sw > 0.0:
            d = float(np.dot(w, resid)) / sw
            if d != 0.0:
                b0 += d
                resid -= d
                maxd = max(maxd, sw / n * d * d)
        if maxd < tol:
            if full:
                break
            full = True
        else:
            full = False
    return b0, sweeps


def _splitmix(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def grow_tree(X, y, rows, mtry, min_leaf, seed):
    p = X.shape[1]
    idx = np.array(rows, dtype=np.int64)
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    state = int(seed) & _MASK64
    stack = [(0, 0, len(idx))]
    while stack:
        node, lo, hi = stack.pop()
        cnt = hi - lo
        seg = idx[lo:hi]
        ys = y[seg]
        total = float(ys.sum())
        value[node] = total / cnt
        if cnt < 2 * min_leaf:
            continue
        base = total * total / cnt
        best_score = base + 1e-12 * abs(base) + 1e-300
        best_f, best_thr = -1, 0.0
        perm = list(range(p))
        visited = 0
        for k in range(p):
            if visited >= mtry:
                break
            state, u = _splitmix(state)
            j = k + u % (p - k)
            perm[k], perm[j] = perm[j], perm[k]
            f = perm[k]
            xv = X[seg, f]
            order = np.lexsort((seg, xv))
            xs = xv[order]
            if xs[0] == xs[-1]:
                continue
            visited += 1
            cs = np.cumsum(y[seg[order]])[:-1]
            nl = np.arange(1, cnt)
            ok = (nl >= min_leaf) & (cnt - nl >= min_leaf) & (xs[:-1] != xs[1:])
            if not ok.any():
                continue
            score = cs * cs / nl + (total - cs) ** 2 / (cnt - nl)
            score = np.where(ok, score, -np.inf)
            i = int(np.argmax(score))
            if score[i] > best_score:
                best_score = float(score[i])
                best_f = f
                best_thr = 0.5 * (xs[i] + xs[i + 1])
        if best_f < 0:
            continue
        goes_left = X[seg, best_f] <= best_thr
        idx[lo:hi] = np.concatenate([seg[goes_left], seg[~goes_left]])
        nl = int(goes_left.sum())
        nxt = len(feature)
        feature[node], threshold[node] = best_f, best_thr
        left[node], right[node] = nxt, nxt + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
        stack.append((nxt + 1, lo + nl, hi))
        stack.append((nxt, lo, lo + nl))
    return (np.array(feature, dtype=np.int64), np.array(threshold),
            np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
            np.array(value))


def predict_tree(X, feature, threshold, left, right, value, out):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    live = feature[node] >= 0
    while live.any():
        r = rows[live]
        nd = node[r]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        live = feature[node] >= 0
    out += value[node]
