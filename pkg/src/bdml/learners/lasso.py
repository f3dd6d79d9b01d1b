"""Cross-validated lasso (squared error or logistic) by pathwise coordinate descent."""

import math

import numpy as np

from .._backend import kernels
from ..errors import DataError

N_LAMBDA = 100
LAMBDA_RATIO = 1e-3
N_FOLDS = 5
CD_TOL = 1e-7
MAX_SWEEPS = 10_000
MAX_IRLS = 25
DEV_SATURATION = 1.0 - 1e-5
_P_EPS = 1e-5


def _expit(eta):
    return 0.5 * (1.0 + np.tanh(0.5 * eta))


class LassoModel:
    """Linear (or logistic) model on the original feature scale."""

    def __init__(self, intercept, coef, penalty, logistic, coef_std, center, scale):
        self.intercept = intercept
        self.coef = coef
        self.penalty = penalty
        self.logistic = logistic
        self.coef_std = coef_std
        self.center = center
        self.scale = scale

    def decision(self, x):
        return self.intercept + x @ self.coef

    def predict(self, x):
        eta = self.decision(x)
        return _expit(eta) if self.logistic else eta


def _standardize(x):
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = np.asfortranarray((x - center) / scale)
    # constant columns become exactly zero and are skipped by the solver
    return xs, center, scale


def lambda_max(xs, y):
    n = len(y)
    return float(np.max(np.abs(xs.T @ (y - y.mean()))) / n)


def _fit_path_gaussian(xs, y, lambdas):
    n, p = xs.shape
    beta = np.zeros(p)
    b0 = float(y.mean())
    resid = y - b0
    w = np.ones(n)
    null_dev = float(resid @ resid)
    coefs = np.zeros((len(lambdas), p))
    b0s = np.zeros(len(lambdas))
    done = False
    for k, lam in enumerate(lambdas):
        if not done:
            b0, _ = kernels.lasso_cd(xs, y, w, beta, b0, resid, lam, CD_TOL, MAX_SWEEPS, True)
            if null_dev > 0 and 1.0 - float(resid @ resid) / null_dev > DEV_SATURATION:
                done = True
        coefs[k] = beta
        b0s[k] = b0
    return b0s, coefs


def _logistic_dev(y, eta):
    # -2 * log-likelihood, stable in eta
    return 2.0 * float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def _fit_path_logistic(xs, y, lambdas):
    n, p = xs.shape
    beta = np.zeros(p)
    ybar = float(np.clip(y.mean(), _P_EPS, 1 - _P_EPS))
    b0 = math.log(ybar / (1.0 - ybar))
    null_dev = _logistic_dev(y, np.full(n, b0))
    coefs = np.zeros((len(lambdas), p))
    b0s = np.zeros(len(lambdas))
    done = False
    for k, lam in enumerate(lambdas):
        if not done:
            dev_old = math.inf
            for _ in range(MAX_IRLS):
                eta = b0 + xs @ beta
                prob = np.clip(_expit(eta), _P_EPS, 1 - _P_EPS)
                w = prob * (1.0 - prob)
                z = eta + (y - prob) / w
                resid = z - eta
                b0, _ = kernels.lasso_cd(xs, z, w, beta, b0, resid, lam, CD_TOL, MAX_SWEEPS, True)
                dev = _logistic_dev(y, b0 + xs @ beta)
                if abs(dev - dev_old) < 1e-8 * (abs(dev) + 1e-3):
                    break
                dev_old = dev
            if null_dev > 0 and 1.0 - dev / null_dev > DEV_SATURATION:
                done = True
        coefs[k] = beta
        b0s[k] = b0
    return b0s, coefs


def _cv_folds(n, k, rng):
    folds = np.arange(n) % k
    rng.shuffle(folds)
    return folds


def fit_lasso(x, y, spec):
    """Pick the penalty by K-fold CV (minimum rule) and refit on all rows."""
    n, p = x.shape
    if n < 10:
        raise DataError(f"cross-validated lasso needs at least 10 rows, got {n}")
    logistic = spec.task.value == "BinaryProbability"
    n_lambda = int(spec.hyper.get("n_lambda", N_LAMBDA))
    ratio = float(spec.hyper.get("lambda_ratio", LAMBDA_RATIO))
    n_folds = int(spec.hyper.get("cv_folds", N_FOLDS))
    path = _fit_path_logistic if logistic else _fit_path_gaussian

    xs, center, scale = _standardize(x)
    lmax = lambda_max(xs, y)
    lambdas = lmax * np.geomspace(1.0, ratio, n_lambda)

    rng = np.random.default_rng(spec.seed)
    folds = _cv_folds(n, min(n_folds, n), rng)
    cv_err = np.zeros(n_lambda)
    for f in range(folds.max() + 1):
        tr, te = folds != f, folds == f
        ytr = y[tr]
        if np.ptp(ytr) == 0.0:
            eta = np.full((n_lambda, te.sum()), ytr[0])
            if logistic:
                eta = np.where(eta > 0.5, 20.0, -20.0)
        else:
            xtr, c_tr, s_tr = _standardize(x[tr])
            b0s, coefs = path(xtr, ytr, lambdas)
            xte = (x[te] - c_tr) / s_tr
            eta = b0s[:, None] + coefs @ xte.T
        if logistic:
            cv_err += np.sum(np.logaddexp(0.0, eta) - y[te] * eta, axis=1)
        else:
            cv_err += np.sum((y[te] - eta) ** 2, axis=1)
    best = int(np.argmin(cv_err))

    b0s, coefs = path(xs, y, lambdas[: best + 1])
    coef_std = coefs[-1].copy()
    coef = coef_std / scale
    intercept = float(b0s[-1] - center @ coef)
    return LassoModel(intercept, coef, float(lambdas[best]), logistic, coef_std, center, scale)
