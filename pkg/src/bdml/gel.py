"""Cressie-Read generalized empirical likelihood for a scalar moment.

For a vector of score values ``psi`` the weights solve

    min CR_lambda(p)  subject to  sum p = 1, p >= 0, sum p * psi = 0.

Stationarity gives ``p_i = (1/n) (1 + s + t psi_i)^(-1/(1+lambda))`` for
lambda != -1 and ``p_i proportional to exp(t psi_i)`` for lambda = -1. Since
the power map is homogeneous, ``(1 + s + t psi)`` can be rescaled to
``c (1 + tau psi)`` with ``tau = t / c``; the moment equation then depends on
``tau`` alone and ``c`` follows from normalisation. Every case is therefore a
monotone one-dimensional root problem, solved by safeguarded Newton.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InfeasibleMoment, NonConvergence
from .score import evaluate_score

TOL_CONSTRAINT = 1e-8
MAX_ITER = 200

_NAMED = {"EL": 0.0, "ETEL": -1.0, "HD": -0.5}


@dataclass(frozen=True)
class DivergenceSpec:
    """Cressie-Read parameter. ``EL`` is 0, ``ETEL`` is -1, ``HD`` is -1/2."""

    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise ValueError(f"lambda must be finite, got {self.lam}")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def parse(cls, value):
        """Accept a name (``EL``/``ETEL``/``HD``, any case) or a number."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str) and value.strip().upper() in _NAMED:
            return cls(_NAMED[value.strip().upper()])
        return cls(float(value))

    @property
    def name(self):
        for key, lam in _NAMED.items():
            if lam == self.lam:
                return key
        return f"CR({self.lam:g})"


EL = DivergenceSpec(0.0)
ETEL = DivergenceSpec(-1.0)
HD = DivergenceSpec(-0.5)


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    feasible: bool
    min_psi: float
    max_psi: float


@dataclass(frozen=True, eq=False)
class GelSolution:
    weights: np.ndarray
    s: float
    t: float
    log_profile: float
    converged: bool
    iterations: int
    residuals: tuple


def check_feasibility(psi):
    """Zero must lie in the convex hull of the score values.

    Strictly mixed signs are feasible. So is any vector containing an exact
    zero, because all the mass can sit on the zero entries (an all-zero vector
    is the uniform-weight case).
    """
    psi = np.asarray(psi, dtype=float)
    lo, hi = float(psi.min()), float(psi.max())
    return FeasibilityReport(lo <= 0.0 <= hi, lo, hi)


def _weights_from_root(psi, lam, tau, shift, log_w):
    if lam == -1.0:
        log_p = tau * psi - shift - log_w
    else:
        r = -1.0 / (1.0 + lam)
        v = 1.0 + tau * psi
        with np.errstate(divide="ignore", invalid="ignore"):
            log_p = np.where(v > 0.0, r * np.log(np.where(v > 0.0, v, 1.0)), -np.inf) - log_w
    return np.exp(log_p)


def _multipliers(n, lam, tau, shift, log_w):
    if lam == -1.0:
        # p_i = exp(log_s + t psi_i): report s on the log scale
        return -(shift + log_w), tau
    r = -1.0 / (1.0 + lam)
    # (1/n) c^r = 1/W  =>  c = (n / W)^(1/r)
    c = math.exp((math.log(n) - log_w) / r)
    return c - 1.0, tau * c


def solve_weights(psi, div):
    """Optimal GEL weights for one score vector.

    Raises :class:`InfeasibleMoment` when zero is outside the convex hull and
    :class:`NonConvergence` when the root search cannot meet the tolerance.
    """
    div = DivergenceSpec.parse(div)
    psi = np.ascontiguousarray(psi, dtype=float)
    n = len(psi)
    status, tau, shift, log_w, resid, iterations, log_profile = kernels.gel_solve(
        psi, div.lam, 0.0, MAX_ITER
    )
    if status == kernels.STATUS_INFEASIBLE:
        raise InfeasibleMoment(
            f"score values lie in [{psi.min():.6g}, {psi.max():.6g}]; zero is outside their hull"
        )
    if status == kernels.STATUS_ZERO:
        w = np.full(n, 1.0 / n)
        return GelSolution(w, 0.0, 0.0, -n * math.log(n), True, 0, (0.0, 0.0))
    if status == kernels.STATUS_BOUNDARY:
        zero = psi == 0.0
        w = zero / zero.sum()
        return GelSolution(w, math.nan, math.nan, -math.inf, True, 0,
                           (abs(w.sum() - 1.0), abs(float(w @ psi))))
    if status == kernels.STATUS_NOCONV:
        raise NonConvergence(
            f"dual solve stopped after {iterations} iterations with moment residual {resid:.3g}",
            residuals=(math.nan, resid),
            iterations=iterations,
        )
    w = _weights_from_root(psi, div.lam, tau, shift, log_w)
    s, t = _multipliers(n, div.lam, tau, shift, log_w)
    residuals = (abs(float(w.sum()) - 1.0), abs(float(w @ psi)))
    converged = max(residuals) <= TOL_CONSTRAINT
    return GelSolution(w, s, t, log_profile, converged, iterations, residuals)


def cr_divergence(weights, div):
    """Cressie-Read divergence of ``weights`` from uniform ``1/n``.

    The lambda = 0 and lambda = -1 members use their limiting log forms.
    """
    div = DivergenceSpec.parse(div)
    p = np.asarray(weights, dtype=float)
    n = len(p)
    lam = div.lam
    if lam == -1.0:
        if np.any(p < 0.0):
            raise ValueError("weights must be non-negative")
        pos = p > 0.0
        return float(2.0 * n * np.sum(p[pos] * np.log(n * p[pos])))
    if np.any(p <= 0.0):
        raise ValueError("weights must be strictly positive")
    if lam == 0.0:
        return float(-2.0 * np.sum(np.log(n * p)))
    return float(2.0 / (lam * (1.0 + lam)) * np.sum((n * p) ** (-lam) - 1.0))


def log_profile_likelihood(sc, beta, div):
    """Sum of log GEL weights at ``beta``; ``-inf`` when the moment is infeasible."""
    div = DivergenceSpec.parse(div)
    psi = np.ascontiguousarray(evaluate_score(sc, beta))
    status, _, _, _, resid, iterations, log_profile = kernels.gel_solve(
        psi, div.lam, 0.0, MAX_ITER
    )
    if status == kernels.STATUS_NOCONV:
        raise NonConvergence(
            f"dual solve failed at beta={beta:.6g} (moment residual {resid:.3g})",
            residuals=(math.nan, resid),
            iterations=iterations,
        )
    return log_profile


def log_profile_path(sc, betas, div):
    """Vectorised :func:`log_profile_likelihood` with warm starts along ``betas``."""
    div = DivergenceSpec.parse(div)
    betas = np.ascontiguousarray(betas, dtype=float)
    return kernels.gel_log_profile_path(sc.a, sc.b, betas, div.lam, MAX_ITER)
