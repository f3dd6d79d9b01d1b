"""Gaussian prior times GEL profile likelihood, sampled by random-walk Metropolis."""

from dataclasses import dataclass, field
import math

import numpy as np

from ._backend import kernels
from .dml import dml_point
from .errors import DegenerateDesign, InfeasibleMoment, NonConvergence
from .gel import MAX_ITER, DivergenceSpec, log_profile_likelihood

TARGET_ACCEPTANCE = 0.44


@dataclass(frozen=True)
class PriorSpec:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0 or not math.isfinite(self.variance):
            raise ValueError(f"prior variance must be positive and finite, got {self.variance}")
        if not math.isfinite(self.mean):
            raise ValueError(f"prior mean must be finite, got {self.mean}")

    def log_density(self, beta):
        """Unnormalised Gaussian log density."""
        return -0.5 * (beta - self.mean) ** 2 / self.variance

    def cdf(self, beta):
        return 0.5 * math.erfc(-(beta - self.mean) / math.sqrt(2.0 * self.variance))


@dataclass(frozen=True)
class McmcConfig:
    draws: int = 5000
    burn_in: int = 1000
    initial_beta: float | None = None
    step_scale: float | None = None
    adapt: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError(f"draws must be at least 1, got {self.draws}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be non-negative, got {self.burn_in}")
        if self.step_scale is not None and not self.step_scale > 0:
            raise ValueError(f"step_scale must be positive, got {self.step_scale}")


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    chain: np.ndarray
    acceptance_rate: float
    mean: float
    equal_tailed_95: tuple
    sd: float
    final_step_scale: float
    initial_beta: float = field(default=math.nan)


def log_posterior(sc, beta, div, prior):
    """Log prior (without its constant) plus log profile likelihood."""
    lp = log_profile_likelihood(sc, beta, DivergenceSpec.parse(div))
    if lp == -math.inf:
        return -math.inf
    return prior.log_density(beta) + lp


def summarize(chain):
    """Mean, equal-tailed 95% interval (linear-interpolation quantiles) and SD."""
    chain = np.asarray(chain, dtype=float)
    if chain.size == 0:
        raise ValueError("cannot summarise an empty chain")
    lo, hi = np.quantile(chain, [0.025, 0.975])
    sd = float(chain.std(ddof=1)) if chain.size > 1 else 0.0
    return float(chain.mean()), (float(lo), float(hi)), sd


def feasible_intervals(sc):
    """Open beta-intervals on which the score values have strictly mixed signs.

    Each ``psi_i(beta) = a_i - beta b_i`` changes sign only at ``a_i / b_i``,
    so checking one probe between consecutive breakpoints is exhaustive.
    """
    a, b = sc.a, sc.b
    nz = b != 0.0
    breaks = np.unique(a[nz] / b[nz])
    if breaks.size == 0:
        edges = [-math.inf, math.inf]
        probes = [0.0]
    else:
        edges = [-math.inf, *breaks.tolist(), math.inf]
        span = max(1.0, float(breaks[-1] - breaks[0]))
        probes = [breaks[0] - span] + [0.5 * (x + y) for x, y in zip(breaks, breaks[1:])]
        probes.append(breaks[-1] + span)
    out = []
    for lo, hi, x in zip(edges, edges[1:], probes):
        psi = a - x * b
        if psi.min() < 0.0 < psi.max():
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


def _grid_inside(lo, hi, centre):
    if math.isinf(lo) and math.isinf(hi):
        return centre + np.linspace(-10.0, 10.0, 401)
    if math.isinf(lo):
        return hi - np.geomspace(1e-8, 1e3, 200) * (1.0 + abs(hi))
    if math.isinf(hi):
        return lo + np.geomspace(1e-8, 1e3, 200) * (1.0 + abs(lo))
    return np.linspace(lo, hi, 403)[1:-1]


def _initial_beta(sc, div, prior, cfg):
    if cfg.initial_beta is not None:
        start = float(cfg.initial_beta)
    else:
        try:
            start = dml_point(sc)
        except DegenerateDesign:
            start = prior.mean
    if log_posterior(sc, start, div, prior) > -math.inf:
        return start
    best_beta, best_val = None, -math.inf
    for lo, hi in feasible_intervals(sc):
        for g in _grid_inside(lo, hi, start):
            val = log_posterior(sc, float(g), div, prior)
            if val > best_val:
                best_beta, best_val = float(g), val
    if best_beta is None:
        raise InfeasibleMoment(
            "no beta puts zero inside the convex hull of the scores; "
            "check the nuisance fits or pass an explicit initial_beta"
        )
    return best_beta


def run_chain(sc, div, prior, cfg):
    """Random-walk Metropolis on beta with Robbins-Monro step adaptation in burn-in."""
    div = DivergenceSpec.parse(div)
    beta0 = _initial_beta(sc, div, prior, cfg)
    if cfg.step_scale is not None:
        step0 = float(cfg.step_scale)
    else:
        try:
            step0 = max(abs(dml_point(sc)) * 0.1, 0.1)
        except DegenerateDesign:
            step0 = 0.1
    total = cfg.burn_in + cfg.draws
    rng = np.random.default_rng(cfg.seed)
    normals = rng.standard_normal(total)
    log_u = np.log(rng.random(total))
    chain, accepted, step, err = kernels.rw_chain(
        sc.a, sc.b, div.lam, prior.mean, prior.variance, beta0, step0,
        normals, log_u, cfg.burn_in, bool(cfg.adapt), TARGET_ACCEPTANCE, MAX_ITER,
    )
    if err == -2:
        raise InfeasibleMoment(f"initial beta {beta0:.6g} has zero posterior density")
    if err >= 0:
        raise NonConvergence(f"dual solve failed at MCMC step {err}")
    mean, interval, sd = summarize(chain)
    return PosteriorDraws(
        chain=chain,
        acceptance_rate=accepted / cfg.draws,
        mean=mean,
        equal_tailed_95=interval,
        sd=sd,
        final_step_scale=float(step),
        initial_beta=beta0,
    )


def effective_sample_size(chain):
    """Initial-positive-sequence ESS estimate (Geyer)."""
    x = np.asarray(chain, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0.0:
        return float(n)
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    rho = acov / acov[0]
    s = 0.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        s += pair
    tau = max(2.0 * s - 1.0, 1.0)
    return n / tau
