"""Coverage validity of the profile posterior and the sample-splitting demonstration.

If the posterior is valid, the posterior CDF evaluated at a parameter drawn
from the prior (with data simulated at that parameter) is Uniform(0, 1).
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .dml import dml_estimate
from .errors import BdmlError, NumericalError
from .gel import DivergenceSpec
from .pipeline import contaminated_scores, crossfit_scores, oracle_scores
from .parallel import replicate_map
from .posterior import McmcConfig, PriorSpec, run_chain
from .score import ScoreComponents
from .simulate import replicate_seed, simulate, split_demo_scenario

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.05
NUISANCE_MODES = ("contaminated", "oracle", "learners", "zero")


def h_statistic(chain, beta_true):
    """Empirical posterior CDF at ``beta_true``, ties counted half."""
    chain = np.asarray(chain, dtype=float)
    if chain.size == 0:
        raise ValueError("empty chain")
    below = np.count_nonzero(chain < beta_true)
    ties = np.count_nonzero(chain == beta_true)
    return (below + 0.5 * ties) / chain.size


def kolmogorov_sf(x, tol=1e-10, max_terms=100_000):
    """Asymptotic P(sqrt(m) D_m > x) from the Kolmogorov series.

    Below x = 1 the alternating series converges slowly and loses
    monotonicity to truncation error, so the equivalent theta-function form
    of the CDF is summed instead.
    """
    if x <= 0.0:
        return 1.0
    if x < 1.0:
        c = math.pi * math.pi / (8.0 * x * x)
        cdf = 0.0
        for k in range(1, max_terms + 1):
            term = math.exp(-(2 * k - 1) ** 2 * c)
            cdf += term
            if term < tol * cdf or term == 0.0:
                break
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / x * cdf))
    total = 0.0
    for k in range(1, max_terms + 1):
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < tol:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_uniform_test(values):
    """One-sample Kolmogorov-Smirnov test against Uniform(0, 1)."""
    u = np.sort(np.asarray(values, dtype=float))
    m = u.size
    if m < 1:
        raise ValueError("need at least one value")
    if u[0] < 0.0 or u[-1] > 1.0 or not np.isfinite(u).all():
        raise ValueError("values must lie in [0, 1]")
    i = np.arange(1, m + 1)
    d = float(max(np.max(i / m - u), np.max(u - (i - 1) / m)))
    return d, kolmogorov_sf(math.sqrt(m) * d)


@dataclass(frozen=True)
class PipelineSettings:
    """How each replicate turns data into a posterior.

    ``nuisance``: ``"contaminated"`` (known propensity, overfitted outcome
    model), ``"oracle"`` (both nuisances known), ``"learners"``, or
    ``"zero"`` (identically zero score, so the posterior is the prior).
    ``variance_shrink`` rescales the chain around its mean after sampling; a
    value below one deliberately understates uncertainty.
    """

    k: int = 2
    split: bool = True
    nuisance: str = "contaminated"
    learner: str = "Lasso"
    mcmc: McmcConfig = field(default_factory=lambda: McmcConfig(draws=2000, burn_in=500))
    variance_shrink: float = 1.0
    contamination_scale: float | None = None


@dataclass(frozen=True, eq=False)
class ValidityReport:
    h_values: np.ndarray
    ks_statistic: float
    ks_p_value: float
    m: int
    failures: int = 0
    divergence: str = ""


def _scores(obs, scenario, settings, seed):
    if settings.nuisance == "contaminated":
        return contaminated_scores(obs, scenario, settings.split, settings.k, seed,
                                   settings.contamination_scale)
    if settings.nuisance == "oracle":
        return oracle_scores(obs, scenario)
    if settings.nuisance == "zero":
        return ScoreComponents(np.zeros(obs.n), np.zeros(obs.n))
    if settings.nuisance == "learners":
        return crossfit_scores(obs, settings.learner, settings.k, seed)
    raise ValueError(f"unknown nuisance mode {settings.nuisance!r}")


def _shrink(chain, factor):
    if factor == 1.0:
        return chain
    centre = chain.mean()
    return centre + (chain - centre) * math.sqrt(factor)


def _sbc_replicate(job):
    prior, scenario, div, settings, seed, r = job
    rs = replicate_seed(seed, r)
    rng = np.random.default_rng(rs)
    beta_k = float(prior.mean + math.sqrt(prior.variance) * rng.standard_normal())
    data_seed = int(rng.integers(0, 2**63))
    try:
        obs = simulate(scenario, beta_override=beta_k, seed=data_seed)
        sc = _scores(obs, scenario, settings, data_seed)
        mc = settings.mcmc
        cfg = McmcConfig(mc.draws, mc.burn_in, None, mc.step_scale, mc.adapt, data_seed)
        draws = run_chain(sc, div, prior, cfg)
    except BdmlError as exc:
        return exc
    return h_statistic(_shrink(draws.chain, settings.variance_shrink), beta_k)


def run_sbc(m, prior, scenario, div, settings=None, seed=0, workers=1):
    """Simulation-based calibration of the profile posterior."""
    if m < 20:
        raise ValueError(f"need at least 20 replicates, got {m}")
    settings = settings or PipelineSettings()
    if settings.nuisance not in NUISANCE_MODES:
        raise ValueError(f"unknown nuisance mode {settings.nuisance!r}")
    div = DivergenceSpec.parse(div)
    jobs = [(prior, scenario, div, settings, seed, r) for r in range(m)]
    h = []
    failures = 0
    for r, out in enumerate(replicate_map(_sbc_replicate, jobs, workers)):
        if isinstance(out, Exception):
            failures += 1
            log.warning("SBC replicate %d failed: %s", r, out)
        else:
            h.append(out)
    if failures > MAX_FAILURE_FRACTION * m:
        raise NumericalError(f"{failures} of {m} SBC replicates failed")
    h = np.array(h)
    stat, pval = ks_uniform_test(h)
    return ValidityReport(h, stat, pval, len(h), failures, div.name)


@dataclass(frozen=True, eq=False)
class SplitDemoReport:
    """Standardised errors ``(estimate - beta) / scale`` per method and arm."""

    standardized_full: dict
    standardized_split: dict
    beta_true: float
    n: int

    def mean_full(self, method):
        return float(np.mean(self.standardized_full[method]))

    def mean_split(self, method):
        return float(np.mean(self.standardized_split[method]))

    @property
    def methods(self):
        return list(self.standardized_full)


def _split_replicate(job):
    scenario, divs, prior, mcmc, k, scale, seed, r = job
    rs = replicate_seed(seed, r)
    obs = simulate(scenario, seed=rs)
    beta = scenario.beta_true
    out = {}
    for arm in (False, True):
        sc = contaminated_scores(obs, scenario, arm, k, rs, scale)
        est = dml_estimate(sc)
        row = {"DML": (est.beta_hat - beta) / est.se}
        for d in divs:
            cfg = McmcConfig(mcmc.draws, mcmc.burn_in, None, mcmc.step_scale, mcmc.adapt, rs)
            draws = run_chain(sc, d, prior, cfg)
            row[d.name] = (draws.mean - beta) / draws.sd
        out["split" if arm else "full"] = row
    return out


def run_split_demo(replicates, n, seed, divergences=("EL", "ETEL", "HD"), prior=None,
                   mcmc=None, k=2, contamination=True, scenario=None, workers=1):
    """Full-sample versus K-fold estimates under an overfitted outcome model.

    Every replicate reports the DML estimate standardised by its sandwich SE
    and each Bayesian posterior mean standardised by its posterior SD.
    """
    if n < 100:
        raise ValueError(f"the n^(1/3) contamination needs n >= 100, got {n}")
    scenario = (scenario or split_demo_scenario(n=n)).with_(n=n)
    prior = prior or PriorSpec(0.0, 1e4)
    mcmc = mcmc or McmcConfig(draws=2000, burn_in=500)
    divs = [DivergenceSpec.parse(d) for d in divergences]
    scale = None if contamination else 0.0
    jobs = [(scenario, divs, prior, mcmc, k, scale, seed, r) for r in range(replicates)]
    outs = replicate_map(_split_replicate, jobs, workers)
    labels = ["DML"] + [d.name for d in divs]
    return SplitDemoReport(
        {lab: np.array([o["full"][lab] for o in outs]) for lab in labels},
        {lab: np.array([o["split"][lab] for o in outs]) for lab in labels},
        scenario.beta_true,
        n,
    )


def histogram_rows(values, bins=20, range_=None):
    """``(bin_left, bin_right, count)`` rows for external plotting."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=range_)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]
