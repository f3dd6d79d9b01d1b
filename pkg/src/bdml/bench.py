"""Replicate orchestration and bias / RMSE / coverage tables."""

from dataclasses import dataclass
import logging
import math
import time

import numpy as np

from .dml import dml_estimate
from .errors import BdmlError, NumericalError
from .parallel import replicate_map
from .pipeline import Method, crossfit_scores
from .posterior import McmcConfig, PriorSpec, run_chain
from .simulate import replicate_seed, simulate

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class MetricsRow:
    method: str
    bias: float
    rmse: float
    coverage: float
    replicates: int
    failures: int = 0
    runtime_seconds: float = math.nan


@dataclass(frozen=True)
class ReplicateResult:
    estimate: float
    lo: float
    hi: float


def metrics(label, results, beta_true, failures=0, runtime=math.nan):
    """Aggregate per-replicate point estimates and intervals into one row."""
    est = np.array([r.estimate for r in results], dtype=float)
    if est.size == 0:
        raise NumericalError(f"{label}: no successful replicates")
    err = est - beta_true
    covered = np.array([r.lo <= beta_true <= r.hi for r in results])
    return MetricsRow(
        method=label,
        bias=float(err.mean()),
        rmse=float(np.sqrt(np.mean(err * err))),
        coverage=100.0 * float(covered.mean()),
        replicates=int(est.size),
        failures=int(failures),
        runtime_seconds=float(runtime),
    )


def run_replicate(obs, methods, prior, mcmc, k, seed, hyper=None):
    """Estimates for every method on one dataset.

    Nuisances are cross-fitted once per learner family and shared by the DML
    row and all divergences that use that learner.
    """
    out = {}
    families = []
    for m in methods:
        if m.learner not in families:
            families.append(m.learner)
    for fam_idx, family in enumerate(families):
        fam_methods = [m for m in methods if m.learner is family]
        try:
            sc = crossfit_scores(obs, family, k=k, seed=seed + 7919 * fam_idx, hyper=hyper)
        except BdmlError as exc:
            for m in fam_methods:
                out[m] = exc
            continue
        for m in fam_methods:
            try:
                if m.divergence is None:
                    est = dml_estimate(sc)
                    out[m] = ReplicateResult(est.beta_hat, *est.ci95)
                else:
                    cfg = McmcConfig(mcmc.draws, mcmc.burn_in, None, mcmc.step_scale,
                                     mcmc.adapt, seed)
                    draws = run_chain(sc, m.divergence, prior, cfg)
                    out[m] = ReplicateResult(draws.mean, *draws.equal_tailed_95)
            except BdmlError as exc:
                out[m] = exc
    return out


def _one_replicate(job):
    scenario, methods, prior, mcmc, k, hyper, seed, r = job
    rs = replicate_seed(seed, r)
    obs = simulate(scenario, seed=rs)
    t0 = time.perf_counter()
    rep = run_replicate(obs, methods, prior, mcmc, k, rs, hyper)
    return rep, time.perf_counter() - t0


def run_benchmark(scenario, methods, replicates, seed, prior=None, mcmc=None, k=2,
                  hyper=None, progress=None, workers=1):
    """Simulate ``replicates`` datasets and tabulate each method.

    Replicate ``r`` uses ``replicate_seed(seed, r)``, so the first replicates
    are identical whatever total is requested.
    """
    if replicates < 2:
        raise ValueError(f"need at least 2 replicates, got {replicates}")
    methods = [Method.parse(m) if isinstance(m, str) else m for m in methods]
    prior = prior or PriorSpec(0.0, 1e4)
    mcmc = mcmc or McmcConfig()
    results = {m: [] for m in methods}
    failures = {m: 0 for m in methods}
    elapsed = {m: 0.0 for m in methods}
    jobs = [(scenario, methods, prior, mcmc, k, hyper, seed, r) for r in range(replicates)]
    if workers > 1:
        outputs = replicate_map(_one_replicate, jobs, workers)
    else:
        outputs = (_one_replicate(job) for job in jobs)
    for r, (rep, dt) in enumerate(outputs):
        dt /= len(methods)
        for m, res in rep.items():
            elapsed[m] += dt
            if isinstance(res, Exception):
                failures[m] += 1
                log.warning("replicate %d, %s failed: %s", r, m.label, res)
            else:
                results[m].append(res)
        if progress is not None:
            progress(r + 1, replicates)
    rows = []
    for m in methods:
        if failures[m] > MAX_FAILURE_FRACTION * replicates:
            raise NumericalError(
                f"{m.label}: {failures[m]} of {replicates} replicates failed"
            )
        rows.append(metrics(m.label, results[m], scenario.beta_true, failures[m], elapsed[m]))
    return rows
