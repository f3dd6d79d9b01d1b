"""Data-generating designs for the benchmarks and the splitting demonstration."""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import DataError
from .score import ObservationSet


class ScenarioKind(str, Enum):
    BINARY_EXPOSURE = "BinaryExposure"
    CONTINUOUS_EXPOSURE = "ContinuousExposure"
    SPLIT_DEMO = "SplitDemo"


OUTCOME_COEF = {0: 0.5, 2: 1.0, 3: -0.1, 6: -0.2}
BINARY_TREATMENT_COEF = {0: 0.3, 1: 0.2, 4: -0.4}
CONTINUOUS_TREATMENT_COEF = {0: 0.45, 1: 0.9, 4: -0.4}


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _linear(x, coef):
    out = np.zeros(x.shape[0])
    for j, c in coef.items():
        out += c * x[:, j]
    return out


@dataclass(frozen=True)
class ScenarioSpec:
    """A simulation design.

    Binary and continuous designs draw X from an equicorrelated Gaussian with
    off-diagonal ``rho``. ``SplitDemo`` uses a Toeplitz covariance
    ``rho^|i-j|`` with nonlinear nuisances. ``treatment_noise`` scales the
    treatment noise; setting it to zero makes D a deterministic function of X,
    which leaves the score without information about beta.
    """

    kind: ScenarioKind
    n: int
    p: int
    rho: float
    beta_true: float = 1.0
    treatment_coef: dict = field(default_factory=dict, hash=False)
    outcome_coef: dict = field(default_factory=dict, hash=False)
    treatment_noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if self.n < 4 or self.p < 1:
            raise DataError(f"need n >= 4 and p >= 1, got n={self.n}, p={self.p}")
        needed = max([*self.treatment_coef, *self.outcome_coef], default=-1)
        if needed >= self.p:
            raise DataError(f"design uses column {needed + 1} but p={self.p}")

    def with_(self, **changes):
        return replace(self, **changes)

    # true nuisance functions -------------------------------------------------

    def true_pi(self, x):
        """E[D | X]."""
        if self.kind is ScenarioKind.BINARY_EXPOSURE:
            return _expit(_linear(x, self.treatment_coef))
        if self.kind is ScenarioKind.CONTINUOUS_EXPOSURE:
            return _linear(x, self.treatment_coef)
        return x[:, 0] + 0.25 * _expit(x[:, 2])

    def true_mu(self, x):
        """Baseline outcome mu(X) in Y = mu(X) + beta D + U."""
        if self.kind is ScenarioKind.SPLIT_DEMO:
            return _expit(x[:, 0]) + 0.25 * x[:, 2]
        return _linear(x, self.outcome_coef)


def binary_scenario(n=200, p=500, beta_true=1.0, seed=0):
    return ScenarioSpec(ScenarioKind.BINARY_EXPOSURE, n, p, 0.3, beta_true,
                        dict(BINARY_TREATMENT_COEF), dict(OUTCOME_COEF), seed=seed)


def continuous_scenario(n=40, p=40, beta_true=1.0, seed=0, rho=0.05):
    return ScenarioSpec(ScenarioKind.CONTINUOUS_EXPOSURE, n, p, rho, beta_true,
                        dict(CONTINUOUS_TREATMENT_COEF), dict(OUTCOME_COEF), seed=seed)


def split_demo_scenario(n=500, p=20, beta_true=0.5, seed=0, treatment_noise=1.0):
    return ScenarioSpec(ScenarioKind.SPLIT_DEMO, n, p, 0.7, beta_true,
                        treatment_noise=treatment_noise, seed=seed)


@lru_cache(maxsize=32)
def _cholesky(p, rho, toeplitz):
    if toeplitz:
        idx = np.arange(p)
        cov = rho ** np.abs(idx[:, None] - idx[None, :])
    else:
        cov = np.full((p, p), rho)
        np.fill_diagonal(cov, 1.0)
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DataError(f"covariance with p={p}, rho={rho} is not positive definite") from exc
    factor.setflags(write=False)
    return factor


def simulate(scenario, beta_override=None, seed=None):
    """Draw one dataset. ``seed`` defaults to ``scenario.seed``."""
    beta = scenario.beta_true if beta_override is None else float(beta_override)
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    toeplitz = scenario.kind is ScenarioKind.SPLIT_DEMO
    if not toeplitz and scenario.p > 1 and not (-1.0 / (scenario.p - 1) < scenario.rho < 1.0):
        raise DataError(
            f"equicorrelation rho={scenario.rho} is not positive definite for p={scenario.p}"
        )
    factor = _cholesky(scenario.p, float(scenario.rho), toeplitz)
    x = rng.standard_normal((scenario.n, scenario.p)) @ factor.T
    pi = scenario.true_pi(x)
    if scenario.kind is ScenarioKind.BINARY_EXPOSURE:
        d = (rng.random(scenario.n) < pi).astype(float)
    else:
        d = pi + scenario.treatment_noise * rng.standard_normal(scenario.n)
    y = scenario.true_mu(x) + beta * d + rng.standard_normal(scenario.n)
    return ObservationSet(y, d, x)


def replicate_seed(master, r):
    """Seed for replicate ``r``; independent of how many replicates are run."""
    ss = np.random.SeedSequence(int(master), spawn_key=(int(r),))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
