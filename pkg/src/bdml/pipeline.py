"""Glue from data to score components: learner-based or with known nuisances."""

from dataclasses import dataclass
import re

import numpy as np

from .crossfit import crossfit_nuisance, make_folds
from .gel import DivergenceSpec
from .learners import Family, LearnerSpec, Task
from .score import NuisanceKind, NuisancePredictions, build_score_components


@dataclass(frozen=True)
class Method:
    """A table row: a divergence (or ``None`` for frequentist DML) with a learner."""

    divergence: DivergenceSpec | None
    learner: Family

    @classmethod
    def parse(cls, text):
        m = re.fullmatch(r"\s*([^()]+?)\s*\(\s*([^()]+?)\s*\)\s*", text)
        if not m:
            raise ValueError(f"method must look like 'EL(Lasso)', got {text!r}")
        head, learner = m.groups()
        div = None if head.upper() == "DML" else DivergenceSpec.parse(head)
        return cls(div, Family.parse(learner))

    @property
    def label(self):
        head = "DML" if self.divergence is None else self.divergence.name
        return f"{head} ({self.learner.label})"


def learner_specs(family, binary_treatment, seed, hyper=None, family_g=None):
    hyper = dict(hyper or {})
    task_pi = Task.BINARY_PROBABILITY if binary_treatment else Task.REGRESSION
    return (
        LearnerSpec(family, task_pi, hyper, seed),
        LearnerSpec(family if family_g is None else family_g, Task.REGRESSION, hyper, seed + 1),
    )


def crossfit_scores(obs, family, k=2, seed=0, hyper=None, family_g=None):
    """Cross-fitted partialling-out score components.

    ``family`` fits E[D|X]; E[Y|X] uses ``family_g`` when given, else the same.
    """
    folds = make_folds(obs.n, k, seed)
    spec_pi, spec_g = learner_specs(family, obs.binary_treatment, seed, hyper, family_g)
    nuis = crossfit_nuisance(obs, folds, spec_pi, spec_g)
    return build_score_components(obs, nuis)


def oracle_scores(obs, scenario):
    """Score components from the true propensity and baseline outcome."""
    nuis = NuisancePredictions(
        scenario.true_pi(obs.x), scenario.true_mu(obs.x), NuisanceKind.DIRECT_MU,
        binary=obs.binary_treatment,
    )
    return build_score_components(obs, nuis)


def contaminated_scores(obs, scenario, split, k=2, seed=0, scale=None):
    """Known propensity with an overfitted baseline-outcome estimate.

    The outcome nuisance is the truth plus the training residual of the
    nearest training point, shrunk by ``n^(1/3)``. On the full sample every
    point is its own nearest neighbour, so the estimate absorbs the unit's own
    noise; with sample splitting the neighbour comes from the other folds.
    """
    n = obs.n
    if scale is None:
        scale = n ** (-1.0 / 3.0)
    mu = scenario.true_mu(obs.x)
    resid = obs.y - mu
    if not split:
        mu_hat = mu + scale * resid
    else:
        folds = make_folds(n, k, seed)
        mu_hat = np.empty(n)
        for j in range(1, k + 1):
            test = folds.fold(j)
            train = np.flatnonzero(~test)
            xt = obs.x[test]
            xtr = obs.x[train]
            d2 = (
                np.sum(xt * xt, axis=1)[:, None]
                - 2.0 * xt @ xtr.T
                + np.sum(xtr * xtr, axis=1)[None, :]
            )
            nearest = train[np.argmin(d2, axis=1)]
            mu_hat[test] = mu[test] + scale * resid[nearest]
    nuis = NuisancePredictions(scenario.true_pi(obs.x), mu_hat, NuisanceKind.DIRECT_MU)
    return build_score_components(obs, nuis)
