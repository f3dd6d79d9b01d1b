"""K-fold sample splitting and out-of-fold nuisance prediction."""

from dataclasses import dataclass

import numpy as np

from . import learners
from .errors import BdmlError, DataError
from .score import NuisanceKind, NuisancePredictions


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    k: int
    assignment: np.ndarray  # fold index in 1..k per unit
    seed: int

    @property
    def n(self):
        return len(self.assignment)

    def fold(self, j):
        """Boolean mask of the units in fold ``j`` (1-based)."""
        return self.assignment == j


def make_folds(n, k, seed):
    """Uniformly random balanced partition of ``range(n)`` into ``k`` folds."""
    n, k = int(n), int(k)
    if k < 2 or k > n:
        raise DataError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    assignment = np.arange(n) % k + 1
    rng.shuffle(assignment)
    assignment.setflags(write=False)
    return FoldAssignment(k, assignment, int(seed))


def _fold_seed(spec, j):
    return learners.LearnerSpec(spec.family, spec.task, spec.hyper, (spec.seed * 1_000_003 + j) % 2**63)


def crossfit_nuisance(obs, folds, spec_pi, spec_g, fitter=None):
    """Out-of-fold predictions of E[D|X] and E[Y|X].

    Each unit's predictions come from learners fitted only on the other folds.
    ``fitter(spec, x, target) -> object with predict(x)`` can replace the
    default learner dispatch (used for instrumentation).
    """
    if folds.n != obs.n:
        raise DataError(f"fold assignment covers {folds.n} units, data has {obs.n}")
    pi_hat = np.empty(obs.n)
    g_hat = np.empty(obs.n)
    for j in range(1, folds.k + 1):
        test = folds.fold(j)
        train = ~test
        try:
            for spec, target, out in ((spec_pi, obs.d, pi_hat), (spec_g, obs.y, g_hat)):
                seeded = _fold_seed(spec, j)
                if fitter is None:
                    model = learners.fit(seeded, obs.x[train], target[train])
                    out[test] = learners.predict(model, obs.x[test])
                else:
                    model = fitter(seeded, obs.x[train], target[train], np.flatnonzero(train))
                    out[test] = model.predict(obs.x[test])
        except BdmlError as exc:
            raise type(exc)(f"fold {j}: {exc}") from exc
        except Exception as exc:
            raise BdmlError(f"learner failed on fold {j}: {exc}") from exc
    return NuisancePredictions(
        pi_hat, g_hat, NuisanceKind.PARTIALLING_OUT, binary=obs.binary_treatment
    )
