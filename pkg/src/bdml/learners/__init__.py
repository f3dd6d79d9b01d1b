"""Nuisance learners for E[D|X] and E[Y|X] behind one fit/predict interface."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DataError


class Family(str, Enum):
    LASSO = "Lasso"
    RANDOM_FOREST = "RandomForest"
    NEURAL_NET = "NeuralNet"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {
            "lasso": cls.LASSO,
            "randomforest": cls.RANDOM_FOREST,
            "rf": cls.RANDOM_FOREST,
            "forest": cls.RANDOM_FOREST,
            "neuralnet": cls.NEURAL_NET,
            "neuralnetwork": cls.NEURAL_NET,
            "nn": cls.NEURAL_NET,
            "mlp": cls.NEURAL_NET,
        }
        if key not in aliases:
            raise ValueError(f"unknown learner family {value!r}")
        return aliases[key]

    @property
    def label(self):
        return {"Lasso": "Lasso", "RandomForest": "Random forest", "NeuralNet": "Neural network"}[
            self.value
        ]


class Task(str, Enum):
    REGRESSION = "Regression"
    BINARY_PROBABILITY = "BinaryProbability"


@dataclass(frozen=True)
class LearnerSpec:
    family: Family
    task: Task = Task.REGRESSION
    hyper: dict = field(default_factory=dict, hash=False, compare=False)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "seed", int(self.seed))

    def with_(self, **changes):
        kw = dict(family=self.family, task=self.task, hyper=dict(self.hyper), seed=self.seed)
        kw.update(changes)
        return LearnerSpec(**kw)


@dataclass(frozen=True, eq=False)
class FittedLearner:
    spec: LearnerSpec
    model: object
    train_n: int
    train_p: int
    chosen_penalty: float = float("nan")
    constant: bool = False


class ConstantModel:
    def __init__(self, value):
        self.value = float(value)

    def predict(self, x):
        return np.full(x.shape[0], self.value)


def fit(spec, x, target):
    """Fit the learner described by ``spec``. Deterministic given ``spec.seed``."""
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    if x.ndim != 2 or x.shape[0] != target.shape[0]:
        raise DataError(f"x has shape {x.shape} but target has {target.shape[0]} entries")
    if x.shape[1] < 1:
        raise DataError("need at least one feature column")
    if not (np.isfinite(x).all() and np.isfinite(target).all()):
        raise DataError("learner inputs must be finite")
    if spec.task is Task.BINARY_PROBABILITY and not np.all((target == 0) | (target == 1)):
        raise DataError("BinaryProbability targets must be coded 0/1")
    n, p = x.shape
    if np.ptp(target) == 0.0:
        return FittedLearner(spec, ConstantModel(target[0]), n, p, constant=True)

    if spec.family is Family.LASSO:
        from .lasso import fit_lasso

        model = fit_lasso(x, target, spec)
        return FittedLearner(spec, model, n, p, chosen_penalty=model.penalty)
    if spec.family is Family.RANDOM_FOREST:
        from .forest import fit_forest

        return FittedLearner(spec, fit_forest(x, target, spec), n, p)
    from .mlp import fit_mlp

    return FittedLearner(spec, fit_mlp(x, target, spec), n, p)


def predict(model, x_new):
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim != 2 or x_new.shape[1] != model.train_p:
        raise DataError(
            f"expected {model.train_p} feature columns, got array of shape {x_new.shape}"
        )
    out = model.model.predict(x_new)
    if model.spec.task is Task.BINARY_PROBABILITY:
        out = np.clip(out, 0.0, 1.0)
    return out


__all__ = ["Family", "Task", "LearnerSpec", "FittedLearner", "fit", "predict"]
