"""Bagged regression trees with per-node feature subsampling.

Regression uses variance-reduction splits. For a 0/1 target the Gini
decrease is exactly twice the variance decrease, so classification forests
share the same grower and average leaf frequencies.
"""

import math

import numpy as np

from .._backend import kernels

N_TREES = 500
MIN_LEAF = 5


class ForestModel:
    def __init__(self, trees):
        self.trees = trees

    def predict(self, x):
        x = np.ascontiguousarray(x, dtype=float)
        out = np.zeros(x.shape[0])
        for tree in self.trees:
            kernels.predict_tree(x, *tree, out)
        return out / len(self.trees)


def default_mtry(p, classification):
    return max(1, math.ceil(math.sqrt(p)) if classification else math.ceil(p / 3))


def fit_forest(x, y, spec):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, p = x.shape
    classification = spec.task.value == "BinaryProbability"
    n_trees = int(spec.hyper.get("n_trees", N_TREES))
    min_leaf = int(spec.hyper.get("min_leaf", MIN_LEAF))
    mtry = int(spec.hyper.get("mtry", default_mtry(p, classification)))
    rng = np.random.default_rng(spec.seed)
    trees = []
    for _ in range(n_trees):
        rows = np.ascontiguousarray(rng.integers(0, n, size=n), dtype=np.intp)
        seed = int(rng.integers(0, 2**63))
        trees.append(kernels.grow_tree(x, y, rows, mtry, min_leaf, seed))
    return ForestModel(trees)
