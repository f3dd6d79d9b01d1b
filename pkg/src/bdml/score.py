"""Observation data model and the partially linear regression score.

The orthogonal score for the partially linear model is linear in the
treatment effect, so every per-unit score is stored as a pair ``(a_i, b_i)``
with ``psi_i(beta) = a_i - beta * b_i``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError

PROPENSITY_CLIP = 1e-6


def _as_finite(name, values, ndim):
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DataError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        where = np.argwhere(bad)[0]
        raise DataError(f"{name} has a non-finite value at index {tuple(int(i) for i in where)}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Outcome ``y``, treatment ``d`` and confounders ``x`` for n units."""

    y: np.ndarray
    d: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = _as_finite("y", self.y, 1)
        d = _as_finite("d", self.d, 1)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        x = _as_finite("x", x, 2)
        if not (len(y) == len(d) == x.shape[0]):
            raise DataError(
                f"length mismatch: y has {len(y)}, d has {len(d)}, x has {x.shape[0]} rows"
            )
        if len(y) < 4:
            raise DataError(f"need at least 4 units, got {len(y)}")
        if x.shape[1] < 1:
            raise DataError("x needs at least one column")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "x", x)

    @property
    def n(self):
        return len(self.y)

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def binary_treatment(self):
        return bool(np.all((self.d == 0.0) | (self.d == 1.0)))

    def subset(self, rows):
        return ObservationSet(self.y[rows], self.d[rows], self.x[rows])


class NuisanceKind(str, Enum):
    """What the outcome-side nuisance predicts.

    ``PARTIALLING_OUT``: ``g_hat`` estimates E[Y|X].
    ``DIRECT_MU``: ``g_hat`` estimates the baseline mu(X) in Y = mu(X) + beta D + U.
    """

    PARTIALLING_OUT = "PartiallingOut"
    DIRECT_MU = "DirectMu"


@dataclass(frozen=True, eq=False)
class NuisancePredictions:
    pi_hat: np.ndarray
    g_hat: np.ndarray
    kind: NuisanceKind = NuisanceKind.PARTIALLING_OUT
    binary: bool = False

    def __post_init__(self):
        pi_hat = _as_finite("pi_hat", self.pi_hat, 1)
        g_hat = _as_finite("g_hat", self.g_hat, 1)
        if len(pi_hat) != len(g_hat):
            raise DataError(f"pi_hat has {len(pi_hat)} entries but g_hat has {len(g_hat)}")
        if self.binary:
            pi_hat = np.clip(pi_hat, PROPENSITY_CLIP, 1.0 - PROPENSITY_CLIP)
            pi_hat.setflags(write=False)
        object.__setattr__(self, "pi_hat", pi_hat)
        object.__setattr__(self, "g_hat", g_hat)
        object.__setattr__(self, "kind", NuisanceKind(self.kind))


@dataclass(frozen=True, eq=False)
class ScoreComponents:
    """Per-unit score pieces: ``psi_i(beta) = a[i] - beta * b[i]``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_finite("a", self.a, 1)
        b = _as_finite("b", self.b, 1)
        if len(a) != len(b):
            raise DataError(f"a has {len(a)} entries but b has {len(b)}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return len(self.a)

    def __call__(self, beta):
        return evaluate_score(self, beta)


def build_score_components(obs, nuis):
    """Turn out-of-fold nuisance predictions into score components.

    Both nuisance kinds share ``a_i = (d_i - pi_i)(y_i - g_i)``. The slope is
    ``(d_i - pi_i)^2`` when ``g`` estimates E[Y|X] (partialling out) and
    ``(d_i - pi_i) d_i`` when ``g`` estimates mu(X) directly.
    """
    if len(nuis.pi_hat) != obs.n:
        raise DataError(f"nuisance predictions have {len(nuis.pi_hat)} rows, data has {obs.n}")
    resid_d = obs.d - nuis.pi_hat
    a = resid_d * (obs.y - nuis.g_hat)
    if nuis.kind is NuisanceKind.PARTIALLING_OUT:
        b = resid_d * resid_d
    else:
        b = resid_d * obs.d
    for name, arr in (("a", a), ("b", b)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise DataError(f"score component {name} is not finite at index {int(bad[0])}")
    return ScoreComponents(a, b)


def evaluate_score(sc, beta):
    """Vector of ``psi_i(beta)``."""
    beta = float(beta)
    if not np.isfinite(beta):
        raise DataError(f"beta must be finite, got {beta}")
    return sc.a - beta * sc.b


def disproportionality_index(borough_rate, city_rate):
    """Borough stop-and-search rate relative to the city-wide rate (1 = parity)."""
    if not city_rate > 0:
        raise DataError(f"city_rate must be positive, got {city_rate}")
    if borough_rate < 0:
        raise DataError(f"borough_rate must be non-negative, got {borough_rate}")
    return borough_rate / city_rate
