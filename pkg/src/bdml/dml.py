"""Frequentist double machine learning for the partially linear model."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateDesign

Z_975 = 1.959963984540054


@dataclass(frozen=True)
class DmlEstimate:
    beta_hat: float
    se: float
    ci95: tuple


def dml_point(sc):
    """Root of the pooled moment ``sum_i (a_i - beta b_i) = 0``."""
    sb = float(np.sum(sc.b))
    if sb == 0.0:
        raise DegenerateDesign("sum of score slopes is zero; beta is not identified")
    return float(np.sum(sc.a)) / sb


def dml_variance(sc, beta_hat):
    """Sandwich variance ``mean(psi^2) / mean(b)^2`` of the estimator (times n)."""
    if sc.n < 2:
        raise DegenerateDesign("need at least two units for a variance")
    mb = float(np.mean(sc.b))
    if mb == 0.0:
        raise DegenerateDesign("mean score slope is zero")
    psi = sc.a - beta_hat * sc.b
    return float(np.mean(psi * psi)) / (mb * mb)


def dml_estimate(sc):
    beta_hat = dml_point(sc)
    se = math.sqrt(dml_variance(sc, beta_hat) / sc.n)
    return DmlEstimate(beta_hat, se, (beta_hat - Z_975 * se, beta_hat + Z_975 * se))
