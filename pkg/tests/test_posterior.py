import math

import numpy as np
import pytest

from bdml.errors import InfeasibleMoment
from bdml.posterior import (
    McmcConfig,
    PriorSpec,
    effective_sample_size,
    feasible_intervals,
    log_posterior,
    run_chain,
    summarize,
)
from bdml.score import ScoreComponents


def _scores(rng, n=200, beta=1.0):
    d = rng.normal(size=n)
    y = beta * d + rng.normal(size=n)
    return ScoreComponents(d * y, d * d)


def test_summarize_quantiles():
    chain = np.arange(1.0, 101.0)
    mean, (lo, hi), sd = summarize(chain)
    assert mean == 50.5
    assert lo == pytest.approx(3.475)
    assert hi == pytest.approx(97.525)
    assert sd == pytest.approx(np.std(chain, ddof=1))


def test_prior_validation():
    with pytest.raises(ValueError):
        PriorSpec(0.0, 0.0)
    with pytest.raises(ValueError):
        McmcConfig(draws=0)
    assert PriorSpec(1.0, 4.0).cdf(1.0) == 0.5


def test_feasible_intervals():
    sc = ScoreComponents([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
    assert feasible_intervals(sc) == [(1.0, 3.0)]
    assert feasible_intervals(ScoreComponents([1.0, 2.0], [0.0, 0.0])) == []


def test_log_posterior_infeasible_is_minus_inf():
    sc = ScoreComponents([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
    assert log_posterior(sc, 10.0, "EL", PriorSpec(0, 1)) == -math.inf
    assert log_posterior(sc, 2.0, "EL", PriorSpec(0, 1)) > -math.inf


@pytest.mark.parametrize("div", ["EL", "ETEL", "HD"])
def test_chain_concentrates_near_truth(div, rng, backend):
    sc = _scores(rng, beta=1.0)
    draws = run_chain(sc, div, PriorSpec(0.0, 100.0), McmcConfig(3000, 1000, seed=1))
    assert abs(draws.mean - 1.0) < 0.25
    assert draws.equal_tailed_95[0] < draws.mean < draws.equal_tailed_95[1]
    assert 0.15 < draws.acceptance_rate < 0.8
    assert draws.chain.size == 3000


def test_chain_deterministic_given_seed(rng):
    sc = _scores(rng)
    cfg = McmcConfig(500, 100, seed=3)
    a = run_chain(sc, "EL", PriorSpec(0, 10), cfg).chain
    b = run_chain(sc, "EL", PriorSpec(0, 10), cfg).chain
    np.testing.assert_array_equal(a, b)


def test_backends_give_identical_chains(rng):
    from bdml import _pykernels
    from bdml._backend import BACKEND, kernels
    import bdml.posterior as post

    if BACKEND != "compiled":
        pytest.skip("compiled core not built")
    sc = _scores(rng, n=60)
    cfg = McmcConfig(300, 100, seed=5)
    a = run_chain(sc, "ETEL", PriorSpec(0, 10), cfg).chain
    post.kernels = _pykernels
    try:
        b = run_chain(sc, "ETEL", PriorSpec(0, 10), cfg).chain
    finally:
        post.kernels = kernels
    np.testing.assert_allclose(a, b, rtol=1e-9)


def test_tight_prior_dominates(rng):
    sc = _scores(rng, n=50)
    draws = run_chain(sc, "EL", PriorSpec(0.7, 1e-8), McmcConfig(2000, 500, seed=2))
    assert abs(draws.mean - 0.7) < 1e-3
    assert draws.sd < 1e-3


def test_zero_scores_sample_the_prior():
    sc = ScoreComponents(np.zeros(20), np.zeros(20))
    draws = run_chain(sc, "EL", PriorSpec(2.0, 1.0), McmcConfig(20000, 2000, seed=4))
    assert draws.mean == pytest.approx(2.0, abs=0.1)
    assert draws.sd == pytest.approx(1.0, abs=0.1)


def test_single_draw(rng):
    draws = run_chain(_scores(rng), "EL", PriorSpec(0, 10), McmcConfig(1, 10, seed=0))
    assert draws.chain.size == 1 and draws.sd == 0.0


def test_chain_stays_in_feasible_region(rng):
    sc = ScoreComponents(rng.normal(size=15) + 1.0, rng.uniform(0.5, 1.5, size=15))
    draws = run_chain(sc, "EL", PriorSpec(0, 1e4), McmcConfig(1000, 200, seed=1))
    ivs = feasible_intervals(sc)
    assert all(any(lo < x < hi for lo, hi in ivs) for x in draws.chain)


def test_no_feasible_beta_raises():
    sc = ScoreComponents([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    with pytest.raises(InfeasibleMoment):
        run_chain(sc, "EL", PriorSpec(0, 1), McmcConfig(10, 0))


def test_effective_sample_size_of_iid(rng):
    x = rng.normal(size=4000)
    assert 3000 < effective_sample_size(x) <= 4000 * 1.2
    ar = np.empty(4000)
    ar[0] = 0
    for i in range(1, 4000):
        ar[i] = 0.9 * ar[i - 1] + rng.normal()
    assert effective_sample_size(ar) < 600
