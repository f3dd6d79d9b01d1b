import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdml.bench import ReplicateResult, metrics, run_benchmark
from bdml.errors import DataError
from bdml.posterior import McmcConfig, PriorSpec
from bdml.simulate import (
    ScenarioKind,
    binary_scenario,
    continuous_scenario,
    replicate_seed,
    simulate,
    split_demo_scenario,
)


def test_continuous_treatment_variance():
    obs = simulate(continuous_scenario(n=100_000, rho=0.0), seed=1)
    assert obs.d.var() == pytest.approx(2.1725, rel=0.03)


def test_binary_propensity_at_origin():
    # logistic fit on the treatment covariates; the intercept gives P(D=1 | X=0)
    obs = simulate(binary_scenario(n=100_000, p=8), seed=2)
    z = np.column_stack([np.ones(obs.n), obs.x[:, [0, 1, 4]]])
    w = np.zeros(4)
    for _ in range(25):
        p = 1 / (1 + np.exp(-z @ w))
        w += np.linalg.solve(z.T @ (z * (p * (1 - p))[:, None]), z.T @ (obs.d - p))
    assert 1 / (1 + math.exp(-w[0])) == pytest.approx(0.5, abs=0.02)
    np.testing.assert_allclose(w[1:], [0.3, 0.2, -0.4], atol=0.05)


@pytest.mark.parametrize("make,rho", [(binary_scenario, 0.3), (continuous_scenario, 0.05)])
def test_confounder_correlation(make, rho):
    obs = simulate(make(n=100_000, p=8), seed=3)
    corr = np.corrcoef(obs.x, rowvar=False)
    off = corr[~np.eye(8, dtype=bool)]
    # sampling SD of one correlation is about 0.003 here
    assert abs(off.mean() - rho) < 0.01
    assert np.max(np.abs(off - rho)) < 0.015


def test_outcome_equation_residual():
    sc = continuous_scenario(n=50_000, p=8, beta_true=2.0)
    obs = simulate(sc, seed=4)
    resid = obs.y - 2.0 * obs.d - sc.true_mu(obs.x)
    assert resid.mean() == pytest.approx(0.0, abs=0.02)
    assert resid.std() == pytest.approx(1.0, abs=0.02)


def test_simulate_determinism_and_override():
    sc = continuous_scenario()
    a, b = simulate(sc, seed=9), simulate(sc, seed=9)
    np.testing.assert_array_equal(a.y, b.y)
    c = simulate(sc, beta_override=3.0, seed=9)
    np.testing.assert_allclose(c.y - a.y, 2.0 * a.d)


def test_invalid_designs():
    with pytest.raises(DataError):
        simulate(continuous_scenario(p=10, rho=-0.5), seed=0)
    with pytest.raises(DataError):
        continuous_scenario(p=5)
    assert split_demo_scenario().kind is ScenarioKind.SPLIT_DEMO


def test_replicate_seed_is_stream_stable():
    seeds = [replicate_seed(7, r) for r in range(100)]
    assert len(set(seeds)) == 100
    assert replicate_seed(7, 5) == seeds[5]
    assert replicate_seed(8, 5) != seeds[5]


def test_perfect_estimator_metrics():
    row = metrics("oracle", [ReplicateResult(1.0, 0.9, 1.1)] * 10, 1.0)
    assert (row.bias, row.rmse, row.coverage, row.replicates) == (0.0, 0.0, 100.0, 10)


def test_exact_interval_coverage(rng):
    est = 1.0 + rng.normal(size=2000)
    row = metrics("z", [ReplicateResult(e, e - 1.959964, e + 1.959964) for e in est], 1.0)
    assert abs(row.coverage - 95.0) < 1.5


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=40), st.floats(-5, 5))
def test_rmse_identity_and_permutation(ests, beta):
    res = [ReplicateResult(e, e - 1, e + 1) for e in ests]
    row = metrics("m", res, beta)
    assert row.rmse ** 2 == pytest.approx(row.bias ** 2 + np.var(ests), rel=1e-9, abs=1e-9)
    assert row.rmse >= abs(row.bias) - 1e-12
    rev = metrics("m", res[::-1], beta)
    assert rev.rmse == pytest.approx(row.rmse, rel=1e-12)
    assert 0 <= row.coverage <= 100


def test_benchmark_prefix_stable():
    sc = continuous_scenario()
    kw = dict(prior=PriorSpec(1.0, 2.0), mcmc=McmcConfig(300, 100))
    short = run_benchmark(sc, ["EL(Lasso)", "DML(Lasso)"], 2, seed=5, **kw)
    again = run_benchmark(sc, ["EL(Lasso)", "DML(Lasso)"], 2, seed=5, **kw)
    strip = lambda rows: [(r.method, r.bias, r.rmse, r.coverage) for r in rows]
    assert strip(short) == strip(again)
    longer = run_benchmark(sc, ["EL(Lasso)", "DML(Lasso)"], 3, seed=5, **kw)
    assert strip(longer) != strip(short)
    assert [r.method for r in short] == ["EL (Lasso)", "DML (Lasso)"]


def test_benchmark_parallel_matches_serial():
    sc = continuous_scenario()
    kw = dict(prior=PriorSpec(1.0, 2.0), mcmc=McmcConfig(200, 50))
    a = run_benchmark(sc, ["DML(Lasso)", "HD(Lasso)"], 4, seed=1, **kw)
    b = run_benchmark(sc, ["DML(Lasso)", "HD(Lasso)"], 4, seed=1, workers=2, **kw)
    for x, y in zip(a, b):
        assert (x.bias, x.rmse, x.coverage) == (y.bias, y.rmse, y.coverage)


def test_benchmark_needs_two_replicates():
    with pytest.raises(ValueError):
        run_benchmark(continuous_scenario(), ["DML(Lasso)"], 1, seed=0)
