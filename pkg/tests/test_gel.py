import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import el_three_point_t, etel_three_point_u, grid_oracle

from bdml import _pykernels
from bdml.errors import InfeasibleMoment
from bdml.gel import (
    EL,
    ETEL,
    HD,
    DivergenceSpec,
    check_feasibility,
    cr_divergence,
    log_profile_likelihood,
    log_profile_path,
    solve_weights,
)
from bdml.score import ScoreComponents

# Frozen from the closed-form roots in tests/oracles.py.
EL3_T = 0.4342585459106649
EL3_WEIGHTS = (0.58919729, 0.23240812, 0.17839459)
EL3_LOG_PROFILE = -3.712011906152761
ETEL3_U = 0.6572981061383758
ETEL3_WEIGHTS = (0.58274365, 0.25176904, 0.16548731)

psi_vectors = arrays(float, st.integers(2, 8), elements=st.floats(-50, 50, allow_nan=False))
magnitudes = st.lists(st.floats(1e-2, 50), min_size=1, max_size=4)


@st.composite
def feasible_psi(draw):
    """Mixed-sign vectors with no zero entries, in shuffled order."""
    neg = [-v for v in draw(magnitudes)]
    pos = draw(magnitudes)
    return np.array(draw(st.permutations(neg + pos)))


def test_frozen_values_match_oracles():
    assert EL3_T == pytest.approx(el_three_point_t(), abs=1e-15)
    assert ETEL3_U == pytest.approx(etel_three_point_u(), abs=1e-12)


def test_divergence_spec_parsing():
    assert DivergenceSpec.parse("el") == EL
    assert DivergenceSpec.parse("ETEL") == ETEL
    assert DivergenceSpec.parse(-0.5) == HD
    assert DivergenceSpec.parse("0.5").name == "CR(0.5)"
    with pytest.raises(ValueError):
        DivergenceSpec(float("inf"))


def test_feasibility_examples():
    assert check_feasibility([-1, 2]).feasible
    assert not check_feasibility([1, 2, 3]).feasible
    assert check_feasibility([0, 0, 0]).feasible


@pytest.mark.parametrize("div", ["EL", "ETEL", "HD", 0.5])
def test_all_zero_gives_uniform(div):
    sol = solve_weights(np.zeros(5), div)
    np.testing.assert_array_equal(sol.weights, np.full(5, 0.2))
    assert sol.log_profile == pytest.approx(-5 * math.log(5))


@pytest.mark.parametrize("div", ["EL", "ETEL", "HD"])
def test_two_point_forcing(div, backend):
    sol = solve_weights(np.array([-1.0, 2.0]), div)
    np.testing.assert_allclose(sol.weights, [2 / 3, 1 / 3], atol=1e-10)


def test_el_three_point(backend):
    sol = solve_weights(np.array([-1.0, 1.0, 2.0]), "EL")
    assert sol.t == pytest.approx(EL3_T, abs=1e-10)
    assert sol.s == pytest.approx(0.0, abs=1e-10)
    np.testing.assert_allclose(sol.weights, EL3_WEIGHTS, atol=1e-8)
    assert sol.log_profile == pytest.approx(EL3_LOG_PROFILE, abs=1e-10)
    assert max(sol.residuals) <= 1e-10


def test_etel_three_point(backend):
    sol = solve_weights(np.array([-1.0, 1.0, 2.0]), "ETEL")
    assert math.exp(sol.t) == pytest.approx(ETEL3_U, abs=1e-10)
    np.testing.assert_allclose(sol.weights, ETEL3_WEIGHTS, atol=1e-8)


def test_infeasible_raises_and_profile_is_minus_inf():
    with pytest.raises(InfeasibleMoment):
        solve_weights(np.array([1.0, 2.0, 3.0]), "EL")
    sc = ScoreComponents([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    assert log_profile_likelihood(sc, 0.0, "EL") == -math.inf


def test_boundary_concentrates_mass():
    sol = solve_weights(np.array([0.0, 1.0, 2.0]), "EL")
    np.testing.assert_array_equal(sol.weights, [1.0, 0.0, 0.0])
    assert sol.log_profile == -math.inf


def test_cr_divergence_examples():
    p = np.array([2 / 3, 1 / 3])
    assert cr_divergence(p, "EL") == pytest.approx(-2 * (math.log(4 / 3) + math.log(2 / 3)))
    assert cr_divergence(p, "EL") == pytest.approx(0.235566, abs=1e-6)
    etel = 2 * 2 * ((2 / 3) * math.log(4 / 3) + (1 / 3) * math.log(2 / 3))
    assert cr_divergence(p, "ETEL") == pytest.approx(etel, abs=1e-12)
    assert cr_divergence(p, "ETEL") == pytest.approx(0.226532, abs=1e-6)
    for lam in (0.0, -1.0, -0.5, 0.5, 2.0):
        assert cr_divergence(np.full(4, 0.25), lam) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        cr_divergence([0.0, 1.0], "EL")


def test_log_profile_examples():
    sc = ScoreComponents(np.zeros(6), np.ones(6) * 0.0)
    assert log_profile_likelihood(sc, 3.0, "HD") == pytest.approx(-6 * math.log(6))
    sc3 = ScoreComponents([-1.0, 1.0, 2.0], [0.0, 0.0, 0.0])
    assert log_profile_likelihood(sc3, 0.0, "EL") == pytest.approx(EL3_LOG_PROFILE, abs=1e-10)


def test_log_profile_path_matches_pointwise(rng):
    a, b = rng.normal(size=40) + 1.0, rng.uniform(0.5, 1.5, size=40)
    sc = ScoreComponents(a, b)
    betas = np.linspace(-1, 3, 41)
    path = log_profile_path(sc, betas, "EL")
    point = [log_profile_likelihood(sc, x, "EL") for x in betas]
    np.testing.assert_allclose(path, point, rtol=1e-9)


def test_profile_peaks_near_z_root(rng):
    a, b = rng.normal(size=60) + 0.5, rng.uniform(0.5, 1.5, size=60)
    sc = ScoreComponents(a, b)
    root = a.sum() / b.sum()
    at_root = log_profile_likelihood(sc, root, "EL")
    assert at_root == pytest.approx(-60 * math.log(60), abs=1e-9)
    for off in (0.3, -0.3, 1.0, -1.0):
        assert log_profile_likelihood(sc, root + off, "EL") < at_root


@pytest.mark.parametrize("lam", [0.0, -1.0, -0.5, 0.5])
def test_grid_oracle_small_cases(lam, rng):
    for _ in range(5):
        psi = rng.normal(size=4)
        if not psi.min() < 0 < psi.max():
            continue
        sol = solve_weights(psi, lam)
        assert cr_divergence(sol.weights, lam) <= grid_oracle(psi, lam) + 1e-6


@settings(max_examples=150, deadline=None)
@given(feasible_psi(), st.sampled_from([0.0, -1.0, -0.5, 0.5, -2.0, 1.0]))
def test_solution_invariants(psi, lam):
    sol = solve_weights(psi, lam)
    n = len(psi)
    assert sol.converged
    assert max(sol.residuals) <= 1e-8
    if lam in (0.0, -1.0, -0.5):
        assert np.all(sol.weights > 0)
    else:
        # other members of the family may put zero mass on some points
        assert np.all(sol.weights >= 0)
    assert sol.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert sol.log_profile <= -n * math.log(n) + 1e-9


@settings(max_examples=100, deadline=None)
@given(feasible_psi(), st.floats(1e-3, 1e3), st.sampled_from([0.0, -1.0, -0.5]))
def test_scale_invariance(psi, c, lam):
    w1 = solve_weights(psi, lam).weights
    w2 = solve_weights(c * psi, lam).weights
    np.testing.assert_allclose(w1, w2, atol=1e-8)


def test_etel_is_exponential_tilt(rng):
    psi = rng.normal(size=7)
    psi[0], psi[1] = -1.0, 1.0
    sol = solve_weights(psi, "ETEL")
    logw = np.log(sol.weights)
    slope = np.polyfit(psi, logw, 1)[0]
    np.testing.assert_allclose(logw, np.polyval(np.polyfit(psi, logw, 1), psi), atol=1e-10)
    assert slope == pytest.approx(sol.t, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(psi_vectors, st.sampled_from([0.0, -1.0, -0.5, 0.5]))
def test_compiled_and_python_kernels_agree(psi, lam):
    from bdml._backend import BACKEND, kernels

    if BACKEND != "compiled":
        return
    psi = np.ascontiguousarray(psi)
    c = kernels.gel_solve(psi, lam, 0.0, 200)
    p = _pykernels.gel_solve(psi, lam, 0.0, 200)
    assert c[0] == p[0]
    if c[0] == 0:
        assert c[6] == pytest.approx(p[6], rel=1e-10, abs=1e-10)
