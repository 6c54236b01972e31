import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holomet.disc import poincare_distance
from holomet.errors import ContractError, DomainError, NonConvergence
from holomet.family import boundary_norm_deviation, constraint_residuals, eval_array
from holomet.solver import SolveConfig, distance, solve, solve_tangent, uniqueness_probe
from holomet.spaces import DualFunctional, Lp, dual_norm, project_head, vector
from oracles import hilbert_automorphism, hilbert_tanh_distance, lp_norm, random_point

PS = [1.0, 1.5, 2.0, 3.0]


# -- the independent Hilbert-ball oracle -------------------------------------------

def test_oracle_spot_value():
    assert hilbert_tanh_distance([0.5, 0], [0, 0.5]) == pytest.approx(math.sqrt(7) / 4, abs=1e-15)


def test_oracle_is_an_automorphism():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, z = random_point(rng, 3, 2), random_point(rng, 3, 2)
        assert np.linalg.norm(hilbert_automorphism(a, a)) < 1e-15
        assert np.linalg.norm(hilbert_automorphism(a, hilbert_automorphism(a, z)) - z) < 1e-13
        assert abs(np.linalg.norm(hilbert_automorphism(a, z)) - hilbert_tanh_distance(a, z)) < 1e-13
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert np.linalg.norm(hilbert_automorphism(a, w / np.linalg.norm(w))) == pytest.approx(1, abs=1e-13)


# -- examples ----------------------------------------------------------------------

def test_linear_case():
    g = solve(vector([0, 0], 3), vector([0.5, 0], 3))
    assert g.s == pytest.approx(0.5, abs=1e-12)
    assert g.distance == pytest.approx(math.atanh(0.5), abs=1e-12)
    np.testing.assert_allclose(eval_array(g.params, 0.3), [0.3, 0], atol=1e-10)


def test_hilbert_example():
    g = solve(vector([0.5, 0], 2), vector([0, 0.5], 2))
    assert g.s == pytest.approx(math.sqrt(7) / 4, abs=1e-10)


def test_normalisation_and_residuals():
    x, y = vector([0.4, 0], 1), vector([0, 0.4], 1)
    g = solve(x, y)
    np.testing.assert_allclose(eval_array(g.params, 0), x.entries, atol=1e-10)
    np.testing.assert_allclose(eval_array(g.params, g.s), y.entries, atol=1e-10)
    assert 0 < g.s < 1
    assert constraint_residuals(g.params).max_abs() < 1e-10
    assert g.residual_norm < 1e-10


def test_symmetry_and_continuity():
    x, y = vector([0.3, 0.2j, -0.1], 1.5), vector([-0.2, 0.1, 0.5], 1.5)
    assert abs(distance(x, y) - distance(y, x)) < 1e-8
    d = distance(vector([0.3, 0], 2), vector([0.3, 0.001], 2))
    assert 0 < d < 0.01


def test_errors():
    x = vector([0.3, 0.1], 2)
    with pytest.raises(ContractError):
        solve(x, x)
    with pytest.raises(DomainError):
        solve(x, vector([1.0, 0.2], 2))
    with pytest.raises(ContractError):
        solve(x, vector([0.3, 0.1], 3))
    with pytest.raises(ContractError):
        solve(vector([0.3, 0.1], math.inf), vector([0, 0.1], math.inf))
    with pytest.raises(ContractError):
        SolveConfig(tolerance=0)
    with pytest.raises(ContractError):
        SolveConfig(beta_strategy="guess")


def test_nonconvergence_carries_best_residual():
    cfg = SolveConfig(max_iterations=1, multistarts=1, beta_strategy="all_ones")
    with pytest.raises(NonConvergence) as info:
        solve(vector([0.5, 0.3j, 0.1], 1.5), vector([-0.4, 0.2, 0.5j], 1.5), cfg)
    assert info.value.best_residual > cfg.tolerance


@pytest.mark.parametrize("strategy", ["all_ones", "enumerate", "adaptive"])
def test_strategies_agree_generic(strategy):
    x, y = vector([0.3, 0.2j], 2), vector([-0.1, 0.4], 2)
    g = solve(x, y, SolveConfig(beta_strategy=strategy))
    assert g.s == pytest.approx(hilbert_tanh_distance(x.entries, y.entries), abs=1e-9)


@pytest.mark.parametrize("p", PS)
def test_determinism(p):
    rng = np.random.default_rng(5)
    x, y = vector(random_point(rng, 3, p), p), vector(random_point(rng, 3, p), p)
    a, b = solve(x, y), solve(x, y)
    assert a.s == b.s
    np.testing.assert_array_equal(a.params.c, b.params.c)


def test_shared_zero_coordinate():
    x, y = vector([0.3, 0, 0.2j], 1), vector([0, 0, -0.4], 1)
    g = solve(x, y)
    assert g.params.c[1] == 0
    assert boundary_norm_deviation(g.params) < 1e-8


# -- properties ----------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.0])
def test_origin_distance(p):
    rng = np.random.default_rng(int(p * 10))
    for _ in range(10):
        n = int(rng.integers(1, 5))
        z = random_point(rng, n, p)
        assert distance(vector(np.zeros(n), p), vector(z, p)) == pytest.approx(math.atanh(lp_norm(z, p)), abs=1e-9)


@pytest.mark.parametrize("p", PS)
def test_schwarz_pick_lower_bound(p):
    rng = np.random.default_rng(7)
    for _ in range(4):
        x, y = vector(random_point(rng, 3, p), p), vector(random_point(rng, 3, p), p)
        d = distance(x, y)
        for _ in range(25):
            f = rng.normal(size=3) + 1j * rng.normal(size=3)
            f = f / dual_norm(DualFunctional(x.space, f))
            assert poincare_distance(x.entries @ f, y.entries @ f) <= d + 1e-9


@pytest.mark.parametrize("p", PS)
def test_unimodular_invariance(p):
    rng = np.random.default_rng(11)
    for _ in range(4):
        x, y = random_point(rng, 3, p), random_point(rng, 3, p)
        u = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
        assert distance(vector(x * u, p), vector(y * u, p)) == pytest.approx(distance(vector(x, p), vector(y, p)), abs=1e-9)


@pytest.mark.parametrize("p", PS)
def test_projection_monotone(p):
    rng = np.random.default_rng(13)
    for _ in range(5):
        x, y = vector(random_point(rng, 4, p), p), vector(random_point(rng, 4, p), p)
        # the head lives in l^p_2; its tail is zero
        small = distance(vector(project_head(x, 2).entries[:2], p), vector(project_head(y, 2).entries[:2], p))
        assert small <= distance(x, y) + 1e-8


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(PS), st.integers(0, 10**6))
def test_distance_contracts_under_coordinate_projection(p, seed):
    rng = np.random.default_rng(seed)
    x, y = random_point(rng, 2, p), random_point(rng, 2, p)
    assert poincare_distance(x[0], y[0]) <= distance(vector(x, p), vector(y, p)) + 1e-9


# -- tangent mode and uniqueness -------------------------------------------------

@pytest.mark.parametrize("p", PS)
def test_tangent_mode_at_origin(p):
    v = vector([0.3, -0.4j], p)
    params, lam = solve_tangent(vector([0, 0], p), v)
    assert 1 / lam == pytest.approx(lp_norm(v.entries, p), rel=1e-10)


def test_tangent_mode_hilbert():
    # Euclidean ball: k(x, v)^2 = |v|^2 / (1 - |x|^2) + |<v, x>|^2 / (1 - |x|^2)^2
    x, v = np.array([0.2, 0.1j]), np.array([1.0, 1.0])
    params, lam = solve_tangent(vector(x, 2), vector(v, 2))
    s = 1 - np.vdot(x, x).real
    k = math.sqrt(np.vdot(v, v).real / s + abs(np.vdot(x, v)) ** 2 / s**2)
    assert 1 / lam == pytest.approx(k, rel=1e-10)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_uniqueness_generic(p):
    rng = np.random.default_rng(17)
    x, y = vector(random_point(rng, 3, p), p), vector(random_point(rng, 3, p), p)
    rep = uniqueness_probe(x, y, p, runs=6)
    assert not rep.partial
    assert rep.max_discrepancy < 1e-6


def test_uniqueness_shared_zero_p1():
    rep = uniqueness_probe(vector([0.3, 0, 0.1j], 1), vector([0, 0, -0.4], 1), 1.0, runs=6)
    assert rep.max_discrepancy < 1e-6 and not rep.partial


def test_uniqueness_from_origin_is_linear():
    y = vector([0.2, 0.3j], 1.5)
    rep = uniqueness_probe(vector([0, 0], 1.5), y, 1.5, runs=5)
    assert rep.max_discrepancy < 1e-8
    assert all(abs(d - math.atanh(lp_norm(y.entries, 1.5))) < 1e-9 for d in rep.distances)
