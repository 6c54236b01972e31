import math

import numpy as np
import pytest

from holomet.errors import ContractError
from holomet.metrics import (
    bracket,
    caratheodory_lower,
    certified_sup,
    convexity_modulus,
    curvature,
    infinitesimal_lower,
    inner_radius,
    kobayashi_upper,
    left_inverse,
    omega_c,
)
from holomet.solver import distance, solve, solve_tangent
from holomet.spaces import Lp, norm, vector
from oracles import hilbert_tanh_distance, polydisc_oracle

SQRT7_4 = math.atanh(math.sqrt(7) / 4)


# -- Caratheodory lower bound -----------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_lower_from_origin(p):
    y = vector([0.3, -0.2j, 0.1], p)
    est = caratheodory_lower(vector([0, 0, 0], p), y, trials=4)
    assert est.lower == pytest.approx(math.atanh(norm(y)), abs=1e-9)


def test_lower_trivial_and_polydisc():
    x = vector([0.2, 0.1], 2)
    assert caratheodory_lower(x, x).lower == 0
    a, b = np.array([0.3, -0.5j]), np.array([0.1j, 0.6])
    est = caratheodory_lower(vector(a, math.inf), vector(b, math.inf))
    assert est.lower == pytest.approx(polydisc_oracle(a, b), abs=1e-12)


def test_lower_closes_on_hilbert_pair():
    est = caratheodory_lower(vector([0.5, 0], 2), vector([0, 0.5], 2), trials=4)
    assert est.lower <= SQRT7_4 + 1e-12
    assert est.lower == pytest.approx(SQRT7_4, abs=1e-8)
    assert est.lower_witness["kind"] == "left_inverse"


def test_linear_functionals_alone_leave_a_gap():
    est = caratheodory_lower(vector([0.5, 0], 2), vector([0, 0.5], 2), trials=4, family=False)
    assert est.lower < SQRT7_4 - 1e-2


MIXED_X = [-0.1527947 + 0.27773974j, 0.53867578 + 0.13407526j]
MIXED_Y = [-0.3959591 - 0.41277897j, 0.17180977 + 0.18088722j]


def test_geodesic_hint_closes_mixed_pattern_pair():
    x, y = vector(MIXED_X, 1), vector(MIXED_Y, 1)
    g = solve(x, y)
    assert sorted(g.params.beta) == [0, 1]
    est = caratheodory_lower(x, y, hint=g.params)
    assert est.lower == pytest.approx(g.distance, abs=1e-9)
    assert est.lower <= g.distance + 1e-9


def test_inadmissible_hint_is_ignored():
    from holomet.family import GeodesicParams

    x, y = vector([0.4, 0], 1), vector([0, 0.4], 1)
    bad = GeodesicParams(Lp(2, 1), 0j, np.array([0, 0]), np.array([1, 1]), np.array([2.0, 2.0]))
    plain = caratheodory_lower(x, y, trials=4)
    hinted = caratheodory_lower(x, y, trials=4, hint=bad)
    assert hinted.lower == plain.lower


def test_left_inverse_inverts_the_geodesic():
    g = solve(vector([0.3, 0.2j], 1.5), vector([-0.1, 0.4], 1.5))
    zeta = np.array([0, 0.3, -0.5j, 0.2 + 0.6j])
    from holomet.family import eval_array

    found, _, res = left_inverse(g.params, eval_array(g.params, zeta))
    np.testing.assert_allclose(found, zeta, atol=1e-11)


# -- Kobayashi upper bound ----------------------------------------------------------

def test_upper_from_origin_is_exact():
    y = vector([0.3, 0.4j], 1.5)
    est = kobayashi_upper(vector([0, 0], 1.5), y)
    assert est.upper >= math.atanh(norm(y)) - 1e-12
    assert est.upper == pytest.approx(math.atanh(norm(y)), abs=1e-7)


def test_upper_degree_monotone_on_hilbert_pair():
    x, y = vector([0.5, 0], 2), vector([0, 0.5], 2)
    ups = [kobayashi_upper(x, y, degree=d).upper for d in (1, 3, 6)]
    assert all(u >= SQRT7_4 - 1e-9 for u in ups)
    assert ups[0] >= ups[1] - 1e-9 >= ups[2] - 2e-9
    assert ups[2] - SQRT7_4 < 1e-4


def test_upper_polydisc_closed_form():
    a, b = np.array([0.3, -0.5j]), np.array([0.1j, 0.6])
    assert kobayashi_upper(vector(a, math.inf), vector(b, math.inf)).upper == pytest.approx(polydisc_oracle(a, b))


def test_certified_sup_bounds_the_true_max():
    rng = np.random.default_rng(0)
    coef = rng.normal(size=(7, 3)) + 1j * rng.normal(size=(7, 3))
    space = Lp(3, 1.5)
    fine = np.exp(2j * np.pi * np.arange(1 << 16) / (1 << 16))
    true_max = np.max(np.sum(np.abs((fine[:, None] ** np.arange(7)) @ coef) ** 1.5, axis=1) ** (1 / 1.5))
    assert certified_sup(space, coef, samples=256) >= true_max


def test_bracket_p1_example():
    x, y = vector([0.4, 0], 1), vector([0, 0.4], 1)
    d = distance(x, y)
    est = bracket(x, y)
    assert est.lower <= d + 1e-9 <= est.upper + 2e-9
    assert est.gap < 1e-4


def test_bracket_hilbert_matches_oracle():
    x, y = vector([0.2, 0.3j, -0.1], 2), vector([-0.4, 0.1, 0.2j], 2)
    true = math.atanh(hilbert_tanh_distance(x.entries, y.entries))
    est = bracket(x, y, trials=4)
    assert est.lower - 1e-9 <= true <= est.upper + 1e-9
    assert est.gap < 1e-4


# -- convexity modulus -------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 2.0, 5.0])
def test_modulus_dimension_one(p):
    for eps in (0.5, 0.1, 0.01):
        assert convexity_modulus(Lp(1, p), eps).delta_value == pytest.approx(eps, abs=1e-10)


def test_modulus_hilbert_closed_form():
    # in the Euclidean ball the best disc is orthogonal to z: r^2 + (1 - eps)^2 = 1
    for eps in (0.2, 0.05):
        d = convexity_modulus(Lp(2, 2), eps, trials=6).delta_value
        assert d == pytest.approx(math.sqrt(2 * eps - eps**2), rel=1e-4)
        assert d <= math.sqrt(2 * eps - eps**2) + 1e-9


def test_inner_radius_exact_cases():
    sp = Lp(2, 1)
    # z on an axis, direction along the other axis: |z1| + r <= 1
    assert inner_radius(sp, np.array([0.6, 0]), np.array([0, 1])) == pytest.approx(0.4, abs=1e-12)
    assert inner_radius(Lp(2, 2), np.zeros(2), np.array([0.6, 0.8])) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ContractError):
        inner_radius(sp, np.zeros(2), np.zeros(2))


def test_modulus_monotone_in_epsilon():
    vals = [convexity_modulus(Lp(2, 1), e, trials=4).delta_value for e in (0.01, 0.05, 0.2)]
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9


def test_modulus_witness_is_feasible():
    m = convexity_modulus(Lp(2, 1), 0.05, trials=4)
    z, v = m.witness_z, m.witness_v
    assert 1 - np.sum(np.abs(z)) <= 0.05 + 1e-12
    ring = np.exp(2j * np.pi * np.arange(4096) / 4096)
    assert np.max(np.sum(np.abs(z + 0.999999 * m.witness_r * ring[:, None] * v), axis=1)) < 1


def test_sandwich_at_tenth():
    sp, eps = Lp(2, 1), 0.1
    w = omega_c(sp, eps, trials=6)
    assert convexity_modulus(sp, eps / 2, trials=6).delta_value <= w + 1e-6
    assert w <= 2 * convexity_modulus(sp, eps, trials=6).delta_value + 1e-6


def test_infinitesimal_lower_examples():
    assert infinitesimal_lower(vector([0], 2), vector([1], 2)) == pytest.approx(0.5)
    z, v = vector([0.5, 0.3], 1), vector([0.2, -0.1j], 1)
    b1 = infinitesimal_lower(z, v, trials=4)
    assert infinitesimal_lower(z, v * 3, trials=4) == pytest.approx(3 * b1, rel=1e-12)
    _, lam = solve_tangent(z, v)
    assert b1 <= 1 / lam


# -- curvature ----------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_curvature_disc_slice(p):
    assert curvature(vector([0], p), vector([1], p)) == pytest.approx(-4, abs=1e-6)


def test_curvature_hilbert_example():
    assert curvature(vector([0.2, 0.1], 2), vector([1, 1], 2)) == pytest.approx(-4, abs=5e-3)


def test_curvature_l1_generic():
    assert curvature(vector([0.3, -0.2j], 1), vector([0.5, 1 + 1j], 1)) == pytest.approx(-4, abs=1e-2)


def test_curvature_rejects_polydisc():
    with pytest.raises(ContractError):
        curvature(vector([0.1, 0], math.inf), vector([1, 0], math.inf))
