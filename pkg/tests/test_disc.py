import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holomet.disc import (
    artanh,
    MobiusMap,
    circle_mean_laplacian,
    mobius_apply,
    poincare_distance,
    poincare_infinitesimal,
    richardson_laplacian,
)
from holomet.errors import DomainError, EvaluationError


def disc_points(radius=0.95):
    return st.builds(
        lambda r, t: r * cmath.exp(1j * t),
        st.floats(0, radius),
        st.floats(0, 2 * math.pi),
    )


def test_distance_examples():
    assert poincare_distance(0, 0) == 0
    assert poincare_distance(0, 0.5) == pytest.approx(0.5493061443340549, abs=1e-15)
    assert poincare_distance(0.5, -0.5) == pytest.approx(math.log(3), abs=1e-14)


def test_distance_rejects_boundary():
    with pytest.raises(DomainError):
        poincare_distance(1.0, 0)
    with pytest.raises(DomainError):
        poincare_infinitesimal(1.2j, 1)


def test_distance_near_boundary_is_finite():
    d = poincare_distance(0, 1 - 2**-52)
    assert math.isfinite(d) and d > 17
    assert math.isfinite(artanh(1.0))


def test_infinitesimal_examples():
    assert poincare_infinitesimal(0, 1) == 1
    assert poincare_infinitesimal(0.5, 1) == pytest.approx(4 / 3, abs=1e-15)


@given(disc_points(), st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_infinitesimal_homogeneous(z, v):
    assert poincare_infinitesimal(z, 2 * v) == pytest.approx(2 * poincare_infinitesimal(z, v), rel=1e-13, abs=1e-300)


def test_mobius_examples():
    assert mobius_apply(MobiusMap(0, 0), 0.3 + 0.1j) == pytest.approx(0.3 + 0.1j)
    assert abs(mobius_apply(MobiusMap(0.5, 0), 0.5)) < 1e-16
    assert abs(mobius_apply(MobiusMap(0.5, 0), cmath.exp(1j * math.pi / 3))) == pytest.approx(1, abs=1e-15)


@settings(max_examples=300)
@given(disc_points(0.9), st.floats(0, 2 * math.pi), disc_points(), disc_points())
def test_mobius_invariance(a, phase, z, w):
    m = MobiusMap(a, phase)
    assert abs(poincare_distance(m(z), m(w)) - poincare_distance(z, w)) < 1e-12 * max(1, poincare_distance(z, w))


@given(disc_points(0.9), st.floats(0, 2 * math.pi), disc_points())
def test_mobius_inverse(a, phase, z):
    m = MobiusMap(a, phase)
    assert abs(m.inverse()(m(z)) - z) < 1e-12


@given(disc_points(), disc_points(), disc_points())
def test_triangle_inequality(a, b, c):
    assert poincare_distance(a, c) <= poincare_distance(a, b) + poincare_distance(b, c) + 1e-12


@given(disc_points(), disc_points())
def test_symmetric(a, b):
    assert poincare_distance(a, b) == pytest.approx(poincare_distance(b, a), rel=1e-12, abs=1e-15)


def test_laplacian_quadratic_exact():
    assert circle_mean_laplacian(lambda z: np.abs(z) ** 2, 0, 0.01) == pytest.approx(4, abs=1e-9)


def test_laplacian_harmonic():
    assert abs(circle_mean_laplacian(lambda z: np.real(z**3), 0.1 + 0.2j, 1e-2, 256)) < 1e-8
    assert abs(circle_mean_laplacian(lambda z: np.real(z), 0.3, 0.05)) < 1e-10


def test_laplacian_hyperbolic_log():
    u = lambda z: -np.log(1 - np.abs(z) ** 2)  # noqa: E731
    assert circle_mean_laplacian(u, 0, 1e-3) == pytest.approx(4, abs=1e-5)
    # analytic Laplacian 4 / (1 - |z|^2)^2
    z = 0.3 - 0.2j
    assert richardson_laplacian(u, z) == pytest.approx(4 / (1 - abs(z) ** 2) ** 2, rel=1e-8)


def test_laplacian_reports_failure_angle():
    with pytest.raises(EvaluationError) as info:
        circle_mean_laplacian(lambda z: np.where(np.real(z) < -0.5, np.nan, 0.0), 0, 0.9, 8)
    assert info.value.theta == pytest.approx(math.pi * 3 / 4)
