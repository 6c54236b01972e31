"""Independent reference values, computed without the package's solver.

The Hilbert ball oracle uses the automorphism of the Euclidean unit ball
that moves a to 0: the invariant distance between a and b is
artanh |phi_a(b)| with

    |phi_a(b)|^2 = 1 - (1 - |a|^2)(1 - |b|^2) / |1 - <b, a>|^2.
"""

import math

import numpy as np


def hilbert_tanh_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    inner = np.vdot(a, b)  # sum conj(a) b
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    val = 1.0 - (1.0 - na) * (1.0 - nb) / abs(1.0 - inner) ** 2
    return math.sqrt(max(val, 0.0))


def hilbert_automorphism(a, z):
    """phi_a(z) for the Euclidean unit ball (Rudin's normal form)."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    na = np.vdot(a, a).real
    if na == 0:
        return -z
    s = math.sqrt(1.0 - na)
    pz = a * np.vdot(a, z) / na
    return (a - pz - s * (z - pz)) / (1.0 - np.vdot(a, z))


def polydisc_oracle(x, y) -> float:
    return max(math.atanh(abs((a - b) / (1 - np.conj(b) * a))) for a, b in zip(x, y))


def lp_norm(a, p) -> float:
    a = np.abs(np.asarray(a, dtype=complex))
    if math.isinf(p):
        return float(a.max())
    return float(np.sum(a**p) ** (1.0 / p))


def random_point(rng, n, p, radius=None):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    r = rng.uniform(0.05, 0.9) if radius is None else radius
    return a * (r / lp_norm(a, p))
