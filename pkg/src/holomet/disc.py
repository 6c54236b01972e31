"""Poincare disc primitives: distance, infinitesimal metric, automorphisms,
and the circle-mean Laplacian."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError

_CLAMP = 1.0 - 1e-15

#: radii used for the extrapolated generalised Laplacian
DEFAULT_RADII = (1e-2, 10 ** -2.5, 1e-3)


def _check_disc(z, name="z"):
    if not abs(z) < 1.0:
        raise DomainError(f"{name}={z!r} is not in the open unit disc")


def artanh(t: float) -> float:
    """Inverse hyperbolic tangent for t in [0, 1), clamped just below 1."""
    t = min(float(t), _CLAMP)
    return 0.5 * math.log((1.0 + t) / (1.0 - t))


def pseudo_hyperbolic(z: complex, w: complex) -> float:
    return abs((z - w) / (1.0 - w.conjugate() * z))


def poincare_distance(z: complex, w: complex) -> float:
    z, w = complex(z), complex(w)
    _check_disc(z, "z")
    _check_disc(w, "w")
    return artanh(pseudo_hyperbolic(z, w))


def poincare_infinitesimal(z: complex, v: complex) -> float:
    z = complex(z)
    _check_disc(z)
    return abs(v) / (1.0 - abs(z) ** 2)


@dataclass(frozen=True)
class MobiusMap:
    """The automorphism zeta -> exp(i*phase) (zeta - a) / (1 - conj(a) zeta)."""

    a: complex = 0j
    phase: float = 0.0

    def __post_init__(self):
        _check_disc(complex(self.a), "a")

    def __call__(self, z):
        return mobius_apply(self, z)

    def inverse(self) -> "MobiusMap":
        # inverse of e^{it} B_a is e^{-it}-rotated B_{-a e^{it}}
        rot = cmath.exp(1j * self.phase)
        return MobiusMap(-complex(self.a) * rot, -self.phase)


def mobius_apply(m: MobiusMap, z):
    """Apply ``m`` to a scalar or array of points in the closed disc."""
    a = complex(m.a)
    zz = np.asarray(z, dtype=complex)
    out = np.exp(1j * m.phase) * (zz - a) / (1.0 - np.conj(a) * zz)
    if out.ndim == 0:
        return complex(out)
    return out


def circle_mean_laplacian(
    u: Callable[[complex], float], z: complex, r: float, samples: int = 256
) -> float:
    """4/r^2 times (mean of u over the circle |w - z| = r minus u(z)).

    ``u`` is called on a numpy array of sample points when it accepts one,
    otherwise point by point.
    """
    if r <= 0 or samples < 1:
        raise ValueError("need r > 0 and samples >= 1")
    theta = 2.0 * np.pi * np.arange(samples) / samples
    pts = z + r * np.exp(1j * theta)
    try:
        vals = np.asarray(u(pts), dtype=float)
        if vals.shape != pts.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(u(w)) for w in pts])
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"non-finite sample at theta={theta[k]:.6g}", theta=float(theta[k]))
    centre = float(np.real(np.asarray(u(complex(z)))).reshape(-1)[0])
    if not math.isfinite(centre):
        raise EvaluationError("non-finite value at the centre", theta=None)
    return 4.0 / r**2 * (float(vals.mean()) - centre)


def richardson_laplacian(
    u: Callable[[complex], float],
    z: complex,
    radii: Sequence[float] = DEFAULT_RADII,
    samples: int = 256,
) -> float:
    """Generalised Laplacian as the r -> 0 limit of circle means.

    The error of the circle-mean quotient is a series in r^2, so the values
    at ``radii`` are combined by polynomial extrapolation in r^2 to r = 0.
    """
    h = np.array([r * r for r in radii])
    vals = np.array([circle_mean_laplacian(u, z, r, samples) for r in radii])
    # Neville's scheme evaluated at h = 0
    table = list(vals)
    n = len(table)
    for k in range(1, n):
        for i in range(n - k):
            table[i] = (h[i + k] * table[i] - h[i] * table[i + 1]) / (h[i + k] - h[i])
    return float(table[0])
