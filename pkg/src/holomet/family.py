"""The explicit family of complex geodesics of l^p balls and of l^r sums of
two l^p spaces, plus the polydisc distance.

A coordinate of an l^p geodesic is

    phi_j(z) = c_j * B_j(z)**beta_j * ((1 - conj(a_j) z) / (1 - conj(g) z))**(2/p)

with B_j the Blaschke factor vanishing at a_j. Boundary norms are identically
one exactly when

    sum_j |c_j|^p (1 + |a_j|^2) = 1 + |g|^2   and   sum_j |c_j|^p a_j = g.

All powers use the principal branch. For |z| <= 1, |a| <= 1 and |g| < 1 both
1 - conj(a) z and 1 - conj(g) z lie in the closed disc of radius one about 1,
so each has argument in [-pi/2, pi/2] and the principal powers are continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .disc import poincare_distance
from .errors import ContractError, DomainError, EvaluationError, InadmissibleParams, InvariantViolation
from .spaces import ComplexVector, DirectSum, Lp, norm_array, signature_from_json

ADMISSIBLE_TOL = 1e-8
_ZETA_SLACK = 1e-12


def _as_complex_array(a):
    return np.atleast_1d(np.asarray(a, dtype=complex))


@dataclass(frozen=True, eq=False)
class GeodesicParams:
    space: Lp
    gamma: complex
    alpha: np.ndarray
    beta: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if not isinstance(self.space, Lp) or math.isinf(self.space.p):
            raise ContractError("geodesic parameters need an l^p signature with p < inf")
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "alpha", _as_complex_array(self.alpha))
        object.__setattr__(self, "c", _as_complex_array(self.c))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=int)))
        n = self.space.n
        if not (self.alpha.size == self.beta.size == self.c.size == n):
            raise ContractError(f"parameter arrays must all have length {n}")
        if not abs(self.gamma) < 1:
            raise InvariantViolation(f"|gamma| must be < 1, got {abs(self.gamma)!r}")
        if np.any(np.abs(self.alpha) > 1 + 1e-14):
            raise InvariantViolation("|alpha_j| must be <= 1")
        if not np.all((self.beta == 0) | (self.beta == 1)):
            raise InvariantViolation("beta_j must be 0 or 1")
        if np.any((self.beta == 1) & (np.abs(self.alpha) >= 1)):
            raise InvariantViolation("beta_j = 1 requires |alpha_j| < 1")

    @property
    def p(self) -> float:
        return self.space.p

    @property
    def n(self) -> int:
        return self.space.n

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "gamma": [self.gamma.real, self.gamma.imag],
            "alpha": [[a.real, a.imag] for a in self.alpha],
            "beta": [int(b) for b in self.beta],
            "c": [[v.real, v.imag] for v in self.c],
        }

    @classmethod
    def from_json(cls, d: dict) -> "GeodesicParams":
        def cx(pair):
            return complex(pair[0], pair[1])

        alpha = [cx(a) for a in d["alpha"]]
        return cls(
            Lp(len(alpha), float(d["p"])),
            cx(d["gamma"]),
            alpha,
            d["beta"],
            [cx(v) for v in d["c"]],
        )


@dataclass(frozen=True)
class ConstraintResiduals:
    scalar_residual: float
    vector_residual: complex
    block_residuals: tuple = ()
    degenerate_blocks: tuple = ()

    def max_abs(self) -> float:
        vals = [abs(self.scalar_residual), abs(self.vector_residual)]
        vals += [abs(b) for b in self.block_residuals]
        return max(vals)

    def to_json(self) -> dict:
        out = {
            "scalar": self.scalar_residual,
            "vector": [self.vector_residual.real, self.vector_residual.imag],
        }
        if self.block_residuals:
            out["blocks"] = [abs(b) for b in self.block_residuals]
            out["degenerate_blocks"] = list(self.degenerate_blocks)
        return out


# -- evaluation --------------------------------------------------------------

def _check_zeta(z):
    if np.any(np.abs(z) > 1 + _ZETA_SLACK):
        raise DomainError("zeta must lie in the closed unit disc")


def _coordinate_values(c, alpha, beta, gamma, expo, z):
    """c * B^beta * (1 - conj(alpha) z)^expo * (1 - conj(gamma) z)^-expo.

    ``z`` has shape (m, 1); parameter arrays broadcast along the last axis.
    """
    num = 1.0 - np.conj(alpha) * z
    den = 1.0 - np.conj(gamma) * z
    if np.any(den.real <= 0) or np.any(num.real < -1e-12):
        raise EvaluationError("principal-branch precondition failed (Re <= 0)")
    vals = c * num**expo * den ** (-expo)
    if np.any(beta == 1):
        blaschke = np.where(beta == 1, (z - alpha) / np.where(beta == 1, num, 1.0), 1.0)
        vals = vals * blaschke
    return vals


def eval_array(params: GeodesicParams, zeta) -> np.ndarray:
    """Values of the geodesic at an array of points; shape zeta.shape + (n,)."""
    z = np.asarray(zeta, dtype=complex)
    _check_zeta(z)
    flat = z.reshape(-1, 1)
    vals = _coordinate_values(
        params.c, params.alpha, params.beta, params.gamma, 2.0 / params.p, flat
    )
    return vals.reshape(z.shape + (params.n,))


def eval(params: GeodesicParams, zeta: complex) -> ComplexVector:  # noqa: A001
    return ComplexVector(params.space, eval_array(params, complex(zeta)))


def derivative_array(params: GeodesicParams, zeta) -> np.ndarray:
    """Complex derivative d/dzeta of the geodesic; same shape as eval_array."""
    z = np.asarray(zeta, dtype=complex)
    _check_zeta(z)
    flat = z.reshape(-1, 1)
    a, g, c, b = params.alpha, params.gamma, params.c, params.beta
    expo = 2.0 / params.p
    num = 1.0 - np.conj(a) * flat
    den = 1.0 - np.conj(g) * flat
    w_pow = num**expo * den ** (-expo)
    blaschke = np.where(b == 1, (flat - a) / num, 1.0)
    phi = c * blaschke * w_pow
    # d/dz log W = conj(g)/(1 - conj(g) z) - conj(a)/(1 - conj(a) z)
    with np.errstate(divide="ignore", invalid="ignore"):
        dlogw = np.conj(g) / den - np.where(num != 0, np.conj(a) / num, 0.0)
    out = phi * expo * dlogw
    db = (1.0 - np.abs(a) ** 2) / num**2
    out = out + np.where(b == 1, c * w_pow * db, 0.0)
    return out.reshape(z.shape + (params.n,))


def is_nonconstant(params) -> bool:
    """Some coordinate with c != 0 has beta = 1 or alpha != gamma."""
    gam = params.gamma if isinstance(params, GeodesicParams) else None
    if gam is None:
        gam = _direct_sum_gamma_per_coordinate(params)
    active = np.abs(params.c) > 0
    moving = (params.beta == 1) | (np.abs(params.alpha - gam) > 1e-14)
    if isinstance(params, DirectSumGeodesicParams):
        # the outer factor moves the block unless gamma_i == gamma
        outer = np.abs(gam - params.gamma) > 1e-14
        moving = moving | outer
    return bool(np.any(active & moving))


def constraint_values(params: GeodesicParams):
    """Signed (scalar, complex) constraint defects used by the solver."""
    w = np.abs(params.c) ** params.p
    s = float(np.sum(w * (1.0 + np.abs(params.alpha) ** 2)) - (1.0 + abs(params.gamma) ** 2))
    v = complex(np.sum(w * params.alpha) - params.gamma)
    return s, v


def constraint_residuals(params: GeodesicParams) -> ConstraintResiduals:
    s, v = constraint_values(params)
    return ConstraintResiduals(abs(s), v)


def canonicalize(params: GeodesicParams) -> GeodesicParams:
    """Coordinates with c_j = 0 get alpha_j = gamma and beta_j = 0."""
    dead = np.abs(params.c) == 0
    if not dead.any():
        return params
    alpha = np.where(dead, params.gamma, params.alpha)
    beta = np.where(dead, 0, params.beta)
    return replace(params, alpha=alpha, beta=beta, c=np.where(dead, 0, params.c))


def _boundary_grid(samples):
    theta = 2.0 * np.pi * np.arange(samples) / samples
    return theta, np.exp(1j * theta)


def boundary_norm_deviation(params, samples: int = 512) -> float:
    _, z = _boundary_grid(samples)
    vals = eval_any(params, z)
    return float(np.max(np.abs(norm_array(params.space, vals) - 1.0)))


def boundary_trace(params: GeodesicParams, samples: int, tol: float = ADMISSIBLE_TOL):
    """List of (theta, phi(e^{i theta}), norm) on an equispaced grid.

    Raises InadmissibleParams (carrying the residuals) unless the constraints
    hold to ``tol``.
    """
    res = residuals_any(params)
    if res.max_abs() >= tol:
        raise InadmissibleParams(
            f"parameters are not admissible (max residual {res.max_abs():.3g})", res
        )
    theta, z = _boundary_grid(samples)
    vals = eval_any(params, z)
    norms = norm_array(params.space, vals)
    return [
        (float(t), ComplexVector(params.space, v), float(nv))
        for t, v, nv in zip(theta, vals, norms)
    ]


def admissible_weights(alpha, weights):
    """Rescale nonnegative weights w so that (b) and (c) hold.

    Returns (gamma, scaled weights). With A = sum w (1+|a|^2) and G = sum w a,
    the scale t solves |G|^2 t^2 - A t + 1 = 0; A >= 2|G| guarantees a real
    root, and the smaller one gives |gamma| = t|G| <= 1.
    """
    alpha = _as_complex_array(alpha)
    w = np.asarray(weights, dtype=float)
    big_a = float(np.sum(w * (1.0 + np.abs(alpha) ** 2)))
    big_g = complex(np.sum(w * alpha))
    if big_a <= 0:
        raise ContractError("weights must not all vanish")
    disc = max(big_a * big_a - 4.0 * abs(big_g) ** 2, 0.0)
    t = 2.0 / (big_a + math.sqrt(disc))
    return t * big_g, t * w


def make_admissible(space: Lp, alpha, weights, phases, beta=None) -> GeodesicParams:
    """Admissible parameters from free data: Blaschke zeros, |c|^p weights, phases."""
    alpha = _as_complex_array(alpha)
    gamma, w = admissible_weights(alpha, weights)
    c = w ** (1.0 / space.p) * np.exp(1j * np.asarray(phases, dtype=float))
    if beta is None:
        beta = np.where(np.abs(alpha) < 1, 1, 0)
    return canonicalize(GeodesicParams(space, gamma, alpha, beta, c))


def linear_geodesic(u: ComplexVector) -> GeodesicParams:
    """zeta -> zeta * u for a unit vector u."""
    space = u.space
    nz = np.abs(u.entries) > 0
    return canonicalize(
        GeodesicParams(space, 0j, np.zeros(space.n), nz.astype(int), u.entries)
    )


# -- direct sums ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DirectSumGeodesicParams:
    space: DirectSum
    gamma: complex
    gamma_i: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if not isinstance(self.space, DirectSum):
            raise ContractError("direct-sum parameters need a DirectSum signature")
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "gamma_i", _as_complex_array(self.gamma_i))
        object.__setattr__(self, "alpha", _as_complex_array(self.alpha))
        object.__setattr__(self, "c", _as_complex_array(self.c))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=int)))
        n = self.space.dim
        if not (self.alpha.size == self.beta.size == self.c.size == n):
            raise ContractError(f"parameter arrays must all have length {n}")
        if self.gamma_i.size != 2:
            raise ContractError("gamma_i needs one entry per block")
        if not abs(self.gamma) < 1 or np.any(np.abs(self.gamma_i) >= 1):
            raise InvariantViolation("|gamma| and |gamma_i| must be < 1")
        if np.any(np.abs(self.alpha) > 1 + 1e-14):
            raise InvariantViolation("|alpha_ij| must be <= 1")
        if not np.all((self.beta == 0) | (self.beta == 1)):
            raise InvariantViolation("beta_ij must be 0 or 1")
        if np.any((self.beta == 1) & (np.abs(self.alpha) >= 1)):
            raise InvariantViolation("beta_ij = 1 requires |alpha_ij| < 1")

    def exponents(self) -> np.ndarray:
        s = self.space
        return np.concatenate([np.full(s.n1, s.p1), np.full(s.n2, s.p2)])

    def block_scales(self) -> np.ndarray:
        """c_i = ((1/(1+|g_i|^2)) sum_j |c_ij|^p_i (1+|a_ij|^2))^(1/p_i)."""
        out = np.zeros(2)
        for i, (sl, p) in enumerate(zip(self.space.blocks(), (self.space.p1, self.space.p2))):
            tot = np.sum(np.abs(self.c[sl]) ** p * (1.0 + np.abs(self.alpha[sl]) ** 2))
            out[i] = (tot / (1.0 + abs(self.gamma_i[i]) ** 2)) ** (1.0 / p)
        return out

    def to_json(self) -> dict:
        s = self.space
        return {
            "space": s.to_json(),
            "gamma": [self.gamma.real, self.gamma.imag],
            "gamma_i": [[g.real, g.imag] for g in self.gamma_i],
            "alpha": [[a.real, a.imag] for a in self.alpha],
            "beta": [int(b) for b in self.beta],
            "c": [[v.real, v.imag] for v in self.c],
        }

    @classmethod
    def from_json(cls, d: dict) -> "DirectSumGeodesicParams":
        def cx(pair):
            return complex(pair[0], pair[1])

        return cls(
            signature_from_json(d["space"]),
            cx(d["gamma"]),
            [cx(g) for g in d["gamma_i"]],
            [cx(a) for a in d["alpha"]],
            d["beta"],
            [cx(v) for v in d["c"]],
        )


def _direct_sum_gamma_per_coordinate(params: DirectSumGeodesicParams) -> np.ndarray:
    s = params.space
    return np.concatenate([np.full(s.n1, params.gamma_i[0]), np.full(s.n2, params.gamma_i[1])])


def eval_direct_sum_array(params: DirectSumGeodesicParams, zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=complex)
    _check_zeta(z)
    flat = z.reshape(-1, 1)
    gi = _direct_sum_gamma_per_coordinate(params)
    inner = _coordinate_values(
        params.c, params.alpha, params.beta, gi, 2.0 / params.exponents(), flat
    )
    outer = _coordinate_values(1.0, gi, np.zeros_like(params.beta), params.gamma,
                               2.0 / params.space.r, flat)
    return (inner * outer).reshape(z.shape + (params.space.dim,))


def eval_direct_sum(params: DirectSumGeodesicParams, zeta: complex) -> ComplexVector:
    return ComplexVector(params.space, eval_direct_sum_array(params, complex(zeta)))


def direct_sum_residuals(params: DirectSumGeodesicParams) -> ConstraintResiduals:
    """Residuals of the three block relations.

    scalar: c1^r (1+|g1|^2) + c2^r (1+|g2|^2) - (1+|g|^2)
    vector: c1^r g1 + c2^r g2 - g
    blocks: sum_j |c_ij|^p_i a_ij - g_i c_i^p_i, for each non-degenerate block
    """
    s = params.space
    ci = params.block_scales()
    r = s.r
    scalar = float(np.sum(ci**r * (1.0 + np.abs(params.gamma_i) ** 2)) - (1.0 + abs(params.gamma) ** 2))
    vec = complex(np.sum(ci**r * params.gamma_i) - params.gamma)
    blocks, degenerate = [], []
    for i, (sl, p) in enumerate(zip(s.blocks(), (s.p1, s.p2))):
        if ci[i] == 0:
            degenerate.append(i)
            continue
        blocks.append(complex(np.sum(np.abs(params.c[sl]) ** p * params.alpha[sl]) - params.gamma_i[i] * ci[i] ** p))
    return ConstraintResiduals(abs(scalar), vec, tuple(blocks), tuple(degenerate))


def make_admissible_direct_sum(space: DirectSum, alpha, weights, phases, block_weights,
                               block_gammas=None, beta=None) -> DirectSumGeodesicParams:
    """Admissible direct-sum parameters from free data.

    Each block is first normalised like an l^p_i geodesic (which fixes gamma_i
    unless ``block_gammas`` is given, in which case the block weights are only
    scaled), then the outer weights c_i^r are normalised with the same
    quadratic, treating gamma_i as the Blaschke zeros of the outer problem.
    """
    alpha = _as_complex_array(alpha)
    w = np.asarray(weights, dtype=float)
    c = np.zeros(space.dim, dtype=complex)
    gam_i = np.zeros(2, dtype=complex)
    for i, (sl, p) in enumerate(zip(space.blocks(), (space.p1, space.p2))):
        g, wi = admissible_weights(alpha[sl], w[sl])
        gam_i[i] = g
        c[sl] = wi ** (1.0 / p)
    gamma, outer = admissible_weights(gam_i, block_weights)
    for i, (sl, p) in enumerate(zip(space.blocks(), (space.p1, space.p2))):
        c[sl] = c[sl] * outer[i] ** (1.0 / space.r)
    c = c * np.exp(1j * np.asarray(phases, dtype=float))
    if beta is None:
        beta = np.where(np.abs(alpha) < 1, 1, 0)
    return DirectSumGeodesicParams(space, gamma, gam_i, alpha, beta, c)


# -- dispatch helpers ------------------------------------------------------------

def eval_any(params, zeta) -> np.ndarray:
    if isinstance(params, DirectSumGeodesicParams):
        return eval_direct_sum_array(params, zeta)
    return eval_array(params, zeta)


def residuals_any(params) -> ConstraintResiduals:
    if isinstance(params, DirectSumGeodesicParams):
        return direct_sum_residuals(params)
    return constraint_residuals(params)


def params_from_json(d: dict):
    if "gamma_i" in d:
        return DirectSumGeodesicParams.from_json(d)
    return GeodesicParams.from_json(d)


# -- polydisc ----------------------------------------------------------------------

def polydisc_distance(x: ComplexVector, y: ComplexVector) -> float:
    """Distance in the unit polydisc: the largest coordinatewise Poincare distance."""
    xe, ye = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    if xe.shape != ye.shape:
        raise ContractError("points must have the same dimension")
    if np.any(np.abs(xe) >= 1) or np.any(np.abs(ye) >= 1):
        raise DomainError("point outside the open polydisc")
    return max(poincare_distance(a, b) for a, b in zip(xe, ye))
