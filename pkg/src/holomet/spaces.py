"""Finite-dimensional complex l^p spaces, their l^r direct sums, and the
bilinear dual pairing.

Vectors are thin wrappers around a complex numpy array tagged with the space
they live in. The pairing is complex *bilinear*, <x, f> = sum_j x_j f_j, so the
supporting functional of a unit vector x is |x_j|^(p-2) conj(x_j) rather than
its conjugate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractError, DomainError

UNIT_TOL = 1e-10


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_exponent(p, allow_inf=True):
    if math.isinf(p):
        if not allow_inf:
            raise ContractError("p = inf is not allowed here")
        return
    if not p >= 1:
        raise ContractError(f"exponent must be >= 1, got {p}")


@dataclass(frozen=True)
class Lp:
    """Signature of l^p_n; ``p`` may be ``math.inf`` (the polydisc)."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("dimension must be >= 1")
        _check_exponent(self.p)

    @property
    def dim(self) -> int:
        return self.n

    def to_json(self) -> dict:
        return {"kind": "lp", "n": self.n, "p": _exp_to_json(self.p)}


@dataclass(frozen=True)
class DirectSum:
    """Signature of l^p1_n1 (+)_r l^p2_n2."""

    p1: float
    n1: int
    p2: float
    n2: int
    r: float

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ContractError("dimensions must be >= 1")
        for e in (self.p1, self.p2, self.r):
            _check_exponent(e, allow_inf=False)

    @property
    def dim(self) -> int:
        return self.n1 + self.n2

    def blocks(self):
        """Index slices of the two summands."""
        return slice(0, self.n1), slice(self.n1, self.n1 + self.n2)

    def to_json(self) -> dict:
        return {
            "kind": "direct_sum",
            "p1": self.p1,
            "n1": self.n1,
            "p2": self.p2,
            "n2": self.n2,
            "r": self.r,
        }


SpaceSignature = Union[Lp, DirectSum]


def _exp_to_json(p):
    return "inf" if math.isinf(p) else p


def _exp_from_json(p):
    return math.inf if p in ("inf", "Infinity", None) else float(p)


def signature_from_json(d: dict) -> SpaceSignature:
    if d.get("kind", "lp") == "lp":
        return Lp(int(d["n"]), _exp_from_json(d["p"]))
    return DirectSum(
        float(d["p1"]), int(d["n1"]), float(d["p2"]), int(d["n2"]), float(d["r"])
    )


class _Tagged:
    __slots__ = ("space", "entries")

    def __init__(self, space: SpaceSignature, entries):
        arr = np.array(entries, dtype=complex).reshape(-1)
        if arr.size != space.dim:
            raise ContractError(
                f"{type(self).__name__} needs {space.dim} entries, got {arr.size}"
            )
        self.space = space
        self.entries = arr

    def __len__(self):
        return self.entries.size

    def __iter__(self):
        return iter(self.entries)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.space == self.space
            and np.array_equal(other.entries, self.entries)
        )

    def __repr__(self):
        return f"{type(self).__name__}({self.space}, {self.entries.tolist()})"

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict):
        entries = np.asarray(d["re"], float) + 1j * np.asarray(d["im"], float)
        return cls(signature_from_json(d["space"]), entries)


class ComplexVector(_Tagged):
    """A point of C^n carrying the norm it is measured in."""

    __slots__ = ()

    def with_entries(self, entries) -> "ComplexVector":
        return ComplexVector(self.space, entries)

    def __add__(self, other):
        return self.with_entries(self.entries + _entries(other))

    def __sub__(self, other):
        return self.with_entries(self.entries - _entries(other))

    def __mul__(self, scalar):
        return self.with_entries(self.entries * scalar)

    __rmul__ = __mul__


class DualFunctional(_Tagged):
    """Element of the dual acting by the bilinear pairing."""

    __slots__ = ()


def _entries(x):
    return x.entries if isinstance(x, _Tagged) else np.asarray(x, dtype=complex)


def vector(entries, p: float = 2.0) -> ComplexVector:
    """Convenience constructor for l^p_n with n = len(entries)."""
    arr = np.asarray(entries, dtype=complex).reshape(-1)
    return ComplexVector(Lp(arr.size, p), arr)


# -- norms -----------------------------------------------------------------

def lp_norm(a: np.ndarray, p: float, axis=-1) -> np.ndarray:
    """The l^p norm of complex arrays along ``axis`` (vectorised helper)."""
    m = np.abs(a)
    if math.isinf(p):
        return m.max(axis=axis)
    if p == 1:
        return m.sum(axis=axis)
    if p == 2:
        return np.sqrt((m * m).sum(axis=axis))
    # scale first so that large exponents do not underflow
    top = m.max(axis=axis, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return np.squeeze(safe, axis=axis) * ((m / safe) ** p).sum(axis=axis) ** (1.0 / p)


def norm_array(space: SpaceSignature, a: np.ndarray) -> np.ndarray:
    """Norm of the last axis of ``a`` in ``space``; leading axes broadcast."""
    if isinstance(space, Lp):
        return lp_norm(a, space.p)
    s1, s2 = space.blocks()
    b1 = lp_norm(a[..., s1], space.p1)
    b2 = lp_norm(a[..., s2], space.p2)
    return lp_norm(np.stack([b1, b2], axis=-1), space.r)


def dual_norm_array(space: SpaceSignature, a: np.ndarray) -> np.ndarray:
    if isinstance(space, Lp):
        return lp_norm(a, conjugate_exponent(space.p))
    s1, s2 = space.blocks()
    b1 = lp_norm(a[..., s1], conjugate_exponent(space.p1))
    b2 = lp_norm(a[..., s2], conjugate_exponent(space.p2))
    return lp_norm(np.stack([b1, b2], axis=-1), conjugate_exponent(space.r))


def norm(x: ComplexVector) -> float:
    return float(norm_array(x.space, x.entries))


def dual_norm(f: DualFunctional) -> float:
    return float(dual_norm_array(f.space, f.entries))


def pairing(x, f) -> complex:
    """Bilinear pairing <x, f> = sum_j x_j f_j (no conjugation)."""
    xe, fe = _entries(x), _entries(f)
    if xe.shape != fe.shape:
        raise ContractError(f"dimension mismatch: {xe.size} vs {fe.size}")
    sx, sf = getattr(x, "space", None), getattr(f, "space", None)
    if sx is not None and sf is not None and sx != sf:
        raise ContractError("vector and functional belong to different spaces")
    return complex(np.dot(xe, fe))


# -- supporting functionals ------------------------------------------------

def lp_support_entries(a: np.ndarray, p: float) -> np.ndarray:
    """|a|^(p-2) conj(a) with the convention 0^(p-2) * 0 = 0; a has unit norm."""
    m = np.abs(a)
    out = np.zeros_like(a)
    nz = m > 0
    if p == 1:
        out[nz] = np.conj(a[nz]) / m[nz]
    else:
        out[nz] = m[nz] ** (p - 2.0) * np.conj(a[nz])
    return out


def support_functional(x: ComplexVector) -> DualFunctional:
    """A norm-one N_x with <x, N_x> = 1 and Re <y, N_x> < 1 on the open ball."""
    space = x.space
    nx = norm(x)
    if abs(nx - 1.0) > UNIT_TOL:
        raise ContractError(f"support functional needs a unit vector, |x| = {nx!r}")
    a = x.entries / nx
    if isinstance(space, Lp):
        if math.isinf(space.p):
            raise ContractError("support functionals for p = inf are not provided")
        return DualFunctional(space, lp_support_entries(a, space.p))
    out = np.zeros_like(a)
    for sl, p in zip(space.blocks(), (space.p1, space.p2)):
        blk = a[sl]
        b = float(lp_norm(blk, p))
        if b > 0:
            out[sl] = b ** (space.r - 1.0) * lp_support_entries(blk / b, p)
    return DualFunctional(space, out)


def support_entries_array(space: SpaceSignature, a: np.ndarray) -> np.ndarray:
    """Vectorised N_x for unit vectors stacked along the leading axes of ``a``.

    Each row is renormalised first, as in ``support_functional``.
    """
    a = np.asarray(a, dtype=complex)
    a = a / norm_array(space, a)[..., None]
    if isinstance(space, Lp):
        if math.isinf(space.p):
            raise ContractError("support functionals for p = inf are not provided")
        return lp_support_entries(a, space.p)
    out = np.zeros_like(a)
    for sl, p in zip(space.blocks(), (space.p1, space.p2)):
        blk = a[..., sl]
        b = lp_norm(blk, p)[..., None]
        safe = np.where(b > 0, b, 1.0)
        out[..., sl] = np.where(b > 0, safe ** (space.r - 1.0) * lp_support_entries(blk / safe, p), 0)
    return out


def project_head(x: ComplexVector, n: int) -> ComplexVector:
    """Zero every entry past index ``n`` (the natural projection onto l^p_n)."""
    if not 0 <= n <= x.space.dim:
        raise ContractError(f"cannot project a {x.space.dim}-vector onto {n} coordinates")
    out = x.entries.copy()
    out[n:] = 0
    return x.with_entries(out)


def check_in_ball(x: ComplexVector, name="x"):
    if not norm(x) < 1.0:
        raise DomainError(f"{name} is not in the open unit ball (norm {norm(x)!r})")
