"""Two-sided estimates of the invariant distances and related quantities.

Lower bounds come from holomorphic maps of the ball into the disc: linear
functionals of dual norm one, and the left inverses of the explicit
geodesics. Upper bounds come from analytic discs: polynomial discs found by a
convex feasibility problem. None of this uses the endpoint solver, so the
resulting bracket is an independent check on it.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .disc import artanh, poincare_distance, pseudo_hyperbolic
from .errors import ContractError, DomainError, HolometError, PrecisionError
from .family import (
    constraint_residuals,
    eval_any,
    make_admissible,
    make_admissible_direct_sum,
    polydisc_distance,
)
from .spaces import (
    ComplexVector,
    DirectSum,
    DualFunctional,
    Lp,
    conjugate_exponent,
    dual_norm_array,
    norm,
    norm_array,
)
from .verify import dual_map_array

log = logging.getLogger(__name__)


@dataclass
class MetricEstimate:
    lower: float
    upper: float
    lower_witness: dict = field(default_factory=dict)
    upper_witness: dict = field(default_factory=dict)
    methods: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "lower_witness": self.lower_witness,
            "upper_witness": self.upper_witness,
            "methods": list(self.methods),
        }


def _check_pair(x, y):
    if x.space != y.space:
        raise ContractError("points must share one signature")
    for name, pt in (("x", x), ("y", y)):
        if not norm(pt) < 1:
            raise DomainError(f"{name} is not in the open unit ball")


def _is_polydisc(space):
    return isinstance(space, Lp) and math.isinf(space.p)


# -- left inverses of geodesics --------------------------------------------------------

_CAUCHY = np.exp(2j * np.pi * np.arange(16) / 16)
_SEARCH_RADII = np.array([0.0, 0.3, 0.55, 0.75, 0.87, 0.94, 0.97, 0.99, 0.997])


def _g_values(params, points, zeta):
    """G(zeta) = <z - phi(zeta), h(zeta)> for each point z; zeta has shape (N, K)."""
    phi = eval_any(params, zeta)
    h = dual_map_array(params, zeta, check=False)
    return np.sum((points[:, None, :] - phi) * h, axis=-1)


def _g_and_derivative(params, points, zeta):
    rad = np.minimum(1e-2, 0.5 * (1.0 - np.abs(zeta)))[:, None]
    ring = zeta[:, None] + rad * _CAUCHY[None, :]
    vals = _g_values(params, points, np.concatenate([zeta[:, None], ring], axis=1))
    g0 = vals[:, 0]
    dg = np.mean((vals[:, 1:] - g0[:, None]) * np.conj(_CAUCHY)[None, :], axis=1) / rad[:, 0]
    return g0, dg


def left_inverse(params, points, guess=None, tol=1e-14, max_iter=60):
    """The holomorphic retraction F of the ball onto the geodesic disc.

    F(z) is the unique zero in the unit disc of G(zeta) = <z - phi(zeta), h(zeta)>;
    uniqueness follows from the argument principle because on the circle
    G = zeta |1 - conj(gamma) zeta|^2 (<z, N> - 1) and Re <z, N> < 1.
    Returns (zeta, G'(zeta), |G(zeta)|); dF(z) xi = <xi, h(F(z))> / G'(F(z)).
    Points far outside the geodesic's reach can produce nan, which callers
    detect through the returned |G|.
    """
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        return _newton_zero(params, points, guess, tol, max_iter)


def _newton_zero(params, points, guess, tol, max_iter):
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    n_pts = pts.shape[0]
    if guess is None:
        theta = np.exp(2j * np.pi * np.arange(32) / 32)
        cand = np.concatenate([[0j], (_SEARCH_RADII[1:, None] * theta[None, :]).ravel()])
        vals = _g_values(params, pts, np.broadcast_to(cand, (n_pts, cand.size)))
        zeta = cand[np.argmin(np.abs(vals), axis=1)]
    else:
        zeta = np.broadcast_to(np.asarray(guess, dtype=complex), (n_pts,)).copy()
    for _ in range(max_iter):
        g, dg = _g_and_derivative(params, pts, zeta)
        step = g / dg
        new = zeta - step
        # stay inside the disc
        out = np.abs(new) >= 1.0
        while np.any(out):
            step = np.where(out, 0.5 * step, step)
            new = zeta - step
            out = np.abs(new) >= 1.0
        zeta = new
        if np.all(np.abs(step) < tol * 10):
            break
    g, dg = _g_and_derivative(params, pts, zeta)
    return zeta, dg, np.abs(g)


def left_inverse_metric(params, z, v):
    """Lower bound |dF(z) v| / (1 - |F(z)|^2) for the infinitesimal metric."""
    zeta, dg, _ = left_inverse(params, np.asarray(z, dtype=complex)[None, :])
    h = dual_map_array(params, zeta, check=False)[0]
    dfz = np.sum(np.asarray(v, dtype=complex) * h) / dg[0]
    return abs(dfz) / (1.0 - abs(zeta[0]) ** 2), complex(zeta[0])


# -- Caratheodory lower bound ------------------------------------------------------

def _unit_dual(space, g):
    return g / float(dual_norm_array(space, g))


def _linear_lower(x, y, trials, rng):
    """max rho(<x,f>, <y,f>) over dual-unit functionals f."""
    space = x.space
    xe, ye = x.entries, y.entries
    dim = xe.size

    def value(vec):
        g = vec[:dim] + 1j * vec[dim:]
        if not np.any(g):
            return 0.0
        f = _unit_dual(space, g)
        return pseudo_hyperbolic(complex(np.dot(xe, f)), complex(np.dot(ye, f)))

    starts = []
    for d in (ye - xe, ye, xe):
        if np.any(d):
            starts.append(np.conj(d))
    while len(starts) < max(trials, 1):
        starts.append(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    best, best_f = -1.0, None
    for g0 in starts[: max(trials, len(starts[:3]))]:
        v0 = np.concatenate([g0.real, g0.imag])
        res = optimize.minimize(lambda v: -value(v), v0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000 * dim})
        if -res.fun > best:
            best = -res.fun
            g = res.x[:dim] + 1j * res.x[dim:]
            best_f = _unit_dual(space, g)
    return best, best_f


def _family_builder(space, active):
    """Map free real parameters to admissible geodesic parameters.

    Free data per active coordinate: the zero location w (complex), a log
    weight and a phase. A zero inside the disc is a Blaschke zero (beta = 1);
    outside it is the zero 1/conj(alpha) of (1 - conj(alpha) zeta)^(2/p)
    (beta = 0). The two descriptions agree on the circle, so the map is
    continuous across it. Direct sums take two extra log block weights.
    """
    idx = np.flatnonzero(active)
    m = idx.size
    dim = space.dim

    def build(vec):
        w = vec[:m] + 1j * vec[m : 2 * m]
        logw = np.clip(vec[2 * m : 3 * m], -40, 40)
        phase = vec[3 * m : 4 * m]
        alpha = np.zeros(dim, dtype=complex)
        beta = np.zeros(dim, dtype=int)
        weights = np.zeros(dim)
        phases = np.zeros(dim)
        r = np.abs(w)
        inside = r < 1
        a = np.where(inside, w, 1.0 / np.conj(np.where(r > 0, w, 1.0)))
        ph = phase + np.where(inside, 0.0, np.angle(-w))
        alpha[idx], beta[idx] = a, inside.astype(int)
        weights[idx], phases[idx] = np.exp(logw), ph
        if isinstance(space, DirectSum):
            blocks = np.exp(np.clip(vec[4 * m : 4 * m + 2], -40, 40))
            return make_admissible_direct_sum(space, alpha, weights, phases, blocks, beta=beta)
        return make_admissible(space, alpha, weights, phases, beta)

    extra = 2 if isinstance(space, DirectSum) else 0
    return build, 4 * m + extra


def _start_from_functional(space, f, active, extra):
    """Free parameters of the linear disc zeta -> zeta u with N_u proportional to f."""
    if isinstance(space, Lp):
        q = conjugate_exponent(space.p)
        mag = np.abs(f)
        if math.isinf(q):
            u_mag = np.where(mag >= mag.max() * (1 - 1e-9), 1.0, 1e-3)
        else:
            u_mag = mag ** (q - 1.0)
        weights = u_mag ** space.p
    else:
        weights = np.abs(f) + 1e-3
    phases = -np.angle(f)
    sel = active
    m = int(sel.sum())
    vec = np.concatenate([np.zeros(2 * m), np.log(np.maximum(weights[sel], 1e-12)), phases[sel]])
    return np.concatenate([vec, np.zeros(extra)])


_PATTERN_LIMIT = 4
_SCREEN_ITER = 40


def _family_lower(x, y, f_start, trials, rng):
    space = x.space
    active = (np.abs(x.entries) > 0) | (np.abs(y.entries) > 0)
    build, nfree = _family_builder(space, active)
    pts = np.stack([x.entries, y.entries])
    extra = nfree - 4 * int(active.sum())
    state = {"guess": None}

    def value(vec, keep=False):
        try:
            params = build(vec)
            zeta, _, gres = left_inverse(params, pts, state["guess"])
        except (ArithmeticError, ValueError):
            return 0.0, None
        if not np.all(np.isfinite(zeta)) or np.max(gres) > 1e-9:
            zeta, _, gres = left_inverse(params, pts)
            if np.max(gres) > 1e-9:
                return 0.0, None
        if keep:
            state["guess"] = zeta
        return pseudo_hyperbolic(complex(zeta[0]), complex(zeta[1])), params

    starts = []
    m = int(active.sum())
    if f_start is not None:
        base = _start_from_functional(space, f_start, active, extra)
        starts.append(base)
        if m <= _PATTERN_LIMIT:
            # one start per beta pattern: a zero outside the circle is beta = 0,
            # and BFGS rarely carries a zero across the circle by itself
            for pattern in itertools.product((0, 1), repeat=m):
                if all(pattern):
                    continue
                v0 = base.copy()
                v0[:m] = np.where(np.array(pattern) == 0, 1.5, 0.0)
                starts.append(v0)
    while len(starts) < max(1, trials) + (1 if f_start is not None else 0):
        s0 = np.concatenate([
            rng.normal(scale=0.5, size=2 * m),
            rng.normal(size=m),
            rng.uniform(0, 2 * np.pi, size=m),
            rng.normal(size=extra),
        ])
        starts.append(s0)

    def run(v0, maxiter):
        state["guess"] = None
        res = optimize.minimize(lambda v: -value(v)[0], v0, method="BFGS",
                                options={"gtol": 1e-12, "maxiter": maxiter})
        return value(res.x)[0], res.x

    # short screen over all starts, then full runs from the two best
    screened = sorted((run(v0, _SCREEN_ITER) for v0 in starts), key=lambda t: -t[0])
    best, best_params = -1.0, None
    for _, v0 in screened[:2]:
        val, vec = run(v0, 400)
        params = value(vec)[1]
        if val > best and params is not None:
            best, best_params = val, params
    return best, best_params


def _hinted_lower(x, y, hint):
    """rho(F(x), F(y)) for the left inverse F of a given admissible geodesic."""
    try:
        if constraint_residuals(hint).max_abs() > 1e-9:
            return -1.0
        zeta, _, gres = left_inverse(hint, np.stack([x.entries, y.entries]))
    except (ArithmeticError, ValueError, HolometError):
        return -1.0
    if not np.all(np.isfinite(zeta)) or np.max(gres) > 1e-9:
        return -1.0
    return pseudo_hyperbolic(complex(zeta[0]), complex(zeta[1]))


def caratheodory_lower(x: ComplexVector, y: ComplexVector, trials: int = 32, seed: int = 0,
                       family: bool = True, hint=None) -> MetricEstimate:
    """A certified lower bound for the Caratheodory distance.

    Maximises rho(F(x), F(y)) over holomorphic F from the ball to the disc:
    first over linear functionals of dual norm one, then (``family=True``)
    over left inverses of the explicit geodesics, started from the best
    functional. An admissible ``hint`` geodesic (for instance a solver
    output) adds its own left inverse as a candidate; the bound stays valid
    whatever the hint is. The polydisc uses coordinate functionals, which
    are exact.
    """
    _check_pair(x, y)
    if np.array_equal(x.entries, y.entries):
        return MetricEstimate(0.0, math.inf, {"kind": "trivial"}, {}, ["identical points"])
    space = x.space
    if _is_polydisc(space):
        vals = [poincare_distance(a, b) for a, b in zip(x.entries, y.entries)]
        j = int(np.argmax(vals))
        f = np.zeros(space.n, dtype=complex)
        f[j] = 1.0
        wit = {"kind": "linear", "functional": DualFunctional(space, f).to_json()}
        return MetricEstimate(vals[j], math.inf, wit, {}, ["coordinate functional"])
    rng = np.random.default_rng(seed)
    n_lin = max(3, min(trials, 8))
    lin, f = _linear_lower(x, y, n_lin, rng)
    best = lin
    wit = {"kind": "linear", "functional": DualFunctional(space, f).to_json()}
    methods = ["linear functionals"]
    if family:
        fam, params = _family_lower(x, y, f, max(1, min(trials, 4)), rng)
        methods.append("geodesic left inverses")
        if fam > best:
            best = fam
            wit = {"kind": "left_inverse", "params": params.to_json()}
        elif params is not None:
            # kept so the upper bound can centre its discs on this geodesic
            wit["family_params"] = params.to_json()
    if hint is not None:
        val = _hinted_lower(x, y, hint)
        if val > best:
            best = val
            wit = {"kind": "left_inverse", "params": hint.to_json()}
        methods.append("hinted left inverse")
    return MetricEstimate(artanh(best), math.inf, wit, {}, methods)


# -- Kobayashi upper bound ---------------------------------------------------------

def _rows_pnorm_le(mags, p, bound):
    """Constraints |row_i|_p <= bound_i for a nonnegative (N, m) expression.

    General p goes through power cones: |s_ij| <= T_ij^(1/p) b_i^(1-1/p)
    with sum_j T_ij = b_i.
    """
    import cvxpy as cp

    rows, cols = mags.shape
    if math.isinf(p):
        return [mags <= cp.reshape(bound, (rows, 1), order="C") @ np.ones((1, cols))]
    if p == 1:
        return [cp.sum(mags, axis=1) <= bound]
    if p == 2:
        return [cp.norm(mags, 2, axis=1) <= bound]
    t = cp.Variable((rows, cols))
    b = cp.reshape(bound, (rows, 1), order="C") @ np.ones((1, cols))
    s = cp.Variable((rows, cols))
    return [
        mags <= s,
        cp.sum(t, axis=1) == bound,
        cp.PowCone3D(cp.vec(t, order="C"), cp.vec(b, order="C"), cp.vec(s, order="C"), 1.0 / p),
    ]


def _norm_constraints(space, mat, bound):
    """Constraints saying every row of ``mat`` has norm at most ``bound``."""
    import cvxpy as cp

    rows = mat.shape[0]
    if isinstance(space, Lp):
        return _rows_pnorm_le(cp.abs(mat), space.p, bound)
    s1, s2 = space.blocks()
    blk = cp.Variable((rows, 2))
    cons = _rows_pnorm_le(cp.abs(mat[:, s1]), space.p1, blk[:, 0])
    cons += _rows_pnorm_le(cp.abs(mat[:, s2]), space.p2, blk[:, 1])
    cons += _rows_pnorm_le(blk, space.r, bound)
    return cons


def _mobius_from(u, theta):
    """zeta -> M_u(e^{i theta} zeta), M_u(zeta) = (zeta + u) / (1 + conj(u) zeta)."""
    rot = np.exp(1j * theta)

    def m(zeta):
        zr = rot * np.asarray(zeta, dtype=complex)
        return (zr + u) / (1.0 + np.conj(u) * zr)

    return m


class _DiscProblem:
    """Smallest sampled boundary norm of a polynomial P of given degree with
    P(u) = x and P(w) = y, w = M_u(e^{i theta} t). The disc zeta -> P(M_u(e^{i theta} zeta))
    then passes through x at 0 and y at t.

    u and theta are fixed per problem; t enters as parameters of the linear
    interpolation constraints only, so the program is compiled once.
    """

    def __init__(self, x, y, degree, samples, u=0j, theta=0.0):
        import cvxpy as cp

        self.space = x.space
        self.x, self.y = x.entries, y.entries
        self.degree = degree
        self.u = complex(u)
        self.move = _mobius_from(self.u, theta)
        dim = self.x.size
        z = np.exp(2j * np.pi * np.arange(samples) / samples)
        powers = z[:, None] ** np.arange(degree + 1)[None, :]
        self.coef = cp.Variable((degree + 1, dim), complex=True)
        self.wrow = cp.Parameter(degree + 1, complex=True)
        self.bound = cp.Variable()
        urow = self.u ** np.arange(degree + 1)
        cons = [
            urow @ self.coef == self.x,
            self.wrow @ self.coef == self.y,
        ]
        cons += _norm_constraints(self.space, powers @ self.coef, self.bound * np.ones(samples))
        self.problem = cp.Problem(cp.Minimize(self.bound), cons)

    def solve(self, t):
        w = complex(self.move(t))
        self.wrow.value = w ** np.arange(self.degree + 1)
        try:
            self.problem.solve(solver="CLARABEL")
        except Exception:  # solver failure counts as infeasible
            return math.inf
        if self.problem.status not in ("optimal", "optimal_inaccurate"):
            return math.inf
        return float(self.bound.value)

    def polynomial(self):
        return np.array(self.coef.value)


def _poly_values(coef, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return (zeta[..., None] ** np.arange(coef.shape[0])) @ coef


def certified_sup(space, coef, radius=1.0, samples=1 << 17) -> float:
    """Upper bound for the max norm of a polynomial map on |zeta| = radius.

    Linear interpolation between samples stays in the ball scaled by the
    largest sampled norm (convexity); the interpolation error of a
    trigonometric polynomial of degree d is at most (h^2 / 8) d^2 sup|f|.
    """
    d = coef.shape[0] - 1
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = _poly_values(coef, radius * np.exp(1j * theta))
    top = float(np.max(norm_array(space, vals)))
    h = 2 * np.pi / samples
    return top / (1.0 - h * h * d * d / 8.0)


def _certify(prob, t, x, y):
    """Shrink the solution at t until its image is certified inside the ball.

    P(r zeta) is again a polynomial; it meets x and y at u / r and w / r, so
    the bound becomes the disc distance between those points.
    """
    coef = prob.polynomial()
    w = complex(prob.move(t))
    for r in (1.0, 1 - 1e-10, 1 - 1e-9, 1 - 1e-8, 1 - 1e-7, 1 - 1e-6, 1 - 1e-5, 1 - 1e-4, 1 - 1e-3):
        if max(abs(prob.u), abs(w)) >= r:
            break
        if certified_sup(x.space, coef, r) <= 1.0:
            scaled = coef * (r ** np.arange(coef.shape[0]))[:, None]
            uu, ww = prob.u / r, w / r
            err = max(np.max(np.abs(_poly_values(scaled, uu) - x.entries)),
                      np.max(np.abs(_poly_values(scaled, ww) - y.entries)))
            return poincare_distance(uu, ww), scaled, uu, ww, err
    raise ArithmeticError("disc could not be certified")


def _affine_fallback(x, y):
    """The affine disc through x and y if it fits; else the chain through 0."""
    d = y.entries - x.entries
    r = inner_radius(x.space, x.entries, d)
    if r >= 1.0:
        t = 1.0 / r
        return artanh(t), {"kind": "affine", "t": t}
    up = artanh(norm(x)) + artanh(norm(y))
    return up, {"kind": "chain through 0"}


def kobayashi_upper(x: ComplexVector, y: ComplexVector, degree: int = 6, trials: int = 32,
                    samples: int = 512, seed: int = 0, hint=None) -> MetricEstimate:
    """An upper bound for the Lempert function via polynomial discs.

    The discs are polynomials P of the given degree with P(u) = x and
    P(w) = y; the bound is rho(u, w). For fixed u and direction, the smallest
    achievable maximum boundary norm is a convex program in the coefficients
    and decreases along the direction, so the smallest feasible w is found by
    root bracketing. The resulting polynomial is certified on a fine grid.

    ``hint`` may be geodesic parameters (e.g. the lower-bound witness); the
    points u and w are then placed where the hint's left inverse sends x and
    y after moving its pole 1/conj(gamma) to infinity, which lets low-degree
    polynomials follow the extremal disc. Without a hint u = 0. The convex
    program needs no restarts; ``trials`` is accepted for interface
    compatibility.
    """
    del trials, seed
    _check_pair(x, y)
    if np.array_equal(x.entries, y.entries):
        return MetricEstimate(0.0, 0.0, {}, {"kind": "constant"}, ["identical points"])
    space = x.space
    if _is_polydisc(space):
        val = polydisc_distance(x, y)
        return MetricEstimate(-math.inf, val, {}, {"kind": "coordinatewise Mobius discs"},
                              ["closed form"])
    for a, b in ((x, y), (y, x)):
        if not np.any(a.entries):
            # the linear disc zeta -> zeta b / |b| is extremal
            return MetricEstimate(-math.inf, artanh(norm(b)), {}, {"kind": "linear"}, ["linear disc"])
    u, theta = 0j, 0.0
    if hint is not None:
        u, theta = _placement(hint, x, y)
    try:
        with warnings.catch_warnings():
            # inaccurate solves are harmless: the final disc is certified below
            warnings.simplefilter("ignore", UserWarning)
            up, wit = _polynomial_disc(x, y, degree, samples, u, theta)
        method = "convex polynomial discs"
    except (ArithmeticError, ValueError) as exc:
        log.info("polynomial disc search failed (%s); using fallback", exc)
        up, wit = _affine_fallback(x, y)
        method = "affine fallback"
    return MetricEstimate(-math.inf, up, {}, wit, [method])


def _polynomial_disc(x, y, degree, samples, u, theta):
    prob = _DiscProblem(x, y, degree, samples, u, theta)
    lo, hi = 1e-6, 1.0 - 1e-9
    if not prob.solve(hi) < 1:
        raise ArithmeticError("no feasible disc below t = 1")
    if prob.solve(lo) <= 1:
        t_star = lo
    else:
        t_star = optimize.brentq(lambda t: prob.solve(t) - 1.0, lo, hi, xtol=1e-12, rtol=1e-12)
    t_ok = t_star
    for k in range(40):
        if prob.solve(t_ok) <= 1.0:
            break
        t_ok = min(hi, t_star + 1e-12 * 2**k)
    up, coef, uu, ww, err = _certify(prob, t_ok, x, y)
    if err > 1e-9:
        raise ArithmeticError(f"interpolation error {err:.3g}")
    wit = {"kind": "polynomial", "degree": degree,
           "u": [uu.real, uu.imag], "w": [ww.real, ww.imag],
           "coefficients": [[[v.real, v.imag] for v in row] for row in coef]}
    return up, wit


def _placement(params, x, y):
    """u = m(F(x)) and the direction from u towards m(F(y)), m = M_{-gamma}."""
    zeta, _, _ = left_inverse(params, np.stack([x.entries, y.entries]))
    g = params.gamma
    m = (zeta - g) / (1.0 - np.conj(g) * zeta)
    u = complex(m[0])
    target = (m[1] - u) / (1.0 - np.conj(u) * m[1])
    return u, float(np.angle(target))


def bracket(x: ComplexVector, y: ComplexVector, degree: int = 6, trials: int = 32,
            seed: int = 0, geodesic=None) -> MetricEstimate:
    """Caratheodory lower bound and Kobayashi upper bound for one pair.

    ``geodesic`` (admissible parameters, e.g. ``solve(x, y).params``) seeds
    the lower bound; both bounds remain rigorous without trusting it.
    """
    lo = caratheodory_lower(x, y, trials, seed, hint=geodesic)
    hint = geodesic
    stored = lo.lower_witness.get("params") or lo.lower_witness.get("family_params")
    if hint is None and stored is not None:
        from .family import params_from_json

        hint = params_from_json(stored)
    up = kobayashi_upper(x, y, degree, trials, seed=seed, hint=hint)
    return MetricEstimate(lo.lower, up.upper, lo.lower_witness, up.upper_witness,
                          lo.methods + up.methods)


# -- complex convexity --------------------------------------------------------------

@dataclass
class ConvexityModulus:
    epsilon: float
    delta_value: float
    witness_z: np.ndarray
    witness_v: np.ndarray
    witness_r: float

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta_value,
            "witness": {
                "z": {"re": self.witness_z.real.tolist(), "im": self.witness_z.imag.tolist()},
                "v": {"re": self.witness_v.real.tolist(), "im": self.witness_v.imag.tolist()},
                "r": self.witness_r,
            },
        }


def _max_on_circle(space, z, v, r, phases):
    ring = np.exp(2j * np.pi * np.arange(phases) / phases)
    vals = z[None, :] + r * ring[:, None] * v[None, :]
    return float(np.max(norm_array(space, vals)))


def inner_radius(space, z, v, level: float = 1.0, phases: int = 128, tol: float = 1e-13) -> float:
    """sup r with |z + r e^{it} v| < level for all t.

    The max over t of a convex function of r is convex in r, so the feasible
    set is an interval and its endpoint is a simple root. Once the sampled
    max comes within 1e-3 of the level the phase grid is refined fourfold.
    """
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nv = float(norm_array(space, v))
    if nv == 0:
        raise ContractError("direction must be nonzero")
    if not float(norm_array(space, z)) < level:
        return 0.0

    def excess(r):
        m = _max_on_circle(space, z, v, r, phases)
        if abs(m - level) < 1e-3:
            m = _max_on_circle(space, z, v, r, 4 * phases)
        return m - level

    hi = 2.0 * level / nv
    return float(optimize.brentq(excess, 0.0, hi, xtol=tol * max(1.0, hi), rtol=1e-15))


def _unit(space, a):
    return a / float(norm_array(space, a))


def _from_reduced(vec, dim):
    """Coordinate rotations preserve the norm, so u may be taken with
    nonnegative entries and v with a real first entry."""
    u = np.abs(vec[:dim]).astype(complex)
    phase = np.concatenate([[0.0], vec[2 * dim :]])
    v = np.abs(vec[dim : 2 * dim]) * np.exp(1j * phase)
    return u, v


def _sup_over_directions(space, radius_of, trials, rng):
    """Maximise radius_of(u, v) over unit u, v by multistart Nelder-Mead."""
    dim = space.dim
    best = (-1.0, None, None)

    def objective(vec):
        u, v = _from_reduced(vec, dim)
        if not np.any(u) or not np.any(v):
            return 0.0
        return -radius_of(_unit(space, u), _unit(space, v))

    for _ in range(max(1, trials)):
        v0 = np.concatenate([rng.uniform(0.05, 1, size=2 * dim), rng.uniform(0, 2 * np.pi, size=dim - 1)])
        res = optimize.minimize(objective, v0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * dim})
        if -res.fun > best[0]:
            u, v = _from_reduced(res.x, dim)
            best = (-res.fun, _unit(space, u), _unit(space, v))
    return best


def _dimension_one(space):
    return space.dim == 1


def convexity_modulus(space, epsilon: float, trials: int = 16, seed: int = 0) -> ConvexityModulus:
    """delta(eps) = sup of the inner radius delta(z, v) over |v| = 1 and z with
    distance to the boundary at most eps.

    The inner radius only grows as z moves inward along a ray (convexity), so
    the sup is taken over |z| = 1 - eps.
    """
    if not 0 < epsilon <= 1:
        raise ContractError("epsilon must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    if epsilon == 1:
        v = _unit(space, np.ones(space.dim, dtype=complex))
        z = np.zeros(space.dim, dtype=complex)
        return ConvexityModulus(1.0, inner_radius(space, z, v), z, v, 1.0)

    def radius_of(u, v):
        return inner_radius(space, (1.0 - epsilon) * u, v, tol=1e-10)

    if _dimension_one(space):
        u = np.ones(1, dtype=complex)
        r = inner_radius(space, (1 - epsilon) * u, u)
        return ConvexityModulus(epsilon, r, (1 - epsilon) * u, u, r)
    _, u, v = _sup_over_directions(space, radius_of, trials, rng)
    z = (1.0 - epsilon) * u
    r = inner_radius(space, z, v, phases=2048)
    return ConvexityModulus(epsilon, r, z, v, r)


def omega_c(space, epsilon: float, trials: int = 16, seed: int = 0) -> float:
    """sup |y| over unit x and y with |x + zeta y| <= 1 + eps for |zeta| <= 1."""
    if not epsilon > 0:
        raise ContractError("epsilon must be positive")
    rng = np.random.default_rng(seed)

    def radius_of(u, v):
        return inner_radius(space, u, v, level=1.0 + epsilon, tol=1e-10)

    if _dimension_one(space):
        u = np.ones(1, dtype=complex)
        return inner_radius(space, u, u, level=1.0 + epsilon)
    _, u, v = _sup_over_directions(space, radius_of, trials, rng)
    return inner_radius(space, u, v, level=1.0 + epsilon, phases=2048)


def infinitesimal_lower(z: ComplexVector, v: ComplexVector, trials: int = 16, seed: int = 0) -> float:
    """|v| / (2 delta(eps)) with eps = 1 - |z|, a lower bound for the
    infinitesimal Caratheodory metric."""
    nz = norm(z)
    if not nz < 1:
        raise DomainError("z is not in the open unit ball")
    nv = norm(v)
    if nv == 0:
        raise ContractError("direction must be nonzero")
    eps = 1.0 - nz
    return nv / (2.0 * convexity_modulus(z.space, eps, trials, seed).delta_value)


def modulus_sweep(space, epsilons, trials: int = 16, seed: int = 0) -> list[dict]:
    """Rows (epsilon, delta, omega_c, slope so far) for a sweep of epsilons."""
    rows = []
    logs = []
    for eps in epsilons:
        d = convexity_modulus(space, eps, trials, seed).delta_value
        w = omega_c(space, eps, trials, seed)
        logs.append((math.log(eps), math.log(d)))
        slope = float(np.polyfit(*zip(*logs), 1)[0]) if len(logs) > 1 else float("nan")
        rows.append({"epsilon": eps, "delta": d, "omega_c": w, "slope": slope})
    return rows


def fitted_slope(epsilons, deltas) -> float:
    return float(np.polyfit(np.log(epsilons), np.log(deltas), 1)[0])


# -- curvature -----------------------------------------------------------------------

_BRACKET_POINTS = 8


def curvature(x: ComplexVector, v: ComplexVector, config=None, radii=None,
              samples: int = 256, gap_tol: float = 1e-6) -> float:
    """Holomorphic sectional curvature of the Kobayashi metric at (x, v).

    Builds the extremal disc f with f(0) = x, f'(0) = v / k(x, v), takes
    u(z) = log k^2(f(z), f'(z)) with k evaluated by a bracket (lower: the
    derivative of the left inverse, upper: the disc itself), and divides the
    extrapolated circle-mean Laplacian of u at 0 by -2 k^2(x, f'(0)).
    """
    from .disc import DEFAULT_RADII, richardson_laplacian
    from .solver import solve_tangent
    from .family import derivative_array

    space = x.space
    if not isinstance(space, Lp) or math.isinf(space.p):
        raise ContractError("curvature needs an l^p signature with p < inf")
    params, _ = solve_tangent(x, v, config)

    def k_bracket(zs):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        pts = eval_any(params, zs)
        tang = derivative_array(params, zs)
        zeta, dg, _ = left_inverse(params, pts, guess=zs)
        h = dual_map_array(params, zeta, check=False)
        dfz = np.sum(tang * h, axis=-1) / dg
        lower = np.abs(dfz) / (1.0 - np.abs(zeta) ** 2)
        upper = 1.0 / (1.0 - np.abs(zs) ** 2)
        return lower, upper

    probe = 0.3 * np.exp(2j * np.pi * np.arange(_BRACKET_POINTS) / _BRACKET_POINTS)
    lo, up = k_bracket(np.concatenate([[0j], probe]))
    gap = float(np.max(np.abs(up - lo)))
    if gap > gap_tol:
        raise PrecisionError(f"metric bracket did not close (gap {gap:.3g})")

    def u(zs):
        lo, up = k_bracket(zs)
        return np.log((0.5 * (lo + up)) ** 2)

    lap = richardson_laplacian(u, 0j, radii or DEFAULT_RADII, samples)
    k0 = 0.5 * (lo[0] + up[0])
    return lap / (-2.0 * k0 * k0)

