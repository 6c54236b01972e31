"""Endpoint solver: the normalized complex geodesic through two points of an
l^p_n ball, and with it the Caratheodory (= Kobayashi) distance.

The unknowns are gamma, the Blaschke zeros alpha_j, the coefficients c_j and
the parameter s with phi(0) = x and phi(s) = y. With the two constraint
equations this is a square real system of size 4m + 3 (m = number of
coordinates that are not identically zero). It is solved by Levenberg-Marquardt
with an analytic Jacobian built from Wirtinger derivatives.

gamma and alpha_j are carried through the chart u -> u / sqrt(1 + |u|^2) of the
open disc, and s = tanh(sigma^2), so iterates can never leave the admissible
region. beta is fixed during a run; under the ``adaptive`` strategy a
coordinate whose zero is driven to the unit circle is moved to the other
branch (at |alpha| = 1 the two branches agree after c -> -alpha c) and the run
is resumed.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disc import artanh
from .errors import ContractError, EvaluationError, NonConvergence
from .family import GeodesicParams, canonicalize, eval_array
from .spaces import ComplexVector, Lp, check_in_ball, norm, norm_array

log = logging.getLogger(__name__)

BETA_STRATEGIES = ("all_ones", "enumerate", "adaptive")
_FLIP_RADIUS = 0.999
_RUNAWAY_CHART = 1e4
_MAX_FLIPS = 6
_ENUMERATE_LIMIT = 12
_ENUMERATE_JITTER_LIMIT = 6
_POLISH_BELOW = 1e-2
_POLISH_FACTOR = 20
_HOMOTOPY_FIRST = 0.25
_HOMOTOPY_MIN_STEP = 1e-4
_HOMOTOPY_MAX_STEPS = 400
_HOMOTOPY_FLIP_RADIUS = 0.99


@dataclass
class SolveConfig:
    tolerance: float = 1e-10
    max_iterations: int = 200
    multistarts: int = 16
    beta_strategy: str = "adaptive"
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ContractError("tolerance must be positive")
        if self.multistarts < 1:
            raise ContractError("multistarts must be >= 1")
        if self.beta_strategy not in BETA_STRATEGIES:
            raise ContractError(f"beta_strategy must be one of {BETA_STRATEGIES}")


@dataclass
class NormalizedGeodesic:
    params: GeodesicParams
    s: float
    x: ComplexVector
    y: ComplexVector
    residual_norm: float
    start: int = 0
    iterations: int = 0

    @property
    def distance(self) -> float:
        return artanh(self.s)

    def to_json(self) -> dict:
        out = self.params.to_json()
        out.update(
            s=self.s,
            distance=self.distance,
            residual=self.residual_norm,
            x=self.x.to_json(),
            y=self.y.to_json(),
        )
        return out


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("HOLOMET_THREADS", "1")))
    except ValueError:
        return 1


# -- chart ------------------------------------------------------------------

def _chart(u):
    rho = 1.0 + np.abs(u) ** 2
    z = u / np.sqrt(rho)
    g_u = (1.0 + 0.5 * np.abs(u) ** 2) * rho**-1.5
    g_ub = -0.5 * u * u * rho**-1.5
    return z, g_u, g_ub


def _chart_inverse(z):
    z = np.asarray(z, dtype=complex)
    return z / np.sqrt(np.maximum(1.0 - np.abs(z) ** 2, 1e-300))


def _realify(dz, dzb):
    """Real Jacobian columns (d/dRe, d/dIm) from Wirtinger derivatives."""
    return dz + dzb, 1j * (dz - dzb)


# -- residual system -----------------------------------------------------------

class _System:
    """Residual map and Jacobian for one fixed beta pattern.

    mode 'points': second block of equations is phi(s) = y.
    mode 'tangent': second block is phi'(0) = lam * v with lam = exp(sigma) > 0.
    """

    def __init__(self, x, target, p, active, beta, mode="points"):
        self.x = x[active]
        self.target = target[active]
        self.p = p
        self.m = int(active.sum())
        self.beta = np.asarray(beta, dtype=int)
        self.mode = mode

    # v = [u_g.re, u_g.im, u_a.re (m), u_a.im (m), c.re (m), c.im (m), sigma]
    def unpack(self, v):
        m = self.m
        ug = complex(v[0], v[1])
        ua = v[2 : 2 + m] + 1j * v[2 + m : 2 + 2 * m]
        c = v[2 + 2 * m : 2 + 3 * m] + 1j * v[2 + 3 * m : 2 + 4 * m]
        sig = v[-1]
        return ug, ua, c, sig

    def pack(self, gamma, alpha, c, scalar):
        ug = complex(_chart_inverse(gamma))
        ua = _chart_inverse(alpha)
        if self.mode == "points":
            sig = math.sqrt(artanh(scalar))
        else:
            sig = math.log(scalar)
        return np.concatenate([[ug.real, ug.imag], ua.real, ua.imag, c.real, c.imag, [sig]])

    def scalar(self, sig):
        return math.tanh(sig * sig) if self.mode == "points" else math.exp(sig)

    def decode(self, v):
        ug, ua, c, sig = self.unpack(v)
        g = complex(_chart(ug)[0])
        a = _chart(ua)[0]
        return g, a, c, self.scalar(sig)

    def residual(self, v, with_jacobian=False):
        p, m, beta = self.p, self.m, self.beta
        ug, ua, c, sig = self.unpack(v)
        g, g_u, g_ub = _chart(ug)
        a, a_u, a_ub = _chart(ua)
        g = complex(g)
        e = 2.0 / p
        b1 = beta == 1
        neg_a_pow = np.where(b1, -a, 1.0)  # (-alpha)^beta

        # phi(0) = c (-a)^beta
        f0 = c * neg_a_pow - self.x

        if self.mode == "points":
            s = math.tanh(sig * sig)
            num = 1.0 - np.conj(a) * s
            den = 1.0 - np.conj(g) * s
            if np.any(num.real <= 0) or den.real <= 0:
                raise EvaluationError("branch precondition failed")
            wpow = num**e * den**-e
            blas = np.where(b1, (s - a) / num, 1.0)
            q1 = blas * wpow
            phi_s = c * q1
            f1 = phi_s - self.target
        else:
            if abs(sig) > 300:
                raise EvaluationError("metric scale out of range")
            lam = math.exp(sig)
            tcoef = np.where(b1, 1.0 - np.abs(a) ** 2, 0.0) + e * neg_a_pow * (np.conj(g) - np.conj(a))
            f1 = c * tcoef - lam * self.target

        w = np.abs(c) ** p
        sres = float(np.sum(w * (1.0 + np.abs(a) ** 2)) - (1.0 + abs(g) ** 2))
        vres = complex(np.sum(w * a) - g)

        res = np.concatenate([f0.real, f0.imag, f1.real, f1.imag, [sres, vres.real, vres.imag]])
        if not with_jacobian:
            return res

        # complex outputs: f0 (m), f1 (m), V; real output S.
        # Wirtinger derivatives w.r.t. gamma, alpha_j, c_j and the real sigma.
        K = 2 * m + 1
        nv = 4 * m + 3
        jac_c = np.zeros((K, nv), dtype=complex)
        jac_s = np.zeros(nv)
        idx = np.arange(m)

        def put(rows, col_re, col_im, dz, dzb, chart=None):
            if chart is not None:
                z_u, z_ub = chart
                dz, dzb = dz * z_u + dzb * np.conj(z_ub), dz * z_ub + dzb * np.conj(z_u)
            cre, cim = _realify(dz, dzb)
            jac_c[rows, col_re] = cre
            jac_c[rows, col_im] = cim

        cols_ar = 2 + idx
        cols_ai = 2 + m + idx
        cols_cr = 2 + 2 * m + idx
        cols_ci = 2 + 3 * m + idx

        # f0
        put(idx, cols_cr, cols_ci, neg_a_pow, np.zeros(m))
        put(idx, cols_ar, cols_ai, np.where(b1, -c, 0.0), np.zeros(m), (a_u, a_ub))

        rows1 = m + idx
        if self.mode == "points":
            put(rows1, cols_cr, cols_ci, q1, np.zeros(m))
            d_a = np.where(b1, -c * wpow / num, 0.0)
            d_ab = phi_s * s * (beta - e) / num
            put(rows1, cols_ar, cols_ai, d_a, d_ab, (a_u, a_ub))
            d_gb = phi_s * e * s / den
            dz, dzb = np.zeros(m), d_gb
            dz, dzb = dz * g_u + dzb * np.conj(g_ub), dz * g_ub + dzb * np.conj(g_u)
            jac_c[rows1, 0], jac_c[rows1, 1] = _realify(dz, dzb)
            # d phi(s)/ds times ds/dsigma
            db = (1.0 - np.abs(a) ** 2) / num**2
            dphi = phi_s * e * (np.conj(g) / den - np.conj(a) / num) + np.where(b1, c * wpow * db, 0.0)
            jac_c[rows1, -1] = dphi * 2.0 * sig * (1.0 - s * s)
        else:
            put(rows1, cols_cr, cols_ci, tcoef, np.zeros(m))
            d_a = np.where(b1, c * (-np.conj(a) - e * (np.conj(g) - np.conj(a))), 0.0)
            d_ab = c * (np.where(b1, -a, 0.0) - e * neg_a_pow)
            put(rows1, cols_ar, cols_ai, d_a, d_ab, (a_u, a_ub))
            d_gb = c * e * neg_a_pow
            dz, dzb = np.zeros(m), d_gb
            dz, dzb = dz * g_u + dzb * np.conj(g_ub), dz * g_ub + dzb * np.conj(g_u)
            jac_c[rows1, 0], jac_c[rows1, 1] = _realify(dz, dzb)
            jac_c[rows1, -1] = -lam * self.target

        # |c|^p derivatives; c != 0 on active coordinates
        absc = np.abs(c)
        dw_dc = 0.5 * p * np.where(absc > 0, absc ** (p - 2.0), 0.0) * np.conj(c)
        dw_dcb = np.conj(dw_dc)
        # V = sum w a - g
        rv = 2 * m
        cre, cim = _realify(dw_dc * a, dw_dcb * a)
        jac_c[rv, cols_cr], jac_c[rv, cols_ci] = cre, cim
        dz, dzb = w, np.zeros(m)
        dz, dzb = dz * a_u + dzb * np.conj(a_ub), dz * a_ub + dzb * np.conj(a_u)
        jac_c[rv, cols_ar], jac_c[rv, cols_ai] = _realify(dz, dzb)
        dz, dzb = -1.0 * g_u, -1.0 * g_ub
        jac_c[rv, 0], jac_c[rv, 1] = _realify(dz, dzb)
        # S = sum w (1+|a|^2) - (1+|g|^2)
        cre, cim = _realify(dw_dc * (1 + np.abs(a) ** 2), dw_dcb * (1 + np.abs(a) ** 2))
        jac_s[cols_cr], jac_s[cols_ci] = cre.real, cim.real
        dz, dzb = w * np.conj(a), w * a
        dz, dzb = dz * a_u + dzb * np.conj(a_ub), dz * a_ub + dzb * np.conj(a_u)
        cre, cim = _realify(dz, dzb)
        jac_s[cols_ar], jac_s[cols_ai] = cre.real, cim.real
        dz, dzb = -np.conj(g) * g_u - g * np.conj(g_ub), -np.conj(g) * g_ub - g * np.conj(g_u)
        cre, cim = _realify(dz, dzb)
        jac_s[0], jac_s[1] = cre.real, cim.real

        jac = np.vstack(
            [jac_c[:m].real, jac_c[:m].imag, jac_c[m : 2 * m].real, jac_c[m : 2 * m].imag,
             jac_s[None, :], jac_c[rv].real[None, :], jac_c[rv].imag[None, :]]
        )
        return res, jac


def numerical_jacobian(fun, v, h=1e-7):
    """Central-difference Jacobian; the fallback when no analytic one exists."""
    r0 = fun(v)
    jac = np.empty((r0.size, v.size))
    for k in range(v.size):
        e = np.zeros_like(v)
        e[k] = h * max(1.0, abs(v[k]))
        jac[:, k] = (fun(v + e) - fun(v - e)) / (2 * e[k])
    return jac


def levenberg_marquardt(fun, v0, tol, max_iter, jac=None, watch=None):
    """Minimise |fun(v)| with Marquardt-scaled damping.

    ``fun(v, True)`` must return (residual, jacobian) unless ``jac`` is given.
    ``watch(v)`` may return True to stop early (used for branch flips).
    Returns (v, residual_norm, iterations).
    """

    def evaluate(v, want_jac):
        if jac is not None:
            return (fun(v), jac(v)) if want_jac else fun(v)
        return fun(v, want_jac) if want_jac else fun(v)

    v = np.array(v0, dtype=float)
    try:
        r, J = evaluate(v, True)
    except (EvaluationError, FloatingPointError, ZeroDivisionError, ValueError):
        return v, math.inf, 0
    f = float(r @ r)
    mu = 1e-3
    it = 0
    for it in range(1, max_iter + 1):
        if math.sqrt(f) < tol:
            return v, math.sqrt(f), it - 1
        g = J.T @ r
        A = J.T @ J
        d = np.maximum(np.diag(A), 1e-12)
        accepted = False
        while mu < 1e20:
            try:
                step = np.linalg.solve(A + mu * np.diag(d), -g)
            except np.linalg.LinAlgError:
                mu *= 10
                continue
            cand = v + step
            try:
                r_new = evaluate(cand, False)
            except (EvaluationError, FloatingPointError, ZeroDivisionError, ValueError):
                r_new = None
            if r_new is not None and np.all(np.isfinite(r_new)):
                f_new = float(r_new @ r_new)
                if f_new < f:
                    v, f = cand, f_new
                    mu = max(mu * 0.2, 1e-15)
                    accepted = True
                    break
            mu *= 5.0
        if not accepted:
            break
        if watch is not None and watch(v):
            break
        r, J = evaluate(v, True)
    return v, math.sqrt(f), it


# -- initial guesses ------------------------------------------------------------

def _initial_s(x, y, p):
    """Rough tanh-distance guess from the Hilbert-ball formula on rescaled data."""
    a, b = norm(x), norm(y)
    xe, ye = x.entries, y.entries
    n2x, n2y = np.linalg.norm(xe), np.linalg.norm(ye)
    inner = 0j
    if n2x > 0 and n2y > 0:
        inner = np.vdot(xe, ye) * (a / n2x) * (b / n2y)
    val = 1.0 - (1 - a * a) * (1 - b * b) / max(abs(1 - inner) ** 2, 1e-12)
    return float(np.clip(math.sqrt(max(val, 0.0)), 0.05, 0.98))


def _affine_guess(xj, yj, s0):
    """Branch, zero and coefficient from the affine map through (0,x) and (s0,y)."""
    slope = (yj - xj) / s0
    if abs(slope) < 1e-14:
        return 0, 0j, xj
    z0 = -xj / slope
    if abs(z0) < 1:
        return 1, z0, slope
    return 0, 1.0 / np.conj(z0), xj


def _start(x, y, p, active, s0, rng, jitter, beta_force=None, mode="points"):
    xs, ys = x.entries[active], y.entries[active]
    m = xs.size
    beta = np.zeros(m, dtype=int)
    alpha = np.zeros(m, dtype=complex)
    c = np.zeros(m, dtype=complex)
    for j in range(m):
        if mode == "points":
            b, a, cj = _affine_guess(xs[j], ys[j], s0)
        else:  # ys holds the tangent direction scaled by lam
            b, a, cj = _affine_guess(xs[j], xs[j] + ys[j] * s0, s0)
        if beta_force is not None and beta_force[j] != b:
            b = int(beta_force[j])
            if abs(a) < 1e-8:
                a = 0.5
            a = 0.9 * a / abs(a)
            cj = xs[j] / (-a) if b == 1 else xs[j]
        beta[j], alpha[j], c[j] = b, a, cj
    gamma = 0j
    if jitter > 0:
        alpha = alpha + jitter * (rng.normal(size=m) + 1j * rng.normal(size=m)) * 0.3
        gamma = jitter * 0.3 * complex(rng.normal(), rng.normal())
        c = c * np.exp(jitter * 0.3 * (rng.normal(size=m) + 1j * rng.normal(size=m)))
        s0 = float(np.clip(s0 * math.exp(jitter * 0.4 * rng.normal()), 0.02, 0.99))
    alpha = alpha * np.minimum(1.0, 0.95 / np.maximum(np.abs(alpha), 1e-300))
    if abs(gamma) > 0.9:
        gamma *= 0.9 / abs(gamma)
    return beta, alpha, c, gamma, s0


# -- driver ---------------------------------------------------------------------

@dataclass
class _Attempt:
    residual: float
    params: GeodesicParams | None = None
    scalar: float = float("nan")
    iterations: int = 0
    start: int = 0
    flips: int = 0
    key: tuple = field(default_factory=tuple)


def _run_branch(system, beta, alpha, c, gamma, scalar, cfg, adaptive):
    """LM on a fixed branch pattern, flipping branches whose zero hits the circle.

    Genuine solutions may have |alpha_j| very close to one, so a flip is only
    tried after a run has stalled; the best state seen is returned.
    """
    total = 0
    flips = 0
    best = None
    while True:
        system.beta = beta
        v0 = system.pack(gamma, alpha, c, scalar)

        def watch(v):
            _, ua, _, _ = system.unpack(v)
            return bool(np.any(np.abs(ua) > _RUNAWAY_CHART))

        v, res, it = levenberg_marquardt(
            system.residual, v0, cfg.tolerance, cfg.max_iterations - total,
            watch=watch if adaptive else None,
        )
        total += it
        gamma, alpha, c, scalar = system.decode(v)
        state = (beta, alpha, c, gamma, scalar, res, total, flips)
        if best is None or res < best[5]:
            best = state
        if res < cfg.tolerance or not adaptive or flips >= _MAX_FLIPS or total >= cfg.max_iterations:
            break
        near = np.abs(alpha) > _FLIP_RADIUS
        if not near.any():
            break
        beta, alpha, c = _flip(beta, alpha, c, near)
        flips += 1
    return best[:6] + (total, flips)


def _assemble(space, active, beta, alpha, c, gamma):
    n = space.n
    full_a = np.full(n, gamma, dtype=complex)
    full_b = np.zeros(n, dtype=int)
    full_c = np.zeros(n, dtype=complex)
    full_a[active], full_b[active], full_c[active] = alpha, beta, c
    return canonicalize(GeodesicParams(space, gamma, full_a, full_b, full_c))


def _validate_pair(x, y):
    if not isinstance(x.space, Lp) or x.space != y.space:
        raise ContractError("both points must share one l^p signature")
    if math.isinf(x.space.p):
        raise ContractError("the endpoint solver needs p < inf; use polydisc_distance")
    check_in_ball(x, "x")
    check_in_ball(y, "y")


def _attempts(x, target, cfg, mode, s_guess):
    """Yield (start index, beta pattern, initial data, adaptive flag)."""
    p = x.space.p
    active = (np.abs(x.entries) > 0) | (np.abs(target.entries) > 0)
    m = int(active.sum())
    rng = np.random.default_rng(cfg.seed)
    patterns = [None]
    if cfg.beta_strategy == "all_ones":
        patterns = [np.ones(m, dtype=int)]
    elif cfg.beta_strategy == "enumerate" and m <= _ENUMERATE_LIMIT:
        patterns = [None] + [np.array(b) for b in itertools.product((1, 0), repeat=m)]
    adaptive = cfg.beta_strategy == "adaptive"
    k = 0
    for start in range(cfg.multistarts):
        jitter = 0.0 if start == 0 else min(1.0, 0.25 + 0.1 * start)
        for pat in patterns:
            init = _start(x, target, p, active, s_guess, rng, jitter, pat, mode)
            yield k, active, init, adaptive
            k += 1


def _enumeration(x, target, cfg, mode, s_guess):
    """Every branch pattern, first unjittered, then (for few coordinates) from
    perturbed starts as well."""
    p = x.space.p
    active = (np.abs(x.entries) > 0) | (np.abs(target.entries) > 0)
    m = int(active.sum())
    if m > _ENUMERATE_LIMIT:
        return
    rng = np.random.default_rng([cfg.seed, 1])
    jitters = (0.0, 0.3, 0.6, 0.9) if m <= _ENUMERATE_JITTER_LIMIT else (0.0,)
    k = 0
    for jitter in jitters:
        for pat in itertools.product((1, 0), repeat=m):
            init = _start(x, target, p, active, s_guess, rng, jitter, np.array(pat), mode)
            yield k, active, init, jitter > 0
            k += 1


def _homotopy(x, y, cfg):
    """Track the solution along y_t = x + t (y - x) from a short, easy pair.

    Branches are flipped whenever a zero reaches the circle on the way.
    Returns the raw state at t = 1, or None.
    """
    space = x.space
    p = space.p
    active = (np.abs(x.entries) > 0) | (np.abs(y.entries) > 0)
    rng = np.random.default_rng([cfg.seed, 2])
    local = SolveConfig(cfg.tolerance, cfg.max_iterations, 1, "adaptive", cfg.seed)

    def at(t):
        return x.entries + t * (y.entries - x.entries)

    state = None
    t = _HOMOTOPY_FIRST
    while state is None and t > 1e-4:
        yt = x.with_entries(at(t))
        for jitter in (0.0, 0.3, 0.6):
            init = _start(x, yt, p, active, _initial_s(x, yt, p), rng, jitter)
            beta, alpha, c, gamma, s0 = init
            system = _System(x.entries, yt.entries, p, active, beta, "points")
            out = _run_branch(system, beta, alpha, c, gamma, s0, local, True)
            if out[5] < cfg.tolerance:
                state = out[:5]
                break
        else:
            t *= 0.5
    if state is None:
        return None
    h = t
    steps = 0
    while t < 1.0 and h > _HOMOTOPY_MIN_STEP and steps < _HOMOTOPY_MAX_STEPS:
        steps += 1
        t_new = min(1.0, t + h)
        beta, alpha, c, gamma, scalar = state
        nxt = None
        candidates = [(beta, alpha, c)]
        near = np.abs(alpha) > _HOMOTOPY_FLIP_RADIUS
        if near.any():
            candidates.append(_flip(beta, alpha, c, near))
        for b, a, cc in candidates:
            system = _System(x.entries, at(t_new), p, active, b, "points")
            out = _run_branch(system, b, a, cc, gamma, scalar, local, True)
            if out[5] < cfg.tolerance:
                nxt = out[:5]
                break
        if nxt is None:
            h *= 0.5
            continue
        state, t = nxt, t_new
        h = min(2.0 * h, 0.25)
    if t < 1.0:
        return None
    return (active,) + state


def _flip(beta, alpha, c, mask):
    """Move the zero of each masked coordinate across the circle."""
    beta, alpha, c = beta.copy(), alpha.copy(), c.copy()
    for j in np.flatnonzero(mask):
        a = alpha[j] / abs(alpha[j])
        if beta[j] == 1:
            beta[j], c[j] = 0, -a * c[j]
        else:
            beta[j], c[j] = 1, -np.conj(a) * c[j]
        alpha[j] = 0.98 * a
    return beta, alpha, c


def _solve_system(x, target, cfg, mode):
    """Multistart, then (adaptive only) homotopy and branch enumeration."""
    space = x.space
    if mode == "points":
        s_guess = _initial_s(x, target, space.p)
    else:
        s_guess = 1.0 / max(1e-12, _tangent_metric_guess(x, target))
    best = _Attempt(math.inf)
    raw = None

    def consider(k, active, beta, alpha, c, gamma, scalar, res, its, flips=0):
        nonlocal best, raw
        log.debug("start %d: residual %.3g after %d iterations", k, res, its)
        if res >= best.residual:
            return
        try:
            params = _assemble(space, active, beta, alpha, c, gamma)
        except ContractError:
            return
        best = _Attempt(res, params, scalar, its, k, flips)
        raw = (active, beta, alpha, c, gamma, scalar)

    used = 0

    def run(source, offset):
        nonlocal used
        for k, active, (beta, alpha, c, gamma, s0), adaptive in source:
            system = _System(x.entries, target.entries, space.p, active, beta, mode)
            out = _run_branch(system, beta, alpha, c, gamma, s0, cfg, adaptive)
            consider(offset + k, active, *out)
            used = offset + k + 1
            if best.residual < cfg.tolerance:
                return True
        return False

    if run(_attempts(x, target, cfg, mode, s_guess), 0):
        return best
    offset = used
    if raw is not None and best.residual < _POLISH_BELOW:
        # slow but steady runs near the boundary: continue the best one longer
        active, beta, alpha, c, gamma, scalar = raw
        system = _System(x.entries, target.entries, space.p, active, beta, mode)
        v, res, its = levenberg_marquardt(
            system.residual, system.pack(gamma, alpha, c, scalar), cfg.tolerance,
            _POLISH_FACTOR * cfg.max_iterations,
        )
        gamma, alpha, c, scalar = system.decode(v)
        consider(best.start, active, beta, alpha, c, gamma, scalar, res, best.iterations + its)
        if best.residual < cfg.tolerance:
            return best
    if cfg.beta_strategy != "adaptive":
        return best
    if mode == "points":
        state = _homotopy(x, target, cfg)
        if state is not None:
            active, beta, alpha, c, gamma, scalar = state
            system = _System(x.entries, target.entries, space.p, active, beta, mode)
            res = float(np.linalg.norm(system.residual(system.pack(gamma, alpha, c, scalar))))
            consider(offset, active, beta, alpha, c, gamma, scalar, res, 0)
            if best.residual < cfg.tolerance:
                return best
    run(_enumeration(x, target, cfg, mode, s_guess), offset + 1)
    return best


def _tangent_metric_guess(x, v):
    """Infinitesimal Hilbert-ball metric on rescaled data, as a starting value."""
    a = norm(x)
    nv = norm(v)
    return nv / max(1.0 - a * a, 1e-6)


def solve(x: ComplexVector, y: ComplexVector, config: SolveConfig | None = None) -> NormalizedGeodesic:
    """Normalized geodesic phi with phi(0) = x and phi(s) = y, s > 0."""
    cfg = config or SolveConfig()
    _validate_pair(x, y)
    if np.array_equal(x.entries, y.entries):
        raise ContractError("x and y must be distinct")
    best = _solve_system(x, y, cfg, "points")
    if best.residual >= cfg.tolerance:
        raise NonConvergence(
            f"no start converged (best residual {best.residual:.3g})", best.residual, best
        )
    return NormalizedGeodesic(best.params, best.scalar, x, y, best.residual, best.start, best.iterations)


def solve_tangent(x: ComplexVector, v: ComplexVector, config: SolveConfig | None = None):
    """Geodesic phi with phi(0) = x and phi'(0) = lam * v, lam > 0.

    Returns (params, lam); the infinitesimal metric is k(x, v) = 1 / lam.
    """
    cfg = config or SolveConfig()
    if not isinstance(x.space, Lp) or x.space != v.space or math.isinf(x.space.p):
        raise ContractError("x and v must share one l^p signature with p < inf")
    check_in_ball(x, "x")
    if not np.any(v.entries != 0):
        raise ContractError("direction must be nonzero")
    best = _solve_system(x, v, cfg, "tangent")
    if best.residual >= cfg.tolerance:
        raise NonConvergence(
            f"no start converged (best residual {best.residual:.3g})", best.residual, best
        )
    return best.params, best.scalar


def distance(x: ComplexVector, y: ComplexVector, config: SolveConfig | None = None) -> float:
    if np.array_equal(np.asarray(x), np.asarray(y)):
        return 0.0
    return solve(x, y, config).distance


# -- uniqueness --------------------------------------------------------------------

@dataclass
class AgreementReport:
    runs: int
    converged: int
    max_discrepancy: float
    distances: list
    partial: bool

    def to_json(self) -> dict:
        return {
            "runs": self.runs,
            "converged": self.converged,
            "max_discrepancy": self.max_discrepancy,
            "distances": self.distances,
            "partial": self.partial,
        }


def uniqueness_probe(x, y, p=None, runs: int = 10, config: SolveConfig | None = None,
                     grid: int = 64) -> AgreementReport:
    """Solve from ``runs`` independently seeded, jittered starts and compare maps.

    The discrepancy is the largest norm difference of the produced maps over
    ``grid`` points of the unit circle.
    """
    cfg = config or SolveConfig()
    if p is not None and x.space.p != p:
        raise ContractError("p does not match the points' signature")
    zs = np.exp(2j * np.pi * np.arange(grid) / grid)

    def one(k):
        rng = np.random.default_rng([cfg.seed, k])
        run_cfg = SolveConfig(cfg.tolerance, cfg.max_iterations, cfg.multistarts, cfg.beta_strategy,
                              int(rng.integers(1 << 31)))
        try:
            return _solve_jittered(x, y, run_cfg, k)
        except NonConvergence:
            return None

    with ThreadPoolExecutor(max_workers=thread_cap()) as ex:
        results = list(ex.map(one, range(runs)))
    good = [r for r in results if r is not None]
    maps = [eval_array(r.params, zs) for r in good]
    worst = 0.0
    for a_map in maps[1:]:
        worst = max(worst, float(np.max(norm_array(x.space, a_map - maps[0]))))
    return AgreementReport(runs, len(good), worst, [r.distance for r in good], len(good) < runs)


def _solve_jittered(x, y, cfg, k):
    """A solve whose first start is already randomised (k > 0)."""
    if k == 0:
        return solve(x, y, cfg)
    _validate_pair(x, y)
    space = x.space
    s_guess = _initial_s(x, y, space.p)
    rng = np.random.default_rng(cfg.seed)
    active = (np.abs(x.entries) > 0) | (np.abs(y.entries) > 0)
    best = _Attempt(math.inf)
    for start in range(cfg.multistarts):
        init = _start(x, y, space.p, active, s_guess, rng, 0.5 + 0.05 * start)
        beta, alpha, c, gamma, s0 = init
        system = _System(x.entries, y.entries, space.p, active, beta, "points")
        beta, alpha, c, gamma, scalar, res, its, _ = _run_branch(
            system, beta, alpha, c, gamma, s0, cfg, cfg.beta_strategy == "adaptive"
        )
        if res < best.residual:
            best = _Attempt(res, _assemble(space, active, beta, alpha, c, gamma), scalar, its, start)
        if res < cfg.tolerance:
            break
    if best.residual >= cfg.tolerance:
        raise NonConvergence("jittered solve failed", best.residual, best)
    return NormalizedGeodesic(best.params, best.scalar, x, y, best.residual, best.start, best.iterations)
