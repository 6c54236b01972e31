"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 numerical non-convergence,
4 verification failure. Errors go to stderr as {"error": ...}.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .errors import ContractError, DomainError, HolometError, NonConvergence, PrecisionError
from .spaces import ComplexVector, DirectSum, Lp

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 2, 3, 4
DIGITS = 12
DEFAULT_EPSILONS = (1e-1, 10**-1.5, 1e-2, 10**-2.5, 1e-3)
_BETA = {"ones": "all_ones", "enum": "enumerate", "adaptive": "adaptive"}


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _InputError(message)


def parse_complex(tok: str) -> complex:
    """'0.5', '-1e-3', '0.3+0.2i', '0.1-2i', '0.4i'."""
    t = tok.strip().replace(" ", "")
    if not t:
        raise _InputError("empty coordinate")
    try:
        return complex(t.replace("i", "j")) if t.endswith("i") else complex(float(t))
    except ValueError:
        raise _InputError(f"cannot parse coordinate {tok!r}") from None


def parse_point(text: str) -> np.ndarray:
    return np.array([parse_complex(t) for t in text.split(",")], dtype=complex)


def _exponent(text):
    if text is None:
        return None
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise _InputError(f"bad exponent {text!r}") from None


def _space(args, length):
    if args.n1 is not None or args.n2 is not None:
        if None in (args.n1, args.n2):
            raise _InputError("a direct sum needs --n1 and --n2")
        p1 = _exponent(args.p1) if args.p1 else 2.0
        p2 = _exponent(args.p2) if args.p2 else 2.0
        r = _exponent(args.r) if args.r else 2.0
        return DirectSum(p1, args.n1, p2, args.n2, r)
    p = _exponent(args.p) if args.p is not None else 2.0
    n = args.n if args.n is not None else length
    if n is None:
        raise _InputError("dimension unknown: pass --n or a point")
    return Lp(n, p)


def _point(space, text, name):
    if text is None:
        raise _InputError(f"--{name} is required")
    return ComplexVector(space, parse_point(text))


def _round(obj):
    """Round every float to DIGITS significant digits (stable across runs)."""
    if isinstance(obj, float):
        if math.isfinite(obj):
            return float(f"{obj:.{DIGITS}g}")
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def _emit(out, payload, fmt):
    if fmt == "csv":
        rows = payload if isinstance(payload, list) else [payload]
        rows = [_round(r) for r in rows]
        buf = io.StringIO()
        fields = list(rows[0].keys()) if rows else []
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(_round(payload), sort_keys=True) + "\n")


def _config(args):
    from .solver import SolveConfig

    return SolveConfig(
        tolerance=args.tol if args.tol is not None else 1e-10,
        multistarts=args.multistarts,
        beta_strategy=_BETA[args.beta],
        seed=args.seed,
    )


def _length(*texts):
    for t in texts:
        if t is not None:
            return len(t.split(","))
    return None


# -- verbs ------------------------------------------------------------------------

def _cmd_distance(args):
    space = _space(args, _length(args.x, args.y))
    x, y = _point(space, args.x, "x"), _point(space, args.y, "y")
    if isinstance(space, DirectSum):
        from .metrics import bracket

        est = bracket(x, y, seed=args.seed)
        d = 0.5 * (est.lower + est.upper)
        return {"distance": d, "s": math.tanh(d), "lower": est.lower, "upper": est.upper,
                "method": "bracket"}, EXIT_OK
    if math.isinf(space.p):
        from .family import polydisc_distance

        d = polydisc_distance(x, y)
        return {"distance": d, "s": math.tanh(d), "method": "polydisc"}, EXIT_OK
    if np.array_equal(x.entries, y.entries):
        return {"distance": 0.0, "s": 0.0, "method": "identical"}, EXIT_OK
    from .solver import solve

    g = solve(x, y, _config(args))
    return {"distance": g.distance, "s": g.s, "residual": g.residual_norm,
            "method": "geodesic"}, EXIT_OK


def _cmd_polydisc(args):
    from .family import polydisc_distance

    n = args.n if args.n is not None else _length(args.x, args.y)
    space = Lp(n, math.inf)
    x, y = _point(space, args.x, "x"), _point(space, args.y, "y")
    d = polydisc_distance(x, y)
    return {"distance": d, "s": math.tanh(d)}, EXIT_OK


def _cmd_solve(args):
    from .solver import solve

    space = _space(args, _length(args.x, args.y))
    if not isinstance(space, Lp):
        raise ContractError("endpoint solving is available for l^p signatures only")
    x, y = _point(space, args.x, "x"), _point(space, args.y, "y")
    return solve(x, y, _config(args)).to_json(), EXIT_OK


def _load_params(path):
    from .family import params_from_json

    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _InputError(f"cannot read {path}: {exc}") from None
    try:
        return params_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"malformed parameter file: {exc}") from None


def _cmd_verify(args):
    from .verify import verify

    if args.params:
        params = _load_params(args.params)
    else:
        from .solver import solve

        space = _space(args, _length(args.x, args.y))
        x, y = _point(space, args.x, "x"), _point(space, args.y, "y")
        params = solve(x, y, _config(args)).params
    report = verify(params, seed=args.seed, tol=args.tol if args.tol is not None else 1e-8)
    out = report.to_json()
    out["passed"] = report.passed
    return out, (EXIT_OK if report.passed else EXIT_VERIFY)


def _cmd_modulus(args):
    from .metrics import modulus_sweep

    space = _space(args, _length(args.x))
    eps = [float(e) for e in args.eps.split(",")] if args.eps else list(DEFAULT_EPSILONS)
    if any(not 0 < e <= 1 for e in eps):
        raise ContractError("epsilon values must lie in (0, 1]")
    rows = modulus_sweep(space, eps, trials=args.trials, seed=args.seed)
    if args.format == "csv":
        return rows, EXIT_OK
    return {"space": space.to_json(), "rows": rows}, EXIT_OK


def _cmd_curvature(args):
    from .metrics import curvature

    if args.x is not None or args.v is not None:
        space = _space(args, _length(args.x, args.v))
        x, v = _point(space, args.x, "x"), _point(space, args.v, "v")
        pairs = [(x, v)]
    else:
        space = _space(args, None)
        if not isinstance(space, Lp):
            raise ContractError("curvature needs an l^p signature")
        rng = np.random.default_rng(args.seed)
        pairs = []
        for _ in range(args.count):
            a = rng.normal(size=space.n) + 1j * rng.normal(size=space.n)
            scale = rng.uniform(0.05, 0.9) / float(np.sum(np.abs(a) ** space.p) ** (1 / space.p))
            v = rng.normal(size=space.n) + 1j * rng.normal(size=space.n)
            pairs.append((ComplexVector(space, a * scale), ComplexVector(space, v)))
    rows = []
    for x, v in pairs:
        k = curvature(x, v, _config(args))
        rows.append({"x": [[z.real, z.imag] for z in x.entries],
                     "v": [[z.real, z.imag] for z in v.entries], "curvature": k})
    if args.format == "csv" or len(rows) > 1:
        return rows, EXIT_OK
    return rows[0], EXIT_OK


VERBS = {
    "distance": _cmd_distance,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "modulus": _cmd_modulus,
    "curvature": _cmd_curvature,
    "polydisc": _cmd_polydisc,
}


def build_parser():
    ap = _Parser(prog="holomet", description="Invariant metrics and complex geodesics on l^p balls.")
    ap.add_argument("verb", choices=sorted(VERBS))
    ap.add_argument("--p", help="exponent (number or 'inf')")
    ap.add_argument("--n", type=int, help="dimension (default: length of the points)")
    ap.add_argument("--r", help="outer exponent of a direct sum")
    ap.add_argument("--n1", type=int)
    ap.add_argument("--n2", type=int)
    ap.add_argument("--p1")
    ap.add_argument("--p2")
    ap.add_argument("--x", help="point, e.g. 0.5,0.1+0.2i")
    ap.add_argument("--y")
    ap.add_argument("--v", help="tangent direction")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--multistarts", type=int, default=16)
    ap.add_argument("--beta", choices=sorted(_BETA), default="adaptive")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--params", help="geodesic parameter JSON (as written by solve)")
    ap.add_argument("--eps", help="comma-separated epsilons for modulus")
    ap.add_argument("--trials", type=int, default=16, help="restarts for modulus searches")
    ap.add_argument("--count", type=int, default=20, help="random (x, v) rows for curvature")
    return ap


_VALUE_FLAGS = ("--x", "--y", "--v", "--eps", "--p", "--p1", "--p2", "--r")


def _glue_values(argv):
    """Attach values to their flag so points like -0.1,0.4 are not read as options."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr

    def fail(code, message):
        err.write(json.dumps({"error": message, "exit": code}) + "\n")
        return code

    try:
        args = build_parser().parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
        payload, code = VERBS[args.verb](args)
    except _InputError as exc:
        return fail(EXIT_INPUT, str(exc))
    except (ContractError, DomainError) as exc:
        return fail(EXIT_INPUT, str(exc))
    except (NonConvergence, PrecisionError) as exc:
        return fail(EXIT_CONVERGENCE, str(exc))
    except HolometError as exc:
        return fail(EXIT_INPUT, str(exc))
    _emit(out, payload, args.format)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
