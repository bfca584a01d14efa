"""Command-line front end.

Subcommands: recover, periodize, density, converge. Data goes to stdout or
to --out (relative paths resolve against $CANONSPEC_OUT when set);
diagnostics go to stderr.

Exit codes: 0 success, 1 input error, 2 positivity failure, 3 quadrature
failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .direct_problem import cross_validate, recover_moments, recover_verblunsky, validate_heights
from .errors import CanonSpecError, NotPositiveDefinite, QuadratureFailure
from .measure import (
    atoms_csv,
    cosine_partial_sum,
    density_csv,
    expgrowth_family,
    expgrowth_limit,
    geronimus_measure,
    rescale_to_line,
)
from .opuc import moments_from_verblunsky, schur_moments
from .systems import DiracPotential, convergence_experiment, is_strictly_decreasing, periodize
from .toeplitz import check_positive_definite

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_POSITIVITY = 2
EXIT_QUADRATURE = 3
OUT_ENV = "CANONSPEC_OUT"


class PositivityFailure(Exception):
    pass


def _fmt(x):
    return float(f"{x + 0.0:.17g}")


def _floats(text):
    try:
        values = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _grid(text):
    lo, hi, dx = _floats(text) if isinstance(text, str) else text
    if not (hi > lo and dx > 0):
        raise argparse.ArgumentTypeError(f"grid needs lo < hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / dx + 1e-9)) + 1
    return lo + dx * np.arange(n)


def _params(spec):
    """'name:k=v,k2=v2' or 'name:v' -> (name, {k: v}) / (name, {'': v})."""
    name, _, rest = spec.partition(":")
    params = {}
    if name == "file":
        return name, {"path": rest}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            key, value = "", key
        params[key.strip()] = float(value)
    return name.strip(), params


def _samples(path):
    try:
        data = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise CanonSpecError(f"cannot read sample file {path!r}: {exc}")
    if data.shape[1] != 2:
        raise CanonSpecError(f"sample file {path!r} must have two columns")
    return data[:, 0], data[:, 1]


def hamiltonian_from_spec(spec):
    """Callable h11 for the built-in registry or a sample file."""
    name, p = _params(spec)
    if name == "const":
        c = p.get("c", p.get("", 1.0))
        if not c > 0:
            raise CanonSpecError("const Hamiltonian needs c > 0")
        return lambda t: c
    if name == "exp":
        return math.exp
    if name == "affine":
        b = p.get("b", p.get("", 1.0))
        return lambda t: 1.0 + b * t
    if name == "inverse-square":
        c = p.get("c", p.get("", 0.25))
        return lambda t: 1.0 / (1.0 + c * t) ** 2
    if name == "file":
        t, v = _samples(p["path"])
        if np.any(np.diff(t) <= 0) or np.any(v <= 0):
            raise CanonSpecError("Hamiltonian samples need increasing t and positive values")
        return lambda s: float(np.interp(s, t, v))
    raise CanonSpecError(f"unknown Hamiltonian {name!r}; use const, exp, affine, inverse-square or file")


def potential_from_spec(spec, a):
    name, p = _params(spec)
    if name == "const":
        c = p.get("c", p.get("", 1.0))
        return DiracPotential(lambda t: c + 0.0 * np.asarray(t, dtype=float), a, name=spec, antiderivative=lambda t: c * t)
    if name == "decay":
        return DiracPotential(lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float)), a, name=spec, antiderivative=math.log1p)
    if name == "file":
        t, v = _samples(p["path"])
        return DiracPotential.from_samples(t, v, name=spec)
    raise CanonSpecError(f"unknown potential {name!r}; use const, decay or file")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    base = os.environ.get(OUT_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, path)
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(text, path):
    handle, close = _open_out(path)
    try:
        handle.write(text)
    finally:
        if close:
            handle.close()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _heights_from_args(args):
    if args.heights is not None:
        return np.asarray(args.heights, dtype=float)
    if args.heights_file is not None:
        try:
            return np.loadtxt(args.heights_file, ndmin=1).ravel()
        except (OSError, ValueError) as exc:
            raise CanonSpecError(f"cannot read heights file: {exc}")
    if args.geometric is not None:
        _, p = _params("g:" + args.geometric)
        a = p.get("a", p.get("", None))
        if a is None or not a > 0:
            raise CanonSpecError("--geometric needs a=<positive number>")
        return a ** np.arange(args.n + 1, dtype=float)
    raise CanonSpecError("give --heights, --heights-file or --geometric")


def cmd_recover(args):
    h = validate_heights(_heights_from_args(args))
    out = {"heights": [_fmt(v) for v in h]}
    if args.route in ("verblunsky", "both"):
        out["alphas"] = [_fmt(v) for v in recover_verblunsky(h)]
    if args.route == "moments":
        c = recover_moments(h)
        pos = check_positive_definite(c)
        out["moments"] = [_fmt(v) for v in c]
    elif args.route == "verblunsky":
        c = moments_from_verblunsky(recover_verblunsky(h), c0=1.0 / h[0])
        pos = check_positive_definite(c)
        out["moments"] = [_fmt(v) for v in c]
    else:
        report = cross_validate(h, tol=args.tol)
        pos = report.positivity
        out["moments"] = [_fmt(v) for v in report.moments]
        out["moments_from_alphas"] = [_fmt(v) for v in report.moments_from_alphas]
        out["max_cross_error"] = report.max_cross_error
        out["heights_roundtrip_error"] = report.heights_roundtrip_error
        out["flags"] = report.flags
        for flag in report.flags:
            print(f"warning: {flag}", file=sys.stderr)
    out["positivity"] = {"valid": pos.valid, "checked": pos.checked, "failed_at": pos.failed_at}
    _emit(_json(out), args.out)
    if not pos.valid:
        raise PositivityFailure(pos.describe())
    return EXIT_OK


def cmd_periodize(args):
    h11 = hamiltonian_from_spec(args.h11)
    H = periodize(h11, args.T, args.N)
    alphas = recover_verblunsky(H.heights)
    c0 = 1.0 / H.heights[0]
    if args.route == "moments":
        c = recover_moments(H.heights)
        other = schur_moments(alphas, c0=c0)
        drift = float(np.max(np.abs(c - other)))
        if drift > 1e-9:
            print(f"warning: moment recursion differs from the Schur route by {drift:.3e}", file=sys.stderr)
    elif args.route == "verblunsky":
        c = moments_from_verblunsky(alphas, c0=c0)
    else:
        c = schur_moments(alphas, c0=c0)
    rows = ["n,height,alpha,moment"]
    for n in range(args.N):
        a = f"{alphas[n]:.17g}" if n < alphas.size else ""
        rows.append(f"{n},{H.heights[n]:.17g},{a},{c[n]:.17g}")
    _emit("\n".join(rows) + "\n", args.out)
    pos = check_positive_definite(c)
    print(f"step {args.T:g}, line period {H.line_period:.6g}, positivity {pos.describe()}", file=sys.stderr)
    if not pos.valid and args.route != "moments":
        # |alpha_n| < 1 already certifies positivity; the Toeplitz test has
        # run out of precision (cond J_n grows geometrically)
        print("warning: Toeplitz test inconclusive in double precision; alphas certify positivity", file=sys.stderr)
        pos = None
    if args.density:
        xs = _grid(args.grid) if args.grid else np.linspace(-H.line_period / 2, H.line_period / 2, 1001)
        m = rescale_to_line(cosine_partial_sum(c, args.terms or args.N - 1, [0.0]), args.T, xs)
        _emit(density_csv(xs, {"w": m.w}), args.density)
    if pos is not None and not pos.valid:
        raise PositivityFailure(pos.describe())
    return EXIT_OK


def _density_moments(args):
    if args.moments is not None:
        return np.asarray(args.moments, dtype=float)
    if args.alphas is not None:
        return moments_from_verblunsky(args.alphas)
    if args.heights is not None:
        return recover_moments(args.heights)
    if args.h11 is not None:
        if args.T is None or args.N is None:
            raise CanonSpecError("--h11 needs --T and --N")
        return recover_moments(periodize(hamiltonian_from_spec(args.h11), args.T, args.N).heights)
    return None


def cmd_density(args):
    if args.expgrowth is not None:
        xs = _grid(args.grid) if args.grid else _grid((-6.0, 6.0, 0.01))
        cols = {}
        for T in args.expgrowth:
            cols[f"w_T={T:g}"] = expgrowth_family(T, xs).w
        cols["limit"] = expgrowth_limit(xs).w
        _emit(density_csv(xs, cols), args.out)
        return EXIT_OK
    c = _density_moments(args)
    if c is None:
        raise CanonSpecError("give --moments, --alphas, --heights, --h11 or --expgrowth")
    N = c.size - 1 if args.terms is None else args.terms
    if N > c.size - 1:
        raise CanonSpecError(f"--terms {N} exceeds the {c.size - 1} available moments")
    xs = _grid(args.grid) if args.grid else _grid((0.0, 2 * math.pi, 0.01))
    cols = {"w": cosine_partial_sum(c, N, xs).w}
    atoms = []
    if args.compare_geronimus is not None:
        g = geronimus_measure(args.compare_geronimus, xs)
        cols["geronimus"] = g.w
        atoms = g.atoms
    _emit(density_csv(xs, cols), args.out)
    if args.atoms_out:
        _emit(atoms_csv(atoms), args.atoms_out)
    pos = check_positive_definite(c)
    if not pos.valid:
        print(f"warning: moments {pos.describe()}", file=sys.stderr)
    return EXIT_OK


def cmd_converge(args):
    f = potential_from_spec(args.f, args.a)
    xs = _grid(args.grid)
    rows, ref = convergence_experiment(f, args.a, args.Ts, xs, dt=args.dt)
    sups = [r.sup_weight_diff for r in rows]
    norm_cols = list(zip(*[r.norm_diffs for r in rows]))
    verdict = {
        "sup_strictly_decreasing": is_strictly_decreasing(sups),
        "norms_strictly_decreasing": [is_strictly_decreasing(col) for col in norm_cols],
    }
    if args.format == "csv":
        k = len(ref)
        lines = ["T,sup_weight_diff," + ",".join(f"norm_diff_{j}" for j in range(k))]
        for r in rows:
            lines.append(",".join(f"{v:.17g}" for v in [r.T, r.sup_weight_diff, *r.norm_diffs]))
        text = "\n".join(lines) + "\n"
    else:
        text = _json({"f": args.f, "a": args.a, "reference_norms": ref, "rows": [r.to_dict() for r in rows], "verdict": verdict})
    _emit(text, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="canonspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="spectral data from step heights")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--heights", type=_floats)
    src.add_argument("--heights-file")
    src.add_argument("--geometric", help="a=<ratio>; heights a^n for n <= --n")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--route", choices=("verblunsky", "moments", "both"), default="both")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("periodize", help="step approximation of a Hamiltonian and its moments")
    p.add_argument("--h11", required=True, help="const:1 | exp | affine:b=1 | inverse-square:c=0.25 | file:PATH")
    p.add_argument("--T", type=float, default=0.5)
    p.add_argument("--N", type=int, default=40)
    p.add_argument("--route", choices=("moments", "verblunsky", "schur"), default="moments")
    p.add_argument("--terms", type=int)
    p.add_argument("--grid", type=_floats, help="lo,hi,step for --density")
    p.add_argument("--density", help="also write the line density partial sum here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_periodize)

    p = sub.add_parser("density", help="cosine partial sums and closed-form densities")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--moments", type=_floats)
    src.add_argument("--alphas", type=_floats)
    src.add_argument("--heights", type=_floats)
    src.add_argument("--h11")
    src.add_argument("--expgrowth", type=_floats, help="list of steps T for the exponential example")
    p.add_argument("--T", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--terms", type=int)
    p.add_argument("--grid", type=_floats, help="lo,hi,step")
    p.add_argument("--compare-geronimus", type=float, metavar="ALPHA")
    p.add_argument("--atoms-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("converge", help="step approximations of a Dirac potential")
    p.add_argument("--f", default="const:1", help="const:c | decay | file:PATH")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--Ts", type=_floats, default=[0.5, 0.25, 0.125, 0.0625])
    p.add_argument("--grid", type=_floats, default=[-20.0, 20.0, 0.01])
    p.add_argument("--dt", type=float)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (PositivityFailure, NotPositiveDefinite) as exc:
        print(f"positivity failure: {exc}", file=sys.stderr)
        return EXIT_POSITIVITY
    except QuadratureFailure as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (CanonSpecError, ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
