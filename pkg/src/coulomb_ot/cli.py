"""Command-line front end.

Examples
--------
    coulomb-ot radial-map --density exponential --out g.csv
    coulomb-ot energy --density uniform1d
    coulomb-ot plan --density gaussian1d --n 64 --format csv
    coulomb-ot verify --suite all
"""

import argparse
import io
import json
import os
import sys

import numpy as np

from .densities import Density, dilate, discretize, median_split, mollify
from .exceptions import CoulombOTError
from .exact_maps import monge_cost, pushforward_residual, solve_map_1d, solve_map_radial
from .functionals import electron_gas_pair_density, energy_report
from .kantorovich import load_problem, solve
from .measures import DiscreteMeasure
from .transport_ops import (
    check_strong_positivity,
    coulomb_sup_bound,
    cost_gap_bound,
    mollify_plan,
    positivize,
    radial_crossing_pair,
    reinstate,
)
from .verify import SUITES, run_suite, seed_from_env

NAMED = {
    "exponential": lambda: Density.exponential(1.0, 3),
    "gaussian": lambda: Density.gaussian(1.0, 3),
    "uniform-ball": lambda: Density.uniform_ball(1.0, 3),
    "uniform1d": lambda: Density.uniform(0.0, 1.0),
    "exponential1d": lambda: Density.exponential(1.0, 1),
    "gaussian1d": lambda: Density.gaussian(1.0, 1),
    "crossing-a": lambda: radial_crossing_pair()[0],
    "crossing-b": lambda: radial_crossing_pair()[1],
}

DEFAULT_FORMAT = {
    "map1d": "csv",
    "radial-map": "csv",
    "energy": "json",
    "plan": "csv",
    "reinstate": "json",
    "mollify": "csv",
    "bounds": "json",
    "verify": "json",
}


class UsageError(Exception):
    """Invalid command-line input; reported with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v):
    return f"{v:.12g}"


def _round(obj):
    if isinstance(obj, float):
        return float(_fmt(obj)) if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


def _json(obj):
    return json.dumps(_round(obj), sort_keys=True, indent=2) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


def load_density(spec):
    """Density from a preset name, a JSON file path or inline JSON."""
    if spec in NAMED:
        return NAMED[spec]()
    text = spec
    if not spec.lstrip().startswith("{"):
        if not os.path.exists(spec):
            raise UsageError(f"unknown density {spec!r}; use one of {', '.join(NAMED)} or a JSON spec")
        with open(spec) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"density spec is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError("density spec must be a JSON object")
    return Density.from_spec(data)


def build_parser():
    parser = _Parser(prog="coulomb-ot", description="Optimal transport with Coulomb cost.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, target=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--density", default=None, help="preset name, JSON file or inline JSON")
        if target:
            p.add_argument("--target", default=None, help="second density (same forms)")
        p.add_argument("--n", type=int, default=128, help="grid size (>= 8)")
        p.add_argument("--alpha", type=float, default=None, help="dilate densities by alpha")
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        return p

    add("map1d", "median-split map of an interval density")
    add("radial-map", "radial profile g(r) of a radial density")
    p = add("energy", "optimal transport, mean-field and LDA energies")
    p.add_argument("--method", choices=("analytic_map", "discrete_grid"), default="analytic_map")
    p.add_argument("--q", type=int, choices=(1, 2), default=None, help="add the electron-gas pair density")
    add("plan", "optimal discrete coupling", target=True)
    add("reinstate", "re-instate the marginal of an optimal plan", target=True)
    p = add("mollify", "Gaussian smoothing of a density and its optimal plan")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--beta", type=float, default=0.0)
    add("bounds", "Coulomb sup bound and continuity bound", target=True)
    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--suite", choices=("all", *SUITES), default="all")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    return parser


def _validate(args):
    if args.command == "verify":
        return
    if args.density is None:
        raise UsageError("--density is required")
    if args.n < 8:
        raise UsageError("--n must be at least 8")
    if args.alpha is not None and not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    if args.command == "mollify":
        if args.eps is None or not args.eps > 0:
            raise UsageError("--eps must be given and positive")
        if not 0.0 <= args.beta <= 1.0:
            raise UsageError("--beta must lie in [0, 1]")
    if args.command in ("reinstate",) and getattr(args, "target", None) is None:
        raise UsageError("--target is required")


def _densities(args):
    first = load_density(args.density)
    second = load_density(args.target) if getattr(args, "target", None) else None
    if args.alpha is not None:
        first = dilate(first, args.alpha)
        second = dilate(second, args.alpha) if second is not None else None
    return first, second


def _map1d(args, fmt):
    d, _ = _densities(args)
    fitted = solve_map_1d(d, n_table=args.n)
    if fmt == "json":
        return _json(
            {
                "median": fitted.median_,
                "left_limit": fitted.left_limit_,
                "right_limit": fitted.right_limit_,
                "e_ot": monge_cost(fitted),
                "pushforward_residual": pushforward_residual(fitted),
                "x": fitted.table_[:, 0].tolist(),
                "T": fitted.table_[:, 1].tolist(),
            }
        )
    return _csv(("x", "T"), fitted.table_.tolist())


def _radial_map(args, fmt):
    d, _ = _densities(args)
    fitted = solve_map_radial(d, n_table=args.n)
    if fmt == "json":
        return _json(
            {
                "r_min": fitted.r_min_,
                "e_ot": monge_cost(fitted),
                "pushforward_residual": pushforward_residual(fitted),
                "r": fitted.table_[:, 0].tolist(),
                "g": fitted.table_[:, 1].tolist(),
            }
        )
    return _csv(("r", "g"), fitted.table_.tolist())


def _energy(args, fmt):
    d, _ = _densities(args)
    report = energy_report(d, args.method, args.n)
    out = json.loads(report.to_json())
    rows = [(k, out[k]) for k in sorted(out)]
    if args.q is not None:
        # homogeneous gas at the density of rho at its centre (origin or median)
        centre = 0.0 if d.is_radial else median_split(d)
        rho_bar = float(d(np.array([centre]))[0])
        s = np.linspace(0.0, 5.0, 51)
        pair = electron_gas_pair_density(rho_bar, s, args.q)
        out["pair_density"] = {"q": args.q, "rho_bar": rho_bar, "s": s.tolist(), "rho2": pair.tolist()}
        if fmt == "csv":
            return _csv(("s", "rho2"), [(float(a), float(b)) for a, b in zip(s, pair)])
    if fmt == "json":
        return _json(out)
    return _csv(("key", "value"), [(k, "" if v is None else v) for k, v in rows])


def _measures(args):
    d, t = _densities(args)
    mu = discretize(d, args.n)
    nu = discretize(t, args.n) if t is not None else None
    return d, t, mu, nu


def _problem(args):
    """A ``{"mu": ...}`` problem spec bypasses density discretisation."""
    text = args.density
    if not text.lstrip().startswith("{") and os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return None
    return load_problem(data) if isinstance(data, dict) and "mu" in data else None


def _plan(args, fmt):
    problem = _problem(args)
    if problem is not None:
        cost, mu, nu = problem
        plan = solve(cost, mu, nu)
    else:
        _, _, mu, nu = _measures(args)
        plan = solve("coulomb", mu, nu)
    if fmt == "json":
        return _json(
            {
                "cost": plan.total_cost,
                "n_atoms": [mu.size, plan.nu.size],
                "entries": [[i, j, m] for i, j, m in plan.entries()],
                "symmetric": bool(plan.is_symmetric()),
            }
        )
    buf = io.StringIO()
    plan.to_csv(buf)
    return buf.getvalue()


def _reinstate(args, fmt):
    d, t, _, _ = _measures(args)
    if d.is_radial != t.is_radial:
        raise UsageError("--density and --target must both be radial or both interval densities")
    if d.is_radial:
        report = cost_gap_bound(None, d, t, n=args.n)
        if fmt == "csv":
            return _csv(("key", "value"), sorted(report.as_dict().items()))
        return _json(report.as_dict())
    lo, hi = min(d.lower, t.lower), max(d.upper, t.upper)
    x = np.linspace(lo, hi, args.n)
    a, b = d(x), t(x)
    if a.sum() <= 0 or b.sum() <= 0:
        raise UsageError("densities vanish on the shared grid")
    rho_a = DiscreteMeasure(x, a / a.sum())
    gamma = solve("coulomb", rho_a)
    p = reinstate(gamma, b / b.sum())
    if fmt == "csv":
        buf = io.StringIO()
        p.to_csv(buf)
        return buf.getvalue()
    rows, cols = p.marginals()
    target = b / b.sum()
    # the bridges can pair a point with itself; those atoms have infinite cost
    diagonal = float(np.trace(p.coupling))
    off = p.with_coupling(p.coupling - np.diag(np.diag(p.coupling)))
    return _json(
        {
            "cost_a": gamma.total_cost,
            "cost_reinstated": p.total_cost,
            "cost_reinstated_offdiagonal": off.total_cost,
            "diagonal_mass": diagonal,
            "cost_b": solve("coulomb", DiscreteMeasure(x, target)).total_cost,
            "marginal_error": float(max(np.abs(rows - target).max(), np.abs(cols - target).max())),
        }
    )


def _mollify(args, fmt):
    d, _ = _densities(args)
    smooth = mollify(d, args.eps, n=max(args.n, 8))
    if fmt == "csv":
        return _csv(("x", "rho_eps"), list(zip(smooth.points.tolist(), smooth.values.tolist())))
    plan = solve("coulomb", discretize(d, args.n))
    out = {"eps": args.eps, "beta": args.beta, "cost": plan.total_cost}
    if not d.is_radial:
        grid = mollify_plan(plan, args.eps).on_grid(plan.mu.points[:, 0])
        cert = check_strong_positivity(positivize(grid, args.beta))
        out["positivity_beta"] = cert.beta
    out["x"] = smooth.points.tolist()
    out["rho_eps"] = smooth.values.tolist()
    return _json(out)


def _bounds(args, fmt):
    d, t = _densities(args)
    if not d.is_radial or d.dimension != 3:
        raise UsageError("bounds need radial densities in three dimensions")
    sup = coulomb_sup_bound(d)
    out = {"sup_bound": {"lhs": sup.lhs, "rhs": sup.rhs, "holds": sup.holds}}
    if t is not None:
        diff = lambda r: d(r) - t(r)
        radius = max(d.upper, t.upper)
        dsup = coulomb_sup_bound(diff, radius=radius)
        out["difference_sup_bound"] = {"lhs": dsup.lhs, "rhs": dsup.rhs, "holds": dsup.holds}
        out["continuity"] = cost_gap_bound(None, d, t, n=min(args.n, 256)).as_dict()
    if fmt == "csv":
        rows = []
        for group, values in sorted(out.items()):
            rows.extend((f"{group}.{k}", v) for k, v in sorted(values.items()))
        return _csv(("key", "value"), rows)
    return _json(out)


def _verify(args, fmt):
    checks = run_suite(args.suite, seed_from_env())
    for c in checks:
        print(c.line(), file=sys.stderr)
    if fmt == "csv":
        text = _csv(("check", "passed", "detail"), [(c.name, c.passed, c.detail) for c in checks])
    else:
        text = _json({"suite": args.suite, "checks": [c.__dict__ for c in checks]})
    return text, all(c.passed for c in checks)


HANDLERS = {
    "map1d": _map1d,
    "radial-map": _radial_map,
    "energy": _energy,
    "plan": _plan,
    "reinstate": _reinstate,
    "mollify": _mollify,
    "bounds": _bounds,
}


def run(args):
    """Execute parsed arguments and return the process exit code."""
    fmt = args.format or DEFAULT_FORMAT[args.command]
    if args.command == "verify":
        text, ok = _verify(args, fmt)
        code = 0 if ok else 1
    else:
        _validate(args)
        text, code = HANDLERS[args.command](args, fmt), 0
    # everything is computed before the artifact is written
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return run(args)
    except (UsageError, CoulombOTError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
