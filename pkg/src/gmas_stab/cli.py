"""``gmas-stab`` command line.

Exit codes: 0 analysis completed (whatever the verdicts), 1 internal
numerical failure, 2 input error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import full_report, uniqueness_check
from .catalog import EXAMPLE_NAMES, template_texts
from .dynamics import construct_rates, cycle_limit_matrix, integrate
from .errors import (
    GmasError,
    NetworkSyntaxError,
    NetworkValidationError,
    PreconditionError,
    ResourceLimitError,
    StiffnessError,
)
from .linalg import Subspace, is_P0plus_matrix
from .network import DEFAULT_CYCLE_CAP, enumerate_cycles, parse_network, stoichiometric_subspace
from .stability import DEFAULT_OPTIONS, _jsonable, notion_lattice_check

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


class InputError(Exception):
    pass


def _floats(text, what):
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_network(path):
    return parse_network(_read_text(path))


def _read_matrix(spec):
    """Matrix from a CSV file, or inline rows separated by ';'."""
    p = Path(spec)
    text = _read_text(spec) if p.exists() else spec.replace(";", "\n")
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        M = np.array([[float(x) for x in r.split(",")] for r in rows], dtype=float)
    except ValueError:
        if not p.exists() and ";" not in spec and "," not in spec:
            raise InputError(f"cannot read {spec}: no such file") from None
        raise InputError(f"{spec}: matrix rows must be comma-separated numbers") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.size == 0:
        raise InputError(f"{spec}: square matrix required, got shape {M.shape}")
    return M


def _options(args):
    opts = DEFAULT_OPTIONS
    if getattr(args, "seed", None) is not None:
        opts = replace(opts, seed=args.seed)
    if getattr(args, "samples", None) is not None:
        if args.samples < 1:
            raise InputError("--samples must be at least 1")
        opts = replace(opts, samples=args.samples)
    if getattr(args, "tol", None) is not None:
        if not args.tol > 0:
            raise InputError("--tol must be positive")
        opts = replace(opts, tau=args.tol)
    return opts


def _emit(text, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(args):
    net = _load_network(args.path)
    rep = full_report(net, _options(args), args.cycle_cap)
    _emit(rep.to_json() + "\n" if args.format == "json" else rep.to_text(), args.out)
    if any(e["kind"] == "resource_limit" for e in rep.errors):
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_stability(args):
    A = _read_matrix(args.matrix)
    S = None
    if args.subspace:
        B = _read_matrix_rect(args.subspace)
        if B.shape[0] != A.shape[0]:
            raise InputError("subspace basis must have one row per matrix row")
        S = Subspace.from_span(B)
    verdicts = notion_lattice_check(A, S, _options(args))
    p0 = bool(is_P0plus_matrix(A, max_order=None if S is None else S.dim))
    if args.format == "json":
        out = {"matrix": A, "subspace_dim": None if S is None else S.dim, "P0plus": p0,
               "notions": {v.notion.value: v.to_dict() for v in verdicts}}
        _emit(_dumps(out), args.out)
    else:
        lines = [f"{'notion':<20}{'status':<14}{'method':<20}provenance"]
        for v in verdicts:
            lines.append(f"{v.notion.value:<20}{v.status.value:<14}{v.method.value:<20}"
                         f"{'certified' if v.certified else 'sampled'}")
        lines.append(f"{'P0plus':<20}{'holds' if p0 else 'fails':<14}{'signed_minors':<20}certified")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _read_matrix_rect(path):
    text = _read_text(path)
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        M = np.array([[float(x) for x in r.split(",")] for r in rows], dtype=float)
    except ValueError:
        raise InputError(f"{path}: rows must be comma-separated numbers") from None
    return np.atleast_2d(M)


def cmd_simulate(args):
    net = _load_network(args.path)
    reference = None
    k = None
    if args.rates:
        k = _floats(args.rates, "--rates")
        if k.size != net.n_edges:
            raise InputError(f"--rates needs {net.n_edges} values, got {k.size}")
    if args.perturb_equilibrium:
        vals = _floats(args.perturb_equilibrium, "--perturb-equilibrium")
        if vals.size != net.n + 1:
            raise InputError(f"--perturb-equilibrium needs {net.n} coordinates and a magnitude")
        reference, mag = vals[:-1], vals[-1]
        if k is None:
            k = net.rate_vector()
        if k is None:
            k = construct_rates(net, reference).k
            sys.stderr.write("note: rates constructed so the reference point is complex balanced\n")
        S = stoichiometric_subspace(net)
        rng = np.random.default_rng(args.seed)
        w = S.basis @ rng.standard_normal(S.dim) if S.dim else np.zeros(net.n)
        if np.linalg.norm(w) > 0:
            w = w / np.linalg.norm(w)
        x0 = reference + mag * np.linalg.norm(reference) * w
        if not np.all(x0 > 0):
            raise InputError("perturbation leaves the positive orthant")
    elif args.x0:
        x0 = _floats(args.x0, "--x0")
        if x0.size != net.n:
            raise InputError(f"--x0 needs {net.n} values")
        reference = x0
    else:
        raise InputError("give --x0 or --perturb-equilibrium")
    if k is None:
        k = net.rate_vector()
    if k is None:
        raise InputError("rate constants missing: put them in the file or pass --rates")
    status = 0
    try:
        traj = integrate(net, k, x0, args.t_end)
    except StiffnessError as exc:
        traj = exc.trajectory
        sys.stderr.write(f"warning: {exc}\n")
    _emit(traj.to_csv(), args.out)
    dist0 = float(np.linalg.norm(traj.x[0] - reference))
    dist = float(np.linalg.norm(traj.x[-1] - reference))
    sys.stderr.write(f"summary: status={traj.status} t_final={traj.t[-1]:.6g} "
                     f"initial_distance={dist0:.6g} final_distance={dist:.6g} "
                     f"max_drift={traj.max_drift:.3g}\n")
    if traj.status == "positivity_floor":
        sys.stderr.write(f"warning: {traj.message}\n")
    return status


def cmd_cycles(args):
    net = _load_network(args.path)
    cycles = enumerate_cycles(net, args.cycle_cap)
    rows = []
    for c in cycles:
        A_C, S_C = cycle_limit_matrix(net, c)
        rows.append({"vertices": [net.vertices[i].name for i in c.vertex_indices],
                     "edges": list(c.edge_indices), "subspace_dim": S_C.dim, "A": A_C})
    if args.format == "json":
        _emit(_dumps({"cycles": rows}), args.out)
    else:
        lines = [f"{len(rows)} simple cycle(s)"]
        for r in rows:
            lines.append(f"{' -> '.join(r['vertices'])} (dim S^C = {r['subspace_dim']})")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_uniqueness(args):
    net = _load_network(args.path)
    res = uniqueness_check(net, args.cycle_cap)
    if args.format == "json":
        _emit(_dumps(res.to_dict()), args.out)
    elif res.unique:
        _emit("unique\n", args.out)
    else:
        _emit(f"not unique\nu = {res.u.tolist()}\nv = {res.v.tolist()}\n"
              f"x* = {res.x_star.tolist()}\nk = {res.k.tolist()}\n"
              f"|J v| = {res.Jv_norm:.3g} (bound {res.bound:.3g})\n", args.out)
    return EXIT_OK


def cmd_examples(args):
    if args.name not in EXAMPLE_NAMES:
        raise InputError(f"unknown example {args.name!r}; choose from {', '.join(EXAMPLE_NAMES)}")
    d = Path(args.out or ".")
    d.mkdir(parents=True, exist_ok=True)
    for fn, text in template_texts(args.name).items():
        (d / fn).write_text(text)
        print(d / fn)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="eigenvalue tolerance tau")
    common.add_argument("--cycle-cap", type=int, default=DEFAULT_CYCLE_CAP)
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="gmas-stab",
                                description="Stability of complex-balanced equilibria in generalized mass-action systems")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="full report for a network file")
    a.add_argument("path")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("stability", parents=[common], help="eight stability notions of a matrix")
    s.add_argument("matrix", help="CSV file, or inline rows like '-1,0;0,-1'")
    s.add_argument("--subspace", default=None, help="CSV file whose columns span the subspace")
    s.set_defaults(func=cmd_stability)

    m = sub.add_parser("simulate", parents=[common], help="integrate the ODE, CSV output")
    m.add_argument("path")
    m.add_argument("--rates", default=None)
    m.add_argument("--x0", default=None)
    m.add_argument("--perturb-equilibrium", default=None, metavar="X1,...,XN,MAG")
    m.add_argument("--t-end", type=float, default=50.0)
    m.set_defaults(func=cmd_simulate, seed=0)

    c = sub.add_parser("cycles", parents=[common], help="list simple cycles")
    c.add_argument("path")
    c.set_defaults(func=cmd_cycles)

    u = sub.add_parser("uniqueness", parents=[common], help="sign-vector uniqueness test")
    u.add_argument("path")
    u.set_defaults(func=cmd_uniqueness)

    e = sub.add_parser("examples", help="write bundled example files")
    e.add_argument("name")
    e.add_argument("--out", default=None, help="target directory (default: current)")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NetworkSyntaxError, NetworkValidationError, PreconditionError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ResourceLimitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RESOURCE
    except GmasError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
