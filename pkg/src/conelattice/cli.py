"""Command-line front end.

Exit codes: 0 success / no counterexample, 1 refuted or property failure,
2 schema error, 3 dimension mismatch, 4 non-convergence.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import certify as cert
from ._validation import DEFAULT_TOL, DimensionError, SchemaError, as_vector
from .cones import ConeSpec, cone_from_dict
from .lattice import comparable, join, meet, minimal_invariant
from .results import Verdict
from .sets import (
    ConvergenceError,
    Hyperplane,
    Polyhedron,
    project_hyperplane,
    project_polyhedron,
)
from .suite import CONE_FAMILIES, faulty_meet, run_suite, standard_meet
from .vi import VIProblem, affine_map, ncp_solve, solve_vi

EXIT_OK, EXIT_REFUTED, EXIT_SCHEMA, EXIT_DIM, EXIT_NOCONV = 0, 1, 2, 3, 4


@dataclass
class ProblemFile:
    cone: ConeSpec
    polyhedron: Polyhedron = None
    hyperplane: Hyperplane = None
    points: dict = field(default_factory=dict)
    vi: dict = None
    generators: np.ndarray = None
    seed: int = 42
    tol: float = DEFAULT_TOL


def parse_problem(data):
    if not isinstance(data, dict):
        raise SchemaError("problem file must contain a JSON object")
    if "cone" not in data:
        raise SchemaError("problem file needs a 'cone' entry")
    K = cone_from_dict(data["cone"])
    prob = ProblemFile(K, seed=int(data.get("seed", 42)), tol=float(data.get("tol", DEFAULT_TOL)))
    if "polyhedron" in data:
        prob.polyhedron = Polyhedron.from_dict(data["polyhedron"])
        if prob.polyhedron.dim != K.dim:
            raise DimensionError(f"polyhedron has dimension {prob.polyhedron.dim}, cone {K.dim}")
    if "hyperplane" in data:
        h = data["hyperplane"]
        try:
            prob.hyperplane = Hyperplane(h["u"], h.get("b", 0.0))
        except (KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"invalid hyperplane: {exc}") from None
        if prob.hyperplane.dim != K.dim:
            raise DimensionError(f"hyperplane has dimension {prob.hyperplane.dim}, cone {K.dim}")
    points = data.get("points", {})
    if not isinstance(points, dict):
        raise SchemaError("'points' must map names to vectors")
    for name, v in points.items():
        if not isinstance(v, list):
            raise SchemaError(f"point {name!r} must be a list of numbers")
        try:
            prob.points[name] = as_vector(v, K.dim, name)
        except DimensionError:
            raise
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"point {name!r}: {exc}") from None
    if "generators" in data:
        G = np.atleast_2d(np.asarray(data["generators"], dtype=float))
        if G.shape[1] != K.dim:
            raise DimensionError(f"generators have dimension {G.shape[1]}, cone {K.dim}")
        prob.generators = G
    prob.vi = data.get("vi")
    return prob


def load_problem(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return parse_problem(data)


def fmt(v):
    """17 significant digits, enough to round-trip any double."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        return format(float(v), ".17g")
    return "(" + ", ".join(format(float(c), ".17g") for c in v) + ")"


def _point(prob, name):
    if name not in prob.points:
        raise SchemaError(f"point {name!r} not in problem file (have {sorted(prob.points)})")
    return prob.points[name]


def _emit(args, payload):
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def cmd_project(args, prob):
    x = _point(prob, args.point)
    target = args.target
    if target == "cone":
        p = prob.cone.project(x)
    elif target == "polyhedron":
        if prob.polyhedron is None:
            raise SchemaError("problem file has no polyhedron")
        p = project_polyhedron(prob.polyhedron, x)
    else:
        if prob.hyperplane is None:
            raise SchemaError("problem file has no hyperplane")
        p = project_hyperplane(prob.hyperplane, x)
    print(f"P_{target}{fmt(x)} = {fmt(p)}")
    _emit(args, {"target": target, "point": args.point, "input": x.tolist(), "projection": p.tolist()})
    return EXIT_OK


def cmd_meetjoin(args, prob):
    K = prob.cone
    x, y = _point(prob, args.x), _point(prob, args.y)
    lo, hi = meet(K, x, y), join(K, x, y)
    comp = comparable(K, x, y, args.tol)
    print(f"meet = {fmt(lo)}")
    print(f"join = {fmt(hi)}")
    print(f"comparable = {comp}")
    payload = {"meet": lo.tolist(), "join": hi.tolist(), "comparable": comp, "rectangle": None}
    if not comp:
        rect = minimal_invariant(K, x, y, args.tol).rect
        print("rectangle vertices: " + ", ".join(fmt(v) for v in rect.vertices))
        payload["rectangle"] = rect.to_dict()
    _emit(args, payload)
    return EXIT_OK


def cmd_certify(args, prob):
    K = prob.cone
    method = None if args.method == "auto" else args.method
    target = args.target or ("polyhedron" if prob.polyhedron is not None else "hyperplane")
    if target == "polyhedron":
        if prob.polyhedron is None:
            raise SchemaError("problem file has no polyhedron")
        report = cert.certify_polyhedron(K, prob.polyhedron, method, args.n, args.seed, args.tol)
        for i, c in report.per_facet:
            print(f"facet {i}: {c.verdict.value} ({c.method.value}) {c.note}".rstrip())
        print(f"invariant: {report.invariant.value}")
        print(f"isotone: {report.isotone.value}")
        _emit(args, report.to_dict())
        verdict = report.invariant
    else:
        if prob.hyperplane is None:
            raise SchemaError("problem file has no hyperplane")
        c = cert.certify_hyperplane(K, prob.hyperplane.u, method, args.n, args.seed, args.tol, prob.generators)
        _print_cert("hyperplane", c)
        _emit(args, c.to_dict())
        verdict = c.verdict
    return EXIT_REFUTED if verdict is Verdict.REFUTED else EXIT_OK


def _print_cert(label, c):
    print(f"{label}: {c.verdict.value} ({c.method.value}, samples={c.samples_used}) {c.note}".rstrip())
    if c.witness is not None:
        print(f"  witness: {fmt(c.witness[0])}, {fmt(c.witness[1])}")


def cmd_falsify(args, prob):
    K = prob.cone
    target = args.target or ("polyhedron" if prob.polyhedron is not None else "hyperplane")
    if target == "polyhedron":
        P = prob.polyhedron
        if P is None:
            raise SchemaError("problem file has no polyhedron")
        sampler = cert.polyhedron_sampler(P, args.radius)
        member = cert.polyhedron_member(P, 1e-8)
        projector = cert.polyhedron_projector(P)
        origin = project_polyhedron(P, np.zeros(P.dim))
    else:
        H = prob.hyperplane
        if H is None:
            raise SchemaError("problem file has no hyperplane")
        origin = project_hyperplane(H, np.zeros(H.dim))
        sampler = lambda rng, n: project_hyperplane(H, origin + args.radius * rng.standard_normal((n, H.dim)))  # noqa: E731
        member = lambda X: H.contains(X, 1e-8)  # noqa: E731
        projector = lambda X: project_hyperplane(H, X)  # noqa: E731
    inv = cert.falsify_invariance(K, member, sampler, args.n, args.seed)
    pairs = cert.ordered_pair_sampler(K, cert.gaussian_sampler(K.dim, origin, args.radius), args.radius)
    iso = cert.falsify_isotonicity(K, projector, pairs, args.n, args.seed, 1e-8)
    _print_cert("invariance", inv)
    _print_cert("isotonicity", iso)
    _emit(args, {"invariance": inv.to_dict(), "isotonicity": iso.to_dict()})
    return EXIT_REFUTED if (inv.refuted or iso.refuted) else EXIT_OK


def parse_dims(text):
    dims = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            dims.extend(range(int(lo), int(hi) + 1))
        else:
            dims.append(int(part))
    return dims


def cmd_props(args, _prob=None):
    families = [c.strip() for c in args.cones.split(",") if c.strip()]
    for f in families:
        if f not in CONE_FAMILIES:
            raise SchemaError(f"unknown cone family {f!r}; choose from {', '.join(CONE_FAMILIES)}")
    meet_impl = faulty_meet if args.inject_fault == "meet-no-subtract" else standard_meet
    results = run_suite(families, parse_dims(args.dims), args.n, args.seed, meet=meet_impl)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed += not r.passed
        line = f"{status} {r.cone:8s} dim={r.dim:<3d} {r.name:30s} worst={r.worst:.3e} bound={r.bound:.1e}"
        if r.extra and "empirical_best_constant" in r.extra:
            line += f" best_constant={r.extra['empirical_best_constant']:.4f}"
        print(line)
    print(f"{len(results) - failed}/{len(results)} properties passed")
    _emit(args, {"results": [r.to_dict() for r in results], "failed": failed})
    return EXIT_REFUTED if failed else EXIT_OK


def _build_map(spec, dim):
    if not isinstance(spec, dict):
        raise SchemaError("vi.map must be an object")
    kind = spec.get("type", "affine")
    if kind == "zero":
        return lambda x: np.zeros_like(x)
    if kind == "affine":
        try:
            M = np.asarray(spec["M"], dtype=float)
            q = spec["q"]
        except KeyError as exc:
            raise SchemaError(f"affine map is missing {exc}") from None
        if M.ndim != 2 or M.shape != (dim, dim):
            raise DimensionError(f"map matrix has shape {M.shape}, expected ({dim}, {dim})")
        return affine_map(M, q)
    raise SchemaError(f"unknown map type {kind!r}")


def cmd_vi(args, prob):
    K = prob.cone
    spec = prob.vi
    if not isinstance(spec, dict):
        raise SchemaError("problem file has no 'vi' block")
    F = _build_map(spec.get("map", {}), K.dim)
    try:
        x0 = spec["x0"]
    except KeyError:
        raise SchemaError("vi block needs x0") from None
    step = float(spec.get("step", 0.5))
    tol = float(spec.get("tol", 1e-8))
    max_iter = int(args.max_iter if args.max_iter is not None else spec.get("max_iter", 1000))
    mode = spec.get("mode", "ncp")
    if mode == "ncp":
        traj = ncp_solve(K, F, x0, step, tol, max_iter)
    elif mode == "vi":
        dom = spec.get("domain", "polyhedron")
        if dom == "polyhedron":
            if prob.polyhedron is None:
                raise SchemaError("vi domain 'polyhedron' but the file has none")
            domain = prob.polyhedron
        elif dom == "cone":
            domain = K
        else:
            raise SchemaError(f"unknown vi domain {dom!r}")
        traj = solve_vi(VIProblem(domain, F, x0, step, tol, max_iter), K)
    else:
        raise SchemaError(f"unknown vi mode {mode!r}")
    print(f"solution = {fmt(traj.solution)}")
    print(f"residual = {fmt(traj.residuals[-1])}")
    print(f"iterations = {traj.iterations}")
    print(f"order_monotone_prefix = {traj.order_monotone_prefix}")
    print(f"converged = {traj.converged}")
    payload = traj.to_dict(thin=int(spec.get("thin", 1)))
    payload["solution"] = np.asarray(traj.solution).tolist()
    _emit(args, payload)
    if not traj.converged:
        print("residuals: " + ", ".join(format(r, ".3e") for r in traj.residuals[-5:]), file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write JSON output to PATH")
    common.add_argument("--seed", type=int, help="random seed (default: file's seed, else 42)")
    common.add_argument("--tol", type=float, help=f"tolerance (default: file's tol, else {DEFAULT_TOL})")

    with_file = argparse.ArgumentParser(add_help=False, parents=[common])
    with_file.add_argument("--in", dest="infile", required=True, metavar="PATH", help="JSON problem file")

    parser = argparse.ArgumentParser(
        prog="conelattice",
        description="Self-dual cone lattice operations, projections and invariance certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", parents=[with_file], help="project a named point")
    p.add_argument("--point", default="x")
    p.add_argument("--target", choices=["cone", "polyhedron", "hyperplane"], default="cone")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("meetjoin", parents=[with_file], help="meet, join and minimal invariant set")
    p.add_argument("--x", default="x")
    p.add_argument("--y", default="y")
    p.set_defaults(func=cmd_meetjoin)

    p = sub.add_parser("certify", parents=[with_file], help="certify a hyperplane or polyhedron")
    p.add_argument("--target", choices=["hyperplane", "polyhedron"])
    p.add_argument("--method", choices=["auto", "closed", "bilinear", "sampled"], default="auto")
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("falsify", parents=[with_file], help="sampled invariance and isotonicity search")
    p.add_argument("--target", choices=["hyperplane", "polyhedron"])
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--radius", type=float, default=2.0)
    p.set_defaults(func=cmd_falsify)

    p = sub.add_parser("props", parents=[common], help="run the randomized property suite")
    p.add_argument("--cones", default="orthant,lorentz")
    p.add_argument("--dims", default="2-6")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--inject-fault", choices=["none", "meet-no-subtract"], default="none",
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("vi", parents=[with_file], help="projection iteration for a VI or NCP")
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_vi)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        prob = None
        if hasattr(args, "infile"):
            prob = load_problem(args.infile)
        if args.seed is None:
            args.seed = prob.seed if prob else 42
        if args.tol is None:
            args.tol = prob.tol if prob else DEFAULT_TOL
        return args.func(args, prob)
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (ValueError, OSError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())

