"""Command-line front end: reproducible runs with machine-readable output.

Subcommands: critfind (critical-component detection for a named field),
plan (sequential or fiberwise planner from a tuple file), pairs
(common-tangent pair search on a hypersurface), bound (upper-bound
evaluation), verify (the acceptance suite).  Exit codes: 0 success,
1 domain error, 2 usage error.  Fixing --seed makes the JSON output
byte-identical across runs on the same platform.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import acceptance
from .bounds import (
    BoundInput,
    ls_upper_bound,
    product_spheres_bound,
    unit_tangent_bound,
)
from .constraints import torus_of_revolution_field
from .errors import LsnavError
from .flow import FlowConfig, components_to_json, find_critical_components, height_field
from .manifolds import (
    Ellipsoid,
    ImplicitHypersurface,
    ProductSpheres,
    Sphere,
    StiefelV2,
    random_points,
    spec_from_json,
)
from .navigation import (
    NavTuple,
    PairSearchConfig,
    classify_sphere_critical,
    find_parallel_pairs,
    nav_field,
)
from .paths import path_fibration, plan_product_odd_spheres
from .unit_tangent import FiberTuple, f_ut_field, fiber_fibration, sigma_u_planner


def _parse_manifold(text: str):
    """sphere:N | product:N1,N2,... | ellipsoid:a,b,c | stiefel:FRAME_DIM | @spec.json"""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return spec_from_json(json.load(fh))
    kind, _, rest = text.partition(":")
    if kind == "sphere":
        return Sphere(int(rest))
    if kind == "product":
        return ProductSpheres(tuple(int(v) for v in rest.split(",")))
    if kind == "ellipsoid":
        return Ellipsoid(tuple(float(v) for v in rest.split(",")))
    if kind == "stiefel":
        return StiefelV2(int(rest))
    raise argparse.ArgumentTypeError(
        f"unknown manifold {text!r} (use sphere:N, product:N1,N2, ellipsoid:a,b,c, "
        "stiefel:FRAME_DIM, or @file.json)"
    )


def _emit(args, payload, text_renderer=None):
    if args.format == "json":
        out = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        out = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True)
    else:
        out = text_renderer() if text_renderer else json.dumps(payload, indent=2, sort_keys=True)
        if not out.endswith("\n"):
            out += "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _flow_config(args) -> FlowConfig:
    return FlowConfig(step=args.step, max_time=args.max_time,
                      grad_tol=args.grad_tol, cluster_tol=args.cluster_tol)


def cmd_critfind(args) -> int:
    rng = np.random.default_rng(args.seed)
    spec = args.manifold
    if args.field == "nav":
        field = nav_field(spec, args.r)
    elif args.field == "ut-f":
        if not isinstance(spec, StiefelV2):
            raise LsnavError("field ut-f lives on a frame manifold (stiefel:FRAME_DIM)")
        field = f_ut_field(spec)
    elif args.field == "height":
        field = height_field(spec)
    else:  # pragma: no cover - argparse restricts choices
        raise LsnavError(f"unknown field {args.field}")
    seeds = random_points(field.spec, args.seeds, rng)
    comps = find_critical_components(field, seeds, _flow_config(args))
    payload = components_to_json(comps)

    def text():
        lines = [f"{'value':>12}  {'label':<12}  representatives"]
        for c in comps:
            lines.append(f"{c.value:>12.6f}  {c.label:<12}  {c.representatives.shape[0]}")
        return "\n".join(lines)

    _emit(args, payload, text)
    return 0


def _load_tuple(path: str) -> np.ndarray:
    with open(path) as fh:
        data = json.load(fh)
    return np.asarray(data, dtype=float)


def cmd_plan(args) -> int:
    pts = _load_tuple(args.tuple)
    spec = args.manifold
    if args.planner == "product-spheres":
        t = NavTuple(spec, pts)
        pattern = classify_sphere_critical(t, tol=args.tol)
        path = plan_product_odd_spheres(t, pattern, tol=args.tol)
        reproduced = path_fibration(path, t.r)
        err = float(np.max(np.abs(reproduced.points - t.points)))
    else:
        t = FiberTuple(spec, pts)
        path = sigma_u_planner(t, tol=args.tol)
        reproduced = fiber_fibration(path, t.r)
        err = float(np.max(np.abs(reproduced.entries - t.entries)))
    if args.format == "csv":
        _emit(args, path.to_csv(args.samples))
        return 0
    payload = {"schema": "v1", "section_error": err, "path": path.to_json()}
    _emit(args, payload)
    return 0


def cmd_pairs(args) -> int:
    if args.ellipsoid:
        spec = Ellipsoid(tuple(float(v) for v in args.ellipsoid.split(",")))
    elif args.sphere is not None:
        spec = Sphere(args.sphere)
    elif args.torus:
        major, minor = (float(v) for v in args.torus.split(","))
        fld = torus_of_revolution_field(major, minor)
        spec = ImplicitHypersurface(fld, minor**2)
    else:
        raise LsnavError("choose a surface: --ellipsoid, --sphere or --torus")
    census = find_parallel_pairs(
        spec, PairSearchConfig(n_seeds=args.seeds, rng_seed=args.seed)
    )
    _emit(args, census.to_json())
    return 0


def cmd_bound(args) -> int:
    chosen = [bool(args.unit_tangent), bool(args.product_spheres), bool(args.components)]
    if sum(chosen) != 1:
        raise LsnavError("choose exactly one of --unit-tangent, --product-spheres, --components")
    if args.unit_tangent:
        if args.m is None or args.r is None:
            raise LsnavError("--unit-tangent needs --m and --r")
        result = unit_tangent_bound(args.m, args.r)
    elif args.product_spheres:
        if args.k is None or args.r is None:
            raise LsnavError("--product-spheres needs --k and --r")
        result = product_spheres_bound(args.k, args.r)
    else:
        with open(args.components) as fh:
            data = json.load(fh)
        entries = [(c["value"], c.get("complexity"), c.get("label", ""))
                   for c in data["components"]]
        result = ls_upper_bound(BoundInput.plain(entries), lambda_cut=args.lambda_cut)
    _emit(args, result.to_json(), result.table)
    return 0


def cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [int(v) for v in args.only.split(",")]
    results = acceptance.run(only=only, seed=args.seed)
    passed = all(r.passed for r in results)
    print(("ALL PASS" if passed else "FAILURES PRESENT")
          + f"  ({sum(r.passed for r in results)}/{len(results)})")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsnav",
        description="Pseudo-gradient flows, navigation functions, explicit "
                    "motion planners and Lusternik-Schnirelmann bound "
                    "aggregation on embedded manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p):
        p.add_argument("--output", help="write output to this path instead of stdout")
        p.add_argument("--format", choices=["json", "csv", "text"], default="json")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (fixed seed gives byte-identical output)")

    p = sub.add_parser(
        "critfind",
        help="detect critical components of a scalar field by pseudo-gradient "
             "flow plus damped-Newton refinement",
        description="Detect critical components of a named field: 'nav' is the "
                    "chained squared-distance navigation function on M^r, "
                    "'ut-f' the invariant function <i x, v> on a unit tangent "
                    "bundle, 'height' a coordinate height function.",
    )
    p.add_argument("--field", choices=["nav", "ut-f", "height"], required=True)
    p.add_argument("--manifold", type=_parse_manifold, required=True,
                   help="sphere:N | product:N1,N2 | ellipsoid:a,b,c | stiefel:FRAME_DIM | @spec.json")
    p.add_argument("--r", type=int, default=2, help="number of waypoints for the nav field")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--max-time", type=float, default=200.0)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--cluster-tol", type=float, default=1e-4)
    common_io(p)
    p.set_defaults(fn=cmd_critfind)

    p = sub.add_parser(
        "plan",
        help="run a motion planner on a critical tuple file",
        description="Produce a section of the evaluation fibration on a "
                    "critical tuple: the sequential planner on products of "
                    "odd spheres, or the fiberwise rotational planner on a "
                    "unit tangent bundle.",
    )
    p.add_argument("--planner", choices=["product-spheres", "sigma-u"], required=True)
    p.add_argument("--tuple", required=True, help="JSON file: array of coordinate arrays")
    p.add_argument("--manifold", type=_parse_manifold, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--samples", type=int, default=256, help="dense samples for csv export")
    common_io(p)
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser(
        "pairs",
        help="count common-tangent pairs on a compact hypersurface",
        description="Multistart Newton search for unordered pairs {x, y} with "
                    "T_x M = T_y M perpendicular to the chord; their count "
                    "bounds TC(M) - 1 from below.",
    )
    p.add_argument("--ellipsoid", help="semiaxes a,b,c")
    p.add_argument("--sphere", type=int, help="sphere dimension n")
    p.add_argument("--torus", help="major,minor radii of a torus of revolution")
    p.add_argument("--seeds", type=int, default=10000)
    common_io(p)
    p.set_defaults(fn=cmd_pairs)

    p = sub.add_parser(
        "bound",
        help="evaluate Lusternik-Schnirelmann-type upper bounds",
        description="Sum over critical values of the per-value maximum "
                    "subspace complexity: closed forms for products of odd "
                    "spheres (k(r-1)+1) and unit tangent bundles of "
                    "S^(4m-1) (r+1, exact), or a components JSON file.",
    )
    p.add_argument("--unit-tangent", action="store_true")
    p.add_argument("--product-spheres", action="store_true")
    p.add_argument("--components", help="JSON file with a components list")
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--lambda-cut", type=float, default=float("inf"))
    common_io(p)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser(
        "verify",
        help="run the acceptance suite and print a pass/fail table",
        description="Run every acceptance criterion at its pinned tolerance "
                    "and print one pass/fail line per criterion.",
    )
    p.add_argument("--only", help="comma-separated criterion numbers, e.g. 3,9")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LsnavError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": "FileNotFound", "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
