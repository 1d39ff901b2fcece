"""Command-line interface: check, falsify, tangent, version.

Problems arrive as JSON files with a required schema field "nagumo/1", a
tagged set object, a tagged system object, and optional solver options.
Reports are machine-readable JSON on stdout (deterministic modulo the
timing block, which --no-timing drops) with a human summary on stderr.

Exit codes: 0 invariant / no exit found, 1 not invariant / exit found,
2 unknown, 64 input error, 65 point not on the boundary, 70 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .checkers import Decision, Verdict, check
from .dynamics import falsify
from .errors import (
    ApexPoint,
    EmptyBoundary,
    EmptySet,
    InputError,
    NotMember,
    ToolkitError,
)
from .expressions import build_expression_system
from .numerics import DEFAULT_TOLS, Tolerances
from .sets import (
    BoundaryPoint,
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    Membership,
    VCone,
    VPolytope,
    membership,
    orthant_h,
)
from .systems import LinearSystem
from .tangent import (
    FULLSPACE,
    GENERATED,
    HALFSPACES,
    QUADRATIC,
    SELF_CONE,
    tangent_cone_at,
    tangent_h,
    tangent_polytope,
    tangent_quadratic,
    tangent_vcone,
)

SCHEMA = "nagumo/1"

EXIT_INVARIANT = 0
EXIT_NOT_INVARIANT = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 64
EXIT_NOT_BOUNDARY = 65
EXIT_NUMERIC = 70

_DECISION_EXIT = {
    Decision.INVARIANT: EXIT_INVARIANT,
    Decision.NOT_INVARIANT: EXIT_NOT_INVARIANT,
    Decision.UNKNOWN: EXIT_UNKNOWN,
}


def _require_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _require_vector(obj, path):
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{path}: expected a non-empty array of numbers")
    return [_require_number(v, f"{path}[{k}]") for k, v in enumerate(obj)]


def _require_matrix(obj, path):
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{path}: expected a non-empty array of rows")
    rows = []
    width = None
    for k, row in enumerate(obj):
        vals = _require_vector(row, f"{path}[{k}]")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise InputError(f"{path}[{k}]: row length {len(vals)} != {width}")
        rows.append(vals)
    return rows


def set_from_dict(d: dict):
    """Build (set object, tag) from a tagged JSON object."""
    if not isinstance(d, dict) or "type" not in d:
        raise InputError("set: expected an object with a 'type' tag")
    tag = d["type"]
    try:
        if tag == "hpolyhedron":
            return HPolyhedron(_require_matrix(d.get("G"), "set.G"),
                               _require_vector(d.get("b"), "set.b")), tag
        if tag == "vpolytope":
            return VPolytope(_require_matrix(d.get("vertices"), "set.vertices")), tag
        if tag == "vcone":
            return VCone(_require_matrix(d.get("rays"), "set.rays")), tag
        if tag == "ellipsoid":
            return Ellipsoid(_require_matrix(d.get("Q"), "set.Q")), tag
        if tag == "lorenz":
            u_n = d.get("u_n")
            if u_n is not None:
                u_n = _require_vector(u_n, "set.u_n")
            return LorenzCone(_require_matrix(d.get("Q"), "set.Q"), u_n=u_n), tag
        if tag == "orthant":
            n = d.get("n")
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise InputError("set.n: expected a positive integer")
            return orthant_h(n), tag
    except ToolkitError as exc:
        raise InputError(f"set: {exc}") from exc
    raise InputError(f"set.type: unknown tag {tag!r}")


def set_to_dict(s, tag: str) -> dict:
    """Canonical JSON form of a set (the quadratic cone exposes its axis sign)."""
    if tag == "orthant":
        return {"type": "orthant", "n": s.dim}
    if isinstance(s, HPolyhedron):
        return {"type": "hpolyhedron", "G": s.G.tolist(), "b": s.b.tolist()}
    if isinstance(s, VPolytope):
        return {"type": "vpolytope", "vertices": s.vertices.tolist()}
    if isinstance(s, VCone):
        return {"type": "vcone", "rays": s.rays.tolist()}
    if isinstance(s, Ellipsoid):
        return {"type": "ellipsoid", "Q": s.Q.tolist()}
    if isinstance(s, LorenzCone):
        return {"type": "lorenz", "Q": s.Q.tolist(), "u_n": s.u_n.tolist()}
    raise InputError(f"unsupported set type {type(s).__name__}")


def system_from_dict(d: dict, dim: int):
    if not isinstance(d, dict) or "type" not in d:
        raise InputError("system: expected an object with a 'type' tag")
    tag = d["type"]
    if tag == "linear":
        a = _require_matrix(d.get("A"), "system.A")
        if len(a) != dim or len(a[0]) != dim:
            raise InputError(f"system.A: expected a {dim}x{dim} matrix")
        return LinearSystem(a), {"type": "linear", "A": a}
    if tag == "expression":
        formulas = d.get("formulas")
        if not isinstance(formulas, list) or not all(isinstance(f, str) for f in formulas):
            raise InputError("system.formulas: expected an array of strings")
        if len(formulas) != dim:
            raise InputError(f"system.formulas: expected {dim} formulas, got {len(formulas)}")
        try:
            return build_expression_system(formulas), {"type": "expression", "formulas": formulas}
        except InputError as exc:
            raise InputError(f"system.formulas: {exc}") from exc
    raise InputError(f"system.type: unknown tag {tag!r}")


_OPTION_FIELDS = ("tolerance", "seed", "n_samples", "horizon", "step", "t0")
_OPTION_DEFAULTS = {
    "tolerance": DEFAULT_TOLS.cone,
    "seed": 0,
    "n_samples": 10000,
    "horizon": 10.0,
    "step": 1e-3,
    "t0": 0.0,
}


def resolve_options(file_options, args) -> dict:
    """Defaults, overridden by the problem file, overridden by flags."""
    opts = dict(_OPTION_DEFAULTS)
    if file_options is not None:
        if not isinstance(file_options, dict):
            raise InputError("options: expected an object")
        for key, value in file_options.items():
            if key not in opts:
                raise InputError(f"options.{key}: unknown option")
            if key in ("seed", "n_samples"):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise InputError(f"options.{key}: expected an integer")
                opts[key] = value
            else:
                opts[key] = _require_number(value, f"options.{key}")
    for key, flag in (("tolerance", "tolerance"), ("seed", "seed"),
                      ("n_samples", "samples"), ("horizon", "horizon"),
                      ("step", "step"), ("t0", None)):
        if flag is None:
            continue
        val = getattr(args, flag, None)
        if val is not None:
            opts[key] = val
    return opts


def load_problem(path: str, args):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise InputError("problem: expected a JSON object")
    if raw.get("schema") != SCHEMA:
        raise InputError(f"schema: expected {SCHEMA!r}, got {raw.get('schema')!r}")
    if "set" not in raw:
        raise InputError("set: missing")
    if "system" not in raw:
        raise InputError("system: missing")
    s, tag = set_from_dict(raw["set"])
    sys_obj, sys_echo = system_from_dict(raw["system"], s.dim)
    opts = resolve_options(raw.get("options"), args)
    return s, tag, sys_obj, sys_echo, opts


def _tols_with(tolerance: float) -> Tolerances:
    from dataclasses import replace

    return replace(DEFAULT_TOLS, cone=tolerance, boundary_band=tolerance)


def _emit(report: dict, summary: str, args) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(summary, file=sys.stderr)


def _verdict_report(verdict: Verdict) -> dict:
    cert = None
    if verdict.certificate is not None:
        cert = {"kind": verdict.certificate.kind, "data": verdict.certificate.data}
    cx = None
    if verdict.counterexample is not None:
        cx = {"point": [float(v) for v in verdict.counterexample.point],
              "violation": float(verdict.counterexample.violation)}
    return {"decision": verdict.decision.value, "certificate": cert,
            "counterexample": cx, "notes": verdict.notes}


def cmd_check(args) -> int:
    t_start = time.perf_counter()
    s, tag, sys_obj, sys_echo, opts = load_problem(args.file, args)
    t_parsed = time.perf_counter()
    verdict = check(s, sys_obj, t0=opts["t0"], n_samples=opts["n_samples"],
                    seed=opts["seed"], orthant=(tag == "orthant"),
                    tols=_tols_with(opts["tolerance"]))
    t_done = time.perf_counter()
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": "check",
        "problem": {"set": set_to_dict(s, tag), "system": sys_echo},
        "options": opts,
    }
    report.update(_verdict_report(verdict))
    if not args.no_timing:
        report["timing"] = {"parse_s": t_parsed - t_start,
                            "check_s": t_done - t_parsed,
                            "total_s": t_done - t_start}
    _emit(report, f"decision: {verdict.decision.value}", args)
    return _DECISION_EXIT[verdict.decision]


def cmd_falsify(args) -> int:
    t_start = time.perf_counter()
    s, tag, sys_obj, sys_echo, opts = load_problem(args.file, args)
    t_parsed = time.perf_counter()
    hit = falsify(s, sys_obj, n_starts=opts["n_samples"], horizon=opts["horizon"],
                  step=opts["step"], seed=opts["seed"], t0=opts["t0"],
                  tols=_tols_with(opts["tolerance"]))
    t_done = time.perf_counter()
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": "falsify",
        "problem": {"set": set_to_dict(s, tag), "system": sys_echo},
        "options": opts,
        "exit_found": hit is not None,
        "witness": None if hit is None else {"x0": [float(v) for v in hit[0]],
                                             "t_exit": float(hit[1])},
    }
    if not args.no_timing:
        report["timing"] = {"parse_s": t_parsed - t_start,
                            "falsify_s": t_done - t_parsed,
                            "total_s": t_done - t_start}
    summary = "exit found" if hit is not None else "no exit found"
    _emit(report, summary, args)
    return EXIT_NOT_INVARIANT if hit is not None else EXIT_INVARIANT


def _cone_to_dict(t_cone) -> dict:
    if t_cone.kind == FULLSPACE:
        return {"kind": FULLSPACE}
    if t_cone.kind == HALFSPACES:
        return {"kind": HALFSPACES, "normals": t_cone.normals.tolist()}
    if t_cone.kind == QUADRATIC:
        return {"kind": QUADRATIC, "normal": t_cone.q_normal.tolist()}
    if t_cone.kind == GENERATED:
        out = {"kind": GENERATED, "generators": t_cone.generators.tolist()}
        out["free_generator"] = (None if t_cone.free_generator is None
                                 else t_cone.free_generator.tolist())
        return out
    if t_cone.kind == SELF_CONE:
        return {"kind": SELF_CONE}
    raise InputError(f"unknown cone kind {t_cone.kind}")


def _tangent_at(s, x, tols) -> dict:
    if isinstance(s, HPolyhedron):
        return _cone_to_dict(tangent_h(s, x, tols))
    if isinstance(s, VPolytope):
        for i, v in enumerate(s.vertices):
            if np.max(np.abs(v - x)) <= 1e-8 * (1.0 + np.max(np.abs(v))):
                return _cone_to_dict(tangent_polytope(s, i))
        return _cone_to_dict(tangent_cone_at(s, BoundaryPoint(x, None), tols))
    if isinstance(s, VCone):
        for i, r in enumerate(s.rays):
            cross = np.linalg.norm(x) * np.linalg.norm(r)
            if cross > 0 and float(x @ r) >= (1.0 - 1e-10) * cross:
                return _cone_to_dict(tangent_vcone(s, i))
        return _cone_to_dict(tangent_cone_at(s, BoundaryPoint(x, None), tols))
    if isinstance(s, LorenzCone) and float(np.linalg.norm(x)) <= 1e-10:
        return _cone_to_dict(tangent_cone_at(s, BoundaryPoint(x, "apex"), tols))
    return _cone_to_dict(tangent_quadratic(s, x))


def cmd_tangent(args) -> int:
    s, tag, _, _, opts = load_problem(args.file, args)
    try:
        point = json.loads(args.point)
    except json.JSONDecodeError as exc:
        raise InputError(f"point: invalid JSON ({exc})") from exc
    x = np.array(_require_vector(point, "point"))
    if x.shape[0] != s.dim:
        raise InputError(f"point: expected dimension {s.dim}, got {x.shape[0]}")
    tols = _tols_with(opts["tolerance"])
    if membership(s, x, tols) is not Membership.BOUNDARY:
        print("point is not on the set boundary", file=sys.stderr)
        return EXIT_NOT_BOUNDARY
    cone = _tangent_at(s, x, tols)
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": "tangent",
        "problem": {"set": set_to_dict(s, tag)},
        "point": x.tolist(),
        "cone": cone,
        "options": opts,
    }
    _emit(report, f"tangent cone kind: {cone['kind']}", args)
    return EXIT_INVARIANT


def cmd_version(_args) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invarcheck",
        description="Decide positive invariance of convex sets under continuous dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="problem JSON file")
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--no-timing", action="store_true")
        p.add_argument("--output", default=None, help="also write the report here")

    p_check = sub.add_parser("check", help="decide invariance")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_fals = sub.add_parser("falsify", help="search for escaping trajectories")
    common(p_fals)
    p_fals.set_defaults(func=cmd_falsify)

    p_tan = sub.add_parser("tangent", help="print the tangent cone at a boundary point")
    common(p_tan)
    p_tan.add_argument("point", help="inline JSON vector, e.g. \"[1.0, 0.5]\"")
    p_tan.set_defaults(func=cmd_tangent)

    p_ver = sub.add_parser("version", help="print the tool version")
    p_ver.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EmptySet, EmptyBoundary) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotMember, ApexPoint) as exc:
        print(f"boundary error: {exc}", file=sys.stderr)
        return EXIT_NOT_BOUNDARY
    except ToolkitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
