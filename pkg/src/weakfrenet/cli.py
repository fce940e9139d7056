"""Command-line front door: analyze polygonal files, run convergence
studies on curve models, dump force-measure tables, search for the torsion
non-monotonicity witness, and lift projective polylines.

Reports are JSON (schema 1) on stdout; polylines are CSV files for
plotting.  Exit codes: 0 ok, 2 parse/validation error, 3 non-convergence,
4 search failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import forces, weak
from .curves import make_curve
from .errors import (
    AmbiguousReturnPoint,
    DegeneratePolygonal,
    NotConverged,
    ParseError,
    SearchFailed,
    UnknownModel,
    WeakFrenetError,
    ZeroTorsion,
)
from .polygonal import (
    Polygonal3,
    binormal_indicatrix,
    discrete_frenet,
    nonmonotonicity_witness,
    normal_indicatrix,
    polygonal_measures,
    normal_schedule,
    sanitize,
    tantrix,
)
from .sphere import canon_rep

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_CONVERGED = 3
EXIT_SEARCH_FAILED = 4


# ---------------------------------------------------------------------------
# input/output helpers
# ---------------------------------------------------------------------------


def read_polygonal(path):
    """Polygonal from a plain-text vertex list ("x y z" per line, blank
    lines ignored, '#' comments) or a JSON record {"vertices": ..,
    "closed": bool}."""
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    if path.endswith(".json"):
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}", line=exc.lineno)
        if not isinstance(record, dict) or "vertices" not in record:
            raise ParseError('JSON polygonal needs a "vertices" field')
        verts = record["vertices"]
        closed = bool(record.get("closed", False))
    else:
        verts = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise ParseError(f"expected 3 coordinates, got {len(parts)}", line=lineno)
            try:
                verts.append([float(x) for x in parts])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno)
        closed = False
    arr = np.asarray(verts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 2:
        raise ParseError("need at least two 3-vectors")
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite coordinate")
    return Polygonal3(arr, closed=closed)


def _fmt(x):
    return repr(float(x))


def write_polygonal(path, P):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# x y z\n")
        for v in P.vertices:
            fh.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")


def _sample_params(curve, n_uniform=512):
    total = curve.total_length
    s = np.linspace(0.0, total, n_uniform)
    s = np.unique(np.concatenate([s, curve.cum_length]))
    return s


def write_indicatrix_csv(path, curve, n_uniform=512):
    """CSV polyline: s,x,y,z (canonical representative); projective curves
    get an extra "sheet" column (+-1, lift relative to the canonical rep)."""
    s = _sample_params(curve, n_uniform)
    pts = curve.eval(s)
    projective = curve.space == "projective"
    with open(path, "w", encoding="utf-8") as fh:
        if projective:
            fh.write("s,x,y,z,sheet\n")
            canon = canon_rep(pts)
            sheet = np.where(np.sum(pts * canon, axis=1) >= 0, 1, -1)
            for si, p, sh in zip(s, canon, sheet):
                fh.write(
                    f"{_fmt(si)},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])},{sh:d}\n"
                )
        else:
            fh.write("s,x,y,z\n")
            for si, p in zip(s, pts):
                fh.write(f"{_fmt(si)},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}\n")
    return path


def write_density_csv(path, measure):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("param,vx,vy,vz,step\n")
        for p, v, st in zip(
            measure.density_params, measure.density_values, measure.density_steps
        ):
            fh.write(
                f"{_fmt(p)},{_fmt(v[0])},{_fmt(v[1])},{_fmt(v[2])},{_fmt(st)}\n"
            )
    return path


def _finite(x):
    """JSON-safe number: non-finite values are reported as 'diverging'."""
    x = float(x)
    return x if np.isfinite(x) else "diverging"


def _atom_table(measure):
    return [
        {"param": _finite(p), "weight": [float(w[0]), float(w[1]), float(w[2])],
         "norm": _finite(np.linalg.norm(w))}
        for p, w in measure.atoms
    ]


def emit_report(report, path=None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _base_report(command, args):
    return {
        "schema": 1,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": getattr(args, "seed", None),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args):
    P = sanitize(read_polygonal(args.input))
    report = _base_report("analyze", args)
    report["input"] = {
        "path": args.input,
        "vertices": int(P.n_vertices),
        "closed": P.closed,
        "return_points": list(P.return_points),
        "length": _finite(P.length),
        "mesh": _finite(P.mesh),
    }
    if P.return_points:
        report["status"] = "return-points"
        emit_report(report, args.report)
        return EXIT_OK
    fr = discrete_frenet(P)
    report["tc"] = _finite(fr.tc)
    report["tat"] = _finite(fr.tat)
    report["ct"] = _finite(fr.ct)
    meas = polygonal_measures(P)
    report["measures"] = {
        "curvature_atoms": [
            {"vertex": int(i), "angle": _finite(a)} for i, a in meas.curvature_atoms
        ],
        "torsion_density": [
            {"segment": int(i), "density": _finite(d), "length": _finite(l)}
            for i, d, l in meas.torsion_density
        ],
        "curvature_mass": _finite(meas.curvature_mass),
        "torsion_mass": _finite(meas.torsion_mass),
    }
    sched = normal_schedule(P)
    report["schedule"] = {"C": [_finite(x) for x in sched.C],
                          "T": [_finite(x) for x in sched.T]}
    os.makedirs(args.out, exist_ok=True)
    files = {}
    files["tantrix"] = write_indicatrix_csv(
        os.path.join(args.out, "tantrix.csv"), tantrix(P)
    )
    try:
        files["binormal"] = write_indicatrix_csv(
            os.path.join(args.out, "binormal.csv"), binormal_indicatrix(P)
        )
    except ZeroTorsion:
        report["binormal"] = "planar: polar degenerates to a point"
    files["normal"] = write_indicatrix_csv(
        os.path.join(args.out, "normal.csv"), normal_indicatrix(P)
    )
    report["files"] = files
    report["status"] = "ok"
    emit_report(report, args.report)
    return EXIT_OK


def _parse_params(items):
    out = {}
    for item in items or []:
        for piece in item.split(","):
            if not piece:
                continue
            if "=" not in piece:
                raise ParseError(f"bad parameter {piece!r}; expected name=value")
            key, val = piece.split("=", 1)
            out[key.strip()] = float(val)
    return out


def cmd_converge(args):
    curve = make_curve(args.model, **_parse_params(args.params))
    seq = weak.refine(curve, levels=args.levels, base_n=args.base_n)
    table = seq.table()
    meshes = [row["mesh"] for row in table]
    report = _base_report("converge", args)
    report["input"] = {"model": args.model, "params": _parse_params(args.params),
                       "levels": args.levels, "base_n": args.base_n}
    report["levels"] = [
        {k: _finite(v) if isinstance(v, float) else v for k, v in row.items()}
        for row in table
    ]
    report["tc"] = _finite(weak.estimate_limit([r["tc"] for r in table], meshes))
    report["tat"] = _finite(weak.estimate_limit([r["tat"] for r in table], meshes))
    report["ct"] = _finite(weak.estimate_limit([r["ct"] for r in table], meshes))

    os.makedirs(args.out, exist_ok=True)
    statuses = {}
    files = {}
    return_dir = _parse_vec(args.return_dir) if args.return_dir else None

    def attempt(name, builder, filename):
        try:
            obj = builder()
        except ZeroTorsion:
            statuses[name] = "zero-torsion"
            return None
        except AmbiguousReturnPoint:
            statuses[name] = "ambiguous-return-point"
            return None
        except NotConverged as exc:
            statuses[name] = f"not-converged: {exc}"
            return None
        statuses[name] = "ok"
        files[name] = write_indicatrix_csv(os.path.join(args.out, filename), obj.curve)
        report[f"{name}_gap"] = _finite(obj.cauchy_gap)
        if obj.warning:
            statuses[name] = f"warning: {obj.warning}"
        return obj

    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        attempt("weak_tantrix",
                lambda: weak.weak_tantrix(seq, tol=args.tol_converge, return_dir=return_dir),
                "weak_tantrix.csv")
        attempt("weak_binormal",
                lambda: weak.weak_binormal(seq, tol=args.tol_converge),
                "weak_binormal.csv")
        attempt("weak_normal",
                lambda: weak.weak_normal(seq, tol=args.tol_converge),
                "weak_normal.csv")

    if curve.has_frame:
        ident = weak.verify_reparam_identities(
            curve, seq, tol=args.tol_identity, return_dir=return_dir
        )
        report["identities"] = ident.as_dict()
    report["weak_status"] = statuses
    report["files"] = files
    failed = any(s.startswith("not-converged") for s in statuses.values())
    report["status"] = "not-converged" if failed else "ok"
    emit_report(report, args.report)
    return EXIT_NOT_CONVERGED if failed else EXIT_OK


def _parse_vec(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ParseError("expected three comma-separated components")
    return np.array(parts)


def cmd_forces(args):
    report = _base_report("forces", args)
    os.makedirs(args.out, exist_ok=True)
    files = {}
    if args.input:
        P = sanitize(read_polygonal(args.input))
        report["input"] = {"path": args.input}
        K = forces.curvature_force(P)
        star, tc = forces.tc_star(K)
        report["curvature_force"] = {
            "atoms": _atom_table(K),
            "tc_star": _finite(star),
            "tc": _finite(tc),
        }
        report["status"] = "ok"
        emit_report(report, args.report)
        return EXIT_OK

    curve = make_curve(args.model, **_parse_params(args.params))
    if not curve.has_frame:
        raise WeakFrenetError("force tables for curve models need a frame")
    report["input"] = {"model": args.model, "params": _parse_params(args.params)}
    K = forces.curvature_force(curve)
    star, tc = forces.tc_star(K)
    files["curvature_density"] = write_density_csv(
        os.path.join(args.out, "curvature_density.csv"), K
    )
    report["curvature_force"] = {
        "atoms": _atom_table(K),
        "tc_star": _finite(star),
        "tc": _finite(tc),
    }
    seq = weak.refine(curve, levels=args.levels, base_n=args.base_n)
    t_c = weak.weak_tantrix(seq, tol=np.inf)
    T = forces.torsion_force(curve, t_c)
    files["torsion_density"] = write_density_csv(
        os.path.join(args.out, "torsion_density.csv"), T
    )
    report["torsion_force"] = {
        "atoms": _atom_table(T),
        "total_variation": _finite(T.total_variation),
        "density_mass": _finite(T.density_mass),
    }
    try:
        b_c = weak.weak_binormal(seq, tol=np.inf)
        BV = forces.binormal_variation(curve, b_c)
        files["binormal_density"] = write_density_csv(
            os.path.join(args.out, "binormal_density.csv"), BV
        )
        report["binormal_variation"] = {
            "atoms": _atom_table(BV),
            "total_variation": _finite(BV.total_variation),
        }
    except (ZeroTorsion, WeakFrenetError) as exc:
        report["binormal_variation"] = str(exc)
    fields = forces.make_tangential_bumps(curve, 5, seed=args.seed)
    pairing = forces.first_variation_check(curve, T, fields, n_quad=args.quad)
    report["pairing"] = {
        "max_mismatch": _finite(pairing.max_mismatch),
        "mismatch": [_finite(x) for x in pairing.mismatch],
    }
    report["files"] = files
    report["status"] = "ok"
    emit_report(report, args.report)
    return EXIT_OK


def cmd_witness(args):
    report = _base_report("witness", args)
    try:
        w = nonmonotonicity_witness(
            seed=args.seed, budget=args.budget, min_gap=args.min_gap
        )
    except SearchFailed as exc:
        report["status"] = f"search-failed: {exc}"
        emit_report(report, args.report)
        return EXIT_SEARCH_FAILED
    os.makedirs(args.out, exist_ok=True)
    p_path = os.path.join(args.out, "witness_P.txt")
    pp_path = os.path.join(args.out, "witness_P_inscribed.txt")
    write_polygonal(p_path, w.polygonal)
    write_polygonal(pp_path, w.inscribed)
    report["tat"] = _finite(w.tat)
    report["tat_inscribed"] = _finite(w.tat_inscribed)
    report["gap"] = _finite(w.gap)
    report["length"] = _finite(w.polygonal.length)
    report["length_inscribed"] = _finite(w.inscribed.length)
    report["files"] = {"P": p_path, "P_inscribed": pp_path}
    report["status"] = "ok"
    emit_report(report, args.report)
    return EXIT_OK


def read_points_csv(path):
    rows = []
    try:
        lines = open(path, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    for lineno, line in enumerate(lines, start=1):
        body = line.strip()
        if not body:
            continue
        parts = body.split(",")
        try:
            vals = [float(x) for x in parts]
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ParseError("non-numeric row", line=lineno)
        if len(vals) == 3:
            rows.append(vals)
        elif len(vals) >= 4:
            rows.append(vals[1:4])  # s,x,y,z
        else:
            raise ParseError("need x,y,z columns", line=lineno)
    if len(rows) < 1:
        raise ParseError("no points found")
    return np.asarray(rows, dtype=float)


def cmd_lift(args):
    from .sphere import GeodesicPolyline, lift_projective_polyline, unit

    pts = unit(read_points_csv(args.input))
    curve = GeodesicPolyline.from_projective_points(pts)
    seed = _parse_vec(args.seed_dir) if args.seed_dir else curve.points[0]
    lifted, closure = lift_projective_polyline(curve, unit(seed))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "lifted.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("s,x,y,z\n")
        for si, p in zip(lifted.cum_length, lifted.points):
            fh.write(f"{_fmt(si)},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}\n")
    report = _base_report("lift", args)
    report["input"] = {"path": args.input, "points": int(pts.shape[0])}
    report["closure_sign"] = closure
    report["length"] = _finite(lifted.total_length)
    report["files"] = {"lifted": path}
    report["status"] = "ok"
    emit_report(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weakfrenet",
        description="Weak Frenet data of polygonal and non-smooth space curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="directory for emitted files")
        p.add_argument("--report", default=None, help="also write the JSON report here")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("analyze", help="discrete Frenet data of a polygonal file")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("converge", help="inscribed-refinement convergence study")
    p.add_argument("--model", required=True, help="helix | circle | inflection | blowup")
    p.add_argument("--params", action="append", help="name=value[,name=value...]")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--base-n", type=int, default=64)
    p.add_argument("--tol-converge", type=float, default=1e-3)
    p.add_argument("--tol-identity", type=float, default=1e-2)
    p.add_argument("--return-dir", default=None, help="x,y,z geodesic choice at return points")
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("forces", help="curvature/torsion force measures")
    p.add_argument("--input", default=None, help="polygonal file (atoms only)")
    p.add_argument("--model", default=None)
    p.add_argument("--params", action="append")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--base-n", type=int, default=64)
    p.add_argument("--quad", type=int, default=4096)
    common(p)
    p.set_defaults(func=cmd_forces)

    p = sub.add_parser("witness", help="inscribed polygonal with larger total torsion")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--min-gap", type=float, default=1e-3)
    common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("lift", help="continuous sphere lift of a projective CSV polyline")
    p.add_argument("input")
    p.add_argument("--seed-dir", default=None, help="x,y,z representative of the first point")
    common(p)
    p.set_defaults(func=cmd_lift)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "forces" and not (args.input or args.model):
        parser.error("forces needs --input or --model")
    try:
        return args.func(args)
    except (ParseError, DegeneratePolygonal, UnknownModel, ValueError) as exc:
        print(json.dumps({"schema": 1, "status": "error", "error": str(exc)}))
        return EXIT_PARSE
    except NotConverged as exc:
        print(json.dumps({"schema": 1, "status": "not-converged", "error": str(exc)}))
        return EXIT_NOT_CONVERGED
    except SearchFailed as exc:
        print(json.dumps({"schema": 1, "status": "search-failed", "error": str(exc)}))
        return EXIT_SEARCH_FAILED


if __name__ == "__main__":
    sys.exit(main())
