"""Batch command-line front end.

Every run embeds its full configuration (command, inputs, budget, seed,
policy) in the emitted report so results are exactly reproducible; all
randomness flows from the single master seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import diagrams as dg
from . import integrator as ig
from . import invariants as iv
from . import knots as kn
from . import strata as st

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_GUARD = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_curve(spec: str, check: bool = True) -> kn.KnotCurve:
    """A built-in name or a path to a knot JSON file."""
    try:
        return kn.standard_knot(spec)
    except ValueError:
        pass
    path = Path(spec)
    if not path.exists():
        raise CliError(f"unknown knot {spec!r} (not a name or file)", EXIT_PARSE)
    try:
        obj = json.loads(path.read_text())
        return kn.KnotCurve.from_json_obj(obj, check=check)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise CliError(f"cannot parse knot file {spec}: {exc}", EXIT_PARSE)
    except kn.CurveCheckError as exc:
        raise CliError(f"knot {spec} fails curve checks: {exc}", EXIT_PRECONDITION)


def _run_config(args, command: str) -> dict:
    cfg = {"command": command}
    for key in ("budget", "seed", "workers", "format", "anomaly_policy"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    for key in ("knot", "knot1", "knot2", "n", "n_max", "k", "mode",
                "diagram", "weights"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    return cfg


def _emit(args, payload: dict, rows=None, header=None) -> None:
    text_fmt = getattr(args, "format", "json")
    if text_fmt == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        out = buf.getvalue()
    else:
        out = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)


def _anomaly_policy(spec: str):
    if spec in iv.ANOMALY_POLICIES:
        return spec
    if spec.startswith("file:"):
        path = Path(spec[len("file:"):])
        if not path.exists():
            raise CliError(f"anomaly policy file {path} not found", EXIT_PARSE)
        try:
            return {str(k): float(v) for k, v in json.loads(path.read_text()).items()}
        except (json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"bad anomaly policy file: {exc}", EXIT_PARSE)
    raise CliError(f"unknown anomaly policy {spec!r}", EXIT_PARSE)


# ---------------------------------------------------------------------------
# commands


def cmd_dims(args) -> None:
    if args.n_max > dg.TRIVALENT_DEGREE_GUARD:
        raise CliError(
            f"n_max {args.n_max} exceeds the degree guard "
            f"{dg.TRIVALENT_DEGREE_GUARD}", EXIT_GUARD)
    rows = []
    for n in range(1, args.n_max + 1):
        chords = dg.enumerate_chord_diagrams(n)
        dim_cd = dg.quotient_dimension(chords, dg.four_t_relation_vectors(n))
        trivalent = dg.enumerate_trivalent_diagrams(n, include_zero=False)
        dim_td = dg.quotient_dimension(trivalent, dg.stu_relation_vectors(n))
        rows.append([n, dim_cd, dim_td, dim_cd == dim_td])
    payload = {
        "config": _run_config(args, "dims"),
        "rows": [
            {"n": r[0], "dim_CD_mod_4T": r[1], "dim_TD_mod_STU": r[2],
             "equal": r[3]}
            for r in rows
        ],
    }
    _emit(args, payload, rows=rows,
          header=["n", "dim_CD_mod_4T", "dim_TD_mod_STU", "equal"])


def cmd_link(args) -> None:
    k1 = _load_curve(args.knot1)
    k2 = _load_curve(args.knot2)
    try:
        est = ig.linking_integral(k1, k2, args.budget, args.seed,
                                  workers=args.workers)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION)
    oracle = kn.linking_number_by_crossings(k1, k2)
    payload = {
        "config": _run_config(args, "link"),
        "estimate": est.to_json_obj(),
        "oracle_crossing_count": oracle,
    }
    rows = [[args.knot1, "linking", est.value, est.stderr, oracle]]
    _emit(args, payload, rows=rows,
          header=["knot", "invariant", "value", "stderr", "oracle_value"])


def cmd_v2(args) -> None:
    curve = _load_curve(args.knot)
    res = iv.v2(curve, args.budget, args.seed, workers=args.workers,
                knot_id=args.knot)
    oracle = iv.v2_of_curve(curve)
    payload = {
        "config": _run_config(args, "v2"),
        "result": res.to_json_obj(),
        "oracle_pv": oracle,
    }
    rows = [[args.knot, "v2", res.value, res.stderr, oracle]]
    _emit(args, payload, rows=rows,
          header=["knot", "invariant", "value", "stderr", "oracle_value"])


def _load_weight_system(spec: str, n: int) -> dg.WeightSystem:
    """'v2' or a JSON file mapping chord-diagram text to rational values."""
    if spec == "v2":
        if n != 2:
            raise CliError("the built-in weight system is degree 2", EXIT_PARSE)
        return iv.degree2_weight_system()
    path = Path(spec)
    if not path.exists():
        raise CliError(f"weight system {spec!r} not found", EXIT_PARSE)
    try:
        raw = json.loads(path.read_text())
        values = {dg.Diagram.from_text(k): Fraction(v) for k, v in raw.items()}
    except (json.JSONDecodeError, ValueError) as exc:
        raise CliError(f"cannot parse weight system: {exc}", EXIT_PARSE)
    try:
        return dg.WeightSystem.from_chord_values(n, values)
    except ValueError as exc:
        raise CliError(f"weight values do not extend: {exc}", EXIT_PRECONDITION)


def cmd_tw(args) -> None:
    if args.n > dg.TRIVALENT_DEGREE_GUARD:
        raise CliError("degree exceeds the enumeration guard", EXIT_GUARD)
    w = _load_weight_system(args.weights, args.n)
    curve = _load_curve(args.knot)
    policy = _anomaly_policy(args.anomaly_policy)
    try:
        res = iv.t_of_w(w, args.n, curve, args.budget, args.seed,
                        workers=args.workers, anomaly_policy=policy,
                        knot_id=args.knot)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION)
    payload = {"config": _run_config(args, "tw"), "result": res.to_json_obj()}
    rows = [[args.knot, f"T(W) n={args.n}", res.value, res.stderr, ""]]
    _emit(args, payload, rows=rows,
          header=["knot", "invariant", "value", "stderr", "oracle_value"])


def cmd_strata(args) -> None:
    if args.k > st.POINT_GUARD:
        raise CliError(f"k exceeds the point guard {st.POINT_GUARD}", EXIT_GUARD)
    try:
        fams = st.enumerate_strata(args.k, args.max_codim, mode=args.mode)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE)
    payload = {
        "config": _run_config(args, "strata"),
        "strata": [f.to_json_obj() for f in fams],
    }
    if args.dot:
        Path(args.dot).write_text(st.face_poset_dot(fams))
    rows = [[";".join("".join(map(str, sorted(s))) for s in sorted(f.subsets, key=sorted)),
             f.codimension] for f in fams]
    _emit(args, payload, rows=rows, header=["subsets", "codim"])


def cmd_universality(args) -> None:
    try:
        diagram = dg.Diagram.from_text(args.diagram)
    except ValueError as exc:
        raise CliError(f"cannot parse diagram: {exc}", EXIT_PARSE)
    w = iv.degree2_weight_system()
    try:
        rep = iv.universality_check(diagram, w, budget=args.budget,
                                    seed=args.seed, workers=args.workers,
                                    integral_path=args.integral_path)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION)
    payload = {"config": _run_config(args, "universality"),
               "report": rep.to_json_obj()}
    rows = [[args.diagram, "universality", rep.combinatorial_sum, 0.0,
             str(rep.weight_value)]]
    _emit(args, payload, rows=rows,
          header=["knot", "invariant", "value", "stderr", "oracle_value"])


def cmd_gauss(args) -> None:
    curve = _load_curve(args.knot)
    code = kn.gauss_code(curve)
    payload = {
        "config": _run_config(args, "gauss"),
        "code": code.to_text(),
        "crossings": code.crossing_count,
        "pv_v2": iv.pv_v2(code),
    }
    _emit(args, payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knotint",
        description="Knot invariants via configuration-space integrals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        if budget:
            p.add_argument("--budget", type=int, default=1_000_000,
                           help="Monte Carlo sample budget")
            p.add_argument("--seed", type=int, default=0, help="master seed")
            p.add_argument("--workers", type=int, default=1,
                           help="worker threads (results unaffected)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help="write the report to a file")

    p = sub.add_parser("dims", help="diagram-space dimension table")
    p.add_argument("n_max", type=int)
    common(p, budget=False)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("link", help="linking number of two curves")
    p.add_argument("knot1")
    p.add_argument("knot2")
    common(p)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("v2", help="degree-2 invariant of a knot")
    p.add_argument("knot")
    common(p)
    p.set_defaults(func=cmd_v2)

    p = sub.add_parser("tw", help="weight-system invariant combination")
    p.add_argument("weights", help="'v2' or a chord-values JSON file")
    p.add_argument("n", type=int)
    p.add_argument("knot")
    p.add_argument("--anomaly-policy", dest="anomaly_policy",
                   default="cited-zero",
                   help="cited-zero | all-zero | file:<path>")
    common(p)
    p.set_defaults(func=cmd_tw)

    p = sub.add_parser("strata", help="enumerate configuration strata")
    p.add_argument("k", type=int)
    p.add_argument("--max-codim", dest="max_codim", type=int, default=1)
    p.add_argument("--mode", choices=("abstract", "interval"),
                   default="abstract")
    p.add_argument("--dot", help="write the face poset in DOT format")
    common(p, budget=False)
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("universality", help="resolution-sum check at degree 2")
    p.add_argument("diagram", help="chord diagram text form")
    p.add_argument("--integral-path", dest="integral_path",
                   action="store_true")
    common(p)
    p.set_defaults(func=cmd_universality)

    p = sub.add_parser("gauss", help="Gauss code of a knot projection")
    p.add_argument("knot")
    common(p, budget=False)
    p.set_defaults(func=cmd_gauss)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except kn.CurveCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
