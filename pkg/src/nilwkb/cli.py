"""Command-line interface: one executable, one subcommand per pipeline.

All JSON payloads carry a "schema": "nilwkb/1" field and are emitted with
sorted keys, so runs with the same inputs and seed are byte-identical.
Validation failures exit 1, numerical-budget failures exit 2, both with a
machine-readable error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

import numpy as np

from . import catalog as catalog_mod
from .algebra import GaussianRational
from .connection import ConnectionFamily, check_flatness
from .errors import NilwkbError, NoRecurrenceWithinBudget, StiffnessBudgetExceeded
from .gauge import (
    is_m_cyclic,
    jordan_type,
    k_differentials,
    reality_obstruction,
    secondary_higgs,
)
from .holonomy import (
    HolonomySample,
    ParamPath,
    is_wkb_curve,
    period,
    transport_grid,
    wkb_fit,
)
from .surface import (
    PolygonSurface,
    find_wkb_loop,
    flat_torus,
    lift_check,
    staircase,
    trace_flow,
    validate as validate_surface,
)
from .toymodel import (
    ParabolicWeights,
    build_toy_higgs,
    check_weight_inequalities,
    nilpotent_cone_graph,
    pdeg_table,
    residues,
)

BUDGET_ERRORS = (StiffnessBudgetExceeded, NoRecurrenceWithinBudget)


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_family(path: str) -> ConnectionFamily:
    return ConnectionFamily.from_json(_load_json(path))


def _load_path(path: str) -> ParamPath:
    return ParamPath.from_json(_load_json(path))


def _parse_eps_grid(spec: str) -> list:
    try:
        start_s, end_s, spacing, count_s = spec.split(":")
        start, end, count = float(start_s), float(end_s), int(count_s)
    except ValueError as exc:
        raise ValueError(f"bad eps grid {spec!r}; want start:end:spacing:count") from exc
    if start <= 0 or end <= 0:
        raise ValueError("eps grid must be strictly positive")
    if start == end:
        raise ValueError("eps grid must be strictly monotone")
    if count < 1:
        raise ValueError("eps grid needs at least one point")
    if spacing == "geometric":
        return list(np.geomspace(start, end, count))
    if spacing == "linear":
        return list(np.linspace(start, end, count))
    raise ValueError(f"unknown spacing {spacing!r}; use geometric or linear")


def _parse_blocks(text: str):
    return [int(b) for b in text.split(",")]


def _parse_exponents(text: str):
    return [Fraction(p) for p in text.split(",")]


def _surface_from_args(args) -> PolygonSurface:
    if getattr(args, "staircase", None) is not None:
        return staircase(args.staircase, style=args.style, half=args.half)
    if getattr(args, "torus", False):
        return flat_torus()
    if getattr(args, "surface", None):
        return PolygonSurface.from_json(_load_json(args.surface))
    raise ValueError("provide a surface file, --staircase N, or --torus")


# -- subcommand handlers ------------------------------------------------------


def _cmd_flatness(args) -> int:
    if args.family.startswith("catalog:"):
        family = catalog_mod.catalog()[args.family.split(":", 1)[1]]
    else:
        family = _load_family(args.family)
    report = check_flatness(family)
    _emit(report.to_json())
    return 0 if report.is_flat else 1


def _cmd_secondary(args) -> int:
    family = _load_family(args.family)
    data = secondary_higgs(family, _parse_blocks(args.blocks), seed=args.seed)
    _emit(data.to_json())
    return 0


def _cmd_jordan(args) -> int:
    family = _load_family(args.family)
    jt = jordan_type(family.phi, seed=args.seed)
    _emit(
        {
            "schema": "nilwkb/1",
            "partition": list(jt.partition),
            "transpose": list(jt.transpose),
            "nilpotency_index": jt.nilpotency_index,
        }
    )
    return 0


def _cmd_cyclic(args) -> int:
    family = _load_family(args.family)
    data = secondary_higgs(family, _parse_blocks(args.blocks), seed=args.seed)
    ok = is_m_cyclic(data.Phi, data.profile, data.m)
    _emit({"schema": "nilwkb/1", "m": data.m, "m_cyclic": ok})
    return 0


def _cmd_kdiff(args) -> int:
    family = _load_family(args.family)
    if args.blocks:
        field = secondary_higgs(family, _parse_blocks(args.blocks), seed=args.seed).Phi
    else:
        field = family.phi
    diffs = k_differentials(field, args.up_to)
    _emit(
        {
            "schema": "nilwkb/1",
            "k_differentials": {str(k): d.to_json() for k, d in enumerate(diffs, start=2)},
        }
    )
    return 0


def _cmd_reality(args) -> int:
    family = _load_family(args.family)
    obstructed = reality_obstruction(family.phi, family.psi)
    _emit({"schema": "nilwkb/1", "obstruction": obstructed})
    return 0


def _cmd_holonomy(args) -> int:
    family = _load_family(args.family)
    gamma = _load_path(args.path)
    eps = _parse_eps_grid(args.eps)
    samples = transport_grid(family, gamma, eps, rel_tol=args.rel_tol)
    writer = csv.writer(sys.stdout)
    writer.writerow(["epsilon", "re_trace", "im_trace", "est_error"])
    for s in samples:
        writer.writerow([repr(s.epsilon), repr(s.trace.real), repr(s.trace.imag), repr(s.est_error)])
    return 0


def _cmd_period(args) -> int:
    family = _load_family(args.family)
    gamma = _load_path(args.path)
    if args.blocks:
        field = secondary_higgs(family, _parse_blocks(args.blocks), seed=args.seed).Phi
    else:
        field = family.phi
    Z = period(field, gamma)
    _emit({"schema": "nilwkb/1", "Z": [Z.real, Z.imag]})
    return 0


def _cmd_wkbcheck(args) -> int:
    family = _load_family(args.family)
    gamma = _load_path(args.path)
    if args.blocks:
        field = secondary_higgs(family, _parse_blocks(args.blocks), seed=args.seed).Phi
    else:
        field = family.phi
    check = is_wkb_curve(field, gamma)
    _emit({"schema": "nilwkb/1", "is_wkb": check.is_wkb, "margin": check.margin})
    return 0


def _cmd_wkbfit(args) -> int:
    with open(args.samples) as fh:
        rows = list(csv.DictReader(fh))
    samples = [
        HolonomySample(
            epsilon=float(r["epsilon"]),
            holonomy=None,
            trace=complex(float(r["re_trace"]), float(r["im_trace"])),
            est_error=float(r.get("est_error", 0.0) or 0.0),
        )
        for r in rows
    ]
    candidates = _parse_exponents(args.exponents) if args.exponents else None
    fit = wkb_fit(samples, candidates)
    _emit(fit.to_json())
    return 0


def _cmd_surface(args) -> int:
    if args.surface_cmd == "validate":
        report = validate_surface(_surface_from_args(args))
        _emit(report.to_json())
        return 0
    if args.surface_cmd == "generate":
        surf = _surface_from_args(args)
        blob = json.dumps(surf.to_json(), sort_keys=True)
        if args.emit:
            with open(args.emit, "w") as fh:
                fh.write(blob + "\n")
        else:
            print(blob)
        return 0
    surf = _surface_from_args(args)
    poly_s, x_s, y_s = args.start.split(",")
    start = (int(poly_s), complex(float(x_s), float(y_s)))
    if args.surface_cmd == "trace":
        traj = trace_flow(surf, start, args.theta, args.max_length)
        writer = csv.writer(sys.stdout)
        writer.writerow(["polygon", "x0", "y0", "x1", "y1"])
        for p, a, b in traj.pieces:
            writer.writerow([p, a.real, a.imag, b.real, b.imag])
        print(
            json.dumps(
                {
                    "schema": "nilwkb/1",
                    "terminated": traj.terminated,
                    "length": traj.total_length,
                    "pieces": len(traj.pieces),
                },
                sort_keys=True,
            ),
            file=sys.stderr,
        )
        return 0
    if args.surface_cmd == "wkbloop":
        loop = find_wkb_loop(
            surf, start, args.theta, max_length=args.max_length, convention=args.convention
        )
        payload = loop.to_json()
        payload["lift_two_loops"] = lift_check(surf, loop)
        _emit(payload)
        return 0
    raise ValueError(f"unknown surface subcommand {args.surface_cmd!r}")


def _cmd_toy(args) -> int:
    if args.toy_cmd == "stability":
        report = check_weight_inequalities(ParabolicWeights.parse(args.rho))
        _emit(report.to_json())
        return 0 if report.all_pass else 1
    if args.toy_cmd == "higgs":
        field = build_toy_higgs(args.which, GaussianRational.coerce(Fraction(args.p)))
        if args.emit:
            family = catalog_mod.toy_skeleton(args.which, Fraction(args.p))
            with open(args.emit, "w") as fh:
                fh.write(json.dumps(family.to_json(), sort_keys=True) + "\n")
        _emit(
            {
                "schema": "nilwkb/1",
                "which": field.which,
                "matrix": field.matrix.to_json(),
                "flags": field.flags.to_json(),
                "poles": list(field.poles),
                "vanishing": list(field.vanishing),
            }
        )
        return 0
    if args.toy_cmd == "cone":
        graph = nilpotent_cone_graph(
            GaussianRational.coerce(Fraction(args.p)), ParabolicWeights.parse(args.rho)
        )
        if args.emit:
            with open(args.emit, "w") as fh:
                fh.write(json.dumps(graph, sort_keys=True) + "\n")
        _emit(graph)
        return 0
    if args.toy_cmd == "pdeg":
        weights = ParabolicWeights.parse(args.rho)
        degrees = [int(d) for d in args.degrees.split(",")]
        rows = pdeg_table(weights, degrees)
        _emit(
            {
                "schema": "nilwkb/1",
                "table": [
                    {
                        "degree": r["degree"],
                        "incidence": list(r["incidence"]),
                        "pdeg": str(r["pdeg"]),
                    }
                    for r in rows
                ],
            }
        )
        return 0
    if args.toy_cmd == "residues":
        field = build_toy_higgs(args.which, GaussianRational.coerce(Fraction(args.p)))
        res = residues(field)
        _emit(
            {
                "schema": "nilwkb/1",
                "residues": {
                    site: [[[str(x.re), str(x.im)] for x in row] for row in mat]
                    for site, mat in res.items()
                },
            }
        )
        return 0
    raise ValueError(f"unknown toy subcommand {args.toy_cmd!r}")


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilwkb",
        description="flat families with nilpotent leading term: exact checks and WKB numerics",
    )
    parser.add_argument("--seed", type=int, default=2301, help="seed for generic-point sampling")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("flatness", help="exact flatness check; exit 0 iff flat")
    p.add_argument("family", help="family JSON file, or catalog:<name>")
    p.set_defaults(fn=_cmd_flatness)

    p = sub.add_parser("secondary", help="secondary Higgs field and invariant m")
    p.add_argument("family")
    p.add_argument("--blocks", required=True, help="grading block sizes, e.g. 1,1")
    p.set_defaults(fn=_cmd_secondary)

    p = sub.add_parser("jordan", help="Jordan type of the leading field")
    p.add_argument("family")
    p.set_defaults(fn=_cmd_jordan)

    p = sub.add_parser("cyclic", help="cyclic-grading check of the secondary field")
    p.add_argument("family")
    p.add_argument("--blocks", required=True)
    p.set_defaults(fn=_cmd_cyclic)

    p = sub.add_parser("kdiff", help="trace powers Tr(Phi^k)")
    p.add_argument("family")
    p.add_argument("--up-to", type=int, default=2, dest="up_to")
    p.add_argument("--blocks", help="use the secondary field of this splitting")
    p.set_defaults(fn=_cmd_kdiff)

    p = sub.add_parser("reality", help="determinant-sign reality obstruction")
    p.add_argument("family")
    p.set_defaults(fn=_cmd_reality)

    p = sub.add_parser("holonomy", help="transport over an eps grid; CSV on stdout")
    p.add_argument("family")
    p.add_argument("path")
    p.add_argument("--eps", required=True, help="start:end:spacing:count")
    p.add_argument("--rel-tol", type=float, default=1e-10, dest="rel_tol")
    p.set_defaults(fn=_cmd_holonomy)

    p = sub.add_parser("period", help="spectral period along a path")
    p.add_argument("family")
    p.add_argument("path")
    p.add_argument("--blocks", help="use the secondary field of this splitting")
    p.set_defaults(fn=_cmd_period)

    p = sub.add_parser("wkbcheck", help="WKB-curve predicate and margin")
    p.add_argument("family")
    p.add_argument("path")
    p.add_argument("--blocks")
    p.set_defaults(fn=_cmd_wkbcheck)

    p = sub.add_parser("wkbfit", help="rate fit from a holonomy CSV")
    p.add_argument("samples")
    p.add_argument("--exponents", help="candidate exponents, e.g. 1,1/2,1/3")
    p.set_defaults(fn=_cmd_wkbfit)

    p = sub.add_parser("surface", help="half-translation surface tools")
    ssub = p.add_subparsers(dest="surface_cmd", required=True)
    for name in ("validate", "trace", "wkbloop", "generate"):
        sp = ssub.add_parser(name)
        sp.add_argument("surface", nargs="?", help="surface JSON file")
        sp.add_argument("--staircase", type=int, help="generate a staircase of this genus")
        sp.add_argument("--style", choices=("left", "right"), default="left")
        sp.add_argument("--half", action="store_true", help="half-translation variant")
        sp.add_argument("--torus", action="store_true", help="unit flat torus")
        if name in ("trace", "wkbloop"):
            sp.add_argument("--start", required=True, help="polygon,x,y")
            sp.add_argument("--theta", type=float, required=True)
            sp.add_argument("--max-length", type=float, default=400.0, dest="max_length")
        if name == "wkbloop":
            sp.add_argument(
                "--convention",
                choices=("imaginary-increasing", "real-increasing"),
                default="imaginary-increasing",
            )
        if name == "generate":
            sp.add_argument("--emit", help="write the surface JSON here")
        sp.set_defaults(fn=_cmd_surface)

    p = sub.add_parser("toy", help="four-punctured-sphere model")
    tsub = p.add_subparsers(dest="toy_cmd", required=True)
    sp = tsub.add_parser("stability")
    sp.add_argument("--rho", required=True, help="four weights, e.g. 1/4,1/4,1/4,1/8")
    sp.set_defaults(fn=_cmd_toy)
    sp = tsub.add_parser("higgs")
    sp.add_argument("which", choices=("phi_p", "phi_0", "phi_1", "phi_inf"))
    sp.add_argument("--p", default="2")
    sp.add_argument("--emit", help="write a family JSON skeleton here")
    sp.set_defaults(fn=_cmd_toy)
    sp = tsub.add_parser("cone")
    sp.add_argument("--p", default="2")
    sp.add_argument("--rho", required=True)
    sp.add_argument("--emit")
    sp.set_defaults(fn=_cmd_toy)
    sp = tsub.add_parser("pdeg")
    sp.add_argument("--rho", required=True)
    sp.add_argument("--degrees", default="0,-1")
    sp.set_defaults(fn=_cmd_toy)
    sp = tsub.add_parser("residues")
    sp.add_argument("which", choices=("phi_p", "phi_0", "phi_1", "phi_inf"))
    sp.add_argument("--p", default="2")
    sp.set_defaults(fn=_cmd_toy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BUDGET_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except (NilwkbError, ValueError, OSError, json.JSONDecodeError, ZeroDivisionError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
