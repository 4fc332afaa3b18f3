"""Command-line front end.

Every subcommand prints a single JSON object (sorted keys, top-level
"schema": 1) to stdout; grid and raster payloads go to files named by
--out.  Exit status: 0 success, 1 domain/convergence error, 2 usage or
map-spec error.  Identical arguments and seed give byte-identical
output.

Run configs are plain argparse namespaces; OPERATIONS maps each
subcommand to the library operations it reaches.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import (
    ConvergenceError,
    DomainError,
    MapSpecError,
)
from .quadfield import QuadFieldElement, format_element, parse_element
from .ratmaps import ProjPoint, RationalMap
from . import heights
from . import lattes
from . import measures


# ---------------------------------------------------------------- parsing


def _parse_exact_point(text: str, d: int) -> ProjPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise MapSpecError(
            f"point {text!r} must be two comma-separated coordinates"
        )
    x = parse_element(parts[0], d)
    y = parse_element(parts[1], d)
    return ProjPoint(x, y, d)


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise MapSpecError(f"point {text!r} must be re,im decimals")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise MapSpecError(f"point {text!r} must be re,im decimals") from None


def _parse_window(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise MapSpecError(f"window {text!r} must be x0,x1,y0,y1")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise MapSpecError(f"window {text!r} must be four decimals") from None


def _parse_lambda(text: str) -> QuadFieldElement:
    parts = text.split(",")
    if len(parts) != 3:
        raise MapSpecError(f"--lambda {text!r} must be a,b,d")
    try:
        a, b = Fraction(parts[0]), Fraction(parts[1])
        d = int(parts[2])
    except (ValueError, ZeroDivisionError):
        raise MapSpecError(
            f"--lambda {text!r} needs two rationals and an integer d"
        ) from None
    return QuadFieldElement(a, b, d)


def _map_from_file(path: str) -> RationalMap:
    try:
        with open(path) as f:
            spec = json.load(f)
    except OSError as exc:
        raise MapSpecError(f"cannot read map file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise MapSpecError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}"
        ) from None
    if not isinstance(spec, dict) or "num" not in spec or "den" not in spec:
        raise MapSpecError(f"{path}: map spec needs 'num' and 'den' lists")
    d = spec.get("field", {}).get("d", 0)
    if d not in (0, 1, 3):
        raise MapSpecError(f"{path}: field d must be 0, 1 or 3, got {d!r}")

    def strings(key):
        coeffs = spec[key]
        if not isinstance(coeffs, list) or not coeffs:
            raise MapSpecError(f"{path}: {key!r} must be a non-empty list")
        out = []
        for c in coeffs:
            if isinstance(c, bool) or not isinstance(c, (int, str)):
                raise MapSpecError(
                    f"{path}: coefficient {c!r} must be an integer or an "
                    "exact-grammar string"
                )
            out.append(str(c))
        return out

    try:
        return RationalMap.from_strings(strings("num"), strings("den"), d)
    except MapSpecError as exc:
        raise MapSpecError(f"{path}: {exc}") from None


def _load_maps(args, need: int):
    """(label, map) pairs from --catalog names and --map files, in order."""
    pairs = [(n, lattes.catalog(n)) for n in (args.catalog or [])]
    pairs += [(p, _map_from_file(p)) for p in (args.map or [])]
    if len(pairs) != need:
        raise MapSpecError(
            f"expected {need} map(s) via --catalog/--map, got {len(pairs)}"
        )
    return pairs


def _emit(payload: dict) -> None:
    payload = {"schema": 1, **payload}
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _fmt_point(p: ProjPoint) -> str:
    return format_element(p.x0) + "," + format_element(p.x1)


def _czpair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------- handlers


def _cmd_height(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    if not args.point:
        raise MapSpecError("height needs at least one --point X,Y")
    consts = heights.height_constants(phi)
    results = []
    for text in args.point:
        P = _parse_exact_point(text, phi.d)
        hv = heights.canonical_height(phi, P, target_error=args.tol)
        results.append(
            {
                "point": _fmt_point(P),
                "value": hv.value,
                "error_bound": hv.error_bound,
                "iterations": hv.iterations_used,
            }
        )
    return {
        "command": "height",
        "map": label,
        "degree": phi.degree,
        "bad_primes": consts["bad_primes"],
        "results": results,
    }


def _cmd_nt_height(args) -> dict:
    curve = lattes.curve_E1() if args.curve == "E1" else lattes.curve_E2()
    if not args.point:
        raise MapSpecError("nt-height needs at least one --point")
    results = []
    for text in args.point:
        if "," in text:
            P = _parse_exact_point(text, curve.d)
        else:
            P = ProjPoint.affine(parse_element(text, curve.d))
        hv = heights.neron_tate(curve, P, target_error=args.tol)
        results.append(
            {
                "point": _fmt_point(P),
                "value": hv.value,
                "error_bound": hv.error_bound,
            }
        )
    return {"command": "nt-height", "curve": args.curve, "results": results}


def _cmd_commute(args) -> dict:
    (la, a), (lb, b) = _load_maps(args, 2)
    commute = a.commutes_with(b)
    name = None
    if commute:
        comp = a.compose(b)
        for cname in lattes.catalog_names():
            if lattes.catalog(cname) == comp:
                name = cname
                break
    return {
        "command": "commute",
        "maps": [la, lb],
        "commute": commute,
        "composition_equals": name,
    }


def _poly_strings(poly) -> list:
    return [format_element(poly.coeff(k)) for k in range(poly.degree + 1)]


def _cmd_compose(args) -> dict:
    (la, a), (lb, b) = _load_maps(args, 2)
    comp = a.compose(b)
    return {
        "command": "compose",
        "maps": [la, lb],
        "d": comp.d,
        "degree": comp.degree,
        "num": _poly_strings(comp.num),
        "den": _poly_strings(comp.den),
    }


def _cmd_ramify(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    if args.catalog:
        curve = lattes.curve_for_name(label)
    elif args.curve:
        curve = lattes.curve_E1() if args.curve == "E1" else lattes.curve_E2()
    else:
        raise MapSpecError("ramify needs --catalog NAME or --curve E1|E2")
    prof = lattes.ramification_profile(phi, curve)
    out = {
        "command": "ramify",
        "map": label,
        "degree": prof.degree,
        "counts": list(prof.counts),
        "multiset": list(prof.as_multiset()),
    }
    if args.catalog:
        entry = lattes.catalog_entry(label)
        if entry.lam is not None:
            pred = lattes.predict_profile(entry.lam)
            out["predicted"] = list(pred.as_multiset())
            out["match"] = pred.as_multiset() == prof.as_multiset()
    return out


def _cmd_table_check(args) -> dict:
    lam = _parse_lambda(getattr(args, "lambda"))
    pred = lattes.predict_profile(lam)
    out = {
        "command": "table-check",
        "lambda": format_element(lam),
        "d": lam.d,
        "degree": pred.degree,
        "predicted": list(pred.as_multiset()),
        "computed": None,
        "match": None,
    }
    try:
        entry = lattes.map_for_multiplier(lam)
    except DomainError:
        return out
    curve = lattes.curve_for_name(entry.name)
    prof = lattes.ramification_profile(entry.map, curve)
    out["map"] = entry.name
    out["computed"] = list(prof.as_multiset())
    out["match"] = prof.as_multiset() == pred.as_multiset()
    return out


def _cmd_green(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    if not args.point:
        raise MapSpecError("green needs at least one --point re,im")
    lift = measures.Lift.from_map(phi)
    results = []
    for text in args.point:
        z = _parse_complex(text)
        g = measures.green(lift, z, args.iters)
        results.append({"point": _czpair(z), "value": g})
    return {
        "command": "green",
        "map": label,
        "iterations": args.iters,
        "results": results,
    }


def _grid_files(args, grid, extra: dict) -> dict:
    """Write the grid per --out/--format; return stdout metadata."""
    out = {
        "window": list(grid.window),
        "resolution": list(grid.resolution),
        "window_fraction": grid.window_fraction,
        "max_cell": float(grid.mass.max()),
        "nonzero_cells": int((grid.mass > 0).sum()),
    }
    out.update(extra)
    if args.format == "csv" and not args.out:
        raise MapSpecError("--format csv needs --out PATH")
    if args.out:
        if args.format == "csv":
            measures.write_csv(grid, args.out)
            out["written"] = [args.out, args.out + ".json"]
        else:
            with open(args.out, "w") as f:
                json.dump(
                    {"schema": 1, **out, "mass": grid.mass.tolist()},
                    f,
                    sort_keys=True,
                )
                f.write("\n")
            out["written"] = [args.out]
    return out


def _cmd_measure(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    lift = measures.Lift.from_map(phi)
    field = measures.green_field(lift, args.window, args.res, args.iters)
    grid = measures.measure_from_green(field)
    return {
        "command": "measure",
        "map": label,
        "iterations": args.iters,
        **_grid_files(args, grid, {}),
    }


def _cmd_density_compare(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    if not args.catalog:
        raise MapSpecError(
            "density-compare needs a --catalog map attached to a curve"
        )
    curve = lattes.curve_for_name(label)
    seed_z = _parse_complex(args.point[0] if args.point else "2,0")
    samples = measures.preimage_sample(phi, seed_z, args.depth, seed=args.seed)
    hist = measures.sample_histogram(samples, args.window, args.res)
    dens = measures.lattes_density(curve, args.window, args.res)
    l1 = measures.compare_l1(hist, dens)
    return {
        "command": "density-compare",
        "map": label,
        "depth": args.depth,
        "seed": args.seed,
        "samples": samples.size,
        "samples_at_infinity": samples.n_infinite,
        "l1": l1,
        "density_window_fraction": dens.window_fraction,
        **_grid_files(args, hist, {}),
    }


def _cmd_periodic(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    pts = []
    for z, mult in measures.periodic_points(phi, args.depth):
        finite = z != measures.INF_POINT
        pts.append(
            {
                "z": _czpair(z) if finite else "inf",
                "multiplier": _czpair(mult),
                "repelling": bool(abs(mult) > 1),
            }
        )
    return {
        "command": "periodic",
        "map": label,
        "period": args.depth,
        "count": len(pts),
        "points": pts,
    }


def _cmd_julia(args) -> dict:
    label, phi = _load_maps(args, 1)[0]
    if not args.out:
        raise MapSpecError("julia needs --out PATH for the raster")
    img = measures.julia_raster(phi, args.window, args.res, n=args.iters)
    meta = {
        "command": "julia",
        "map": label,
        "window": ",".join("%g" % w for w in args.window),
        "iters": args.iters,
    }
    measures.write_pgm(args.out, img, meta)
    return {
        "command": "julia",
        "map": label,
        "window": list(args.window),
        "resolution": [img.shape[1], img.shape[0]],
        "iterations": args.iters,
        "written": [args.out],
    }


def _cmd_catalog(args) -> dict:
    entries = []
    for name in lattes.catalog_names():
        e = lattes.catalog_entry(name)
        entries.append(
            {
                "name": name,
                "degree": e.map.degree,
                "d": e.map.d,
                "multiplier": None if e.lam is None else format_element(e.lam),
                "curve": e.curve_name,
            }
        )
    return {"command": "catalog", "count": len(entries), "entries": entries}


# ------------------------------------------------------------- dispatch

# subcommand -> (handler, library operations it reaches); the reaches
# lists back the coverage test that each operation has exactly one home
OPERATIONS = {
    "height": (
        _cmd_height,
        (
            "heights.canonical_height",
            "heights.height_constants",
            "quadfield.parse_element",
        ),
    ),
    "nt-height": (_cmd_nt_height, ("heights.neron_tate",)),
    "commute": (_cmd_commute, ("ratmaps.RationalMap.commutes_with",)),
    "compose": (_cmd_compose, ("ratmaps.RationalMap.compose",)),
    "ramify": (
        _cmd_ramify,
        ("lattes.ramification_profile", "lattes.two_torsion_targets"),
    ),
    "table-check": (
        _cmd_table_check,
        ("lattes.predict_profile", "lattes.map_for_multiplier"),
    ),
    "green": (_cmd_green, ("measures.green", "measures.Lift.from_map")),
    "measure": (
        _cmd_measure,
        (
            "measures.green_field",
            "measures.measure_from_green",
            "measures.write_csv",
        ),
    ),
    "density-compare": (
        _cmd_density_compare,
        (
            "measures.preimage_sample",
            "measures.sample_histogram",
            "measures.lattes_density",
            "measures.compare_l1",
        ),
    ),
    "periodic": (
        _cmd_periodic,
        ("measures.periodic_points", "measures.poly_roots"),
    ),
    "julia": (_cmd_julia, ("measures.julia_raster", "measures.write_pgm")),
    "catalog": (
        _cmd_catalog,
        ("lattes.catalog_names", "lattes.catalog_entry"),
    ),
}


def _window_arg(sp, default):
    sp.add_argument(
        "--window",
        type=_parse_window,
        default=default,
        metavar="x0,x1,y0,y1",
        help="view window (default %s)" % ",".join("%g" % w for w in default),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p1dyn",
        description="Dynamics on the projective line: heights, Lattes "
        "maps, Green functions and invariant measures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, maps=0, points=False, curve=False):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(handler=OPERATIONS[name][0])
        if maps:
            sp.add_argument(
                "--catalog",
                nargs="+",
                metavar="NAME",
                help="catalog map name(s)",
            )
            sp.add_argument(
                "--map", nargs="+", metavar="FILE", help="JSON map spec file(s)"
            )
        if points:
            sp.add_argument(
                "--point",
                action="append",
                metavar="X,Y",
                help="point (repeatable)",
            )
        if curve:
            sp.add_argument(
                "--curve", choices=("E1", "E2"), help="target curve"
            )
        return sp

    sp = add("height", "canonical height of exact points", maps=1, points=True)
    sp.add_argument("--tol", type=float, default=1e-9, metavar="R")

    sp = add("nt-height", "curve height above an x-coordinate", points=True)
    sp.add_argument(
        "--curve", choices=("E1", "E2"), default="E1", help="curve (default E1)"
    )
    sp.add_argument("--tol", type=float, default=1e-9, metavar="R")

    add("commute", "test whether two maps commute", maps=2)
    add("compose", "compose two maps (first after second)", maps=2)
    add("ramify", "preimage counts over the 2-torsion images", maps=1,
        curve=True)

    sp = sub.add_parser(
        "table-check", help="predicted vs computed ramification multiset"
    )
    sp.set_defaults(handler=OPERATIONS["table-check"][0])
    sp.add_argument(
        "--lambda", required=True, metavar="a,b,d", help="multiplier a+b*w"
    )

    sp = add("green", "Green value at complex points", maps=1, points=True)
    sp.add_argument("--iters", type=int, default=30, metavar="N")

    sp = add("measure", "equilibrium measure on a window grid", maps=1)
    _window_arg(sp, (-2.0, 2.0, -2.0, 2.0))
    sp.add_argument("--res", type=int, default=64, metavar="N")
    sp.add_argument("--iters", type=int, default=24, metavar="N")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = add(
        "density-compare",
        "preimage histogram vs closed-form curve density",
        maps=1,
        points=True,
    )
    _window_arg(sp, (-3.0, 3.0, -3.0, 3.0))
    sp.add_argument("--depth", type=int, default=9, metavar="N")
    sp.add_argument("--res", type=int, default=64, metavar="N")
    sp.add_argument("--seed", type=int, default=0, metavar="N")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = add("periodic", "periodic points and multipliers", maps=1)
    sp.add_argument(
        "--depth", type=int, default=1, metavar="N", help="period bound"
    )

    sp = add("julia", "grayscale raster of the canonical measure", maps=1)
    _window_arg(sp, (-2.0, 2.0, -2.0, 2.0))
    sp.add_argument("--res", type=int, default=256, metavar="N")
    sp.add_argument("--iters", type=int, default=24, metavar="N")
    sp.add_argument("--out", metavar="PATH")

    add("catalog", "list the built-in maps")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        payload = args.handler(args)
    except MapSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
