"""Command-line front end.

Subcommands: ``minimizer`` (one shape), ``family`` (a volume sweep),
``rearrange`` (convex rearrangement of a grid function plus its report),
``verify`` (competitor sweep and optional annealing oracle).

Exit codes: 0 success, 2 parse or usage error, 3 geometry error,
4 volume out of range, 5 domain mismatch, 6 verification failure.
Outputs are deterministic for a fixed config and seed; numbers are
pinned to 9 significant digits.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import io, oracle, rearrange, svgout
from .errors import (DomainMismatchError, GeometryError,
                     VolumeOutOfRangeError)
from .family import build_family

EXIT_PARSE = 2
EXIT_GEOMETRY = 3
EXIT_VOLUME = 4
EXIT_MISMATCH = 5
EXIT_CHECK = 6

ANNEAL_BAND = 0.05


def _volume_from_args(args, v_max) -> float:
    if args.volume is not None:
        v = args.volume
    else:
        if not 0.0 < args.volume_fraction < 1.0:
            raise VolumeOutOfRangeError("--volume-fraction must be in (0, 1)")
        v = args.volume_fraction * v_max
    if not 0.0 < v <= v_max:
        raise VolumeOutOfRangeError(f"volume {v} outside (0, {v_max}]")
    return float(v)


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_minimizer(args) -> int:
    domain = io.load_domain(args.domain)
    family = build_family(domain)
    v = _volume_from_args(args, family.v_max)
    shape = family.minimizer(v)
    out = _outdir(args)
    io.dump_json(shape.as_dict(), os.path.join(out, "shape.json"))
    with open(os.path.join(out, "shape.svg"), "w") as fh:
        fh.write(svgout.shape_svg(domain, shape))
    if args.json:
        print(io.json_text(shape.as_dict()))
    else:
        k = "inf" if not np.isfinite(shape.curvature) else f"{shape.curvature:.9g}"
        print(f"case={shape.kind} v={shape.volume:.9g} "
              f"P={shape.perimeter:.9g} k={k}")
    return 0


def _parse_sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("sweep must be 'a:b:n'")
    a, b = float(parts[0]), float(parts[1])
    n = int(parts[2])
    if n < 2:
        raise ValueError("sweep needs at least 2 steps")
    if not a < b:
        raise ValueError("sweep needs a < b")
    return a, b, n


def cmd_family(args) -> int:
    domain = io.load_domain(args.domain)
    family = build_family(domain)
    a, b, n = _parse_sweep(args.sweep)
    vs = np.linspace(a, b, n)
    if vs[0] <= 0.0 or vs[-1] > family.v_max:
        raise VolumeOutOfRangeError("sweep outside (0, |domain|]")
    rows = []
    shapes = []
    for v in vs:
        shape = family.minimizer(float(v))
        rows.append((shape.volume, shape.kind, shape.radius, shape.perimeter,
                     shape.curvature))
        shapes.append(shape)
    out = _outdir(args)
    io.write_family_csv(rows, os.path.join(out, "family.csv"))
    keep = shapes[:: max(1, len(shapes) // 24)]
    with open(os.path.join(out, "family.svg"), "w") as fh:
        fh.write(svgout.family_svg(domain, keep))
    if args.json:
        print(io.json_text([{"v": r[0], "case": r[1], "r": r[2],
                             "perimeter": r[3],
                             "curvature": None if not np.isfinite(r[4]) else r[4]}
                            for r in rows]))
    else:
        print(f"{n} volumes in [{a:.9g}, {b:.9g}]; "
              f"cases: {' '.join(sorted(set(r[1] for r in rows)))}")
    return 0


def cmd_rearrange(args) -> int:
    domain = io.load_domain(args.domain)
    family = build_family(domain)
    u = io.read_grid(args.grid, domain)
    ut = rearrange.convex_rearrangement(u, family)
    report = rearrange.rearrangement_report(u, ut, args.levels)
    out = _outdir(args)
    io.write_grid(ut, os.path.join(out, "u_tilde.grid"))
    io.dump_json(report.as_dict(), os.path.join(out, "report.json"))
    io.write_report_csv(report, os.path.join(out, "report.csv"))
    top = float(ut.values.max(initial=0.0))
    levels = np.linspace(0.0, top if top > 0 else 1.0, 12 + 2)[1:-1]
    contour_sets = [rearrange.level_contour_points(ut, t) for t in levels]
    with open(os.path.join(out, "levels.svg"), "w") as fh:
        fh.write(svgout.contours_svg(domain, contour_sets))
    if args.json:
        print(io.json_text(report.as_dict()))
    else:
        gap = report.bv_u[2] - report.bv_ut[2]
        print(f"equimeasurable={'PASS' if report.equimeasurable_pass else 'FAIL'} "
              f"bv={'PASS' if report.bv_pass else 'FAIL'} "
              f"bv_u={report.bv_u[2]:.9g} bv_ut={report.bv_ut[2]:.9g} "
              f"gap={gap:.9g}")
    return 0 if report.passed else EXIT_CHECK


def cmd_verify(args) -> int:
    domain = io.load_domain(args.domain)
    family = build_family(domain)
    v = _volume_from_args(args, family.v_max)
    if v >= family.v_max:
        raise VolumeOutOfRangeError("verification needs v strictly below |domain|")
    report = oracle.verify_minimality(family, v, args.samples, seed=args.seed)
    result = report.as_dict()
    ok = report.passed
    if args.anneal:
        best = None
        for s in range(3):
            res = oracle.anneal_discrete(domain, v, args.anneal,
                                         seed=args.seed + s)
            if best is None or res.perimeter < best.perimeter:
                best = res
        ratio = best.perimeter / report.minimizer_perimeter
        result["anneal"] = {"grid_n": args.anneal, "perimeter": best.perimeter,
                            "ratio": ratio, "seed": best.seed}
        ok = ok and abs(ratio - 1.0) <= ANNEAL_BAND
    result["ok"] = ok
    out = _outdir(args)
    if args.anneal:
        io.write_pgm(best.grid, os.path.join(out, "anneal.pgm"))
    io.dump_json(result, os.path.join(out, "verify.json"))
    if args.json:
        print(io.json_text(result))
    else:
        line = (f"competitors={report.n_samples} violations={len(report.violations)} "
                f"min_gap={report.min_gap:.9g}")
        if args.anneal:
            line += f" anneal_ratio={result['anneal']['ratio']:.9g}"
        print(line)
    return 0 if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="isoperim", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, volume=False, grid=False):
        p.add_argument("--domain", required=True, help="domain JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--json", action="store_true",
                       help="machine-readable stdout")
        if volume:
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--volume", type=float)
            g.add_argument("--volume-fraction", type=float)
        if grid:
            p.add_argument("--grid", required=True, help="grid text file")

    p = sub.add_parser("minimizer", help="construct one minimizer shape")
    common(p, volume=True)
    p.set_defaults(func=cmd_minimizer)

    p = sub.add_parser("family", help="sweep the family over volumes")
    common(p)
    p.add_argument("--sweep", required=True, metavar="a:b:n")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("rearrange", help="convex rearrangement of a grid function")
    common(p, grid=True)
    p.add_argument("--levels", type=int, default=rearrange.DEFAULT_LEVELS)
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("verify", help="competitor sweep and annealing oracle")
    common(p, volume=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--anneal", type=int, default=0, metavar="N",
                   help="also run the annealing oracle on an N^2 grid")
    p.set_defaults(func=cmd_verify)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else 0
    try:
        return args.func(args)
    except VolumeOutOfRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VOLUME
    except DomainMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
