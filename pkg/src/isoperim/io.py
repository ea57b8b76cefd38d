"""File formats: domain JSON, grid text files, report serialization.

Domain files are JSON objects {"vertices": [[x, y], ...]} with finite
double coordinates.  Grid files are plain text: the header line
``nx ny x0 y0 dx dy`` followed by ny rows of nx space-separated values,
row 0 at the smallest y; (x0, y0) is the center of cell (0, 0).  Grid
values are written with full round-trip precision; report numbers are
pinned to 9 significant digits.
"""

import json

import numpy as np

from .geometry import ConvexPolygon, validate_polygon
from .rearrange import GridFunction


def fmt9(x) -> float:
    """Round a float to 9 significant digits (deterministic text output)."""
    return float(f"{float(x):.9g}")


def _round_floats(obj):
    if isinstance(obj, float):
        return fmt9(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return fmt9(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_round_floats(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def json_text(obj) -> str:
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True)


def load_domain(path) -> ConvexPolygon:
    """Read and validate a domain JSON file."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValueError("domain file must be a JSON object with a 'vertices' key")
    return validate_polygon(data["vertices"])


def save_domain(polygon: ConvexPolygon, path):
    dump_json({"vertices": polygon.vertices.tolist()}, path)


def read_grid(path, domain: ConvexPolygon) -> GridFunction:
    """Parse a grid text file and bind it to a domain."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError("grid header must be 'nx ny x0 y0 dx dy'")
        nx, ny = int(header[0]), int(header[1])
        x0, y0, dx, dy = map(float, header[2:])
        values = np.loadtxt(fh, ndmin=2)
    if values.shape != (ny, nx):
        raise ValueError(f"grid body is {values.shape}, header says {(ny, nx)}")
    return GridFunction(np.array([x0, y0]), np.array([dx, dy]), values, domain)


def write_grid(u: GridFunction, path):
    """Write a grid file; values round-trip exactly."""
    with open(path, "w") as fh:
        head = [repr(float(x)) for x in (u.origin[0], u.origin[1],
                                         u.spacing[0], u.spacing[1])]
        fh.write(f"{u.nx} {u.ny} " + " ".join(head) + "\n")
        for row in u.values:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")


def write_pgm(grid, path):
    """Binary cell grid as an ASCII portable graymap (top row first)."""
    g = np.asarray(grid)
    with open(path, "w") as fh:
        fh.write(f"P2\n{g.shape[1]} {g.shape[0]}\n255\n")
        for row in g[::-1]:
            fh.write(" ".join("255" if v else "0" for v in row) + "\n")


def write_family_csv(rows, path):
    """CSV with columns v, case, r, perimeter, curvature."""
    with open(path, "w") as fh:
        fh.write("v,case,r,perimeter,curvature\n")
        for v, case, r, p, k in rows:
            ktxt = "inf" if not np.isfinite(k) else f"{k:.9g}"
            fh.write(f"{v:.9g},{case},{r:.9g},{p:.9g},{ktxt}\n")


def write_report_csv(report, path):
    with open(path, "w") as fh:
        fh.write("t,mu_u,mu_ut,per_u,per_ut,eq_defect,eq_bound,"
                 "convexity_defect,convexity_bound\n")
        for k in range(len(report.thresholds)):
            vals = (report.thresholds[k], report.mu_u[k], report.mu_ut[k],
                    report.per_u[k], report.per_ut[k], report.eq_defect[k],
                    report.eq_bound[k], report.convexity_defect[k],
                    report.convexity_bound[k])
            fh.write(",".join(f"{x:.9g}" for x in vals) + "\n")
