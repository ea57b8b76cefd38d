"""Exact 2D convex geometry.

Validated convex polygons, inner parallel bodies (erosion by half-plane
offsetting), largest inscribed balls, morphological opening, and the
Steiner area/perimeter formulas for a convex core dilated by a disk.

All functions are pure; the returned objects are treated as immutable.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateError, NonConvexError, RadiusTooLargeError

EPS_GEOM = 1e-9       # length tolerance, relative to the domain scale
EPS_AREA = 1e-12      # area tolerance, relative to scale**2
DELTA_COLLAPSE = 1e-9


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with CCW vertices.

    Build through :func:`validate_polygon`; the derived fields (edge
    normals, offsets, scale) are filled there.  ``normals[i]`` is the
    outward unit normal of edge ``vertices[i] -> vertices[i+1]`` and the
    interior is ``{x : normals[i] . x <= offsets[i] for all i}``.
    """

    vertices: np.ndarray            # (n, 2) float64, CCW
    normals: np.ndarray             # (n, 2) outward unit normals
    offsets: np.ndarray             # (n,)
    scale: float                    # bounding-box diagonal
    reversed_input: bool = False    # CW input was silently reoriented

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def contains_point(self, points, tol=None):
        """Closed membership test, vectorized over (..., 2) points."""
        if tol is None:
            tol = EPS_GEOM * self.scale
        pts = np.asarray(points, dtype=float)
        viol = pts @ self.normals.T - self.offsets
        return np.max(viol, axis=-1) <= tol


@dataclass(frozen=True, eq=False)
class ErodedBody:
    """Inner parallel body of a convex polygon at some erosion radius.

    ``kind`` is one of "polygon", "segment", "point", "empty"; ``points``
    holds the polygon vertices, the two segment endpoints, the single
    point, or an empty (0, 2) array.  ``radius`` records the erosion
    radius that produced the body and ``scale`` the source polygon scale
    (used for closed-membership tolerances downstream).
    """

    kind: str
    points: np.ndarray
    radius: float
    scale: float = 1.0

    def measures(self):
        """(area, perimeter) of the body itself (a segment counts twice)."""
        if self.kind == "polygon":
            return _shoelace(self.points), _edge_length_sum(self.points)
        if self.kind == "segment":
            return 0.0, 2.0 * float(np.linalg.norm(self.points[1] - self.points[0]))
        return 0.0, 0.0

    def distance(self, points):
        """Euclidean distance from (..., 2) points to the body (0 inside)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "empty":
            d = np.full(pts.shape[0], np.inf)
        elif self.kind == "point":
            d = np.linalg.norm(pts - self.points[0], axis=-1)
        elif self.kind == "segment":
            d = _point_segment_distance(pts, self.points[0], self.points[1])
        else:
            d = _point_polygon_distance(pts, self.points)
        return d if np.asarray(points).ndim > 1 else float(d[0])


@dataclass(frozen=True, eq=False)
class LargestBallSet:
    """Inradius, set of incenter positions and the measures derived from it.

    ``centers`` is a point or a segment; ``hull_measure`` is the area of
    the union of all largest inscribed balls (pi r^2 + 2 r L where L is
    the length of the center segment).
    """

    inradius: float
    centers: ErodedBody
    midpoint: np.ndarray
    center_length: float
    ball_measure: float
    hull_measure: float


@dataclass(frozen=True, eq=False)
class RoundedBody:
    """Minkowski sum of an eroded core with a disk of the given radius."""

    core: ErodedBody
    radius: float


# ---------------------------------------------------------------------------
# scalar helpers


def _shoelace(vertices) -> float:
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _edge_length_sum(vertices) -> float:
    return float(np.sum(np.linalg.norm(np.roll(vertices, -1, axis=0) - vertices, axis=1)))


def _point_segment_distance(pts, a, b):
    ab = b - a
    denom = max(float(ab @ ab), 1e-300)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(pts - proj, axis=-1)


def _point_polygon_distance(pts, vertices):
    """Distance from points (m, 2) to a convex CCW polygon; 0 inside."""
    nxt = np.roll(vertices, -1, axis=0)
    edges = nxt - vertices
    lens = np.linalg.norm(edges, axis=1)
    keep = lens > 1e-300
    v0 = vertices[keep]
    ev = edges[keep]
    el = lens[keep]
    # outward normals for CCW orientation
    nrm = np.stack([ev[:, 1], -ev[:, 0]], axis=1) / el[:, None]
    off = np.sum(nrm * v0, axis=1)
    inside = np.max(pts @ nrm.T - off, axis=1) <= 0.0
    rel = pts[:, None, :] - v0[None, :, :]
    t = np.clip(np.einsum("mkd,kd->mk", rel, ev) / (el**2), 0.0, 1.0)
    proj = v0[None, :, :] + t[:, :, None] * ev[None, :, :]
    dmin = np.min(np.linalg.norm(pts[:, None, :] - proj, axis=2), axis=1)
    return np.where(inside, 0.0, dmin)


def clip_halfplane(vertices, normal, offset):
    """Clip a convex CCW polygon to the half-plane {x : normal . x <= offset}.

    Returns a (k, 2) array; k may be 0 when nothing survives.
    """
    s = vertices @ np.asarray(normal, dtype=float) - offset
    out = []
    n = len(vertices)
    for i in range(n):
        j = (i + 1) % n
        if s[i] <= 0.0:
            out.append(vertices[i])
        if (s[i] < 0.0 < s[j]) or (s[j] < 0.0 < s[i]):
            t = s[i] / (s[i] - s[j])
            out.append(vertices[i] + t * (vertices[j] - vertices[i]))
    return np.array(out, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# validation and plain measures


def validate_polygon(vertices) -> ConvexPolygon:
    """Validate a vertex list and return a normalized CCW ConvexPolygon.

    Rejects non-finite coordinates, duplicate vertices, collinear runs and
    non-convex chains.  CW input is reversed (recorded on the result).
    """
    arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DegenerateError("vertices must be an (n, 2) array of points")
    if len(arr) < 3:
        raise DegenerateError("need at least 3 vertices")
    if not np.all(np.isfinite(arr)):
        raise DegenerateError("non-finite vertex coordinates")

    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    scale = float(np.linalg.norm(hi - lo))
    if scale <= 0.0:
        raise DegenerateError("all vertices coincide")

    gaps = np.linalg.norm(np.roll(arr, -1, axis=0) - arr, axis=1)
    if np.any(gaps <= EPS_GEOM * scale):
        raise DegenerateError("duplicate consecutive vertices")

    reversed_input = False
    e = np.roll(arr, -1, axis=0) - arr
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    thresh = EPS_GEOM * scale * scale
    if np.all(cross < -thresh):
        arr = arr[::-1].copy()
        reversed_input = True
        e = np.roll(arr, -1, axis=0) - arr
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if not np.all(cross > thresh):
        raise NonConvexError("vertex chain is not strictly convex")

    area = _shoelace(arr)
    if area <= 0.0:
        raise DegenerateError("polygon has non-positive area")

    lens = np.linalg.norm(e, axis=1)
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1) / lens[:, None]
    # average the two endpoint projections for a stable offset
    offsets = 0.5 * (np.sum(normals * arr, axis=1)
                     + np.sum(normals * np.roll(arr, -1, axis=0), axis=1))
    return ConvexPolygon(vertices=arr, normals=normals, offsets=offsets,
                         scale=scale, reversed_input=reversed_input)


def polygon_measures(polygon: ConvexPolygon):
    """(area, perimeter) by the shoelace formula and edge-length sum."""
    return _shoelace(polygon.vertices), _edge_length_sum(polygon.vertices)


# ---------------------------------------------------------------------------
# erosion event structure
#
# Offsetting every edge line inward by r keeps each eroded vertex on a fixed
# affine path V(r) = Z + r*S until some edge length shrinks to zero.  The
# radii at which edges vanish split [0, r*] into intervals with a constant
# combinatorial structure; inside each interval the core area is quadratic
# in r and the core perimeter affine.  One pass computes everything needed
# for erosion at any radius, the inradius, and the set of incenter positions.


class ErosionStructure:
    """Piecewise-affine description of all inner parallel bodies of a polygon."""

    def __init__(self, polygon: ConvexPolygon):
        self.polygon = polygon
        self.scale = polygon.scale
        self._build()

    def _build(self):
        poly = self.polygon
        n_all = poly.normals
        d_all = poly.offsets
        tie = 1e-11 * self.scale
        eps_len = 1e-12 * self.scale

        active = list(range(len(d_all)))
        r_cur = 0.0
        intervals = []

        while len(active) >= 3:
            idx = np.array(active)
            N = n_all[idx]
            D = d_all[idx]
            Nn = np.roll(N, -1, axis=0)
            Dn = np.roll(D, -1, axis=0)
            det = N[:, 0] * Nn[:, 1] - N[:, 1] * Nn[:, 0]
            if np.any(det <= 1e-14):
                break  # adjacent constraints (anti)parallel: core is degenerate
            # vertex t between edges t and t+1: solve the 2x2 offset systems
            Z = np.stack([(D * Nn[:, 1] - N[:, 1] * Dn) / det,
                          (N[:, 0] * Dn - D * Nn[:, 0]) / det], axis=1)
            S = np.stack([(-Nn[:, 1] + N[:, 1]) / det,
                          (-N[:, 0] + Nn[:, 0]) / det], axis=1)
            # edge t runs from vertex t-1 to vertex t along tangent (-ny, nx)
            tang = np.stack([-N[:, 1], N[:, 0]], axis=1)
            dZ = Z - np.roll(Z, 1, axis=0)
            dS = S - np.roll(S, 1, axis=0)
            len0 = np.sum(dZ * tang, axis=1)
            dlen = np.sum(dS * tang, axis=1)
            cur_len = len0 + r_cur * dlen
            if np.any(cur_len <= eps_len):
                for k in np.nonzero(cur_len <= eps_len)[0][::-1]:
                    del active[k]
                continue  # redundant constraints pruned, re-derive structure
            with np.errstate(divide="ignore"):
                vanish = np.where(dlen < -1e-300, -len0 / dlen, np.inf)
            r_next = float(np.min(vanish))
            if not np.isfinite(r_next) or r_next <= r_cur + tie:
                hit = vanish <= r_cur + tie
                if not np.any(hit):
                    break
                for k in np.nonzero(hit)[0][::-1]:
                    del active[k]
                continue

            area_c = self._area_coeffs(Z, S)
            intervals.append({
                "r_lo": r_cur, "r_hi": r_next,
                "normals": N, "offsets": D, "Z": Z, "S": S,
                "area": area_c,
                "perim": (float(np.sum(len0)), float(np.sum(dlen))),
            })
            for k in np.nonzero(vanish <= r_next + tie)[0][::-1]:
                del active[k]
            r_cur = r_next

        if not intervals:
            raise DegenerateError("polygon admits no interior offset structure")
        self.intervals = intervals
        self.r_star = r_cur
        self.breaks = np.array([iv["r_lo"] for iv in intervals] + [r_cur])
        self._area_poly = np.array([iv["area"] for iv in intervals])
        self._perim_poly = np.array([iv["perim"] for iv in intervals])

        # limit of the vertex paths at r*: the set of incenter positions
        last = intervals[-1]
        pts = last["Z"] + self.r_star * last["S"]
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        i, j = np.unravel_index(np.argmax(d2), d2.shape)
        if np.sqrt(d2[i, j]) <= EPS_GEOM * self.scale:
            self.center_points = pts.mean(axis=0)[None, :]
        else:
            self.center_points = np.stack([pts[i], pts[j]])

    @staticmethod
    def _area_coeffs(Z, S):
        """Shoelace of V(r) = Z + r S expanded into area = a0 + a1 r + a2 r^2."""
        Zn = np.roll(Z, -1, axis=0)
        Sn = np.roll(S, -1, axis=0)

        def cr(p, q):
            return p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]

        a0 = 0.5 * float(np.sum(cr(Z, Zn)))
        a1 = 0.5 * float(np.sum(cr(Z, Sn) + cr(S, Zn)))
        a2 = 0.5 * float(np.sum(cr(S, Sn)))
        return a0, a1, a2

    # -- queries ------------------------------------------------------------

    def interval_index(self, r):
        idx = np.searchsorted(self.breaks, r, side="right") - 1
        return np.clip(idx, 0, len(self.intervals) - 1)

    def core_measures(self, r):
        """(area, perimeter) of the eroded core, vectorized over r in [0, r*]."""
        r = np.asarray(r, dtype=float)
        idx = self.interval_index(r)
        a = self._area_poly[idx]
        p = self._perim_poly[idx]
        area = a[..., 0] + r * (a[..., 1] + r * a[..., 2])
        perim = p[..., 0] + r * p[..., 1]
        return np.maximum(area, 0.0), np.maximum(perim, 0.0)

    def area_of_opening(self, r):
        """Area of (eroded core) + r * disk, by the Steiner formula."""
        r = np.asarray(r, dtype=float)
        area, perim = self.core_measures(r)
        return area + r * perim + np.pi * r * r

    def perimeter_of_opening(self, r):
        r = np.asarray(r, dtype=float)
        _, perim = self.core_measures(r)
        return perim + 2.0 * np.pi * r

    def core_vertices(self, r: float) -> np.ndarray:
        iv = self.intervals[int(self.interval_index(r))]
        return iv["Z"] + r * iv["S"]

    def distance_to_core(self, points, r):
        """Distance from points (m, 2) to the eroded core at per-point radii r."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.broadcast_to(np.asarray(r, dtype=float), (pts.shape[0],))
        out = np.empty(pts.shape[0])
        idx = self.interval_index(r)
        for k in np.unique(idx):
            sel = idx == k
            iv = self.intervals[k]
            out[sel] = self._dist_group(pts[sel], r[sel], iv)
        return out

    @staticmethod
    def _dist_group(pts, r, iv):
        V = iv["Z"][None, :, :] + r[:, None, None] * iv["S"][None, :, :]
        inside = np.max(pts @ iv["normals"].T - (iv["offsets"][None, :] - r[:, None]),
                        axis=1) <= 0.0
        W = np.roll(V, -1, axis=1)
        seg = W - V
        rel = pts[:, None, :] - V
        denom = np.maximum(np.sum(seg * seg, axis=2), 1e-300)
        t = np.clip(np.sum(rel * seg, axis=2) / denom, 0.0, 1.0)
        proj = V + t[:, :, None] * seg
        dmin = np.min(np.linalg.norm(pts[:, None, :] - proj, axis=2), axis=1)
        return np.where(inside, 0.0, dmin)

    def core_body(self, r: float) -> ErodedBody:
        """Eroded core at radius r with the degeneracy collapse policy applied."""
        scale = self.scale
        if r < 0.0:
            raise ValueError("erosion radius must be nonnegative")
        if r > self.r_star * (1.0 + DELTA_COLLAPSE) + EPS_GEOM * scale:
            return ErodedBody("empty", np.empty((0, 2)), r, scale)
        if r == 0.0:
            return ErodedBody("polygon", self.polygon.vertices, 0.0, scale)
        rr = min(r, self.r_star)
        pts = self.core_vertices(rr)
        area = _shoelace(pts)
        if area >= EPS_AREA * scale * scale:
            keep = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1) > EPS_GEOM * scale
            cleaned = pts[keep] if keep.sum() >= 3 else pts
            return ErodedBody("polygon", cleaned, r, scale)
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        i, j = np.unravel_index(np.argmax(d2), d2.shape)
        if np.sqrt(d2[i, j]) < EPS_GEOM * scale:
            return ErodedBody("point", pts.mean(axis=0)[None, :], r, scale)
        return ErodedBody("segment", np.stack([pts[i], pts[j]]), r, scale)


# ---------------------------------------------------------------------------
# public operations built on the structure


def erode(polygon: ConvexPolygon, r: float, structure: ErosionStructure | None = None) -> ErodedBody:
    """Inner parallel body: intersection of the inward-offset half-planes.

    Monotone in r; collapses to a segment, point, or the empty body when the
    offset planes no longer bound a full-dimensional polygon.
    """
    if r < 0.0:
        raise ValueError("erosion radius must be nonnegative")
    struct = structure or ErosionStructure(polygon)
    return struct.core_body(float(r))


def largest_balls(polygon: ConvexPolygon, structure: ErosionStructure | None = None) -> LargestBallSet:
    """Inradius and incenter set of the polygon.

    The inradius solves the linear program  max r  s.t.  n_i . x + r <= d_i
    over the unit edge normals; the incenter set (a point or a segment) is
    read off the erosion structure and cross-checked against the LP value.
    """
    struct = structure or ErosionStructure(polygon)
    n = polygon.normals
    res = linprog(c=[0.0, 0.0, -1.0],
                  A_ub=np.hstack([n, np.ones((len(n), 1))]),
                  b_ub=polygon.offsets,
                  bounds=[(None, None), (None, None), (0.0, None)],
                  method="highs")
    if not res.success:
        raise DegenerateError(f"inradius LP failed: {res.message}")
    r_star = float(res.x[2])
    if abs(r_star - struct.r_star) > 1e-7 * polygon.scale:
        raise DegenerateError("inconsistent inradius between LP and offset structure")

    pts = struct.center_points
    if len(pts) == 1:
        centers = ErodedBody("point", pts, r_star, polygon.scale)
        midpoint = pts[0]
        length = 0.0
    else:
        centers = ErodedBody("segment", pts, r_star, polygon.scale)
        midpoint = 0.5 * (pts[0] + pts[1])
        length = float(np.linalg.norm(pts[1] - pts[0]))
    ball = np.pi * r_star * r_star
    return LargestBallSet(inradius=r_star, centers=centers, midpoint=midpoint,
                          center_length=length, ball_measure=ball,
                          hull_measure=ball + 2.0 * r_star * length)


def opening(polygon: ConvexPolygon, r: float, structure: ErosionStructure | None = None) -> RoundedBody:
    """Morphological opening: erosion by r followed by dilation by r.

    Equals the union of all disks of radius r contained in the polygon; at
    r = 0 it is the polygon itself, at r = r* the union of all largest
    inscribed balls.
    """
    if r < 0.0:
        raise ValueError("opening radius must be nonnegative")
    struct = structure or ErosionStructure(polygon)
    tol = struct.r_star * DELTA_COLLAPSE + EPS_GEOM * polygon.scale
    if r > struct.r_star + tol:
        raise RadiusTooLargeError(
            f"radius {r} exceeds inradius {struct.r_star}")
    rr = min(float(r), struct.r_star)
    return RoundedBody(core=struct.core_body(rr), radius=rr)


def rounded_measures(body: RoundedBody):
    """(area, perimeter) of core + r * disk by the Steiner formula.

    area = A(core) + r P(core) + pi r^2 and perimeter = P(core) + 2 pi r,
    where a segment of length L has A = 0, P = 2L and a point has A = P = 0.
    """
    if body.core.kind == "empty":
        return 0.0, 0.0
    a, p = body.core.measures()
    r = body.radius
    return a + r * p + np.pi * r * r, p + 2.0 * np.pi * r


def contains(body: RoundedBody, points, tol: float | None = None):
    """Closed membership in core + r * disk; vectorized over (..., 2) points."""
    if tol is None:
        tol = EPS_GEOM * body.core.scale
    d = body.core.distance(points)
    return d <= body.radius + tol
