import numpy as np
import pytest
from scipy.spatial import ConvexHull

from isoperim.family import build_family
from isoperim.geometry import validate_polygon
from isoperim.rearrange import GridFunction

SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
RECT21 = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]


@pytest.fixture(scope="session")
def square():
    return validate_polygon(SQUARE)


@pytest.fixture(scope="session")
def rect21():
    return validate_polygon(RECT21)


@pytest.fixture(scope="session")
def square_family(square):
    return build_family(square)


@pytest.fixture(scope="session")
def rect_family(rect21):
    return build_family(rect21)


def random_polygon(rng, k=9, spread=1.0):
    """Convex hull of k uniform points in a box; retried until valid."""
    for _ in range(50):
        pts = rng.uniform(-spread, spread, size=(k, 2))
        try:
            hull = ConvexHull(pts)
            return validate_polygon(pts[hull.vertices])
        except Exception:
            continue
    raise RuntimeError("could not draw a valid random polygon")


def cone_grid(square_poly, n):
    """Distance-to-boundary of the unit square sampled on an n-wide grid."""
    u0 = GridFunction.for_domain(square_poly, n)
    c = u0.centers()
    x, y = c[..., 0], c[..., 1]
    vals = np.maximum(np.minimum.reduce([x, 1.0 - x, y, 1.0 - y]), 0.0)
    vals[~u0.inside_mask] = 0.0
    return u0.with_values(vals)


def disk_indicator_grid(square_poly, n, center, radius, antialias=True):
    """Indicator of a disk; optionally with one-cell linear edge coverage."""
    u0 = GridFunction.for_domain(square_poly, n)
    c = u0.centers()
    d = np.linalg.norm(c - np.asarray(center, dtype=float), axis=-1)
    h = float(u0.spacing[0])
    if antialias:
        vals = np.clip(0.5 + (radius - d) / h, 0.0, 1.0)
    else:
        vals = (d <= radius).astype(float)
    vals[~u0.inside_mask] = 0.0
    return u0.with_values(vals)
