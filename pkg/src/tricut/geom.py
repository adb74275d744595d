"""Robust planar primitives.

Orientation and containment classifications are exact; constructed
coordinates (intersection points, centroids) are ordinary floating
point.  Heavy lifting lives in numba kernels; this module provides the
value types and validated wrappers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _geomcore as _gc
from .predicates import orient2d_det, orient2d_sign


class Point2(NamedTuple):
    x: float
    y: float


class Location(enum.Enum):
    INSIDE = 1
    BOUNDARY = 0
    OUTSIDE = -1


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2

    def __post_init__(self):
        if not all(map(math.isfinite, (*self.a, *self.b))):
            raise ValueError("segment coordinates must be finite")
        if self.a == self.b:
            raise ValueError("degenerate segment")


@dataclass(frozen=True)
class SegIntersection:
    """Result of a segment-segment intersection.

    kind is 'none', 'point', or 'overlap'.  For 'point', t and u are the
    parameters along the first and second segment and p the location.
    For 'overlap', sub is the shared sub-segment.
    """

    kind: str
    t: Optional[float] = None
    u: Optional[float] = None
    p: Optional[Point2] = None
    sub: Optional[Segment] = None


class ConvexPolygon:
    """Strictly counterclockwise convex vertex loop."""

    __slots__ = ("vertices",)

    def __init__(self, vertices, validate=True):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("need an (n, 2) array with n >= 3")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if validate:
            n = v.shape[0]
            any_pos = False
            for i in range(n):
                j = (i + 1) % n
                k = (i + 2) % n
                s = orient2d_sign(v[i, 0], v[i, 1], v[j, 0], v[j, 1],
                                  v[k, 0], v[k, 1])
                if s < 0:
                    raise ValueError("vertices are not in convex CCW order")
                if s > 0:
                    any_pos = True
            if not any_pos:
                raise ValueError("all vertices are collinear")
        self.vertices = v

    def __len__(self):
        return self.vertices.shape[0]

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()!r})"


def orient2d(a, b, c) -> int:
    """Exact sign of the doubled signed area of triangle abc."""
    return orient2d_sign(a[0], a[1], b[0], b[1], c[0], c[1])


def seg_seg_intersect(s1: Segment, s2: Segment) -> SegIntersection:
    """Exact-classification intersection of two segments."""
    kind, t, u, px, py, qx, qy = _gc.seg_seg_intersect(
        s1.a.x, s1.a.y, s1.b.x, s1.b.y, s2.a.x, s2.a.y, s2.b.x, s2.b.y)
    if kind == _gc.SEG_NONE:
        return SegIntersection("none")
    if kind == _gc.SEG_POINT:
        return SegIntersection("point", t=t, u=u, p=Point2(px, py))
    return SegIntersection("overlap", sub=Segment(Point2(px, py), Point2(qx, qy)))


def polygon_area(poly: ConvexPolygon) -> float:
    """Signed shoelace area; positive for CCW."""
    v = poly.vertices
    return _gc.poly_area(v, v.shape[0])


def polygon_centroid(poly: ConvexPolygon) -> Point2:
    """Area-weighted centroid; raises on zero area."""
    v = poly.vertices
    a, cx, cy = _gc.poly_centroid(v, v.shape[0])
    if a == 0.0:
        raise ValueError("zero-area polygon has no centroid")
    return Point2(cx, cy)


def clip_convex(p: ConvexPolygon, q: ConvexPolygon) -> list[ConvexPolygon]:
    """Intersection of two convex polygons: [] or one polygon.

    Zero-area (touching-only) overlaps return [].
    """
    sv = p.vertices
    cv = q.vertices
    ns = sv.shape[0]
    nc = cv.shape[0]
    cap = ns + nc + 4
    buf_a = np.empty((cap, 2))
    buf_b = np.empty((cap, 2))
    n = _gc.clip_convex_convex(sv, ns, cv, nc, buf_a, buf_b)
    if n == 0:
        return []
    return [ConvexPolygon(buf_a[:n].copy(), validate=False)]


def point_in_convex(p, poly: ConvexPolygon) -> Location:
    """Exact containment classification against a convex polygon."""
    v = poly.vertices
    s = _gc.point_in_convex(p[0], p[1], v, v.shape[0])
    return Location(s)
