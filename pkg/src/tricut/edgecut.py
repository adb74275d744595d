"""Per-triangle interface records and their operations.

A record holds the material of vertex 1 (c), a 3x2 matrix of edge-cut
parameters R, and an optional interior vertex in barycentric form used
when both cuts land on one edge.  Edge i runs from vertex i to vertex
i+1 (cyclic); the point at parameter r on edge i is
(1-r)*v_i + r*v_{i+1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _cutcore as _cc
from .geom import ConvexPolygon, Point2, Segment

EPS_CUT = _cc.EPS_CUT


class InvalidCutError(ValueError):
    pass


def _normalize_row(a, b):
    """Canonical row storage: () -> (0, 1), (r,) -> (r, 1), sorted pair."""
    a = _cc.snap_param(float(a))
    b = _cc.snap_param(float(b))
    cuts = [r for r in (a, b) if 0.0 < r < 1.0]
    if not cuts:
        return 0.0, 1.0
    if len(cuts) == 1:
        return cuts[0], 1.0
    return min(cuts), max(cuts)


@dataclass(frozen=True)
class EdgeCut:
    """Interface state of one triangle."""

    c: int
    R: np.ndarray
    vt: Optional[tuple[float, float]] = None  # barycentric (u, v)

    def __post_init__(self):
        if self.c not in (0, 1):
            raise InvalidCutError("material flag must be 0 or 1")
        R = np.asarray(self.R, dtype=np.float64)
        if R.shape != (3, 2):
            raise InvalidCutError("R must be 3x2")
        norm = np.empty((3, 2))
        for i in range(3):
            norm[i] = _normalize_row(R[i, 0], R[i, 1])
        norm.flags.writeable = False
        object.__setattr__(self, "R", norm)
        if self.vt is not None:
            u, v = float(self.vt[0]), float(self.vt[1])
            w = 1.0 - u - v
            if not (0.0 < u < 1.0 and 0.0 < v < 1.0 and 0.0 < w < 1.0):
                raise InvalidCutError("interior vertex must be strictly "
                                      "inside the triangle")
            object.__setattr__(self, "vt", (u, v))

    @property
    def t(self):
        """Valid-cut counts per edge."""
        return tuple(int(k) for k in _cc.cut_counts(self.R))

    def _uv(self):
        return self.vt if self.vt is not None else (np.nan, np.nan)

    def __eq__(self, other):
        if not isinstance(other, EdgeCut):
            return NotImplemented
        return (self.c == other.c and np.array_equal(self.R, other.R)
                and self.vt == other.vt)


@dataclass(frozen=True)
class CanonicalForm:
    case_id: int
    swap: bool
    rot: int


@dataclass(frozen=True)
class MaterialRegions:
    liquid: list
    air: list


def cut_point(tri, i, r) -> Point2:
    """Point at parameter r along edge i of the triangle."""
    if i not in (0, 1, 2):
        raise ValueError("edge index must be 0, 1 or 2")
    tri = np.asarray(tri, dtype=np.float64)
    x, y = _cc.cut_xy(tri, i, float(r))
    return Point2(x, y)


def vertex_materials(cut: EdgeCut):
    """Materials of the three vertices deduced from cut parities."""
    t = cut.t
    if (t[0] + t[1] + t[2]) % 2:
        raise InvalidCutError(f"odd total cut count {t}")
    return _cc.vertex_materials_k(cut.c, t[0], t[1], t[2])


def classify(cut: EdgeCut) -> CanonicalForm:
    """Reduces the record to one of the six basic patterns."""
    case_id, swap, rot = _cc.classify_k(cut.c, cut.R)
    if case_id == 0:
        raise InvalidCutError(f"cut pattern c={cut.c}, t={cut.t} matches "
                              "no basic case")
    if case_id == 2 and cut.vt is None:
        raise InvalidCutError("two cuts on a single edge need an interior "
                              "vertex")
    return CanonicalForm(case_id, bool(swap), rot)


def reconstruct(cut: EdgeCut, tri) -> MaterialRegions:
    """Convex liquid / air decomposition of the triangle."""
    classify(cut)  # raises on invalid state / missing interior vertex
    tri = np.ascontiguousarray(tri, dtype=np.float64)
    pts = np.empty((5, 6, 2))
    npts = np.empty(5, dtype=np.int64)
    mats = np.empty(5, dtype=np.int64)
    u, v = cut._uv()
    m = _cc.material_pieces_k(cut.c, cut.R, u, v, tri, pts, npts, mats)
    liquid, air = [], []
    for k in range(m):
        poly = ConvexPolygon(pts[k, :npts[k]].copy(), validate=False)
        (liquid if mats[k] == 1 else air).append(poly)
    return MaterialRegions(liquid=liquid, air=air)


def area_fractions(cut: EdgeCut):
    """(air fraction, liquid fraction) from the closed forms."""
    classify(cut)
    u, v = cut._uv()
    f1 = _cc.area_fraction_k(cut.c, cut.R, u, v)
    return 1.0 - f1, f1


def interior_segments(cut: EdgeCut, tri):
    """Interface segments inside the triangle, liquid on the left."""
    classify(cut)
    tri = np.ascontiguousarray(tri, dtype=np.float64)
    segs = np.empty((3, 4))
    u, v = cut._uv()
    n = _cc.interior_segments_k(cut.c, cut.R, u, v, tri, segs)
    return [Segment(Point2(segs[k, 0], segs[k, 1]),
                    Point2(segs[k, 2], segs[k, 3])) for k in range(n)]


def material_at(cut: EdgeCut, tri, p) -> int:
    """Material at a point of the triangle (on-interface counts as 1)."""
    classify(cut)
    tri = np.ascontiguousarray(tri, dtype=np.float64)
    u, v = cut._uv()
    return int(_cc.material_at_k(cut.c, cut.R, u, v, tri,
                                 float(p[0]), float(p[1])))


def edge_cut_correction(cut: EdgeCut, f1_target: float):
    """Moves the cuts so the liquid fraction equals f1_target.

    Returns (status, EdgeCut) where status is 'applied', 'noop' or
    'unreachable' (target not attainable without changing cut counts).
    """
    if not (0.0 <= f1_target <= 1.0):
        raise ValueError("target fraction must lie in [0, 1]")
    classify(cut)
    u, v = cut._uv()
    R_out = np.empty((3, 2))
    uv_out = np.empty(2)
    status = _cc.correct_cut_k(cut.c, cut.R, u, v, float(f1_target),
                               R_out, uv_out)
    if status == _cc.CORR_ERROR:
        raise InvalidCutError("correction failed on invalid record")
    if status == _cc.CORR_UNREACHABLE:
        return "unreachable", cut
    vt = None
    if cut.vt is not None:
        vt = (float(uv_out[0]), float(uv_out[1]))
    new = EdgeCut(cut.c, R_out, vt)
    return ("applied" if status == _cc.CORR_APPLIED else "noop"), new


def pack(cut: EdgeCut) -> np.ndarray:
    """Six-real on-disk encoding of a record."""
    form = classify(cut)
    out = np.empty(6)
    u, v = cut._uv()
    _cc.pack_k(cut.c, cut.R, u, v, cut.vt is not None, form.rot, out)
    return out


def unpack(values) -> EdgeCut:
    """Inverse of pack."""
    vals = np.ascontiguousarray(values, dtype=np.float64)
    if vals.shape != (6,):
        raise InvalidCutError("packed record must hold 6 values")
    R_out = np.empty((3, 2))
    uv_out = np.empty(2)
    c, has_vt = _cc.unpack_k(vals, R_out, uv_out)
    if c < 0:
        raise InvalidCutError("packed values out of range")
    vt = (float(uv_out[0]), float(uv_out[1])) if has_vt else None
    return EdgeCut(int(c), R_out, vt)
