"""Benchmark shapes: dense polygon boundaries, exact area clipping, and
interface-state initialization.

A dense boundary is one closed polyline; shapes that pinch (the sine
band pinches where the curve meets its baseline) additionally expose the
simple CCW loops so area clipping can treat each loop separately while
containment uses even-odd counting on the full boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from . import _cutcore as _cc
from ._geomcore import clip_area_general, poly_area, seg_seg_intersect, \
    SEG_POINT
from .advect import InterfaceState
from .mesh import TriMesh, _point_in_tri
from .predicates import orient2d_det, orient2d_sign


@dataclass(frozen=True)
class ShapeSpec:
    """Analytic benchmark shape parameters."""

    kind: str  # circle | snake | heart | notched_disk
    center: tuple = (0.5, 0.5)
    radius: float = 0.15
    amplitude: float = 0.3
    baseline: float = 0.5
    frequency: float = 2.0 * math.pi
    disk_radius: float = 0.5
    slot_width: float = 0.06
    bridge: float = 0.4

    def __post_init__(self):
        if self.kind not in ("circle", "snake", "heart", "notched_disk"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.kind == "circle" and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind == "notched_disk":
            if not (0 < self.slot_width < 2 * self.disk_radius
                    and 0 < self.bridge < 2 * self.disk_radius):
                raise ValueError("inconsistent notched-disk geometry")


def circle(center=(0.5, 0.5), radius=0.15):
    return ShapeSpec("circle", center=center, radius=radius)


def snake(amplitude=0.3, baseline=0.5):
    return ShapeSpec("snake", amplitude=amplitude, baseline=baseline)


def heart():
    return ShapeSpec("heart")


def notched_disk(center=(2.0, 2.75), disk_radius=0.5, slot_width=0.06,
                 bridge=0.4):
    return ShapeSpec("notched_disk", center=center, disk_radius=disk_radius,
                     slot_width=slot_width, bridge=bridge)


@dataclass(frozen=True)
class DensePolygon:
    """Closed boundary sampling of a shape."""

    vertices: np.ndarray           # full closed boundary (N, 2)
    loops: tuple                   # simple CCW loops, each (n_i, 2)

    @property
    def area(self):
        return float(sum(poly_area(lp, len(lp)) for lp in self.loops))


def _ccw(pts):
    return pts if poly_area(pts, len(pts)) > 0 else pts[::-1].copy()


def polygonize(shape: ShapeSpec, n: int) -> DensePolygon:
    """Boundary sampling with n vertices (corner points kept exact)."""
    if n < 4:
        raise ValueError("need at least 4 boundary vertices")
    if shape.kind == "circle":
        th = 2.0 * math.pi * np.arange(n) / n
        pts = np.stack([shape.center[0] + shape.radius * np.cos(th),
                        shape.center[1] + shape.radius * np.sin(th)], axis=1)
        return DensePolygon(pts, (pts,))

    if shape.kind == "heart":
        th = -math.pi + 2.0 * math.pi * np.arange(n) / n
        x = 16.0 * np.sin(th) ** 3 / 40.0 + 0.52
        y = (13.0 * np.cos(th) - 5.0 * np.cos(2 * th) - 2.0 * np.cos(3 * th)
             - np.cos(4 * th)) / 40.0 + 0.55
        pts = np.stack([x, y], axis=1)
        pts = _ccw(pts)
        return DensePolygon(pts, (pts,))

    if shape.kind == "snake":
        m = max(4, (n // 2) // 2 * 2)  # even, so x = 0.5 is sampled
        xs = np.linspace(0.0, 1.0, m + 1)
        ys = shape.baseline + shape.amplitude * np.sin(shape.frequency * xs)
        curve = np.stack([xs, ys], axis=1)
        base = np.stack([xs[::-1][1:-1],
                         np.full(m - 1, shape.baseline)], axis=1)
        pts = np.concatenate([curve, base])
        h = m // 2
        loop1 = np.concatenate([curve[:h + 1],
                                np.stack([xs[1:h][::-1],
                                          np.full(h - 1, shape.baseline)],
                                         axis=1)])
        loop2 = np.concatenate([curve[h:],
                                np.stack([xs[h + 1:-1][::-1],
                                          np.full(h - 1, shape.baseline)],
                                         axis=1)])
        return DensePolygon(pts, (_ccw(loop1), _ccw(loop2)))

    # notched disk: circular arc plus a rectangular slot open at the
    # bottom, slot top at yc + R - bridge
    xc, yc = shape.center
    R = shape.disk_radius
    half = shape.slot_width / 2.0
    ytop = yc + R - shape.bridge
    ylow = yc - math.sqrt(R * R - half * half)
    a_r = math.atan2(ylow - yc, half)
    a_l = math.atan2(ylow - yc, -half)
    if a_l < a_r:
        a_l += 2.0 * math.pi
    m = max(8, n - 2)
    ang = a_r + (a_l - a_r) * np.arange(m + 1) / m
    arc = np.stack([xc + R * np.cos(ang), yc + R * np.sin(ang)], axis=1)
    arc[0] = (xc + half, ylow)
    arc[-1] = (xc - half, ylow)
    corners = np.array([[xc - half, ytop], [xc + half, ytop]])
    pts = np.concatenate([arc, corners])
    return DensePolygon(pts, (pts,))


def exact_cell_area(poly: DensePolygon, region) -> float:
    """Area of shape-and-region overlap; region is a convex CCW loop
    given as an (n, 2) array or a ConvexPolygon."""
    reg = np.ascontiguousarray(getattr(region, "vertices", region),
                               dtype=np.float64)
    total = 0.0
    for lp in poly.loops:
        total += clip_area_general(np.ascontiguousarray(lp), len(lp),
                                   reg, len(reg))
    return total


# --- jit helpers for initialization -------------------------------------


@njit(cache=True)
def _build_seg_grid(bnd, gx0, gy0, ginv, gnx, gny):
    """Buckets the boundary segments on the mesh grid; CSR layout."""
    ns = bnd.shape[0]
    nb = gnx * gny
    counts = np.zeros(nb, dtype=np.int64)
    for s in range(ns):
        s2 = s + 1 if s + 1 < ns else 0
        x0 = min(bnd[s, 0], bnd[s2, 0])
        x1 = max(bnd[s, 0], bnd[s2, 0])
        y0 = min(bnd[s, 1], bnd[s2, 1])
        y1 = max(bnd[s, 1], bnd[s2, 1])
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                counts[iy * gnx + ix] += 1
    start = np.zeros(nb + 1, dtype=np.int64)
    for b in range(nb):
        start[b + 1] = start[b] + counts[b]
    fill = start[:-1].copy()
    segs = np.empty(start[nb], dtype=np.int64)
    for s in range(ns):
        s2 = s + 1 if s + 1 < ns else 0
        x0 = min(bnd[s, 0], bnd[s2, 0])
        x1 = max(bnd[s, 0], bnd[s2, 0])
        y0 = min(bnd[s, 1], bnd[s2, 1])
        y1 = max(bnd[s, 1], bnd[s2, 1])
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                b = iy * gnx + ix
                segs[fill[b]] = s
                fill[b] += 1
    return start, segs


@njit(cache=True)
def _vertex_materials_init(verts, bnd):
    """Even-odd containment of every mesh vertex in the boundary, via a
    column bucketing of segments by x-interval."""
    nv = verts.shape[0]
    ns = bnd.shape[0]
    out = np.zeros(nv, dtype=np.int8)
    for vid in range(nv):
        px = verts[vid, 0]
        py = verts[vid, 1]
        inside = False
        for s in range(ns):
            s2 = s + 1 if s + 1 < ns else 0
            y0 = bnd[s, 1]
            y1 = bnd[s2, 1]
            if (y0 <= py) != (y1 <= py):
                sgn = orient2d_sign(bnd[s, 0], y0, bnd[s2, 0], y1, px, py)
                if y1 > y0:
                    if sgn > 0:
                        inside = not inside
                else:
                    if sgn < 0:
                        inside = not inside
        out[vid] = 1 if inside else 0
    return out


@njit(cache=True)
def _edge_cuts_init(verts, edges, vmat, bnd, seg_start, seg_segs,
                    gx0, gy0, ginv, gnx, gny, cutn, cutp, miss):
    """Per unique mesh edge: boundary crossings, parity filtered."""
    ne = edges.shape[0]
    ns = bnd.shape[0]
    hs = np.empty(64)
    stamp = np.full(ns, -1, dtype=np.int64)
    for eid in range(ne):
        va = edges[eid, 0]
        vb = edges[eid, 1]
        ax = verts[va, 0]
        ay = verts[va, 1]
        bx = verts[vb, 0]
        by = verts[vb, 1]
        x0 = min(ax, bx)
        x1 = max(ax, bx)
        y0 = min(ay, by)
        y1 = max(ay, by)
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        nh = 0
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                b = iy * gnx + ix
                for kk in range(seg_start[b], seg_start[b + 1]):
                    s = seg_segs[kk]
                    if stamp[s] == eid:
                        continue
                    stamp[s] = eid
                    s2 = s + 1 if s + 1 < ns else 0
                    kind, t, u, qx, qy, _, _ = seg_seg_intersect(
                        ax, ay, bx, by, bnd[s, 0], bnd[s, 1],
                        bnd[s2, 0], bnd[s2, 1])
                    if kind == SEG_POINT and 0.0 <= t <= 1.0 and nh < 64:
                        hs[nh] = t
                        nh += 1
        # sort
        for i in range(1, nh):
            key = hs[i]
            j = i - 1
            while j >= 0 and hs[j] > key:
                hs[j + 1] = hs[j]
                j -= 1
            hs[j + 1] = key
        # dedup
        m = 0
        for i in range(nh):
            if m > 0 and hs[i] - hs[m - 1] < 1e-12:
                continue
            hs[m] = hs[i]
            m += 1
        nh = m
        parity = vmat[va] ^ vmat[vb]
        p0 = -1.0
        p1 = -1.0
        if parity == 0:
            if nh >= 2:
                p0 = hs[0]
                p1 = hs[nh - 1]
        else:
            if nh >= 1:
                p0 = hs[0]
            else:
                miss[eid] = 1
        nc = 0
        for p in (p0, p1):
            if p < 0.0:
                continue
            p = _cc.snap_param(p)
            if not (0.0 < p < 1.0):
                p = _cc.EPS_CUT if p == 0.0 else 1.0 - _cc.EPS_CUT
            cutp[eid, nc] = p
            nc += 1
        if nc == 2 and cutp[eid, 0] > cutp[eid, 1]:
            t = cutp[eid, 0]
            cutp[eid, 0] = cutp[eid, 1]
            cutp[eid, 1] = t
        cutn[eid] = nc


def init_state(mesh: TriMesh, shape: ShapeSpec, n_dense=4096,
               area_correct=True, time=0.0):
    """Builds an interface state sampling the shape onto the mesh.

    Returns (state, events); events are (triangle_or_edge_id, kind)
    pairs for sub-resolution or fallback situations.
    """
    poly = polygonize(shape, n_dense)
    bnd = np.ascontiguousarray(poly.vertices)
    state = InterfaceState(mesh, time)
    events = []

    vmat = _vertex_materials_init(mesh.verts, bnd)
    seg_start, seg_segs = _build_seg_grid(
        bnd, mesh.grid_x0, mesh.grid_y0, mesh.grid_inv,
        mesh.grid_nx, mesh.grid_ny)
    ne = mesh.n_edges
    cutn = np.zeros(ne, dtype=np.int8)
    cutp = np.zeros((ne, 2))
    miss = np.zeros(ne, dtype=np.int8)
    _edge_cuts_init(mesh.verts, mesh.edges, vmat, bnd, seg_start, seg_segs,
                    mesh.grid_x0, mesh.grid_y0, mesh.grid_inv,
                    mesh.grid_nx, mesh.grid_ny, cutn, cutp, miss)
    for eid in np.nonzero(miss)[0]:
        events.append((int(eid), "missing_cut"))

    nt = mesh.n_triangles
    areas = mesh.triangle_areas()
    for tid in range(nt):
        rows = np.array([[0.0, 1.0]] * 3)
        for k in range(3):
            eid = mesh.tri_edges[tid, k]
            nc = cutn[eid]
            if nc == 0:
                continue
            if mesh.tri_edge_dir[tid, k] > 0:
                if nc == 1:
                    rows[k] = (cutp[eid, 0], 1.0)
                else:
                    rows[k] = (cutp[eid, 0], cutp[eid, 1])
            else:
                if nc == 1:
                    rows[k] = (1.0 - cutp[eid, 0], 1.0)
                else:
                    rows[k] = (1.0 - cutp[eid, 1], 1.0 - cutp[eid, 0])
        c = int(vmat[mesh.tris[tid, 0]])
        case_id, swap, rot = _cc.classify_k(c, rows)
        if case_id == 0:
            events.append((tid, "parity_repair"))
            rows = np.array([[0.0, 1.0]] * 3)
            state.c[tid] = c
            state.R[tid] = rows
            continue
        vt = (np.nan, np.nan)
        if case_id == 2:
            tri = mesh.triangle_coords(tid)
            # interior vertex: dense boundary vertex inside the triangle
            # farthest from the cut edge
            ecv1 = tri[rot]
            ecv2 = tri[(rot + 1) % 3]
            lo = tri.min(axis=0)
            hi = tri.max(axis=0)
            cand = bnd[(bnd[:, 0] >= lo[0]) & (bnd[:, 0] <= hi[0])
                       & (bnd[:, 1] >= lo[1]) & (bnd[:, 1] <= hi[1])]
            best = None
            best_d = 0.0
            for q in cand:
                if _point_in_tri(q[0], q[1], tri[0, 0], tri[0, 1],
                                 tri[1, 0], tri[1, 1],
                                 tri[2, 0], tri[2, 1]) > 0:
                    d = abs(orient2d_det(ecv1[0], ecv1[1], ecv2[0], ecv2[1],
                                         q[0], q[1]))
                    if best is None or d > best_d:
                        best, best_d = q, d
            if best is None:
                events.append((tid, "case2_fallback"))
                state.c[tid] = c
                continue
            u, v = _bary(tri, best[0], best[1])
            eps = 1e-12
            if u <= eps or v <= eps or 1.0 - u - v <= eps:
                events.append((tid, "case2_fallback"))
                state.c[tid] = c
                continue
            vt = (u, v)
        state.c[tid] = c
        state.R[tid] = rows
        state.vt[tid] = vt

    if area_correct:
        Rw = np.empty((3, 2))
        uvw = np.empty(2)
        for tid in range(nt):
            tc = _cc.cut_counts(state.R[tid])
            if tc[0] + tc[1] + tc[2] == 0:
                continue
            tri = np.ascontiguousarray(mesh.triangle_coords(tid))
            target = exact_cell_area(poly, tri) / areas[tid]
            target = min(max(target, 0.0), 1.0)
            if target < 1e-12 or target > 1.0 - 1e-12:
                # vertex-touching slivers: the true overlap is empty or
                # the whole triangle, so drop the cuts
                state.c[tid] = 0 if target < 0.5 else 1
                state.R[tid] = ((0.0, 1.0),) * 3
                state.vt[tid] = (np.nan, np.nan)
                continue
            status = _cc.correct_cut_k(state.c[tid], state.R[tid],
                                       state.vt[tid, 0], state.vt[tid, 1],
                                       target, Rw, uvw)
            if status in (_cc.CORR_APPLIED, _cc.CORR_NOOP):
                state.R[tid] = Rw
                if not np.isnan(state.vt[tid, 0]):
                    state.vt[tid] = uvw
            else:
                events.append((tid, "case4_unreachable"))
    return state, events


def _bary(tri, px, py):
    area = orient2d_det(tri[0, 0], tri[0, 1], tri[1, 0], tri[1, 1],
                        tri[2, 0], tri[2, 1])
    u = orient2d_det(tri[0, 0], tri[0, 1], px, py, tri[2, 0], tri[2, 1]) / area
    v = orient2d_det(tri[0, 0], tri[0, 1], tri[1, 0], tri[1, 1], px, py) / area
    return u, v
