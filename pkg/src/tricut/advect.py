"""Interface advection: state container, the jit step, and a plain
Python reference route.

The production path is ``advect_step`` (one jit kernel over the narrow
band).  The module also exposes each stage as a straightforward Python
function (``preimage_triangle``, ``material_query``,
``edge_cuts_on_segment``, ``advect_simple``, ``find_additional_vertex``,
``correction_target``); the tests drive both routes against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _cutcore as _cc
from . import _stepcore as _sc
from . import edgecut as ec
from .edgecut import EdgeCut
from .flow import VelocityField, rk4_trace
from .geom import ConvexPolygon, Point2, Segment, clip_convex, polygon_area, \
    polygon_centroid
from .mesh import TriMesh, _point_in_tri
from .predicates import orient2d_det

EVENT_NAMES = {
    _sc.EV_DEGENERATE_PREIMAGE: "degenerate_preimage",
    _sc.EV_MISSING_CUT: "missing_cut",
    _sc.EV_PARITY_REPAIR: "parity_repair",
    _sc.EV_CASE2_FALLBACK: "case2_fallback",
    _sc.EV_CASE4_UNREACHABLE: "case4_unreachable",
    _sc.EV_HIT_OVERFLOW: "hit_overflow",
    _sc.EV_UNIFORM_MISMATCH: "uniform_mismatch",
}


class InterfaceState:
    """Mesh reference plus one cut record per triangle and a time."""

    def __init__(self, mesh: TriMesh, time=0.0):
        nt = mesh.n_triangles
        self.mesh = mesh
        self.time = float(time)
        self.c = np.zeros(nt, dtype=np.int8)
        self.R = np.zeros((nt, 3, 2))
        self.R[:, :, 1] = 1.0
        self.vt = np.full((nt, 2), np.nan)

    def copy(self):
        out = InterfaceState(self.mesh, self.time)
        out.c[:] = self.c
        out.R[:] = self.R
        out.vt[:] = self.vt
        return out

    def get_cut(self, tid) -> EdgeCut:
        v = self.vt[tid]
        vt = None if math.isnan(v[0]) else (float(v[0]), float(v[1]))
        return EdgeCut(int(self.c[tid]), self.R[tid], vt)

    def set_cut(self, tid, cut: EdgeCut):
        self.c[tid] = cut.c
        self.R[tid] = cut.R
        self.vt[tid] = cut.vt if cut.vt is not None else (np.nan, np.nan)

    def liquid_fractions(self):
        out = np.empty(self.mesh.n_triangles)
        _cc.area_fractions_all(self.c, self.R, self.vt, out)
        return out

    def total_liquid_area(self):
        return float(np.dot(self.liquid_fractions(),
                            self.mesh.triangle_areas()))


@dataclass
class StepReport:
    events: list = dc_field(default_factory=list)
    n_failed: int = 0

    def count(self, name):
        return sum(1 for _, k in self.events if k == name)


def _perturbed_vertex(mesh, vid, seed, step_index):
    amp = _sc.PERTURB_REL * mesh.char_length
    px = mesh.verts[vid, 0] + amp * _sc._perturb_unit(seed, step_index, vid, 0)
    py = mesh.verts[vid, 1] + amp * _sc._perturb_unit(seed, step_index, vid, 1)
    return px, py


def preimage_triangle(mesh: TriMesh, tid, field: VelocityField, t, dt,
                      seed=0, step_index=0):
    """Back-traced perturbed vertices of a triangle; raises when the
    pre-image is inverted or collapsed."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    pts = np.empty((3, 2))
    for k in range(3):
        vid = int(mesh.tris[tid, k])
        px, py = _perturbed_vertex(mesh, vid, seed, step_index)
        pts[k] = rk4_trace(field, (px, py), t + dt, -dt)
    if orient2d_det(pts[0, 0], pts[0, 1], pts[1, 0], pts[1, 1],
                    pts[2, 0], pts[2, 1]) <= 0.0:
        raise ValueError(f"degenerate pre-image for triangle {tid}")
    return pts


def material_query(state: InterfaceState, p) -> int:
    """Material at a point; outside the mesh counts as material 0."""
    tid = state.mesh.locate(p)
    if tid is None:
        return 0
    return ec.material_at(state.get_cut(tid), state.mesh.triangle_coords(tid),
                          p)


def _mixed_tids(state):
    return [tid for tid in range(state.mesh.n_triangles)
            if sum(state.get_cut(tid).t) > 0]


def edge_cuts_on_segment(state: InterfaceState, seg: Segment):
    """Interface crossings of a segment against the whole state, Jordan
    parity filtered by the endpoint materials.  Returns a sorted list of
    (parameter, point) pairs.  Brute-force reference implementation."""
    from .geom import seg_seg_intersect
    mesh = state.mesh
    hits = []
    for tid in _mixed_tids(state):
        cut = state.get_cut(tid)
        tri = mesh.triangle_coords(tid)
        for s in ec.interior_segments(cut, tri):
            r = seg_seg_intersect(seg, s)
            if r.kind == "point" and 0.0 < r.t < 1.0:
                hits.append((r.t, r.p))
    for eidx in range(mesh.n_edges):
        wa, wb = mesh.edges[eidx]
        ta, tb = mesh.edge_tris[eidx]
        try:
            r = seg_seg_intersect(seg, Segment(Point2(*mesh.verts[wa]),
                                               Point2(*mesh.verts[wb])))
        except ValueError:
            continue
        if r.kind != "point" or not (0.0 < r.t < 1.0):
            continue
        ma = ec.material_at(state.get_cut(ta), mesh.triangle_coords(ta), r.p)
        mb = 0 if tb < 0 else ec.material_at(state.get_cut(tb),
                                             mesh.triangle_coords(tb), r.p)
        if ma != mb:
            hits.append((r.t, r.p))
    hits.sort(key=lambda h: h[0])
    dedup = []
    for h in hits:
        if dedup and h[0] - dedup[-1][0] < 1e-12:
            continue
        dedup.append(h)
    ma = material_query(state, seg.a)
    mb = material_query(state, seg.b)
    if ma == mb:
        return [dedup[0], dedup[-1]] if len(dedup) >= 2 else []
    return [dedup[0]] if dedup else []


def _liquid_pieces(state):
    """All convex liquid pieces of the state (reference route)."""
    pieces = []
    mesh = state.mesh
    for tid in range(mesh.n_triangles):
        cut = state.get_cut(tid)
        tri = mesh.triangle_coords(tid)
        if sum(cut.t) == 0:
            if cut.c == 1:
                pieces.append((tid, ConvexPolygon(tri, validate=False)))
        else:
            for poly in ec.reconstruct(cut, tri).liquid:
                pieces.append((tid, poly))
    return pieces


def correction_target(state: InterfaceState, tid, pre_tri):
    """Liquid fraction target: pre-image liquid area over the Eulerian
    triangle area (reference route, brute-force clipping)."""
    tri_area = float(state.mesh.triangle_areas()[tid])
    pre_poly = ConvexPolygon(pre_tri, validate=False)
    A = 0.0
    for _, poly in _liquid_pieces(state):
        for res in clip_convex(pre_poly, poly):
            A += polygon_area(res)
    f1 = min(max(A / tri_area, 0.0), 1.0)
    cur = _cc.area_fraction_k(state.c[tid], state.R[tid],
                              state.vt[tid, 0], state.vt[tid, 1])
    if f1 > cur:
        direction = "expand"
    elif f1 < cur:
        direction = "shrink"
    else:
        direction = "none"
    return f1, direction


def find_additional_vertex(state: InterfaceState, tid, cut_images,
                           gen_segments, field: VelocityField, dt,
                           pre_tri=None):
    """Interior vertex for a both-cuts-on-one-edge record (reference
    route).  cut_images are the two unprojected forward-traced cut
    points; gen_segments the interface segments that produced them at
    the earlier time.  Returns a Point2 or None."""
    mesh = state.mesh
    tri = mesh.triangle_coords(tid)
    t0 = state.time
    if pre_tri is None:
        pre_tri = tri
    pre_poly = ConvexPolygon(pre_tri, validate=False)
    # traced liquid pieces
    S = Sx = Sy = 0.0
    far = None
    far_d = 0.0
    for _, poly in _liquid_pieces(state):
        for res in clip_convex(pre_poly, poly):
            traced = np.array([rk4_trace(field, p, t0, dt)
                               for p in res.vertices])
            tp = ConvexPolygon(traced, validate=False)
            a = polygon_area(tp)
            cx, cy = polygon_centroid(tp)
            S += a
            Sx += a * cx
            Sy += a * cy
            for q in traced:
                if _point_in_tri(q[0], q[1], tri[0, 0], tri[0, 1],
                                 tri[1, 0], tri[1, 1],
                                 tri[2, 0], tri[2, 1]) > 0:
                    d = abs(orient2d_det(cut_images[0][0], cut_images[0][1],
                                         cut_images[1][0], cut_images[1][1],
                                         q[0], q[1]))
                    if far is None or d > far_d:
                        far, far_d = Point2(q[0], q[1]), d
    if S > 0.0:
        xc, yc = Sx / S, Sy / S
        vt = Point2(3.0 * xc - cut_images[0][0] - cut_images[1][0],
                    3.0 * yc - cut_images[0][1] - cut_images[1][1])
        if _point_in_tri(vt.x, vt.y, tri[0, 0], tri[0, 1], tri[1, 0],
                         tri[1, 1], tri[2, 0], tri[2, 1]) > 0:
            return vt
    if gen_segments is not None and len(gen_segments) == 2:
        ok, lx, ly = _sc._line_line(
            gen_segments[0].a.x, gen_segments[0].a.y,
            gen_segments[0].b.x, gen_segments[0].b.y,
            gen_segments[1].a.x, gen_segments[1].a.y,
            gen_segments[1].b.x, gen_segments[1].b.y)
        if ok:
            vx, vy = rk4_trace(field, (lx, ly), t0, dt)
            if _point_in_tri(vx, vy, tri[0, 0], tri[0, 1], tri[1, 0],
                             tri[1, 1], tri[2, 0], tri[2, 1]) > 0:
                return Point2(vx, vy)
    return far


def advect_simple(state: InterfaceState, tid, field: VelocityField, dt,
                  seed=0, step_index=0):
    """Single-triangle advection without area correction (reference
    route mirroring the jit kernel's per-edge stages)."""
    mesh = state.mesh
    t0 = state.time
    pre = {}
    for k in range(3):
        vid = int(mesh.tris[tid, k])
        px, py = _perturbed_vertex(mesh, vid, seed, step_index)
        pre[vid] = rk4_trace(field, (px, py), t0 + dt, -dt)

    c_next = material_query(state, pre[int(mesh.tris[tid, 0])])
    rows = np.array([[0.0, 1.0]] * 3)
    images = {}
    gens = {}
    for k in range(3):
        eid = int(mesh.tri_edges[tid, k])
        wa, wb = (int(v) for v in mesh.edges[eid])
        seg = Segment(Point2(*pre[wa]), Point2(*pre[wb]))
        kept = edge_cuts_on_segment(state, seg)
        params = []
        img_list = []
        for s, p in kept:
            q = rk4_trace(field, p, t0, dt)
            rr = _sc.project_param(q[0], q[1], mesh.verts[wa, 0],
                                   mesh.verts[wa, 1], mesh.verts[wb, 0],
                                   mesh.verts[wb, 1])
            rr = _cc.snap_param(min(max(rr, 0.0), 1.0))
            params.append(rr)
            img_list.append(q)
        parity = material_query(state, seg.a) ^ material_query(state, seg.b)
        nvalid = sum(1 for r in params if 0.0 < r < 1.0)
        if (nvalid & 1) != parity:
            for i, r in enumerate(params):
                if not (0.0 < r < 1.0):
                    params[i] = ec.EPS_CUT if r == 0.0 else 1.0 - ec.EPS_CUT
                    nvalid += 1
                    if (nvalid & 1) == parity:
                        break
        valid = [(r, img_list[i]) for i, r in enumerate(params)
                 if 0.0 < r < 1.0]
        valid.sort(key=lambda x: x[0])
        if mesh.tri_edge_dir[tid, k] > 0:
            loc = valid
        else:
            loc = [(1.0 - r, q) for r, q in reversed(valid)]
        if len(loc) == 0:
            rows[k] = (0.0, 1.0)
        elif len(loc) == 1:
            rows[k] = (loc[0][0], 1.0)
        else:
            rows[k] = (loc[0][0], loc[1][0])
        images[k] = [q for _, q in loc]
        gens[k] = kept

    case_id, swap, rot = _cc.classify_k(c_next, rows)
    vt = None
    if case_id == 2:
        imgs = images[rot]
        vtp = find_additional_vertex(state, tid, imgs, None, field, dt,
                                     pre_tri=np.array([pre[int(v)] for v in
                                                       mesh.tris[tid]]))
        if vtp is None:
            return EdgeCut(c_next, np.array([[0.0, 1.0]] * 3))
        tri = mesh.triangle_coords(tid)
        u, v = _sc._bary_of_point(tri, vtp.x, vtp.y)
        vt = (u, v)
    return EdgeCut(int(c_next), rows, vt)


def advect_step(state: InterfaceState, field: VelocityField, dt,
                seed=0, step_index=0):
    """One full advection step over the mesh; returns the new state and
    a report of per-triangle exceptional events."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    mesh = state.mesh
    new = InterfaceState(mesh, state.time + dt)
    umax = field.max_speed((tuple(mesh.bbox_min), tuple(mesh.bbox_max)))
    rings = int(math.ceil(dt * umax / mesh.char_length)) + 2
    ev_cap = 1 << 16
    ev_tri = np.empty(ev_cap, dtype=np.int64)
    ev_kind = np.empty(ev_cap, dtype=np.int64)
    n_ev, n_failed = _sc.advect_step_kernel(
        mesh.verts, mesh.tris, mesh.edges, mesh.edge_tris, mesh.tri_edges,
        mesh.tri_edge_dir,
        mesh.grid_x0, mesh.grid_y0, mesh.grid_inv, mesh.grid_nx, mesh.grid_ny,
        mesh.grid_start, mesh.grid_tris, mesh.char_length,
        state.c, state.R, state.vt,
        field.code, field.params, state.time, float(dt),
        int(seed), int(step_index), rings,
        new.c, new.R, new.vt, ev_tri, ev_kind)
    report = StepReport(
        events=[(int(ev_tri[i]), EVENT_NAMES[int(ev_kind[i])])
                for i in range(n_ev)],
        n_failed=int(n_failed))
    return new, report
