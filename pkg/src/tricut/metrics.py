"""Error metrics, convergence orders, curvature estimation, and liquid
component counting for the benchmark suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from numba import njit

from . import _cutcore as _cc
from . import edgecut as ec
from ._geomcore import clip_area_general, poly_area
from .mesh import TriMesh
from .predicates import orient2d_sign
from .shapes import DensePolygon, _build_seg_grid


@dataclass
class ErrorReport:
    """Shape/mass error summary with an optional per-group breakdown."""

    E_g: float
    E_r: float
    E_m: float
    per_group: np.ndarray = dc_field(default=None, repr=False)


@dataclass(frozen=True)
class CurvatureSample:
    segment: int
    kappa: float
    frame: str        # "y-of-x" or "x-of-y"
    midpoint: tuple


@njit(cache=True)
def _truth_areas_kernel(verts, tris, areas, bnd, seg_start, seg_segs,
                        gx0, gy0, ginv, gnx, gny,
                        loops, loop_len, out):
    """Exact shape-overlap area per triangle: triangles whose bounding
    box meets a boundary segment bucket are clipped exactly, the rest
    are classified by centroid parity."""
    nt = tris.shape[0]
    maxn = loops.shape[1]
    sub = np.empty((maxn + 8, 2))
    tri = np.empty((3, 2))
    for ti in range(nt):
        for k in range(3):
            tri[k, 0] = verts[tris[ti, k], 0]
            tri[k, 1] = verts[tris[ti, k], 1]
        x0 = min(tri[0, 0], min(tri[1, 0], tri[2, 0]))
        x1 = max(tri[0, 0], max(tri[1, 0], tri[2, 0]))
        y0 = min(tri[0, 1], min(tri[1, 1], tri[2, 1]))
        y1 = max(tri[0, 1], max(tri[1, 1], tri[2, 1]))
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        near = False
        ns = bnd.shape[0]
        for iy in range(iy0, iy1 + 1):
            if near:
                break
            for ix in range(ix0, ix1 + 1):
                b = iy * gnx + ix
                for kk in range(seg_start[b], seg_start[b + 1]):
                    s = seg_segs[kk]
                    s2 = s + 1 if s + 1 < ns else 0
                    if (min(bnd[s, 0], bnd[s2, 0]) <= x1
                            and max(bnd[s, 0], bnd[s2, 0]) >= x0
                            and min(bnd[s, 1], bnd[s2, 1]) <= y1
                            and max(bnd[s, 1], bnd[s2, 1]) >= y0):
                        near = True
                        break
                if near:
                    break
        if near:
            a = 0.0
            for li in range(loops.shape[0]):
                nl = loop_len[li]
                for q in range(nl):
                    sub[q, 0] = loops[li, q, 0]
                    sub[q, 1] = loops[li, q, 1]
                a += clip_area_general(sub, nl, tri, 3)
            out[ti] = a
        else:
            px = (tri[0, 0] + tri[1, 0] + tri[2, 0]) / 3.0
            py = (tri[0, 1] + tri[1, 1] + tri[2, 1]) / 3.0
            inside = False
            for s in range(ns):
                s2 = s + 1 if s + 1 < ns else 0
                ya = bnd[s, 1]
                yb = bnd[s2, 1]
                if (ya <= py) != (yb <= py):
                    sgn = orient2d_sign(bnd[s, 0], ya, bnd[s2, 0], yb, px, py)
                    if yb > ya:
                        if sgn > 0:
                            inside = not inside
                    else:
                        if sgn < 0:
                            inside = not inside
            out[ti] = areas[ti] if inside else 0.0


def truth_areas(mesh: TriMesh, truth: DensePolygon):
    """Exact overlap area of the truth shape with every triangle."""
    bnd = np.ascontiguousarray(truth.vertices)
    if (bnd[:, 0].min() < mesh.bbox_min[0] - 1e-9
            or bnd[:, 0].max() > mesh.bbox_max[0] + 1e-9
            or bnd[:, 1].min() < mesh.bbox_min[1] - 1e-9
            or bnd[:, 1].max() > mesh.bbox_max[1] + 1e-9):
        raise ValueError("truth polygon extends outside the mesh domain")
    seg_start, seg_segs = _build_seg_grid(
        bnd, mesh.grid_x0, mesh.grid_y0, mesh.grid_inv,
        mesh.grid_nx, mesh.grid_ny)
    maxn = max(len(lp) for lp in truth.loops)
    loops = np.zeros((len(truth.loops), maxn, 2))
    loop_len = np.empty(len(truth.loops), dtype=np.int64)
    for i, lp in enumerate(truth.loops):
        loops[i, :len(lp)] = lp
        loop_len[i] = len(lp)
    out = np.empty(mesh.n_triangles)
    _truth_areas_kernel(mesh.verts, mesh.tris, mesh.triangle_areas(), bnd,
                        seg_start, seg_segs, mesh.grid_x0, mesh.grid_y0,
                        mesh.grid_inv, mesh.grid_nx, mesh.grid_ny,
                        loops, loop_len, out)
    return out


def shape_error(state, truth: DensePolygon, grouping="auto",
                A0=None) -> ErrorReport:
    """Sum of per-group |true area - represented area|.  Lattice meshes
    group the two triangles of each square cell; unstructured meshes are
    per-triangle."""
    mesh = state.mesh
    A = truth_areas(mesh, truth)
    At = state.liquid_fractions() * mesh.triangle_areas()
    if grouping == "auto":
        grouping = "cells" if mesh.lattice is not None else "triangles"
    if grouping == "cells":
        if mesh.lattice is None:
            raise ValueError("cell grouping needs a lattice mesh")
        diff = np.abs((A[0::2] + A[1::2]) - (At[0::2] + At[1::2]))
    else:
        diff = np.abs(A - At)
    E_g = float(diff.sum())
    A0 = float(A.sum()) if A0 is None else float(A0)
    E_m = abs(A0 - float(At.sum())) / A0 if A0 > 0 else 0.0
    return ErrorReport(E_g=E_g, E_r=E_g / A0 if A0 > 0 else 0.0,
                       E_m=E_m, per_group=diff)


def mass_error(state, A0) -> float:
    if A0 <= 0:
        raise ValueError("reference area must be positive")
    return abs(A0 - state.total_liquid_area()) / A0


def convergence_order(errors):
    """errors: [(level_or_N, E), ...] sorted coarse -> fine.  Returns
    (pairwise orders, least-squares slope of log2 E vs refinement
    level).  Pairs involving a zero error yield None."""
    if len(errors) < 2:
        raise ValueError("need at least two levels")
    orders = []
    for (l0, e0), (l1, e1) in zip(errors, errors[1:]):
        if e0 > 0 and e1 > 0:
            orders.append(math.log2(e0 / e1))
        else:
            orders.append(None)
    pts = [(i, math.log2(e)) for i, (_, e) in enumerate(errors) if e > 0]
    slope = None
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        slope = -float(np.polyfit(xs, ys, 1)[0])
    return orders, slope


def _segment_carriers(cut, mesh, tid):
    """Interior segments of a triangle plus, per endpoint, the global
    mesh edge carrying it (or -1 for the interior vertex)."""
    tri = mesh.triangle_coords(tid)
    segs = ec.interior_segments(cut, tri)
    if not segs:
        return []
    form = ec.classify(cut)
    case_id, rot = form.case_id, form.rot
    # endpoint source local edges per case, canonical order (see the
    # reconstruction tables); -1 marks the interior vertex
    if case_id == 2:
        srcs = [(0, -1), (-1, 0)]
    elif case_id == 3:
        srcs = [(0, 1), (1, 0)]
    elif case_id == 4:
        srcs = [(0, 1), (1, 2), (2, 0)]
    elif case_id == 5:
        srcs = [(0, 2)]
    else:
        srcs = [(0, 1), (1, 2)]
    if form.swap:
        srcs = [(b, a) for a, b in reversed(srcs)]
    out = []
    for seg, (la, lb) in zip(segs, srcs):
        ea = -1 if la < 0 else int(mesh.tri_edges[tid, (la + rot) % 3])
        eb = -1 if lb < 0 else int(mesh.tri_edges[tid, (lb + rot) % 3])
        out.append((seg, ea, eb))
    return out


def curvature(state):
    """Parabola-fit curvature at every interior segment midpoint."""
    mesh = state.mesh
    per_tri = {}
    for tid in range(mesh.n_triangles):
        cut = state.get_cut(tid)
        if sum(cut.t) == 0:
            continue
        per_tri[tid] = _segment_carriers(cut, mesh, tid)
    # index segments and their midpoints
    entries = []   # (tid, seg, edge ids)
    for tid, lst in per_tri.items():
        for seg, ea, eb in lst:
            entries.append((tid, seg, ea, eb))
    samples = []
    skipped = []
    for si, (tid, seg, ea, eb) in enumerate(entries):
        pts = [np.array(seg.a), np.array(seg.b)]
        mid = 0.5 * (pts[0] + pts[1])
        for eid in (ea, eb):
            if eid < 0:
                continue
            ta, tb = mesh.edge_tris[eid]
            nb = tb if ta == tid else ta
            if nb < 0 or nb not in per_tri:
                continue
            best = None
            best_d = np.inf
            for nseg, _, _ in per_tri[nb]:
                nmid = 0.5 * (np.array(nseg.a) + np.array(nseg.b))
                d = float(np.hypot(*(nmid - mid)))
                if d < best_d:
                    best, best_d = nseg, d
            if best is not None:
                pts.extend([np.array(best.a), np.array(best.b)])
        uniq = []
        for p in pts:
            if all(np.hypot(*(p - q)) > 1e-12 for q in uniq):
                uniq.append(p)
        if len(uniq) < 3:
            skipped.append(si)
            continue
        P = np.array(uniq)
        if np.ptp(P[:, 1]) > np.ptp(P[:, 0]):
            xs, ys = P[:, 1], P[:, 0]
            frame = "x-of-y"
            s = mid[1]
        else:
            xs, ys = P[:, 0], P[:, 1]
            frame = "y-of-x"
            s = mid[0]
        a, b, _c = np.polyfit(xs, ys, 2)
        kappa = 2.0 * a / (1.0 + (2.0 * a * s + b) ** 2) ** 1.5
        samples.append(CurvatureSample(si, float(kappa), frame,
                                       (float(mid[0]), float(mid[1]))))
    return samples, skipped


def curvature_error(samples, kappa_truth):
    """Max relative curvature error; kappa_truth maps a midpoint to the
    exact (unsigned) curvature there."""
    worst = 0.0
    for s in samples:
        kt = kappa_truth(s.midpoint)
        if kt == 0.0:
            continue
        worst = max(worst, abs(abs(s.kappa) - abs(kt)) / abs(kt))
    return worst


def _edge_liquid_intervals(cut, vm, row, direction):
    """Liquid sub-intervals of one triangle edge in the global edge
    parameterization."""
    cuts = [r for r in (row[0], row[1]) if 0.0 < r < 1.0]
    mat = vm  # material at local parameter 0
    ivs = []
    prev = 0.0
    for r in sorted(cuts) + [1.0]:
        if mat == 1 and r > prev:
            ivs.append((prev, r))
        prev = r
        mat ^= 1
    if direction < 0:
        ivs = [(1.0 - b, 1.0 - a) for a, b in ivs]
    return ivs


def liquid_component_count(state):
    """Connected components of the liquid region: triangles carrying
    liquid, joined when their shared edge has overlapping liquid
    intervals from both sides."""
    mesh = state.mesh
    fr = state.liquid_fractions()
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for tid in range(mesh.n_triangles):
        if fr[tid] > 0.0:
            parent[tid] = tid
    side = {}
    for tid in parent:
        cut = state.get_cut(tid)
        vms = ec.vertex_materials(cut)
        for k in range(3):
            eid = int(mesh.tri_edges[tid, k])
            d = int(mesh.tri_edge_dir[tid, k])
            side[(eid, tid)] = _edge_liquid_intervals(
                cut, vms[k], cut.R[k], d)
    for eid in range(mesh.n_edges):
        ta, tb = (int(x) for x in mesh.edge_tris[eid])
        if ta not in parent or tb < 0 or tb not in parent:
            continue
        for a0, a1 in side.get((eid, ta), []):
            for b0, b1 in side.get((eid, tb), []):
                if min(a1, b1) - max(a0, b0) > 1e-9:
                    union(ta, tb)
                    break
    return len({find(t) for t in parent})
