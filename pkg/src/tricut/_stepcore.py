"""Numba kernel for one interface advection step.

Pipeline per step (serial over triangles for determinism):

1. Narrow band: triangles holding cuts, dilated by vertex adjacency so
   every triangle whose pre-image can see the interface is included;
   everything else is uniform and copies through unchanged.
2. Per band vertex: perturb by <= PERTURB_REL * h (hash-seeded, per vertex so
   pre-image triangles tile), trace backward with RK4, query the old
   state's material there.
3. Per band edge: intersect the pre-image segment with the old
   interface (interior segments of mixed triangles, plus mesh-edge
   crossings where the two incident triangles disagree on material),
   Jordan-parity filter the hits against the endpoint materials, trace
   survivors forward and project them onto the Eulerian edge.
4. Per band triangle: assemble the cut record, recover the interior
   vertex when both cuts share an edge (traced-centroid construction
   with line-intersection and farthest-vertex fallbacks), then move the
   cuts so the liquid fraction matches the pre-image liquid area over
   the Eulerian triangle area.
"""

import numpy as np
from numba import njit

from ._cutcore import (EPS_CUT, classify_k, correct_cut_k, cut_counts,
                       interior_segments_k, material_at_k, material_pieces_k,
                       snap_param, CORR_APPLIED, CORR_NOOP, CORR_UNREACHABLE)
from ._geomcore import (clip_convex_convex, poly_area, poly_centroid,
                        project_param, seg_seg_intersect, SEG_POINT)
from .flow import rk4_step
from .mesh import locate_kernel, _point_in_tri
from .predicates import orient2d_det

# Event kinds reported per triangle
EV_DEGENERATE_PREIMAGE = 0
EV_MISSING_CUT = 1
EV_PARITY_REPAIR = 2
EV_CASE2_FALLBACK = 3
EV_CASE4_UNREACHABLE = 4
EV_HIT_OVERFLOW = 5
EV_UNIFORM_MISMATCH = 6

MAX_HITS = 64

# vertex jitter amplitude relative to the mesh spacing.  Two-sided
# constraint: slivers of size ~jitter*h clamped onto full/empty records
# accumulate with a coherent sign, so the amplitude must stay well
# below ~1e-9 to keep per-step conservation under 1e-10 relative; it
# must also stay well above ~1e-11, where pre-image points no longer
# clear the cut-parameter snapping band and zero-measure alignments
# start breaking edge parity
PERTURB_REL = 3e-10


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _perturb_unit(seed, step, vid, axis):
    """Deterministic uniform value in [-1, 1)."""
    z = (np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15)
         + np.uint64(step) * np.uint64(0xC2B2AE3D27D4EB4F)
         + np.uint64(vid) * np.uint64(0x165667B19E3779F9)
         + np.uint64(axis) * np.uint64(0x27D4EB2F165667C5))
    h = _mix64(z)
    return (np.float64(h >> np.uint64(11)) * (2.0 ** -53)) * 2.0 - 1.0


@njit(cache=True)
def _bary_of_point(tri, px, py):
    """Barycentric coefficients (u, v) of p, u for vertex 2, v for 3."""
    area = orient2d_det(tri[0, 0], tri[0, 1], tri[1, 0], tri[1, 1],
                        tri[2, 0], tri[2, 1])
    u = orient2d_det(tri[0, 0], tri[0, 1], px, py, tri[2, 0], tri[2, 1]) / area
    v = orient2d_det(tri[0, 0], tri[0, 1], tri[1, 0], tri[1, 1], px, py) / area
    return u, v


@njit(cache=True)
def _line_line(ax, ay, bx, by, cx, cy, dx, dy):
    """Intersection of infinite lines a-b and c-d; (ok, x, y)."""
    r1x = bx - ax
    r1y = by - ay
    r2x = dx - cx
    r2y = dy - cy
    den = r1x * r2y - r1y * r2x
    scale = (abs(r1x) + abs(r1y)) * (abs(r2x) + abs(r2y))
    if abs(den) <= 1e-14 * scale:
        return False, 0.0, 0.0
    t = ((cx - ax) * r2y - (cy - ay) * r2x) / den
    return True, ax + t * r1x, ay + t * r1y


@njit(cache=True)
def advect_step_kernel(verts, tris, edges, edge_tris, tri_edges, tri_edge_dir,
                       gx0, gy0, ginv, gnx, gny, grid_start, grid_tris,
                       char_length,
                       c_old, R_old, vt_old,
                       fcode, fparams, t_now, dt,
                       seed, step_index, rings,
                       c_new, R_new, vt_new,
                       ev_tri, ev_kind):
    nt = tris.shape[0]
    nv = verts.shape[0]
    ne = edges.shape[0]
    n_ev = 0
    ev_cap = ev_tri.shape[0]

    # ---- stage 0: narrow band -----------------------------------------
    in_band = np.zeros(nt, dtype=np.uint8)
    for ti in range(nt):
        tsum = 0
        for i in range(3):
            if 0.0 < R_old[ti, i, 0] < 1.0:
                tsum += 1
            if 0.0 < R_old[ti, i, 1] < 1.0:
                tsum += 1
        if tsum > 0:
            in_band[ti] = 1
    vmark = np.zeros(nv, dtype=np.uint8)
    for _ in range(rings):
        for i in range(nv):
            vmark[i] = 0
        for ti in range(nt):
            if in_band[ti]:
                vmark[tris[ti, 0]] = 1
                vmark[tris[ti, 1]] = 1
                vmark[tris[ti, 2]] = 1
        for ti in range(nt):
            if not in_band[ti]:
                if (vmark[tris[ti, 0]] or vmark[tris[ti, 1]]
                        or vmark[tris[ti, 2]]):
                    in_band[ti] = 1

    # default: copy through
    for ti in range(nt):
        c_new[ti] = c_old[ti]
        for i in range(3):
            R_new[ti, i, 0] = R_old[ti, i, 0]
            R_new[ti, i, 1] = R_old[ti, i, 1]
        vt_new[ti, 0] = vt_old[ti, 0]
        vt_new[ti, 1] = vt_old[ti, 1]

    # ---- old-state caches for mixed triangles -------------------------
    mixed_idx = np.full(nt, -1, dtype=np.int64)
    nm = 0
    for ti in range(nt):
        tc = cut_counts(R_old[ti])
        if tc[0] + tc[1] + tc[2] > 0:
            mixed_idx[ti] = nm
            nm += 1
    old_segs = np.empty((nm, 3, 4))
    old_nsegs = np.zeros(nm, dtype=np.int64)
    old_pts = np.empty((nm, 5, 6, 2))
    old_np = np.zeros((nm, 5), dtype=np.int64)
    old_mat = np.zeros((nm, 5), dtype=np.int64)
    old_npieces = np.zeros(nm, dtype=np.int64)
    tribuf = np.empty((3, 2))
    for ti in range(nt):
        mi = mixed_idx[ti]
        if mi < 0:
            continue
        for k in range(3):
            tribuf[k, 0] = verts[tris[ti, k], 0]
            tribuf[k, 1] = verts[tris[ti, k], 1]
        ns = interior_segments_k(c_old[ti], R_old[ti], vt_old[ti, 0],
                                 vt_old[ti, 1], tribuf, old_segs[mi])
        old_nsegs[mi] = max(ns, 0)
        m = material_pieces_k(c_old[ti], R_old[ti], vt_old[ti, 0],
                              vt_old[ti, 1], tribuf, old_pts[mi],
                              old_np[mi], old_mat[mi])
        old_npieces[mi] = max(m, 0)

    # ---- stage 1: band vertices ---------------------------------------
    vin = np.zeros(nv, dtype=np.uint8)
    for ti in range(nt):
        if in_band[ti]:
            vin[tris[ti, 0]] = 1
            vin[tris[ti, 1]] = 1
            vin[tris[ti, 2]] = 1
    pre_x = np.empty(nv)
    pre_y = np.empty(nv)
    vmat = np.full(nv, -1, dtype=np.int8)
    amp = PERTURB_REL * char_length
    t_next = t_now + dt
    for vid in range(nv):
        if not vin[vid]:
            continue
        px = verts[vid, 0] + amp * _perturb_unit(seed, step_index, vid, 0)
        py = verts[vid, 1] + amp * _perturb_unit(seed, step_index, vid, 1)
        bx, by = rk4_step(fcode, fparams, px, py, t_next, -dt)
        pre_x[vid] = bx
        pre_y[vid] = by
        tid = locate_kernel(bx, by, verts, tris, gx0, gy0, ginv, gnx, gny,
                            grid_start, grid_tris, -1)
        if tid < 0:
            vmat[vid] = 0
        else:
            for k in range(3):
                tribuf[k, 0] = verts[tris[tid, k], 0]
                tribuf[k, 1] = verts[tris[tid, k], 1]
            m = material_at_k(c_old[tid], R_old[tid], vt_old[tid, 0],
                              vt_old[tid, 1], tribuf, bx, by)
            vmat[vid] = 0 if m < 0 else m

    # ---- stage 2: band edges ------------------------------------------
    ein = np.zeros(ne, dtype=np.uint8)
    for ti in range(nt):
        if in_band[ti]:
            ein[tri_edges[ti, 0]] = 1
            ein[tri_edges[ti, 1]] = 1
            ein[tri_edges[ti, 2]] = 1

    cutn = np.zeros(ne, dtype=np.int8)
    cutp = np.zeros((ne, 2))
    cut_img = np.zeros((ne, 2, 2))
    cut_gen = np.zeros((ne, 2, 4))

    tri_stamp = np.full(nt, -1, dtype=np.int64)
    edge_stamp = np.full(ne, -1, dtype=np.int64)
    qid = 0

    hs = np.empty(MAX_HITS)
    hxy = np.empty((MAX_HITS, 2))
    hgen = np.empty((MAX_HITS, 4))
    params = np.empty(2)

    for eid in range(ne):
        if not ein[eid]:
            continue
        va = edges[eid, 0]
        vb = edges[eid, 1]
        ax = pre_x[va]
        ay = pre_y[va]
        bx = pre_x[vb]
        by = pre_y[vb]
        nh = 0
        overflow = False

        # candidate buckets over the pre-edge bbox
        x0 = min(ax, bx)
        x1 = max(ax, bx)
        y0 = min(ay, by)
        y1 = max(ay, by)
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        qid += 1
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                b = iy * gnx + ix
                for kk in range(grid_start[b], grid_start[b + 1]):
                    tid = grid_tris[kk]
                    if tri_stamp[tid] == qid:
                        continue
                    tri_stamp[tid] = qid
                    mi = mixed_idx[tid]
                    if mi >= 0:
                        # interior-segment crossings
                        for si in range(old_nsegs[mi]):
                            sx0 = old_segs[mi, si, 0]
                            sy0 = old_segs[mi, si, 1]
                            sx1 = old_segs[mi, si, 2]
                            sy1 = old_segs[mi, si, 3]
                            kind, s, u_, qx, qy, _, _ = seg_seg_intersect(
                                ax, ay, bx, by, sx0, sy0, sx1, sy1)
                            if kind == SEG_POINT and 0.0 < s < 1.0:
                                if nh < MAX_HITS:
                                    hs[nh] = s
                                    hxy[nh, 0] = qx
                                    hxy[nh, 1] = qy
                                    hgen[nh, 0] = sx0
                                    hgen[nh, 1] = sy0
                                    hgen[nh, 2] = sx1
                                    hgen[nh, 3] = sy1
                                    nh += 1
                                else:
                                    overflow = True
                    # mesh-edge crossings where materials differ
                    for k in range(3):
                        me = tri_edges[tid, k]
                        if edge_stamp[me] == qid:
                            continue
                        edge_stamp[me] = qid
                        ta = edge_tris[me, 0]
                        tb = edge_tris[me, 1]
                        ma_uniform = mixed_idx[ta] < 0
                        mb_uniform = tb < 0 or mixed_idx[tb] < 0
                        if ma_uniform and mb_uniform:
                            ca = c_old[ta]
                            cb = c_old[tb] if tb >= 0 else 0
                            if ca == cb:
                                continue
                        wa = edges[me, 0]
                        wb = edges[me, 1]
                        kind, s, u_, qx, qy, _, _ = seg_seg_intersect(
                            ax, ay, bx, by,
                            verts[wa, 0], verts[wa, 1],
                            verts[wb, 0], verts[wb, 1])
                        if kind != SEG_POINT or not (0.0 < s < 1.0):
                            continue
                        for kk2 in range(3):
                            tribuf[kk2, 0] = verts[tris[ta, kk2], 0]
                            tribuf[kk2, 1] = verts[tris[ta, kk2], 1]
                        m_a = material_at_k(c_old[ta], R_old[ta],
                                            vt_old[ta, 0], vt_old[ta, 1],
                                            tribuf, qx, qy)
                        if tb < 0:
                            m_b = 0
                        else:
                            for kk2 in range(3):
                                tribuf[kk2, 0] = verts[tris[tb, kk2], 0]
                                tribuf[kk2, 1] = verts[tris[tb, kk2], 1]
                            m_b = material_at_k(c_old[tb], R_old[tb],
                                                vt_old[tb, 0], vt_old[tb, 1],
                                                tribuf, qx, qy)
                        if m_a < 0 or m_b < 0 or m_a == m_b:
                            continue
                        if nh < MAX_HITS:
                            hs[nh] = s
                            hxy[nh, 0] = qx
                            hxy[nh, 1] = qy
                            hgen[nh, 0] = verts[wa, 0]
                            hgen[nh, 1] = verts[wa, 1]
                            hgen[nh, 2] = verts[wb, 0]
                            hgen[nh, 3] = verts[wb, 1]
                            nh += 1
                        else:
                            overflow = True

        if overflow and n_ev < ev_cap:
            ev_tri[n_ev] = eid
            ev_kind[n_ev] = EV_HIT_OVERFLOW
            n_ev += 1

        # sort hits by parameter (insertion sort, nh is small)
        for i in range(1, nh):
            s = hs[i]
            qx = hxy[i, 0]
            qy = hxy[i, 1]
            g0 = hgen[i, 0]
            g1 = hgen[i, 1]
            g2 = hgen[i, 2]
            g3 = hgen[i, 3]
            j = i - 1
            while j >= 0 and hs[j] > s:
                hs[j + 1] = hs[j]
                hxy[j + 1, 0] = hxy[j, 0]
                hxy[j + 1, 1] = hxy[j, 1]
                for q4 in range(4):
                    hgen[j + 1, q4] = hgen[j, q4]
                j -= 1
            hs[j + 1] = s
            hxy[j + 1, 0] = qx
            hxy[j + 1, 1] = qy
            hgen[j + 1, 0] = g0
            hgen[j + 1, 1] = g1
            hgen[j + 1, 2] = g2
            hgen[j + 1, 3] = g3

        # drop duplicates (shared interface vertices hit twice)
        m = 0
        for i in range(nh):
            if m > 0 and hs[i] - hs[m - 1] < 1e-12:
                continue
            hs[m] = hs[i]
            hxy[m, 0] = hxy[i, 0]
            hxy[m, 1] = hxy[i, 1]
            for q4 in range(4):
                hgen[m, q4] = hgen[i, q4]
            m += 1
        nh = m

        # Jordan parity filter against endpoint materials
        parity = vmat[va] ^ vmat[vb]
        keep0 = -1
        keep1 = -1
        if parity == 0:
            if nh >= 2:
                keep0 = 0
                keep1 = nh - 1
        else:
            if nh >= 1:
                keep0 = 0
            else:
                # materials demand a crossing that was never found
                if n_ev < ev_cap:
                    ev_tri[n_ev] = eid
                    ev_kind[n_ev] = EV_MISSING_CUT
                    n_ev += 1

        nkeep = 0
        for slot in range(2):
            hi = keep0 if slot == 0 else keep1
            if hi < 0:
                continue
            ix_, iy_ = rk4_step(fcode, fparams, hxy[hi, 0], hxy[hi, 1],
                                t_now, dt)
            p = project_param(ix_, iy_, verts[va, 0], verts[va, 1],
                              verts[vb, 0], verts[vb, 1])
            if p < 0.0:
                p = 0.0
            elif p > 1.0:
                p = 1.0
            p = snap_param(p)
            params[nkeep] = p
            cut_img[eid, nkeep, 0] = ix_
            cut_img[eid, nkeep, 1] = iy_
            for q4 in range(4):
                cut_gen[eid, nkeep, q4] = hgen[hi, q4]
            nkeep += 1

        # parity-preserving snap repair: a cut pushed onto a vertex is
        # restored just inside when dropping it would flip the parity
        nvalid = 0
        for i in range(nkeep):
            if 0.0 < params[i] < 1.0:
                nvalid += 1
        if (nvalid & 1) != parity:
            for i in range(nkeep):
                if not (0.0 < params[i] < 1.0):
                    params[i] = EPS_CUT if params[i] == 0.0 else 1.0 - EPS_CUT
                    nvalid += 1
                    if (nvalid & 1) == parity:
                        break
        # compact to valid cuts, keep ascending order
        nc = 0
        for i in range(nkeep):
            if 0.0 < params[i] < 1.0:
                cutp[eid, nc] = params[i]
                if nc != i:
                    cut_img[eid, nc, 0] = cut_img[eid, i, 0]
                    cut_img[eid, nc, 1] = cut_img[eid, i, 1]
                    for q4 in range(4):
                        cut_gen[eid, nc, q4] = cut_gen[eid, i, q4]
                nc += 1
        if nc == 2 and cutp[eid, 0] > cutp[eid, 1]:
            tmp = cutp[eid, 0]
            cutp[eid, 0] = cutp[eid, 1]
            cutp[eid, 1] = tmp
            for q4 in range(2):
                tmp = cut_img[eid, 0, q4]
                cut_img[eid, 0, q4] = cut_img[eid, 1, q4]
                cut_img[eid, 1, q4] = tmp
            for q4 in range(4):
                tmp = cut_gen[eid, 0, q4]
                cut_gen[eid, 0, q4] = cut_gen[eid, 1, q4]
                cut_gen[eid, 1, q4] = tmp
        cutn[eid] = nc

    # ---- stage 3: band triangles --------------------------------------
    prebuf = np.empty((3, 2))
    cap = 16
    buf_a = np.empty((cap, 2))
    buf_b = np.empty((cap, 2))
    piece = np.empty((6, 2))
    traced = np.empty((16, 2))
    Rw = np.empty((3, 2))
    uvw = np.empty(2)
    n_failed = 0

    for ti in range(nt):
        if not in_band[ti]:
            continue
        i1 = tris[ti, 0]
        i2 = tris[ti, 1]
        i3 = tris[ti, 2]
        prebuf[0, 0] = pre_x[i1]
        prebuf[0, 1] = pre_y[i1]
        prebuf[1, 0] = pre_x[i2]
        prebuf[1, 1] = pre_y[i2]
        prebuf[2, 0] = pre_x[i3]
        prebuf[2, 1] = pre_y[i3]
        pre_area = poly_area(prebuf, 3)
        if pre_area <= 0.0:
            # inverted pre-image: keep the previous record
            if n_ev < ev_cap:
                ev_tri[n_ev] = ti
                ev_kind[n_ev] = EV_DEGENERATE_PREIMAGE
                n_ev += 1
            n_failed += 1
            continue

        # assemble rows in local edge orientation
        for k in range(3):
            eid = tri_edges[ti, k]
            nc = cutn[eid]
            if nc == 0:
                R_new[ti, k, 0] = 0.0
                R_new[ti, k, 1] = 1.0
            elif tri_edge_dir[ti, k] > 0:
                if nc == 1:
                    R_new[ti, k, 0] = cutp[eid, 0]
                    R_new[ti, k, 1] = 1.0
                else:
                    R_new[ti, k, 0] = cutp[eid, 0]
                    R_new[ti, k, 1] = cutp[eid, 1]
            else:
                if nc == 1:
                    R_new[ti, k, 0] = 1.0 - cutp[eid, 0]
                    R_new[ti, k, 1] = 1.0
                else:
                    R_new[ti, k, 0] = 1.0 - cutp[eid, 1]
                    R_new[ti, k, 1] = 1.0 - cutp[eid, 0]
        c_new[ti] = vmat[i1] if vmat[i1] >= 0 else 0
        vt_new[ti, 0] = np.nan
        vt_new[ti, 1] = np.nan

        case_id, swap, rot = classify_k(c_new[ti], R_new[ti])
        if case_id == 0:
            # inconsistent pattern: clear cuts, keep vertex material
            for k in range(3):
                R_new[ti, k, 0] = 0.0
                R_new[ti, k, 1] = 1.0
            if n_ev < ev_cap:
                ev_tri[n_ev] = ti
                ev_kind[n_ev] = EV_PARITY_REPAIR
                n_ev += 1
            n_failed += 1
            continue

        # liquid area of the pre-image (exact clipping, time-n pieces);
        # also gather traced pieces for the interior-vertex construction
        need_vt = case_id == 2
        A = 0.0
        tSx = 0.0
        tSy = 0.0
        tA = 0.0
        best_far = -1.0
        far_x = 0.0
        far_y = 0.0
        e_cut = rot
        ecv1 = tris[ti, e_cut]
        ecv2 = tris[ti, (e_cut + 1) % 3]
        for k in range(3):
            tribuf[k, 0] = verts[tris[ti, k], 0]
            tribuf[k, 1] = verts[tris[ti, k], 1]

        x0 = min(prebuf[0, 0], min(prebuf[1, 0], prebuf[2, 0]))
        x1 = max(prebuf[0, 0], max(prebuf[1, 0], prebuf[2, 0]))
        y0 = min(prebuf[0, 1], min(prebuf[1, 1], prebuf[2, 1]))
        y1 = max(prebuf[0, 1], max(prebuf[1, 1], prebuf[2, 1]))
        ix0 = min(max(int((x0 - gx0) * ginv), 0), gnx - 1)
        ix1 = min(max(int((x1 - gx0) * ginv), 0), gnx - 1)
        iy0 = min(max(int((y0 - gy0) * ginv), 0), gny - 1)
        iy1 = min(max(int((y1 - gy0) * ginv), 0), gny - 1)
        qid += 1
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                b = iy * gnx + ix
                for kk in range(grid_start[b], grid_start[b + 1]):
                    tid = grid_tris[kk]
                    if tri_stamp[tid] == qid:
                        continue
                    tri_stamp[tid] = qid
                    mi = mixed_idx[tid]
                    np_pieces = 0
                    if mi < 0:
                        if c_old[tid] == 1:
                            np_pieces = 1
                    else:
                        np_pieces = old_npieces[mi]
                    for pi in range(np_pieces):
                        if mi < 0:
                            nq = 3
                            for q in range(3):
                                piece[q, 0] = verts[tris[tid, q], 0]
                                piece[q, 1] = verts[tris[tid, q], 1]
                        else:
                            if old_mat[mi, pi] != 1:
                                continue
                            nq = old_np[mi, pi]
                            for q in range(nq):
                                piece[q, 0] = old_pts[mi, pi, q, 0]
                                piece[q, 1] = old_pts[mi, pi, q, 1]
                        nres = clip_convex_convex(prebuf, 3, piece, nq,
                                                  buf_a, buf_b)
                        if nres == 0:
                            continue
                        A += poly_area(buf_a, nres)
                        if need_vt:
                            for q in range(nres):
                                tx, ty = rk4_step(fcode, fparams,
                                                  buf_a[q, 0], buf_a[q, 1],
                                                  t_now, dt)
                                traced[q, 0] = tx
                                traced[q, 1] = ty
                                # farthest in-triangle vertex fallback
                                if _point_in_tri(
                                        tx, ty,
                                        tribuf[0, 0], tribuf[0, 1],
                                        tribuf[1, 0], tribuf[1, 1],
                                        tribuf[2, 0], tribuf[2, 1]) > 0:
                                    d = orient2d_det(
                                        verts[ecv1, 0], verts[ecv1, 1],
                                        verts[ecv2, 0], verts[ecv2, 1],
                                        tx, ty)
                                    if d > best_far:
                                        best_far = d
                                        far_x = tx
                                        far_y = ty
                            pa, pcx, pcy = poly_centroid(traced, nres)
                            tA += pa
                            tSx += pa * pcx
                            tSy += pa * pcy

        tri_area = 0.5 * orient2d_det(tribuf[0, 0], tribuf[0, 1],
                                      tribuf[1, 0], tribuf[1, 1],
                                      tribuf[2, 0], tribuf[2, 1])
        f1_star = A / tri_area
        if f1_star < 0.0:
            f1_star = 0.0
        elif f1_star > 1.0:
            f1_star = 1.0

        if need_vt:
            if swap:
                # the lens is the material-0 side: use the complement of
                # the traced liquid within the traced pre-image
                for q in range(3):
                    tx, ty = rk4_step(fcode, fparams, prebuf[q, 0],
                                      prebuf[q, 1], t_now, dt)
                    traced[q, 0] = tx
                    traced[q, 1] = ty
                ta_, tcx, tcy = poly_centroid(traced, 3)
                tA = ta_ - tA
                tSx = ta_ * tcx - tSx
                tSy = ta_ * tcy - tSy
            ok = False
            vtx = 0.0
            vty = 0.0
            if tA > 0.0:
                xc = tSx / tA
                yc = tSy / tA
                vtx = 3.0 * xc - cut_img[tri_edges[ti, e_cut], 0, 0] \
                    - cut_img[tri_edges[ti, e_cut], 1, 0]
                vty = 3.0 * yc - cut_img[tri_edges[ti, e_cut], 0, 1] \
                    - cut_img[tri_edges[ti, e_cut], 1, 1]
                if _point_in_tri(vtx, vty,
                                 tribuf[0, 0], tribuf[0, 1],
                                 tribuf[1, 0], tribuf[1, 1],
                                 tribuf[2, 0], tribuf[2, 1]) > 0:
                    ok = True
            if not ok:
                # intersect the two generating lines, trace forward
                eidc = tri_edges[ti, e_cut]
                ok2, lx, ly = _line_line(
                    cut_gen[eidc, 0, 0], cut_gen[eidc, 0, 1],
                    cut_gen[eidc, 0, 2], cut_gen[eidc, 0, 3],
                    cut_gen[eidc, 1, 0], cut_gen[eidc, 1, 1],
                    cut_gen[eidc, 1, 2], cut_gen[eidc, 1, 3])
                if ok2:
                    vtx, vty = rk4_step(fcode, fparams, lx, ly, t_now, dt)
                    if _point_in_tri(vtx, vty,
                                     tribuf[0, 0], tribuf[0, 1],
                                     tribuf[1, 0], tribuf[1, 1],
                                     tribuf[2, 0], tribuf[2, 1]) > 0:
                        ok = True
            if not ok and best_far > 0.0:
                vtx = far_x
                vty = far_y
                ok = True
            if ok:
                u, v = _bary_of_point(tribuf, vtx, vty)
                eps = 1e-12
                w = 1.0 - u - v
                if u <= eps or v <= eps or w <= eps:
                    ok = False
                else:
                    vt_new[ti, 0] = u
                    vt_new[ti, 1] = v
            if not ok:
                # no usable interior vertex: drop to a uniform record
                for k in range(3):
                    R_new[ti, k, 0] = 0.0
                    R_new[ti, k, 1] = 1.0
                if n_ev < ev_cap:
                    ev_tri[n_ev] = ti
                    ev_kind[n_ev] = EV_CASE2_FALLBACK
                    n_ev += 1
                n_failed += 1
                continue

        if case_id == 1:
            # a uniform record cannot store a fractional area: when the
            # pre-image liquid area disagrees with the 0/1 record beyond
            # jitter noise, the correction could not be applied; report
            # it so conservation accounting can exclude the step
            # (threshold sits above the ~2e-9 relative area noise the
            # vertex jitter induces on full/empty triangles)
            expect = tri_area if c_new[ti] == 1 else 0.0
            if abs(A - expect) > 5e-9 * tri_area:
                if n_ev < ev_cap:
                    ev_tri[n_ev] = ti
                    ev_kind[n_ev] = EV_UNIFORM_MISMATCH
                    n_ev += 1
                n_failed += 1
        elif f1_star <= 0.0 or f1_star >= 1.0:
            # boundary target: the pre-image is entirely one material,
            # so the record collapses to uniform; driving the cut
            # interpolation to its open end instead would park cuts
            # exactly on vertices and leave an unclassifiable record
            c_new[ti] = 1 if f1_star >= 1.0 else 0
            for k in range(3):
                R_new[ti, k, 0] = 0.0
                R_new[ti, k, 1] = 1.0
            vt_new[ti, 0] = np.nan
            vt_new[ti, 1] = np.nan
        else:
            status = correct_cut_k(c_new[ti], R_new[ti], vt_new[ti, 0],
                                   vt_new[ti, 1], f1_star, Rw, uvw)
            if status == CORR_APPLIED or status == CORR_NOOP:
                for k in range(3):
                    R_new[ti, k, 0] = Rw[k, 0]
                    R_new[ti, k, 1] = Rw[k, 1]
                if need_vt:
                    vt_new[ti, 0] = uvw[0]
                    vt_new[ti, 1] = uvw[1]
                chk, _, _ = classify_k(c_new[ti], R_new[ti])
                if chk == 0:
                    # the corrected record degenerated (cuts snapped
                    # onto vertices): repair to uniform and report
                    c_new[ti] = 1 if f1_star > 0.5 else 0
                    for k in range(3):
                        R_new[ti, k, 0] = 0.0
                        R_new[ti, k, 1] = 1.0
                    vt_new[ti, 0] = np.nan
                    vt_new[ti, 1] = np.nan
                    if n_ev < ev_cap:
                        ev_tri[n_ev] = ti
                        ev_kind[n_ev] = EV_PARITY_REPAIR
                        n_ev += 1
                    n_failed += 1
            elif status == CORR_UNREACHABLE:
                if f1_star < 1e-9 or f1_star > 1.0 - 1e-9:
                    # the target sits at the open end of the correction
                    # range (tau < 1): the triangle is in fact uniform
                    c_new[ti] = 1 if f1_star > 0.5 else 0
                    for k in range(3):
                        R_new[ti, k, 0] = 0.0
                        R_new[ti, k, 1] = 1.0
                    vt_new[ti, 0] = np.nan
                    vt_new[ti, 1] = np.nan
                else:
                    if n_ev < ev_cap:
                        ev_tri[n_ev] = ti
                        ev_kind[n_ev] = EV_CASE4_UNREACHABLE
                        n_ev += 1
                    n_failed += 1
            else:
                if n_ev < ev_cap:
                    ev_tri[n_ev] = ti
                    ev_kind[n_ev] = EV_PARITY_REPAIR
                    n_ev += 1
                n_failed += 1

    return n_ev, n_failed
