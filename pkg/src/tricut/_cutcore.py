"""Numba kernels for the per-triangle edge cut representation.

A cut record is (c, R, vt): c is the material of vertex 1, R a 3x2
matrix of edge parameters, vt an optional barycentric interior vertex
(u, v) with w = 1 - u - v used by the two-cuts-on-one-edge case.  Rows
are stored canonically: no cut -> (0, 1), one cut -> (r, 1), two cuts
-> sorted ascending.  A parameter is a valid cut iff strictly inside
(0, 1).

Every pattern reduces to one of six basic (c, t) patterns by a material
swap and a cyclic vertex rotation:

    1: c=0 t=(0,0,0)   uniform
    2: c=0 t=(2,0,0)   lens against edge 1 (needs interior vertex)
    3: c=0 t=(2,2,0)   quad band across edges 1,2
    4: c=0 t=(2,2,2)   hexagonal core
    5: c=1 t=(1,0,1)   corner triangle at vertex 1
    6: c=1 t=(1,2,1)   pentagon at vertex 1

In that canonical frame the material-1 region is a single convex
polygon (cases 2-6) whose area fraction has a closed form.
"""

import numpy as np
from numba import njit

from .predicates import orient2d_det, orient2d_sign

EPS_CUT = 1e-9


@njit(cache=True)
def snap_param(r):
    """Snap parameters within EPS_CUT of an endpoint onto it."""
    if r < EPS_CUT:
        return 0.0
    if r > 1.0 - EPS_CUT:
        return 1.0
    return r


@njit(cache=True)
def row_cut_count(r1, r2):
    n = 0
    if 0.0 < r1 < 1.0:
        n += 1
    if 0.0 < r2 < 1.0:
        n += 1
    return n


@njit(cache=True)
def cut_counts(R):
    t = np.empty(3, dtype=np.int64)
    for i in range(3):
        t[i] = row_cut_count(R[i, 0], R[i, 1])
    return t


@njit(cache=True)
def vertex_materials_k(c, t1, t2, t3):
    """Materials of the three vertices from Jordan parity."""
    m1 = np.int64(c)
    m2 = m1 ^ (t1 & 1)
    m3 = m2 ^ (t2 & 1)
    return m1, m2, m3


@njit(cache=True)
def classify_k(c, R):
    """Returns (case_id, swap, rot); case_id 0 when the pattern is
    invalid.  Preference order: swap=0 first, then smallest rot."""
    t = cut_counts(R)
    if (t[0] + t[1] + t[2]) & 1:
        return 0, 0, 0
    m1, m2, m3 = vertex_materials_k(c, t[0], t[1], t[2])
    chi = (m1, m2, m3)
    for swap in range(2):
        for rot in range(3):
            cp = chi[rot] ^ swap
            t1 = t[rot]
            t2 = t[(rot + 1) % 3]
            t3 = t[(rot + 2) % 3]
            if cp == 0:
                if t1 == 0 and t2 == 0 and t3 == 0:
                    return 1, swap, rot
                if t1 == 2 and t2 == 0 and t3 == 0:
                    return 2, swap, rot
                if t1 == 2 and t2 == 2 and t3 == 0:
                    return 3, swap, rot
                if t1 == 2 and t2 == 2 and t3 == 2:
                    return 4, swap, rot
            else:
                if t1 == 1 and t2 == 0 and t3 == 1:
                    return 5, swap, rot
                if t1 == 1 and t2 == 2 and t3 == 1:
                    return 6, swap, rot
    return 0, 0, 0


@njit(cache=True)
def rotate_rows(R, rot, out):
    """out row i = R row (i + rot) mod 3 (frame whose vertex 1 is the
    original vertex 1 + rot)."""
    for i in range(3):
        src = (i + rot) % 3
        out[i, 0] = R[src, 0]
        out[i, 1] = R[src, 1]


@njit(cache=True)
def unrotate_rows(Rc, rot, out):
    for i in range(3):
        dst = (i + rot) % 3
        out[dst, 0] = Rc[i, 0]
        out[dst, 1] = Rc[i, 1]


@njit(cache=True)
def rotate_bary(u, v, rot):
    """Barycentric (u, v) on (v1,v2,v3) re-expressed in the rotated
    frame; returns (u', v')."""
    w = 1.0 - u - v
    if rot == 0:
        return u, v
    if rot == 1:
        # new order (v2, v3, v1): coefficients (u, v, w)
        return v, w
    return w, u


@njit(cache=True)
def unrotate_bary(u, v, rot):
    if rot == 0:
        return u, v
    if rot == 1:
        w = 1.0 - u - v
        return w, u
    return v, 1.0 - u - v


@njit(cache=True)
def f1_canonical(case_id, Rc, vcoef):
    """Material-1 area fraction in the canonical frame.  vcoef is the
    canonical barycentric coefficient of vertex 3 in the interior
    vertex (case 2 only)."""
    if case_id == 1:
        return 0.0
    if case_id == 2:
        return vcoef * (Rc[0, 1] - Rc[0, 0])
    if case_id == 3:
        return (1.0 - Rc[0, 0]) * Rc[1, 1] - (1.0 - Rc[0, 1]) * Rc[1, 0]
    if case_id == 4:
        f0 = (Rc[0, 0] * (1.0 - Rc[2, 1])
              + (1.0 - Rc[0, 1]) * Rc[1, 0]
              + (1.0 - Rc[1, 1]) * Rc[2, 0])
        return 1.0 - f0
    if case_id == 5:
        return Rc[0, 0] * (1.0 - Rc[2, 0])
    # case 6
    f0 = (1.0 - Rc[0, 0]) * Rc[1, 0] + (1.0 - Rc[1, 1]) * Rc[2, 0]
    return 1.0 - f0


@njit(cache=True)
def area_fraction_k(c, R, u, v):
    """Material-1 area fraction in original labels; -1 on bad state."""
    case_id, swap, rot = classify_k(c, R)
    if case_id == 0:
        return -1.0
    Rc = np.empty((3, 2))
    rotate_rows(R, rot, Rc)
    vcoef = 0.0
    if case_id == 2:
        uc, vc = rotate_bary(u, v, rot)
        vcoef = vc
    f1 = f1_canonical(case_id, Rc, vcoef)
    if swap:
        f1 = 1.0 - f1
    return f1


@njit(cache=True)
def cut_xy(tri, i, r):
    """Point at parameter r along edge i (vertex i to vertex i+1)."""
    j = (i + 1) % 3
    x = (1.0 - r) * tri[i, 0] + r * tri[j, 0]
    y = (1.0 - r) * tri[i, 1] + r * tri[j, 1]
    return x, y


@njit(cache=True)
def bary_xy(tri, u, v):
    w = 1.0 - u - v
    x = w * tri[0, 0] + u * tri[1, 0] + v * tri[2, 0]
    y = w * tri[0, 1] + u * tri[1, 1] + v * tri[2, 1]
    return x, y


@njit(cache=True)
def canonical_poly(case_id, rot, R, u, v, tri, out):
    """Vertices of the canonical-frame material-1 polygon in real
    coordinates (CCW); returns the vertex count (0 for case 1).

    Edge i of the canonical frame is the original edge (i + rot) mod 3;
    canonical vertex i is the original vertex (i + rot) mod 3.
    """
    Rc = np.empty((3, 2))
    rotate_rows(R, rot, Rc)
    e0 = rot
    e1 = (rot + 1) % 3
    e2 = (rot + 2) % 3
    if case_id == 1:
        return 0
    if case_id == 2:
        out[0, 0], out[0, 1] = cut_xy(tri, e0, Rc[0, 0])
        out[1, 0], out[1, 1] = cut_xy(tri, e0, Rc[0, 1])
        out[2, 0], out[2, 1] = bary_xy(tri, u, v)
        return 3
    if case_id == 3:
        out[0, 0], out[0, 1] = cut_xy(tri, e0, Rc[0, 0])
        out[1, 0], out[1, 1] = cut_xy(tri, e0, Rc[0, 1])
        out[2, 0], out[2, 1] = cut_xy(tri, e1, Rc[1, 0])
        out[3, 0], out[3, 1] = cut_xy(tri, e1, Rc[1, 1])
        return 4
    if case_id == 4:
        out[0, 0], out[0, 1] = cut_xy(tri, e0, Rc[0, 0])
        out[1, 0], out[1, 1] = cut_xy(tri, e0, Rc[0, 1])
        out[2, 0], out[2, 1] = cut_xy(tri, e1, Rc[1, 0])
        out[3, 0], out[3, 1] = cut_xy(tri, e1, Rc[1, 1])
        out[4, 0], out[4, 1] = cut_xy(tri, e2, Rc[2, 0])
        out[5, 0], out[5, 1] = cut_xy(tri, e2, Rc[2, 1])
        return 6
    if case_id == 5:
        out[0, 0] = tri[e0, 0]
        out[0, 1] = tri[e0, 1]
        out[1, 0], out[1, 1] = cut_xy(tri, e0, Rc[0, 0])
        out[2, 0], out[2, 1] = cut_xy(tri, e2, Rc[2, 0])
        return 3
    # case 6
    out[0, 0] = tri[e0, 0]
    out[0, 1] = tri[e0, 1]
    out[1, 0], out[1, 1] = cut_xy(tri, e0, Rc[0, 0])
    out[2, 0], out[2, 1] = cut_xy(tri, e1, Rc[1, 0])
    out[3, 0], out[3, 1] = cut_xy(tri, e1, Rc[1, 1])
    out[4, 0], out[4, 1] = cut_xy(tri, e2, Rc[2, 0])
    return 5


@njit(cache=True)
def material_pieces_k(c, R, u, v, tri, pts, npts, mats):
    """Decomposes the triangle into convex pieces with material labels.

    pts is (MAXP, 6, 2), npts and mats length MAXP (MAXP >= 5).
    Returns the piece count, or -1 on invalid state.  The complement of
    the canonical polygon is cut into fixed convex pieces: case 2 fans
    the hexagonal complement from the interior vertex (its only reflex
    vertex), cases 3-6 peel corner triangles / quads.
    """
    case_id, swap, rot = classify_k(c, R)
    if case_id == 0:
        return -1
    if case_id == 1:
        for k in range(3):
            pts[0, k, 0] = tri[k, 0]
            pts[0, k, 1] = tri[k, 1]
        npts[0] = 3
        mats[0] = c
        return 1

    poly = np.empty((6, 2))
    n = canonical_poly(case_id, rot, R, u, v, tri, poly)
    mat_poly = 0 if swap else 1
    for k in range(n):
        pts[0, k, 0] = poly[k, 0]
        pts[0, k, 1] = poly[k, 1]
    npts[0] = n
    mats[0] = mat_poly
    mat_c = 1 - mat_poly

    Rc = np.empty((3, 2))
    rotate_rows(R, rot, Rc)
    v1x, v1y = tri[rot, 0], tri[rot, 1]
    v2x, v2y = tri[(rot + 1) % 3, 0], tri[(rot + 1) % 3, 1]
    v3x, v3y = tri[(rot + 2) % 3, 0], tri[(rot + 2) % 3, 1]
    m = 1

    if case_id == 2:
        # complement hexagon (v1, r11, vt, r12, v2, v3), fan from vt
        r11x, r11y = poly[0, 0], poly[0, 1]
        r12x, r12y = poly[1, 0], poly[1, 1]
        vtx, vty = poly[2, 0], poly[2, 1]
        fan = np.empty((6, 2))
        fan[0, 0], fan[0, 1] = r12x, r12y
        fan[1, 0], fan[1, 1] = v2x, v2y
        fan[2, 0], fan[2, 1] = v3x, v3y
        fan[3, 0], fan[3, 1] = v1x, v1y
        fan[4, 0], fan[4, 1] = r11x, r11y
        for k in range(4):
            pts[m, 0, 0], pts[m, 0, 1] = vtx, vty
            pts[m, 1, 0], pts[m, 1, 1] = fan[k, 0], fan[k, 1]
            pts[m, 2, 0], pts[m, 2, 1] = fan[k + 1, 0], fan[k + 1, 1]
            npts[m] = 3
            mats[m] = mat_c
            m += 1
    elif case_id == 3:
        # triangle (r12, v2, r21) and quad (v1, r11, r22, v3)
        pts[m, 0, 0], pts[m, 0, 1] = poly[1, 0], poly[1, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v2x, v2y
        pts[m, 2, 0], pts[m, 2, 1] = poly[2, 0], poly[2, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
        pts[m, 0, 0], pts[m, 0, 1] = v1x, v1y
        pts[m, 1, 0], pts[m, 1, 1] = poly[0, 0], poly[0, 1]
        pts[m, 2, 0], pts[m, 2, 1] = poly[3, 0], poly[3, 1]
        pts[m, 3, 0], pts[m, 3, 1] = v3x, v3y
        npts[m] = 4
        mats[m] = mat_c
        m += 1
    elif case_id == 4:
        # corner triangles (v1, r11, r32), (r12, v2, r21), (r22, v3, r31)
        pts[m, 0, 0], pts[m, 0, 1] = v1x, v1y
        pts[m, 1, 0], pts[m, 1, 1] = poly[0, 0], poly[0, 1]
        pts[m, 2, 0], pts[m, 2, 1] = poly[5, 0], poly[5, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
        pts[m, 0, 0], pts[m, 0, 1] = poly[1, 0], poly[1, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v2x, v2y
        pts[m, 2, 0], pts[m, 2, 1] = poly[2, 0], poly[2, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
        pts[m, 0, 0], pts[m, 0, 1] = poly[3, 0], poly[3, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v3x, v3y
        pts[m, 2, 0], pts[m, 2, 1] = poly[4, 0], poly[4, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
    elif case_id == 5:
        # quad (r11, v2, v3, r31)
        pts[m, 0, 0], pts[m, 0, 1] = poly[1, 0], poly[1, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v2x, v2y
        pts[m, 2, 0], pts[m, 2, 1] = v3x, v3y
        pts[m, 3, 0], pts[m, 3, 1] = poly[2, 0], poly[2, 1]
        npts[m] = 4
        mats[m] = mat_c
        m += 1
    else:
        # case 6: triangles (r11, v2, r21), (r22, v3, r31)
        pts[m, 0, 0], pts[m, 0, 1] = poly[1, 0], poly[1, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v2x, v2y
        pts[m, 2, 0], pts[m, 2, 1] = poly[2, 0], poly[2, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
        pts[m, 0, 0], pts[m, 0, 1] = poly[3, 0], poly[3, 1]
        pts[m, 1, 0], pts[m, 1, 1] = v3x, v3y
        pts[m, 2, 0], pts[m, 2, 1] = poly[4, 0], poly[4, 1]
        npts[m] = 3
        mats[m] = mat_c
        m += 1
    return m


@njit(cache=True)
def interior_segments_k(c, R, u, v, tri, segs):
    """Interface segments strictly inside the triangle, oriented with
    material 1 on the left.  segs is (3, 4) holding x0,y0,x1,y1 rows.
    Returns the segment count, or -1 on invalid state."""
    case_id, swap, rot = classify_k(c, R)
    if case_id == 0:
        return -1
    if case_id == 1:
        return 0
    poly = np.empty((6, 2))
    n = canonical_poly(case_id, rot, R, u, v, tri, poly)
    nseg = 0
    tmp = np.empty((3, 4))
    if case_id == 2:
        # edges r12->vt and vt->r11 of the lens triangle
        tmp[0, 0], tmp[0, 1], tmp[0, 2], tmp[0, 3] = \
            poly[1, 0], poly[1, 1], poly[2, 0], poly[2, 1]
        tmp[1, 0], tmp[1, 1], tmp[1, 2], tmp[1, 3] = \
            poly[2, 0], poly[2, 1], poly[0, 0], poly[0, 1]
        nseg = 2
    elif case_id == 3:
        tmp[0, 0], tmp[0, 1], tmp[0, 2], tmp[0, 3] = \
            poly[1, 0], poly[1, 1], poly[2, 0], poly[2, 1]
        tmp[1, 0], tmp[1, 1], tmp[1, 2], tmp[1, 3] = \
            poly[3, 0], poly[3, 1], poly[0, 0], poly[0, 1]
        nseg = 2
    elif case_id == 4:
        tmp[0, 0], tmp[0, 1], tmp[0, 2], tmp[0, 3] = \
            poly[1, 0], poly[1, 1], poly[2, 0], poly[2, 1]
        tmp[1, 0], tmp[1, 1], tmp[1, 2], tmp[1, 3] = \
            poly[3, 0], poly[3, 1], poly[4, 0], poly[4, 1]
        tmp[2, 0], tmp[2, 1], tmp[2, 2], tmp[2, 3] = \
            poly[5, 0], poly[5, 1], poly[0, 0], poly[0, 1]
        nseg = 3
    elif case_id == 5:
        tmp[0, 0], tmp[0, 1], tmp[0, 2], tmp[0, 3] = \
            poly[1, 0], poly[1, 1], poly[2, 0], poly[2, 1]
        nseg = 1
    else:
        tmp[0, 0], tmp[0, 1], tmp[0, 2], tmp[0, 3] = \
            poly[1, 0], poly[1, 1], poly[2, 0], poly[2, 1]
        tmp[1, 0], tmp[1, 1], tmp[1, 2], tmp[1, 3] = \
            poly[3, 0], poly[3, 1], poly[4, 0], poly[4, 1]
        nseg = 2
    for k in range(nseg):
        if swap:
            segs[k, 0], segs[k, 1] = tmp[k, 2], tmp[k, 3]
            segs[k, 2], segs[k, 3] = tmp[k, 0], tmp[k, 1]
        else:
            segs[k, 0], segs[k, 1] = tmp[k, 0], tmp[k, 1]
            segs[k, 2], segs[k, 3] = tmp[k, 2], tmp[k, 3]
    return nseg


@njit(cache=True)
def material_at_k(c, R, u, v, tri, px, py):
    """Material at a point of the triangle by interior-segment side
    tests; points exactly on a segment count as material 1."""
    case_id, swap, rot = classify_k(c, R)
    if case_id == 0:
        return -1
    if case_id == 1:
        return c
    segs = np.empty((3, 4))
    nseg = interior_segments_k(c, R, u, v, tri, segs)
    if swap == 0:
        # material-1 region convex: left of (or on) every segment
        for k in range(nseg):
            if orient2d_sign(segs[k, 0], segs[k, 1],
                             segs[k, 2], segs[k, 3], px, py) < 0:
                return 0
        return 1
    # material-1 region is the complement: left of (or on) any segment
    for k in range(nseg):
        if orient2d_sign(segs[k, 0], segs[k, 1],
                         segs[k, 2], segs[k, 3], px, py) >= 0:
            return 1
    return 0


# --- area correction ---------------------------------------------------

CORR_NOOP = 0
CORR_APPLIED = 1
CORR_UNREACHABLE = 2
CORR_ERROR = -1


@njit(cache=True)
def _shrink_split(r1, r2):
    """Merge point of a two-cut row that keeps the outer pieces' ratio."""
    denom = r1 + 1.0 - r2
    if denom <= 0.0:
        return 0.5 * (r1 + r2)
    return r1 / denom


@njit(cache=True)
def _corr_targets(case_id, Rc, u_c, v_c, expand, Rstar, bary_star):
    """Fills Rstar (canonical 3x2) and bary_star (u*, v*) per the fixed
    movement table; entries of rows without cuts are left untouched."""
    if case_id == 2:
        if expand:
            Rstar[0, 0] = 0.0
            Rstar[0, 1] = 1.0
            bary_star[0] = 0.0
            bary_star[1] = 1.0  # interior vertex -> vertex 3
        else:
            s1 = _shrink_split(Rc[0, 0], Rc[0, 1])
            Rstar[0, 0] = s1
            Rstar[0, 1] = s1
            w = 1.0 - u_c - v_c
            uw = u_c + w
            if uw <= 0.0:
                bary_star[0] = 0.0
                bary_star[1] = 0.0
            else:
                # drop to edge 1 keeping the u/w ratio
                bary_star[0] = u_c / uw
                bary_star[1] = 0.0
    elif case_id == 3:
        for i in range(2):
            if expand:
                Rstar[i, 0] = 0.0
                Rstar[i, 1] = 1.0
            else:
                s = _shrink_split(Rc[i, 0], Rc[i, 1])
                Rstar[i, 0] = s
                Rstar[i, 1] = s
    elif case_id == 4:
        for i in range(3):
            if expand:
                Rstar[i, 0] = 0.0
                Rstar[i, 1] = 1.0
            else:
                s = _shrink_split(Rc[i, 0], Rc[i, 1])
                Rstar[i, 0] = s
                Rstar[i, 1] = s
    elif case_id == 5:
        if expand:
            Rstar[0, 0] = 1.0
            Rstar[2, 0] = 0.0
        else:
            Rstar[0, 0] = 0.0
            Rstar[2, 0] = 1.0
    else:  # case 6
        if expand:
            Rstar[0, 0] = 1.0
            Rstar[1, 0] = 0.0
            Rstar[1, 1] = 1.0
            Rstar[2, 0] = 0.0
        else:
            s2 = _shrink_split(Rc[1, 0], Rc[1, 1])
            Rstar[0, 0] = 0.0
            Rstar[1, 0] = s2
            Rstar[1, 1] = s2
            Rstar[2, 0] = 1.0


@njit(cache=True)
def _corr_eval(case_id, Rc, Rstar, v_c, v_star, tau, Rtau):
    """Canonical F1 at interpolation parameter tau."""
    for i in range(3):
        for j in range(2):
            Rtau[i, j] = (1.0 - tau) * Rc[i, j] + tau * Rstar[i, j]
    vv = (1.0 - tau) * v_c + tau * v_star
    return f1_canonical(case_id, Rtau, vv)


@njit(cache=True)
def correct_cut_k(c, R, u, v, f1_target, R_out, uv_out):
    """Moves cuts along the fixed per-case targets so the material-1
    fraction becomes f1_target, preserving the cut-count vector.

    Writes the corrected record (original frame) into R_out / uv_out
    and returns a CORR_* status.
    """
    case_id, swap, rot = classify_k(c, R)
    if case_id == 0 or f1_target < 0.0 or f1_target > 1.0:
        return CORR_ERROR
    for i in range(3):
        R_out[i, 0] = R[i, 0]
        R_out[i, 1] = R[i, 1]
    uv_out[0] = u
    uv_out[1] = v
    if case_id == 1:
        return CORR_NOOP

    Rc = np.empty((3, 2))
    rotate_rows(R, rot, Rc)
    u_c, v_c = rotate_bary(u, v, rot)

    target = 1.0 - f1_target if swap else f1_target
    f0 = f1_canonical(case_id, Rc, v_c)
    if f0 == target:
        return CORR_NOOP

    expand = target > f0
    Rstar = Rc.copy()
    bary_star = np.empty(2)
    bary_star[0] = u_c
    bary_star[1] = v_c
    _corr_targets(case_id, Rc, u_c, v_c, expand, Rstar, bary_star)
    v_star = bary_star[1]

    # F1(tau) is exactly quadratic: entries are linear in tau and each
    # closed form is bilinear in entries.
    Rtau = np.empty((3, 2))
    g0 = f0 - target
    g1 = _corr_eval(case_id, Rc, Rstar, v_c, v_star, 1.0, Rtau) - target
    gh = _corr_eval(case_id, Rc, Rstar, v_c, v_star, 0.5, Rtau) - target
    alpha = 2.0 * (g1 + g0) - 4.0 * gh
    beta = g1 - g0 - alpha
    gamma = g0

    tau = -1.0
    if abs(alpha) < 1e-14 * (abs(beta) + abs(gamma) + 1e-300):
        if beta != 0.0:
            tau = -gamma / beta
    else:
        disc = beta * beta - 4.0 * alpha * gamma
        if disc >= 0.0:
            sq = np.sqrt(disc)
            q = -0.5 * (beta + sq) if beta >= 0.0 else -0.5 * (beta - sq)
            cand1 = q / alpha
            cand2 = gamma / q if q != 0.0 else -2.0
            # F1(tau) is monotone on [0, 1): the admissible root is the
            # one where the slope sign matches the correction direction.
            want = 1.0 if expand else -1.0
            tau = -1.0
            for cand in (cand1, cand2):
                if -1e-12 <= cand < 1.0:
                    slope = 2.0 * alpha * cand + beta
                    if slope * want >= 0.0 and (tau < 0.0 or cand < tau):
                        tau = cand
    if -1e-12 <= tau < 0.0:
        tau = 0.0
    if tau < 0.0 or tau >= 1.0:
        return CORR_UNREACHABLE

    # one Newton step against the exact quadratic to kill rounding
    deriv = 2.0 * alpha * tau + beta
    if deriv != 0.0:
        resid = _corr_eval(case_id, Rc, Rstar, v_c, v_star, tau, Rtau) - target
        tau -= resid / deriv
        if tau < 0.0:
            tau = 0.0
        elif tau >= 1.0:
            return CORR_UNREACHABLE

    for i in range(3):
        for j in range(2):
            w = (1.0 - tau) * Rc[i, j] + tau * Rstar[i, j]
            # keep cuts strictly inside the edge so the record still
            # classifies; exact 0/1 sentinels of empty slots stay put
            if 0.0 < w < EPS_CUT:
                w = EPS_CUT
            elif 1.0 - EPS_CUT < w < 1.0:
                w = 1.0 - EPS_CUT
            Rtau[i, j] = w
    u_new = (1.0 - tau) * u_c + tau * bary_star[0]
    v_new = (1.0 - tau) * v_c + tau * bary_star[1]

    unrotate_rows(Rtau, rot, R_out)
    uo, vo = unrotate_bary(u_new, v_new, rot)
    uv_out[0] = uo
    uv_out[1] = vo
    return CORR_APPLIED


# --- packed 6-real encoding ---------------------------------------------


@njit(cache=True)
def pack_k(c, R, u, v, has_vt, rot, out):
    """Packs (c, R, vt) into 6 reals: c rides in the sign bit of the
    first value; for two-cuts-on-one-edge records the row after the cut
    row (cyclically) stores the barycentrics offset by +2."""
    out[0] = R[0, 0]
    out[1] = R[0, 1]
    out[2] = R[1, 0]
    out[3] = R[1, 1]
    out[4] = R[2, 0]
    out[5] = R[2, 1]
    if has_vt:
        row = (rot + 1) % 3
        out[2 * row] = u + 2.0
        out[2 * row + 1] = v + 2.0
    if c:
        out[0] = -out[0] if out[0] != 0.0 else -0.0
    return 0


@njit(cache=True)
def unpack_k(packed, R_out, uv_out):
    """Inverse of pack_k; returns (c, has_vt) with c = -1 on a format
    violation."""
    first = packed[0]
    c = 1 if (first < 0.0 or (first == 0.0 and np.signbit(first))) else 0
    vals = np.empty(6)
    vals[0] = abs(first)
    for k in range(1, 6):
        vals[k] = packed[k]
    has_vt = False
    uv_out[0] = np.nan
    uv_out[1] = np.nan
    for i in range(3):
        a = vals[2 * i]
        b = vals[2 * i + 1]
        if 2.0 <= a <= 3.0 and 2.0 <= b <= 3.0:
            if has_vt:
                return -1, False
            has_vt = True
            uv_out[0] = a - 2.0
            uv_out[1] = b - 2.0
            R_out[i, 0] = 0.0
            R_out[i, 1] = 1.0
        elif 0.0 <= a <= 1.0 and 0.0 <= b <= 1.0 and a <= b:
            R_out[i, 0] = a
            R_out[i, 1] = b
        else:
            return -1, False
    return c, has_vt


@njit(cache=True)
def area_fractions_all(c, R, vt, out):
    """Liquid fraction of every triangle record."""
    for i in range(c.shape[0]):
        out[i] = area_fraction_k(c[i], R[i], vt[i, 0], vt[i, 1])
