"""Numba kernels for planar geometry.

All classification decisions (sides, intersection kinds, containment) go
through the exact orientation predicate; constructed coordinates
(intersection points, centroids) are ordinary floating point.  Polygons
are (n, 2) arrays with explicit vertex counts so fixed-size buffers can
be reused in hot loops.
"""

import numpy as np
from numba import njit

from .predicates import orient2d_det, orient2d_sign

# Segment intersection kinds
SEG_NONE = 0
SEG_POINT = 1
SEG_OVERLAP = 2


@njit(cache=True)
def seg_seg_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    """Intersect segments a-b and c-d.

    Returns (kind, t, u, px, py, qx, qy).  For SEG_POINT, (px, py) is the
    intersection and t, u are the parameters along a-b and c-d.  For
    SEG_OVERLAP, (px, py)-(qx, qy) is the shared sub-segment and t, u are
    its parameters along a-b.
    """
    oa = orient2d_det(cx, cy, dx, dy, ax, ay)
    ob = orient2d_det(cx, cy, dx, dy, bx, by)
    oc = orient2d_det(ax, ay, bx, by, cx, cy)
    od = orient2d_det(ax, ay, bx, by, dx, dy)

    if oa == 0.0 and ob == 0.0:
        # Collinear: compare parameter intervals along a-b.
        ex = bx - ax
        ey = by - ay
        denom = ex * ex + ey * ey
        tc = ((cx - ax) * ex + (cy - ay) * ey) / denom
        td = ((dx - ax) * ex + (dy - ay) * ey) / denom
        lo = tc if tc < td else td
        hi = td if tc < td else tc
        lo = max(lo, 0.0)
        hi = min(hi, 1.0)
        if lo > hi:
            return SEG_NONE, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        px = ax + lo * ex
        py = ay + lo * ey
        qx = ax + hi * ex
        qy = ay + hi * ey
        if lo == hi:
            return SEG_POINT, lo, 0.0, px, py, px, py
        return SEG_OVERLAP, lo, hi, px, py, qx, qy

    if (oa > 0.0 and ob > 0.0) or (oa < 0.0 and ob < 0.0):
        return SEG_NONE, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    if (oc > 0.0 and od > 0.0) or (oc < 0.0 and od < 0.0):
        return SEG_NONE, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0

    t = oa / (oa - ob)
    u = oc / (oc - od)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    px = ax + t * (bx - ax)
    py = ay + t * (by - ay)
    return SEG_POINT, t, u, px, py, px, py


@njit(cache=True)
def poly_area(pts, n):
    """Signed shoelace area of pts[:n]; positive for CCW."""
    s = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        s += pts[i, 0] * pts[j, 1] - pts[j, 0] * pts[i, 1]
    return 0.5 * s


@njit(cache=True)
def poly_centroid(pts, n):
    """Returns (signed area, cx, cy) of pts[:n]."""
    a = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        cross = pts[i, 0] * pts[j, 1] - pts[j, 0] * pts[i, 1]
        a += cross
        cx += (pts[i, 0] + pts[j, 0]) * cross
        cy += (pts[i, 1] + pts[j, 1]) * cross
    a *= 0.5
    if a == 0.0:
        return 0.0, 0.0, 0.0
    return a, cx / (6.0 * a), cy / (6.0 * a)


@njit(cache=True)
def clip_halfplane(subj, ns, ax, ay, bx, by, out):
    """Keep the part of subj[:ns] on the closed left side of a->b."""
    n_out = 0
    if ns == 0:
        return 0
    sx = subj[ns - 1, 0]
    sy = subj[ns - 1, 1]
    os_ = orient2d_det(ax, ay, bx, by, sx, sy)
    for i in range(ns):
        ex = subj[i, 0]
        ey = subj[i, 1]
        oe = orient2d_det(ax, ay, bx, by, ex, ey)
        if oe >= 0.0:
            if os_ < 0.0:
                t = os_ / (os_ - oe)
                out[n_out, 0] = sx + t * (ex - sx)
                out[n_out, 1] = sy + t * (ey - sy)
                n_out += 1
            out[n_out, 0] = ex
            out[n_out, 1] = ey
            n_out += 1
        elif os_ >= 0.0:
            t = os_ / (os_ - oe)
            out[n_out, 0] = sx + t * (ex - sx)
            out[n_out, 1] = sy + t * (ey - sy)
            n_out += 1
        sx = ex
        sy = ey
        os_ = oe
    return n_out


@njit(cache=True)
def dedup_poly(pts, n):
    """Drop consecutive duplicate vertices in place; returns new count."""
    if n == 0:
        return 0
    m = 0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        if pts[i, 0] != pts[j, 0] or pts[i, 1] != pts[j, 1]:
            pts[m, 0] = pts[i, 0]
            pts[m, 1] = pts[i, 1]
            m += 1
    return m


@njit(cache=True)
def clip_convex_convex(subj, ns, clip, nc, buf_a, buf_b):
    """Intersection of convex CCW subj[:ns] with convex CCW clip[:nc].

    Result is written into buf_a; returns its vertex count (0 when the
    intersection is empty or has zero area).  Buffers need capacity
    ns + nc + 4.
    """
    n = ns
    for i in range(n):
        buf_a[i, 0] = subj[i, 0]
        buf_a[i, 1] = subj[i, 1]
    for k in range(nc):
        k2 = k + 1
        if k2 == nc:
            k2 = 0
        n = clip_halfplane(buf_a, n, clip[k, 0], clip[k, 1],
                           clip[k2, 0], clip[k2, 1], buf_b)
        for i in range(n):
            buf_a[i, 0] = buf_b[i, 0]
            buf_a[i, 1] = buf_b[i, 1]
        if n == 0:
            return 0
    n = dedup_poly(buf_a, n)
    if n < 3:
        return 0
    if poly_area(buf_a, n) <= 0.0:
        return 0
    return n


@njit(cache=True)
def point_in_convex(px, py, pts, n):
    """+1 strictly inside, 0 on the boundary, -1 outside (exact)."""
    on_edge = False
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        s = orient2d_sign(pts[i, 0], pts[i, 1], pts[j, 0], pts[j, 1], px, py)
        if s < 0:
            return -1
        if s == 0:
            # On the supporting line; boundary only if inside the edge span.
            lo0 = min(pts[i, 0], pts[j, 0])
            hi0 = max(pts[i, 0], pts[j, 0])
            lo1 = min(pts[i, 1], pts[j, 1])
            hi1 = max(pts[i, 1], pts[j, 1])
            if lo0 <= px <= hi0 and lo1 <= py <= hi1:
                on_edge = True
            else:
                return -1
    return 0 if on_edge else 1


@njit(cache=True)
def point_in_polygon_evenodd(px, py, pts, n):
    """Even-odd containment test for a general (possibly bow-tie) loop."""
    inside = False
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        y0 = pts[i, 1]
        y1 = pts[j, 1]
        if (y0 <= py) != (y1 <= py):
            s = orient2d_sign(pts[i, 0], y0, pts[j, 0], y1, px, py)
            if y1 > y0:
                if s > 0:
                    inside = not inside
            else:
                if s < 0:
                    inside = not inside
    return inside


@njit(cache=True)
def clip_area_general(subj, ns, clip, nc):
    """Signed area of a general CCW loop clipped to a convex CCW region.

    Sutherland-Hodgman on a non-convex subject can emit degenerate
    connecting edges; the signed shoelace area of the result is still the
    area of the true intersection, which is all callers need.
    """
    cap = ns + nc + 8
    a = np.empty((cap, 2))
    b = np.empty((cap, 2))
    n = ns
    for i in range(ns):
        a[i, 0] = subj[i, 0]
        a[i, 1] = subj[i, 1]
    for k in range(nc):
        k2 = k + 1
        if k2 == nc:
            k2 = 0
        n = clip_halfplane(a, n, clip[k, 0], clip[k, 1], clip[k2, 0], clip[k2, 1], b)
        if n == 0:
            return 0.0
        for i in range(n):
            a[i, 0] = b[i, 0]
            a[i, 1] = b[i, 1]
    return poly_area(a, n)


@njit(cache=True)
def project_param(px, py, ax, ay, bx, by):
    """Orthogonal projection of p onto segment a-b as a parameter."""
    ex = bx - ax
    ey = by - ay
    return ((px - ax) * ex + (py - ay) * ey) / (ex * ex + ey * ey)
