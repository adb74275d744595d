"""Exact 2D orientation predicate.

Adaptive-precision evaluation of the signed doubled triangle area, after
J. R. Shewchuk's public-domain routines.  The fast floating-point filter
handles the overwhelming majority of calls; inputs near degeneracy fall
through to expansion arithmetic, so the returned sign is always correct
for IEEE-754 double inputs.
"""

import numpy as np
from numba import njit

# Machine constants, derived the same way triangle.c does at startup.
_every_other = True
_epsilon = 1.0
_splitter = 1.0
_check = 1.0
while True:
    _lastcheck = _check
    _epsilon *= 0.5
    if _every_other:
        _splitter *= 2.0
    _every_other = not _every_other
    _check = 1.0 + _epsilon
    if _check == 1.0 or _check == _lastcheck:
        break
SPLITTER = _splitter + 1.0
EPSILON = _epsilon

RESULTERRBOUND = (3.0 + 8.0 * EPSILON) * EPSILON
CCWERRBOUND_A = (3.0 + 16.0 * EPSILON) * EPSILON
CCWERRBOUND_B = (2.0 + 12.0 * EPSILON) * EPSILON
CCWERRBOUND_C = (9.0 + 64.0 * EPSILON) * EPSILON * EPSILON


@njit(cache=True)
def _two_sum(a, b):
    x = a + b
    bvirt = x - a
    avirt = x - bvirt
    bround = b - bvirt
    around = a - avirt
    return x, around + bround


@njit(cache=True)
def _fast_two_sum(a, b):
    x = a + b
    bvirt = x - a
    return x, b - bvirt


@njit(cache=True)
def _two_diff_tail(a, b, x):
    bvirt = a - x
    avirt = x + bvirt
    bround = bvirt - b
    around = a - avirt
    return around + bround


@njit(cache=True)
def _two_product(a, b):
    x = a * b
    c = SPLITTER * a
    abig = c - a
    ahi = c - abig
    alo = a - ahi
    c = SPLITTER * b
    abig = c - b
    bhi = c - abig
    blo = b - bhi
    err = x - ahi * bhi
    err -= alo * bhi
    err -= ahi * blo
    return x, alo * blo - err


@njit(cache=True)
def _two_two_diff(a1, a0, b1, b0, out):
    # out receives (x0, x1, x2, x3), lowest term first
    _i, x0 = _two_sum(a0, -b0)
    _j, _0 = _two_sum(a1, _i)
    _i, x1 = _two_sum(_0, -b1)
    x3, x2 = _two_sum(_j, _i)
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


@njit(cache=True)
def _fast_expansion_sum_zeroelim(e, elen, f, flen, h):
    enow = e[0]
    fnow = f[0]
    eindex = 0
    findex = 0
    if (fnow > enow) == (fnow > -enow):
        q = enow
        eindex += 1
        enow = e[eindex] if eindex < elen else 0.0
    else:
        q = fnow
        findex += 1
        fnow = f[findex] if findex < flen else 0.0
    hindex = 0
    if eindex < elen and findex < flen:
        if (fnow > enow) == (fnow > -enow):
            qnew, hh = _fast_two_sum(enow, q)
            eindex += 1
            enow = e[eindex] if eindex < elen else 0.0
        else:
            qnew, hh = _fast_two_sum(fnow, q)
            findex += 1
            fnow = f[findex] if findex < flen else 0.0
        q = qnew
        if hh != 0.0:
            h[hindex] = hh
            hindex += 1
        while eindex < elen and findex < flen:
            if (fnow > enow) == (fnow > -enow):
                qnew, hh = _two_sum(q, enow)
                eindex += 1
                enow = e[eindex] if eindex < elen else 0.0
            else:
                qnew, hh = _two_sum(q, fnow)
                findex += 1
                fnow = f[findex] if findex < flen else 0.0
            q = qnew
            if hh != 0.0:
                h[hindex] = hh
                hindex += 1
    while eindex < elen:
        qnew, hh = _two_sum(q, enow)
        eindex += 1
        enow = e[eindex] if eindex < elen else 0.0
        q = qnew
        if hh != 0.0:
            h[hindex] = hh
            hindex += 1
    while findex < flen:
        qnew, hh = _two_sum(q, fnow)
        findex += 1
        fnow = f[findex] if findex < flen else 0.0
        q = qnew
        if hh != 0.0:
            h[hindex] = hh
            hindex += 1
    if q != 0.0 or hindex == 0:
        h[hindex] = q
        hindex += 1
    return hindex


@njit(cache=True)
def _orient2d_adapt(ax, ay, bx, by, cx, cy, detsum):
    acx = ax - cx
    bcx = bx - cx
    acy = ay - cy
    bcy = by - cy

    detleft, detlefttail = _two_product(acx, bcy)
    detright, detrighttail = _two_product(acy, bcx)

    b = np.empty(4)
    _two_two_diff(detleft, detlefttail, detright, detrighttail, b)
    det = b[0] + b[1] + b[2] + b[3]
    errbound = CCWERRBOUND_B * detsum
    if det >= errbound or -det >= errbound:
        return det

    acxtail = _two_diff_tail(ax, cx, acx)
    bcxtail = _two_diff_tail(bx, cx, bcx)
    acytail = _two_diff_tail(ay, cy, acy)
    bcytail = _two_diff_tail(by, cy, bcy)
    if acxtail == 0.0 and acytail == 0.0 and bcxtail == 0.0 and bcytail == 0.0:
        return det

    errbound = CCWERRBOUND_C * detsum + RESULTERRBOUND * abs(det)
    det += (acx * bcytail + bcy * acxtail) - (acy * bcxtail + bcx * acytail)
    if det >= errbound or -det >= errbound:
        return det

    u = np.empty(4)
    c1 = np.empty(8)
    c2 = np.empty(12)
    d = np.empty(16)

    s1, s0 = _two_product(acxtail, bcy)
    t1, t0 = _two_product(acytail, bcx)
    _two_two_diff(s1, s0, t1, t0, u)
    c1len = _fast_expansion_sum_zeroelim(b, 4, u, 4, c1)

    s1, s0 = _two_product(acx, bcytail)
    t1, t0 = _two_product(acy, bcxtail)
    _two_two_diff(s1, s0, t1, t0, u)
    c2len = _fast_expansion_sum_zeroelim(c1, c1len, u, 4, c2)

    s1, s0 = _two_product(acxtail, bcytail)
    t1, t0 = _two_product(acytail, bcxtail)
    _two_two_diff(s1, s0, t1, t0, u)
    dlen = _fast_expansion_sum_zeroelim(c2, c2len, u, 4, d)

    return d[dlen - 1]


@njit(cache=True)
def orient2d_det(ax, ay, bx, by, cx, cy):
    """Signed doubled area of triangle (a, b, c); sign is exact."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright

    if detleft > 0.0:
        if detright <= 0.0:
            return det
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return det
        detsum = -detleft - detright
    else:
        return det

    errbound = CCWERRBOUND_A * detsum
    if det >= errbound or -det >= errbound:
        return det
    return _orient2d_adapt(ax, ay, bx, by, cx, cy, detsum)


@njit(cache=True)
def orient2d_sign(ax, ay, bx, by, cx, cy):
    """Exact sign in {-1, 0, +1} of orient2d_det."""
    det = orient2d_det(ax, ay, bx, by, cx, cy)
    if det > 0.0:
        return 1
    if det < 0.0:
        return -1
    return 0
