"""Triangle mesh container with point location and edge adjacency.

Meshes are immutable after construction.  All connectivity is stored in
flat numpy arrays so the advection kernels can consume them directly:

- ``verts``: (nv, 2) float64 coordinates
- ``tris``: (nt, 3) int64 CCW vertex indices
- ``edges``: (ne, 2) int64, each row sorted ascending (unique edges)
- ``edge_tris``: (ne, 2) int64 incident triangles, -1 when absent
- ``tri_edges``: (nt, 3) int64, edge id of local edge i (v_i to v_{i+1})
- ``tri_edge_dir``: (nt, 3) int8, +1 when the local edge runs in the
  stored (ascending) direction, -1 otherwise
- vertex-to-triangle adjacency as CSR (``v2t_start``, ``v2t``)
- a uniform bucket grid over triangle bounding boxes for point location
  and box queries (``grid_start``, ``grid_tris``)
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .predicates import orient2d_det, orient2d_sign


class MeshFormatError(ValueError):
    pass


@njit(cache=True)
def _point_in_tri(px, py, ax, ay, bx, by, cx, cy):
    """+1 strictly inside, 0 on boundary, -1 outside a CCW triangle."""
    s1 = orient2d_sign(ax, ay, bx, by, px, py)
    if s1 < 0:
        return -1
    s2 = orient2d_sign(bx, by, cx, cy, px, py)
    if s2 < 0:
        return -1
    s3 = orient2d_sign(cx, cy, ax, ay, px, py)
    if s3 < 0:
        return -1
    if s1 == 0 or s2 == 0 or s3 == 0:
        return 0
    return 1


@njit(cache=True)
def locate_kernel(px, py, verts, tris, gx0, gy0, ginv, gnx, gny,
                  grid_start, grid_tris, hint):
    """Lowest-id triangle containing (px, py), or -1 if outside."""
    if hint >= 0:
        t = tris[hint]
        if _point_in_tri(px, py,
                         verts[t[0], 0], verts[t[0], 1],
                         verts[t[1], 0], verts[t[1], 1],
                         verts[t[2], 0], verts[t[2], 1]) >= 0:
            return hint
    # Clamp into the grid; containment tests reject points off the hull.
    ix = min(max(int((px - gx0) * ginv), 0), gnx - 1)
    iy = min(max(int((py - gy0) * ginv), 0), gny - 1)
    b = iy * gnx + ix
    best = -1
    for k in range(grid_start[b], grid_start[b + 1]):
        tid = grid_tris[k]
        if best >= 0 and tid >= best:
            continue
        t = tris[tid]
        if _point_in_tri(px, py,
                         verts[t[0], 0], verts[t[0], 1],
                         verts[t[1], 0], verts[t[1], 1],
                         verts[t[2], 0], verts[t[2], 1]) >= 0:
            best = tid
    return best


class TriMesh:
    """Immutable triangle mesh with CCW triangles and edge adjacency."""

    def __init__(self, verts, tris, char_length=None, lattice=None):
        verts = np.ascontiguousarray(verts, dtype=np.float64)
        tris = np.ascontiguousarray(tris, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshFormatError("verts must be (nv, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshFormatError("tris must be (nt, 3)")
        if not np.all(np.isfinite(verts)):
            raise MeshFormatError("vertex coordinates must be finite")
        if tris.min(initial=0) < 0 or tris.max(initial=-1) >= len(verts):
            raise MeshFormatError("triangle vertex index out of range")

        # Normalize orientation and reject degenerate triangles.
        for i in range(len(tris)):
            a, b, c = tris[i]
            s = orient2d_sign(verts[a, 0], verts[a, 1], verts[b, 0],
                              verts[b, 1], verts[c, 0], verts[c, 1])
            if s == 0:
                raise MeshFormatError(f"triangle {i} is degenerate")
            if s < 0:
                tris[i, 1], tris[i, 2] = c, b

        self.verts = verts
        self.tris = tris
        self.lattice = lattice

        self._build_edges()
        self._build_vertex_adjacency()

        edge_vec = verts[self.edges[:, 1]] - verts[self.edges[:, 0]]
        self.edge_lengths = np.hypot(edge_vec[:, 0], edge_vec[:, 1])
        self.char_length = (float(char_length) if char_length is not None
                            else float(self.edge_lengths.min()))
        self._build_grid()

    def _build_edges(self):
        tris = self.tris
        nt = len(tris)
        raw = np.empty((3 * nt, 2), dtype=np.int64)
        for i in range(3):
            raw[i::3, 0] = tris[:, i]
            raw[i::3, 1] = tris[:, (i + 1) % 3]
        lo = raw.min(axis=1)
        hi = raw.max(axis=1)
        if np.any(lo == hi):
            raise MeshFormatError("triangle repeats a vertex")
        key = np.stack([lo, hi], axis=1)
        edges, inv = np.unique(key, axis=0, return_inverse=True)
        self.edges = edges
        self.tri_edges = inv.reshape(nt, 3)
        self.tri_edge_dir = np.where(raw[:, 0] == lo, 1, -1).astype(
            np.int8).reshape(nt, 3)

        ne = len(edges)
        edge_tris = np.full((ne, 2), -1, dtype=np.int64)
        counts = np.zeros(ne, dtype=np.int64)
        for t in range(nt):
            for k in range(3):
                e = self.tri_edges[t, k]
                if counts[e] >= 2:
                    raise MeshFormatError(
                        f"edge {tuple(edges[e])} shared by more than 2 triangles")
                edge_tris[e, counts[e]] = t
                counts[e] += 1
        self.edge_tris = edge_tris

    def _build_vertex_adjacency(self):
        nv = len(self.verts)
        flat = self.tris.ravel()
        counts = np.bincount(flat, minlength=nv)
        start = np.zeros(nv + 1, dtype=np.int64)
        np.cumsum(counts, out=start[1:])
        fill = start[:-1].copy()
        v2t = np.empty(3 * len(self.tris), dtype=np.int64)
        for t in range(len(self.tris)):
            for k in range(3):
                v = self.tris[t, k]
                v2t[fill[v]] = t
                fill[v] += 1
        self.v2t_start = start
        self.v2t = v2t

    def _build_grid(self):
        verts, tris = self.verts, self.tris
        self.bbox_min = verts.min(axis=0)
        self.bbox_max = verts.max(axis=0)
        h = self.char_length
        nx = max(1, int(np.ceil((self.bbox_max[0] - self.bbox_min[0]) / h)))
        ny = max(1, int(np.ceil((self.bbox_max[1] - self.bbox_min[1]) / h)))
        # Cap bucket count; triangles per bucket just grows if capped.
        cap = 1 << 21
        while nx * ny > cap:
            nx = max(1, nx // 2)
            ny = max(1, ny // 2)
        self.grid_nx = nx
        self.grid_ny = ny
        self.grid_x0 = float(self.bbox_min[0])
        self.grid_y0 = float(self.bbox_min[1])
        sx = (self.bbox_max[0] - self.bbox_min[0]) / nx
        sy = (self.bbox_max[1] - self.bbox_min[1]) / ny
        s = max(sx, sy, 1e-300)
        # One isotropic scale keeps index math identical on both axes;
        # buckets then tile a square cover of the bbox.
        self.grid_nx = max(nx, int(np.ceil((self.bbox_max[0] - self.grid_x0) / s)))
        self.grid_ny = max(ny, int(np.ceil((self.bbox_max[1] - self.grid_y0) / s)))
        self.grid_inv = 1.0 / s

        tx = verts[tris, 0]
        ty = verts[tris, 1]
        ix0 = np.clip(((tx.min(axis=1) - self.grid_x0) * self.grid_inv).astype(np.int64),
                      0, self.grid_nx - 1)
        ix1 = np.clip(((tx.max(axis=1) - self.grid_x0) * self.grid_inv).astype(np.int64),
                      0, self.grid_nx - 1)
        iy0 = np.clip(((ty.min(axis=1) - self.grid_y0) * self.grid_inv).astype(np.int64),
                      0, self.grid_ny - 1)
        iy1 = np.clip(((ty.max(axis=1) - self.grid_y0) * self.grid_inv).astype(np.int64),
                      0, self.grid_ny - 1)

        nb = self.grid_nx * self.grid_ny
        counts = np.zeros(nb, dtype=np.int64)
        for t in range(len(tris)):
            for iy in range(iy0[t], iy1[t] + 1):
                base = iy * self.grid_nx
                for ix in range(ix0[t], ix1[t] + 1):
                    counts[base + ix] += 1
        start = np.zeros(nb + 1, dtype=np.int64)
        np.cumsum(counts, out=start[1:])
        fill = start[:-1].copy()
        grid_tris = np.empty(start[-1], dtype=np.int64)
        for t in range(len(tris)):
            for iy in range(iy0[t], iy1[t] + 1):
                base = iy * self.grid_nx
                for ix in range(ix0[t], ix1[t] + 1):
                    b = base + ix
                    grid_tris[fill[b]] = t
                    fill[b] += 1
        self.grid_start = start
        self.grid_tris = grid_tris

    @property
    def n_vertices(self):
        return len(self.verts)

    @property
    def n_triangles(self):
        return len(self.tris)

    @property
    def n_edges(self):
        return len(self.edges)

    def triangle_coords(self, tid):
        return self.verts[self.tris[tid]]

    def triangle_areas(self):
        v = self.verts
        t = self.tris
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                      - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def locate(self, p, hint=-1):
        """Lowest-id triangle containing p, or None when outside."""
        tid = locate_kernel(float(p[0]), float(p[1]), self.verts, self.tris,
                            self.grid_x0, self.grid_y0, self.grid_inv,
                            self.grid_nx, self.grid_ny,
                            self.grid_start, self.grid_tris,
                            -1 if hint is None else int(hint))
        return None if tid < 0 else int(tid)


def build_lattice(n, domain=((0.0, 0.0), (1.0, 1.0))):
    """Uniform n-by-n lattice; each cell is split by its lower-left to
    upper-right diagonal into a lower-right and an upper-left triangle.

    Cell (i, j) owns triangles 2*(j*n+i) (lower-right) and
    2*(j*n+i)+1 (upper-left).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    (x0, y0), (x1, y1) = domain
    if not (x1 > x0 and y1 > y0):
        raise ValueError("empty domain")
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    xx, yy = np.meshgrid(xs, ys)
    verts = np.stack([xx.ravel(), yy.ravel()], axis=1)

    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    for j in range(n):
        for i in range(n):
            ll = j * (n + 1) + i
            lr = ll + 1
            ul = ll + (n + 1)
            ur = ul + 1
            cell = j * n + i
            tris[2 * cell] = (ll, lr, ur)
            tris[2 * cell + 1] = (ll, ur, ul)
    return TriMesh(verts, tris, char_length=(x1 - x0) / n,
                   lattice={"n": n, "domain": ((x0, y0), (x1, y1))})


def _parse_rows(text, what):
    """Yields (line_number, fields) for non-comment, non-blank lines."""
    rows = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            rows.append((ln, body.split()))
    if not rows:
        raise MeshFormatError(f"{what}: no data lines")
    return rows


def import_mesh(node_text, ele_text):
    """Build a mesh from plain-text .node/.ele listings.

    Headers carry counts; indexing may be 0- or 1-based (detected from
    the first listed id).  Triangles are CCW-normalized on load.
    """
    nrows = _parse_rows(node_text, "node file")
    ln, header = nrows[0]
    try:
        nv = int(header[0])
    except ValueError:
        raise MeshFormatError(f"node file line {ln}: bad vertex count")
    if len(nrows) - 1 < nv:
        raise MeshFormatError(f"node file: expected {nv} vertices, "
                              f"found {len(nrows) - 1}")
    ids = np.empty(nv, dtype=np.int64)
    verts = np.empty((nv, 2))
    for k in range(nv):
        ln, f = nrows[1 + k]
        try:
            ids[k] = int(f[0])
            verts[k, 0] = float(f[1])
            verts[k, 1] = float(f[2])
        except (ValueError, IndexError):
            raise MeshFormatError(f"node file line {ln}: bad vertex record")
    base = int(ids[0])
    if base not in (0, 1) or not np.array_equal(ids, np.arange(base, base + nv)):
        raise MeshFormatError("node file: vertex ids must be consecutive "
                              "starting at 0 or 1")

    erows = _parse_rows(ele_text, "ele file")
    ln, header = erows[0]
    try:
        nt = int(header[0])
    except ValueError:
        raise MeshFormatError(f"ele file line {ln}: bad triangle count")
    if len(erows) - 1 < nt:
        raise MeshFormatError(f"ele file: expected {nt} triangles, "
                              f"found {len(erows) - 1}")
    tris = np.empty((nt, 3), dtype=np.int64)
    for k in range(nt):
        ln, f = erows[1 + k]
        try:
            tris[k] = (int(f[1]), int(f[2]), int(f[3]))
        except (ValueError, IndexError):
            raise MeshFormatError(f"ele file line {ln}: bad triangle record")
        tris[k] -= base
        if tris[k].min() < 0 or tris[k].max() >= nv:
            raise MeshFormatError(f"ele file line {ln}: index out of range")
    try:
        return TriMesh(verts, tris)
    except MeshFormatError as e:
        raise MeshFormatError(f"ele file: {e}")
