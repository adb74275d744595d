"""Mesh container: lattice construction, import, adjacency, location."""

import math

import numpy as np
import pytest

from tricut.geom import orient2d
from tricut.mesh import MeshFormatError, build_lattice, import_mesh

from _meshgen import delaunay_mesh_text


class TestLattice:
    def test_counts(self):
        m = build_lattice(2)
        assert m.n_triangles == 8
        assert m.n_vertices == 9

    def test_unit_cell(self):
        m = build_lattice(1)
        tris = {tuple(map(tuple, m.triangle_coords(t))) for t in range(2)}
        assert ((0, 0), (1, 0), (1, 1)) in tris
        assert ((0, 0), (1, 1), (0, 1)) in tris

    def test_char_length(self):
        m = build_lattice(128)
        assert m.n_triangles == 32768
        assert math.isclose(m.char_length, 1.0 / 128)

    def test_all_ccw(self):
        m = build_lattice(4, domain=((0, 0), (4, 4)))
        for t in range(m.n_triangles):
            tri = m.triangle_coords(t)
            assert orient2d(tri[0], tri[1], tri[2]) == 1

    def test_edge_counts(self):
        # n=2: per Euler, E = V + F(tris) - 1 = 9 + 8 - 1
        m = build_lattice(2)
        assert m.n_edges == 16
        interior = sum(1 for e in range(m.n_edges) if m.edge_tris[e, 1] >= 0)
        assert interior == 8

    def test_total_area(self):
        m = build_lattice(7, domain=((0, 0), (2, 2)))
        assert math.isclose(m.triangle_areas().sum(), 4.0)

    def test_bad_domain(self):
        with pytest.raises(ValueError):
            build_lattice(4, domain=((0, 0), (0, 1)))


class TestLocate:
    def test_inside(self):
        m = build_lattice(8)
        for p in [(0.01, 0.99), (0.5, 0.5), (0.73, 0.11)]:
            tid = m.locate(p)
            tri = m.triangle_coords(tid)
            for i in range(3):
                a, b = tri[i], tri[(i + 1) % 3]
                assert orient2d(a, b, p) >= 0

    def test_outside(self):
        m = build_lattice(8)
        assert m.locate((1.5, 0.5)) is None
        assert m.locate((-0.1, 0.5)) is None

    def test_vertex_hit(self):
        m = build_lattice(4)
        assert m.locate((0.25, 0.25)) is not None


class TestImport:
    def test_roundtrip_counts(self):
        node, ele = delaunay_mesh_text(0.01, seed=0)
        m = import_mesh(node, ele)
        nv = int(node.split()[0])
        assert m.n_vertices == nv
        assert m.triangle_areas().min() > 0

    def test_ccw_normalized(self):
        # a clockwise triangle in the file gets flipped on load
        node = "3 2 0 0\n1 0.0 0.0\n2 0.0 1.0\n3 1.0 0.0\n"
        ele = "1 3 0\n1 1 2 3\n"
        m = import_mesh(node, ele)
        tri = m.triangle_coords(0)
        assert orient2d(tri[0], tri[1], tri[2]) == 1

    def test_zero_based(self):
        node = "3 2 0 0\n0 0.0 0.0\n1 1.0 0.0\n2 0.0 1.0\n"
        ele = "1 3 0\n0 0 1 2\n"
        m = import_mesh(node, ele)
        assert m.n_triangles == 1

    def test_char_length_min_edge(self):
        node = "3 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 0.0 0.5\n"
        ele = "1 3 0\n1 1 2 3\n"
        m = import_mesh(node, ele)
        assert math.isclose(m.char_length, 0.5)

    def test_bad_header(self):
        with pytest.raises(MeshFormatError):
            import_mesh("x 2 0 0\n", "0 3 0\n")

    def test_out_of_range_index(self):
        node = "3 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 0.0 1.0\n"
        ele = "1 3 0\n1 1 2 9\n"
        with pytest.raises(MeshFormatError):
            import_mesh(node, ele)

    def test_degenerate_triangle(self):
        node = "3 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 2.0 0.0\n"
        ele = "1 3 0\n1 1 2 3\n"
        with pytest.raises(MeshFormatError):
            import_mesh(node, ele)
