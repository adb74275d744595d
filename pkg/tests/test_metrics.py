"""Error metrics, convergence orders, curvature, connectivity."""

import math

import numpy as np
import pytest

from tricut import metrics as mt
from tricut import shapes as sh
from tricut.advect import InterfaceState
from tricut.edgecut import EdgeCut
from tricut.mesh import build_lattice


def half_plane_truth(x_split=0.5):
    """Dense polygon for the region x <= x_split of the unit square."""
    n = 64
    top = [(x_split, y) for y in np.linspace(0, 1, n)]
    pts = [(0.0, 0.0), (x_split, 0.0)] + top[1:-1] + [(x_split, 1.0),
                                                      (0.0, 1.0)]
    verts = np.array(pts)
    return sh.DensePolygon(verts, (verts,))


class TestShapeError:
    def test_exact_match_zero(self):
        mesh = build_lattice(8)
        shape = sh.circle((0.5, 0.5), 0.2)
        state, _ = sh.init_state(mesh, shape)
        truth = sh.polygonize(shape, 4096)
        err = mt.shape_error(state, truth)
        assert err.E_g < 1e-10

    def test_total_miss(self):
        mesh = build_lattice(16)
        state = InterfaceState(mesh)   # empty
        shape = sh.circle((0.5, 0.5), 0.15)
        truth = sh.polygonize(shape, 4096)
        err = mt.shape_error(state, truth)
        assert math.isclose(err.E_g, truth.area, rel_tol=1e-4)

    def test_relative_identity(self):
        mesh = build_lattice(16)
        shape = sh.circle((0.5, 0.5), 0.15)
        state, _ = sh.init_state(mesh, shape, area_correct=False)
        truth = sh.polygonize(shape, 4096)
        err = mt.shape_error(state, truth)
        assert math.isclose(err.E_r * truth.area, err.E_g, rel_tol=1e-12)

    def test_grouping_lattice_pairs(self):
        mesh = build_lattice(8)
        shape = sh.circle((0.5, 0.5), 0.2)
        state, _ = sh.init_state(mesh, shape, area_correct=False)
        truth = sh.polygonize(shape, 4096)
        cell = mt.shape_error(state, truth, grouping="cells").E_g
        tri = mt.shape_error(state, truth, grouping="triangles").E_g
        assert cell <= tri + 1e-15


class TestMassError:
    def test_fresh_state(self):
        mesh = build_lattice(16)
        state, _ = sh.init_state(mesh, sh.circle((0.5, 0.5), 0.15))
        A0 = state.total_liquid_area()
        assert mt.mass_error(state, A0) <= 1e-10

    def test_perturbed(self):
        mesh = build_lattice(4)
        state = InterfaceState(mesh)
        state.c[:] = 1
        A0 = state.total_liquid_area()
        state.c[0] = 0   # remove one triangle's worth of liquid
        tri_area = float(mesh.triangle_areas()[0])
        assert math.isclose(mt.mass_error(state, A0), tri_area / A0,
                            rel_tol=1e-12)


class TestConvergenceOrder:
    def test_exact_halving(self):
        orders, slope = mt.convergence_order([(0, 4.0), (1, 1.0)])
        assert orders == [2.0]
        assert math.isclose(slope, 2.0)

    def test_zero_error_reported_none(self):
        orders, slope = mt.convergence_order([(0, 1.0), (1, 0.0)])
        assert orders == [None]

    def test_requires_two(self):
        with pytest.raises(ValueError):
            mt.convergence_order([(0, 1.0)])


class TestCurvature:
    def test_circle_estimate(self):
        mesh = build_lattice(64)
        state, _ = sh.init_state(mesh, sh.circle((0.5, 0.5), 0.15),
                                 area_correct=False)
        samples, skipped = mt.curvature(state)
        assert len(samples) > 50
        kappas = np.array([abs(s.kappa) for s in samples])
        # bulk of estimates near 1/r = 6.67
        assert abs(np.median(kappas) - 1 / 0.15) / (1 / 0.15) < 0.2

    def test_straight_interface_zero(self):
        # collinear fit points must give zero curvature
        a, b, c = np.polyfit([0.0, 0.5, 1.0], [0.2, 0.2, 0.2], 2)
        kappa = 2 * a / (1 + (2 * a * 0.5 + b) ** 2) ** 1.5
        assert abs(kappa) < 1e-12

    def test_error_metric(self):
        mesh = build_lattice(48)
        state, _ = sh.init_state(mesh, sh.circle((0.5, 0.5), 0.15),
                                 area_correct=False)
        samples, _ = mt.curvature(state)
        ek = mt.curvature_error(samples, lambda p: 1 / 0.15)
        assert 0 < ek < 2.0


class TestComponents:
    def test_single_circle(self):
        mesh = build_lattice(32)
        state, _ = sh.init_state(mesh, sh.circle((0.5, 0.5), 0.15))
        assert mt.liquid_component_count(state) == 1

    def test_two_circles(self):
        mesh = build_lattice(64)
        state, _ = sh.init_state(mesh, sh.circle((0.25, 0.25), 0.1))
        other, _ = sh.init_state(mesh, sh.circle((0.75, 0.75), 0.1))
        # merge the two states (disjoint supports)
        mixed = other.c.astype(bool) | (other.liquid_fractions() > 0)
        state.c[mixed] = other.c[mixed]
        state.R[mixed] = other.R[mixed]
        state.vt[mixed] = other.vt[mixed]
        assert mt.liquid_component_count(state) == 2

    def test_empty(self):
        mesh = build_lattice(8)
        state = InterfaceState(mesh)
        assert mt.liquid_component_count(state) == 0

    def test_snake_two_components(self):
        mesh = build_lattice(64)
        state, _ = sh.init_state(mesh, sh.snake())
        assert mt.liquid_component_count(state) == 2
