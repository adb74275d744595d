"""Advection pipeline: jit kernel vs the plain Python reference route,
determinism, and basic transport accuracy."""

import math

import numpy as np
import pytest

from tricut import advect as av
from tricut import flow as fl
from tricut import metrics as mt
from tricut import shapes as sh
from tricut.advect import InterfaceState, advect_simple, advect_step, \
    correction_target, material_query, preimage_triangle
from tricut.edgecut import EdgeCut
from tricut.mesh import build_lattice


def circle_state(n=32, center=(0.5, 0.5), r=0.15):
    mesh = build_lattice(n)
    state, _ = sh.init_state(mesh, sh.circle(center, r))
    return state


class TestPreimage:
    def test_zero_field_identity(self):
        state = circle_state(8)
        f = fl.zero_field()
        tri = state.mesh.triangle_coords(3)
        pre = preimage_triangle(state.mesh, 3, f, 0.0, 0.1)
        # perturbation is tiny: pre-image matches the triangle closely
        assert np.abs(pre - tri).max() < 1e-8

    def test_translation_shift(self):
        state = circle_state(8)
        f = fl.uniform_translation(1.0, 0.0)
        tri = state.mesh.triangle_coords(3)
        pre = preimage_triangle(state.mesh, 3, f, 0.0, 0.25)
        assert np.abs(pre[:, 0] - (tri[:, 0] - 0.25)).max() < 1e-8

    def test_bad_dt(self):
        state = circle_state(8)
        with pytest.raises(ValueError):
            preimage_triangle(state.mesh, 0, fl.zero_field(), 0.0, 0.0)


class TestMaterialQuery:
    def test_inside_outside(self):
        state = circle_state(32)
        assert material_query(state, (0.5, 0.5)) == 1
        assert material_query(state, (0.9, 0.9)) == 0
        assert material_query(state, (2.0, 2.0)) == 0  # off the mesh


class TestKernelVsReference:
    def test_f1_targets_match(self):
        """Kernel correction targets equal brute-force clipping."""
        state = circle_state(16)
        f = fl.uniform_translation(0.5, 0.25)
        dt = 0.02
        new, rep = advect_step(state, f, dt, seed=3, step_index=0)
        checked = 0
        for tid in range(state.mesh.n_triangles):
            cut = new.get_cut(tid)
            if sum(cut.t) == 0:
                continue
            pre = preimage_triangle(state.mesh, tid, f, state.time, dt,
                                    seed=3, step_index=0)
            f1_ref, _ = correction_target(state, tid, pre)
            _, f1_new = __import__("tricut.edgecut", fromlist=["x"]) \
                .area_fractions(cut)
            assert abs(f1_new - f1_ref) < 1e-9
            checked += 1
        assert checked > 10

    def test_simple_route_cut_pattern(self):
        """The reference single-triangle route reproduces the kernel's
        cut counts and materials (it skips the area correction, so cut
        positions may differ slightly)."""
        state = circle_state(16)
        f = fl.rigid_rotation((0.5, 0.5), 1.0)
        dt = 0.02
        new, _ = advect_step(state, f, dt, seed=1, step_index=0)
        rng = np.random.default_rng(0)
        mixed = [t for t in range(state.mesh.n_triangles)
                 if sum(new.get_cut(t).t) > 0]
        for tid in rng.choice(mixed, size=min(12, len(mixed)),
                              replace=False):
            ref = advect_simple(state, int(tid), f, dt, seed=1, step_index=0)
            got = new.get_cut(int(tid))
            assert ref.c == got.c
            assert ref.t == got.t


class TestStep:
    def test_zero_dt_rejected(self):
        state = circle_state(8)
        with pytest.raises(ValueError):
            advect_step(state, fl.zero_field(), 0.0)

    def test_determinism(self):
        state = circle_state(32)
        f = fl.single_vortex(T=8.0)
        a, _ = advect_step(state, f, 0.01, seed=5, step_index=0)
        b, _ = advect_step(state, f, 0.01, seed=5, step_index=0)
        assert np.array_equal(a.c, b.c)
        assert np.array_equal(a.R, b.R)
        assert np.array_equal(a.vt, b.vt, equal_nan=True)

    def test_seed_changes_jitter(self):
        state = circle_state(32)
        f = fl.single_vortex(T=8.0)
        a, _ = advect_step(state, f, 0.01, seed=5, step_index=0)
        b, _ = advect_step(state, f, 0.01, seed=6, step_index=0)
        # same macroscopic result, microscopically distinct
        assert np.array_equal(a.c, b.c)
        assert not np.array_equal(a.R, b.R)

    def test_time_advances(self):
        state = circle_state(8)
        new, _ = advect_step(state, fl.uniform_translation(1e-3, 0.0), 0.25)
        assert math.isclose(new.time, 0.25)

    def test_translation_transport(self):
        mesh = build_lattice(64)
        state, _ = sh.init_state(mesh, sh.circle((0.3, 0.5), 0.15))
        f = fl.uniform_translation(1.0, 0.0)
        dt = 1.0 / 128
        for k in range(int(0.4 / dt)):
            state, _ = advect_step(state, f, dt, seed=0, step_index=k)
        truth = sh.polygonize(sh.circle((0.7, 0.5), 0.15), 4096)
        err = mt.shape_error(state, truth)
        assert err.E_g < 2e-3

    def test_rotation_round_trip(self):
        mesh = build_lattice(48)
        shape = sh.circle((0.5, 0.7), 0.15)
        state, _ = sh.init_state(mesh, shape)
        f = fl.rigid_rotation((0.5, 0.5), 1.0)
        dt = fl.timestep(f, mesh, 1.0)
        n = round(f.period / dt)
        for k in range(n):
            state, _ = advect_step(state, f, dt, seed=0, step_index=k)
        truth = sh.polygonize(shape, 4096)
        err = mt.shape_error(state, truth)
        assert err.E_g < 1e-3

    def test_rigid_motion_mass_conservation(self):
        mesh = build_lattice(48)
        state, _ = sh.init_state(mesh, sh.circle((0.5, 0.7), 0.15))
        A0 = state.total_liquid_area()
        f = fl.rigid_rotation((0.5, 0.5), 1.0)
        dt = fl.timestep(f, mesh, 1.0)
        for k in range(40):
            state, rep = advect_step(state, f, dt, seed=0, step_index=k)
            assert rep.n_failed == 0
        assert abs(state.total_liquid_area() - A0) / A0 < 1e-9


class TestState:
    def test_copy_independent(self):
        state = circle_state(8)
        cp = state.copy()
        cp.c[:] = 0
        assert state.c.max() == 1

    def test_get_set_cut(self):
        state = circle_state(8)
        cut = EdgeCut(1, np.array([[0.25, 1.0], [0.0, 1.0], [0.4, 1.0]]))
        state.set_cut(2, cut)
        assert state.get_cut(2) == cut

    def test_fraction_bounds(self):
        state = circle_state(16)
        fr = state.liquid_fractions()
        assert fr.min() >= 0.0 and fr.max() <= 1.0
