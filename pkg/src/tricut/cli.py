"""Benchmark harness: configure a mesh, shape, and velocity field, run
the advection loop, and emit CSV metrics, SVG interface renderings,
binary state dumps, and a reproducibility manifest.

Commands
--------
static-recon   reconstruct a shape on a mesh and report its errors
vortex         swirling-flow stretch-and-return test on the unit square
zalesak        rotating notched disk (config A or B)
deform         multi-vortex deformation test on the unit square
convergence    run one of the above across resolutions and report orders
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import edgecut as ec
from . import flow as fl
from . import metrics as mt
from . import shapes as sh
from .advect import InterfaceState, advect_step
from .mesh import TriMesh, build_lattice, import_mesh

STATE_MAGIC = b"TEC2"
STATE_VERSION = 1


# ---------------------------------------------------------------------------
# state serialization

def dump_state(state: InterfaceState, path):
    """Binary dump: magic, version, triangle count, then one packed
    6-real record per triangle."""
    nt = state.mesh.n_triangles
    rec = np.empty((nt, 6))
    for tid in range(nt):
        rec[tid] = ec.pack(state.get_cut(tid))
    with open(path, "wb") as f:
        f.write(STATE_MAGIC)
        f.write(struct.pack("<IQ", STATE_VERSION, nt))
        f.write(rec.tobytes())


def load_state(mesh: TriMesh, path) -> InterfaceState:
    """Inverse of dump_state for a state on the given mesh."""
    raw = Path(path).read_bytes()
    if raw[:4] != STATE_MAGIC:
        raise ValueError(f"{path}: bad magic")
    version, nt = struct.unpack("<IQ", raw[4:16])
    if version != STATE_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if nt != mesh.n_triangles:
        raise ValueError(f"{path}: triangle count {nt} does not match mesh")
    rec = np.frombuffer(raw[16:16 + nt * 48]).reshape(nt, 6)
    state = InterfaceState(mesh)
    for tid in range(nt):
        state.set_cut(tid, ec.unpack(rec[tid]))
    return state


# ---------------------------------------------------------------------------
# SVG rendering

def render_svg(state: InterfaceState, path, wireframe=False, size=640):
    """Liquid region (filled polygons) plus interface segments."""
    mesh = state.mesh
    (x0, y0), (x1, y1) = mesh.bbox_min, mesh.bbox_max
    w, h = x1 - x0, y1 - y0
    scale = size / max(w, h)

    def pt(p):
        return f"{(p[0] - x0) * scale:.2f},{(y1 - p[1]) * scale:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" '
           f'width="{w * scale:.0f}" height="{h * scale:.0f}">',
           f'<rect width="100%" height="100%" fill="white"/>']
    fills = []
    lines = []
    wires = []
    for tid in range(mesh.n_triangles):
        cut = state.get_cut(tid)
        tri = mesh.triangle_coords(tid)
        if wireframe:
            wires.append(f'<polygon points="{" ".join(pt(v) for v in tri)}" '
                         'fill="none" stroke="#ccc" stroke-width="0.5"/>')
        if sum(cut.t) == 0:
            if cut.c == 1:
                fills.append(
                    f'<polygon points="{" ".join(pt(v) for v in tri)}" '
                    'fill="#9ecbff" stroke="none"/>')
            continue
        recon = ec.reconstruct(cut, tri)
        for poly in recon.liquid:
            fills.append(
                f'<polygon points="{" ".join(pt(v) for v in poly.vertices)}" '
                'fill="#9ecbff" stroke="none"/>')
        for seg in ec.interior_segments(cut, tri):
            lines.append(f'<line x1="{pt(seg.a).split(",")[0]}" '
                         f'y1="{pt(seg.a).split(",")[1]}" '
                         f'x2="{pt(seg.b).split(",")[0]}" '
                         f'y2="{pt(seg.b).split(",")[1]}" '
                         'stroke="#003366" stroke-width="1.2"/>')
    out += fills + wires + lines + ["</svg>"]
    Path(path).write_text("\n".join(out))


# ---------------------------------------------------------------------------
# configuration helpers

def _make_shape(args):
    name = args.shape.replace("-", "_")
    if name == "circle":
        return sh.circle(tuple(args.center), args.radius)
    if name == "snake":
        return sh.snake()
    if name == "heart":
        return sh.heart()
    if name == "notched_disk":
        return sh.notched_disk()
    raise SystemExit(f"unknown shape: {args.shape}")


def _make_mesh(args, domain=((0.0, 0.0), (1.0, 1.0))):
    if getattr(args, "mesh", None):
        node, ele = args.mesh
        return import_mesh(Path(node).read_text(), Path(ele).read_text())
    if getattr(args, "n", None):
        return build_lattice(args.n, domain=domain)
    raise SystemExit("need either --n or --mesh NODE ELE")


def _outdir(args):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(outdir, args, extra=None):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["version"] = __version__
    cfg["argv"] = sys.argv[1:]
    if extra:
        cfg.update(extra)
    (outdir / "manifest.json").write_text(json.dumps(cfg, indent=2,
                                                     default=str) + "\n")


def _metrics_writer(outdir):
    f = open(outdir / "metrics.csv", "w", newline="")
    w = csv.writer(f)
    w.writerow(["step", "time", "E_m", "E_g", "E_r", "failed_triangles"])
    return f, w


# ---------------------------------------------------------------------------
# benchmark drivers

def _run_dynamic(args, mesh, shape, field, tmax):
    """Shared advection loop: writes metrics.csv, snapshots, manifest."""
    outdir = _outdir(args)
    state, events = sh.init_state(mesh, shape,
                                  area_correct=not args.no_area_correct)
    truth = sh.polygonize(shape, 4096)
    A0 = state.total_liquid_area()
    dt = fl.timestep(field, mesh, args.cr)
    nsteps = max(1, round(tmax / dt))
    snap_times = sorted(set(float(s) * tmax for s in args.snapshots))

    f, w = _metrics_writer(outdir)
    err0 = mt.shape_error(state, truth, A0=A0)
    w.writerow([0, "0", f"{0.0:.3e}", f"{err0.E_g:.6e}", f"{err0.E_r:.6e}",
                0])
    render_svg(state, outdir / "interface_0.svg", wireframe=args.wireframe)
    dump_state(state, outdir / "state_0.bin")

    snap_idx = {max(1, round(t / dt)) for t in snap_times if t > 0}
    for k in range(nsteps):
        state, rep = advect_step(state, field, dt, seed=args.seed,
                                 step_index=k)
        step = k + 1
        A = state.total_liquid_area()
        E_m = abs(A - A0) / A0
        if step == nsteps:
            err = mt.shape_error(state, truth, A0=A0)
            eg, er = f"{err.E_g:.6e}", f"{err.E_r:.6e}"
        else:
            eg = er = "nan"
        w.writerow([step, f"{state.time:.6g}", f"{E_m:.6e}", eg, er,
                    rep.n_failed])
        if step in snap_idx or step == nsteps:
            tag = f"{state.time:.6g}"
            render_svg(state, outdir / f"interface_{tag}.svg",
                       wireframe=args.wireframe)
            dump_state(state, outdir / f"state_{tag}.bin")
    f.close()
    _write_manifest(outdir, args, {"dt": dt, "nsteps": nsteps, "A0": A0})
    err = mt.shape_error(state, truth, A0=A0)
    print(f"final: t={state.time:.6g} E_g={err.E_g:.6e} "
          f"E_r={err.E_r:.6e} E_m={abs(state.total_liquid_area() - A0) / A0:.3e}")
    return 0


def cmd_static_recon(args):
    mesh = _make_mesh(args)
    shape = _make_shape(args)
    outdir = _outdir(args)
    state, events = sh.init_state(mesh, shape,
                                  area_correct=not args.no_area_correct)
    truth = sh.polygonize(shape, 4096)
    A0 = float(sh.exact_cell_area(
        truth, np.array([[mesh.bbox_min[0], mesh.bbox_min[1]],
                         [mesh.bbox_max[0], mesh.bbox_min[1]],
                         [mesh.bbox_max[0], mesh.bbox_max[1]],
                         [mesh.bbox_min[0], mesh.bbox_max[1]]])))
    err = mt.shape_error(state, truth, A0=A0)
    E_m = abs(state.total_liquid_area() - A0) / A0
    f, w = _metrics_writer(outdir)
    w.writerow([0, "0", f"{E_m:.6e}", f"{err.E_g:.6e}", f"{err.E_r:.6e}", 0])
    f.close()
    render_svg(state, outdir / "interface_0.svg", wireframe=args.wireframe)
    dump_state(state, outdir / "state_0.bin")
    _write_manifest(outdir, args, {"A0": A0})
    print(f"E_g={err.E_g:.6e} E_r={err.E_r:.6e} E_m={E_m:.3e}")
    return 0


def cmd_vortex(args):
    mesh = _make_mesh(args)
    shape = sh.circle((0.5, 0.75), 0.15)
    field = fl.single_vortex(T=args.period)
    return _run_dynamic(args, mesh, shape, field, args.period)


def cmd_zalesak(args):
    if args.config == "A":
        domain = ((0.0, 0.0), (4.0, 4.0))
        shape = sh.notched_disk(center=(2.0, 2.75), disk_radius=0.5,
                                slot_width=0.06, bridge=0.4)
        field = fl.rigid_rotation((2.0, 2.0), 0.5)
    else:
        domain = ((-0.5, -0.5), (0.5, 0.5))
        shape = sh.notched_disk(center=(0.0, 0.25), disk_radius=0.15,
                                slot_width=0.05, bridge=0.05)
        field = fl.rigid_rotation((0.0, 0.0), 0.5)
    mesh = _make_mesh(args, domain=domain)
    return _run_dynamic(args, mesh, shape, field, 4.0 * math.pi)


def cmd_deform(args):
    mesh = _make_mesh(args)
    shape = sh.circle((0.5, 0.5), args.radius)
    field = fl.deformation(T=args.period, n=args.nvortex)
    return _run_dynamic(args, mesh, shape, field, args.period)


def cmd_convergence(args):
    outdir = _outdir(args)
    levels = [int(v) for v in args.levels.split(",")]
    shape = _make_shape(args) if args.test == "static-recon" else None
    rows = []
    for n in levels:
        if args.test == "static-recon":
            mesh = build_lattice(n)
            state, _ = sh.init_state(mesh, shape, area_correct=False)
            truth = sh.polygonize(shape, 4096)
            E = mt.shape_error(state, truth).E_g
        elif args.test == "vortex":
            mesh = build_lattice(n)
            s = sh.circle((0.5, 0.75), 0.15)
            field = fl.single_vortex(T=8.0)
            state, _ = sh.init_state(mesh, s)
            dt = fl.timestep(field, mesh, args.cr)
            for k in range(round(8.0 / dt)):
                state, _ = advect_step(state, field, dt, seed=args.seed,
                                       step_index=k)
            E = mt.shape_error(state, sh.polygonize(s, 4096)).E_g
        elif args.test == "deform":
            mesh = build_lattice(n)
            s = sh.circle((0.5, 0.5), 0.15)
            field = fl.deformation(T=2.0, n=4)
            state, _ = sh.init_state(mesh, s)
            dt = fl.timestep(field, mesh, args.cr)
            for k in range(round(2.0 / dt)):
                state, _ = advect_step(state, field, dt, seed=args.seed,
                                       step_index=k)
            E = mt.shape_error(state, sh.polygonize(s, 4096)).E_g
        else:
            raise SystemExit(f"unknown test: {args.test}")
        rows.append((n, E))
        print(f"n={n}  E={E:.6e}", flush=True)
    orders, slope = mt.convergence_order([(math.log2(n), e) for n, e in rows])
    with open(outdir / "convergence.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "E", "order"])
        for i, (n, e) in enumerate(rows):
            o = "" if i == 0 or orders[i - 1] is None else f"{orders[i - 1]:.3f}"
            w.writerow([n, f"{e:.6e}", o])
        w.writerow(["slope", f"{slope:.3f}", ""])
    print(f"least-squares slope: {slope:.3f}")
    _write_manifest(outdir, args)
    return 0


# ---------------------------------------------------------------------------

def _add_common(p, with_dynamics=True):
    p.add_argument("--n", type=int, help="lattice resolution")
    p.add_argument("--mesh", nargs=2, metavar=("NODE", "ELE"),
                   help="unstructured mesh file pair")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wireframe", action="store_true",
                   help="draw the mesh in SVG output")
    p.add_argument("--no-area-correct", action="store_true",
                   help="skip the initialization area correction")
    if with_dynamics:
        p.add_argument("--cr", type=float, default=1.0,
                       help="Courant number")
        p.add_argument("--snapshots", default="0.25,0.5,0.75,1",
                       help="snapshot times as fractions of the run length")


def main(argv=None):
    ap = argparse.ArgumentParser(prog="tricut",
                                 description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("static-recon", help="static shape reconstruction")
    _add_common(p, with_dynamics=False)
    p.add_argument("--shape", default="circle",
                   choices=["circle", "snake", "heart", "notched-disk"])
    p.add_argument("--center", type=float, nargs=2, default=[0.5, 0.5])
    p.add_argument("--radius", type=float, default=0.15)
    p.set_defaults(func=cmd_static_recon)

    p = sub.add_parser("vortex", help="swirling stretch-and-return test")
    _add_common(p)
    p.add_argument("--period", type=float, default=8.0)
    p.set_defaults(func=cmd_vortex)

    p = sub.add_parser("zalesak", help="rotating notched disk")
    _add_common(p)
    p.add_argument("--config", default="A", choices=["A", "B"])
    p.set_defaults(func=cmd_zalesak)

    p = sub.add_parser("deform", help="multi-vortex deformation test")
    _add_common(p)
    p.add_argument("--period", type=float, default=2.0)
    p.add_argument("--nvortex", type=int, default=4)
    p.add_argument("--radius", type=float, default=0.15)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("convergence", help="resolution sweep with orders")
    _add_common(p)
    p.add_argument("--test", default="static-recon",
                   choices=["static-recon", "vortex", "deform"])
    p.add_argument("--shape", default="circle",
                   choices=["circle", "snake", "heart", "notched-disk"])
    p.add_argument("--center", type=float, nargs=2, default=[0.5, 0.5])
    p.add_argument("--radius", type=float, default=0.15)
    p.add_argument("--levels", default="8,16,32,64",
                   help="comma-separated lattice resolutions")
    p.set_defaults(func=cmd_convergence)

    args = ap.parse_args(argv)
    if getattr(args, "snapshots", None) is not None and \
            isinstance(args.snapshots, str):
        args.snapshots = [float(s) for s in args.snapshots.split(",") if s]
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
