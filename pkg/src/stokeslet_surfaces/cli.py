"""Command-line frontend: mesh generation, point evaluation, solves, studies.

Exit codes: 0 success, 2 usage error, 3 regularization below the
floating-point floor, 4 singular linear system, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys

import numpy as np

from . import reference as ref
from . import solver, studies
from .errors import (
    FloatingFloorError,
    MeshFormatError,
    SingularSystemError,
)
from .geometry import (
    make_box_mesh,
    make_icosphere,
    make_pipe_mesh,
    make_spheroid_mesh,
    mesh_stats,
    read_mesh,
    write_mesh,
)
from .kernel import KernelParams, epsilon_floor

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FLOOR = 3
EXIT_SINGULAR = 4
EXIT_IO = 5

THREADS_ENV = "STOKESLET_SURFACES_THREADS"


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _vec3(text):
    parts = _float_list(text)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z: {text!r}")
    return np.array(parts)


def parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="stokeslet-surfaces",
        description="Boundary-integral Stokes flow with analytically "
        "integrated regularized Stokeslets on triangle meshes.",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help=f"thread-count hint (default: ${THREADS_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_mesh_options(p):
        p.add_argument("--shape", choices=("icosphere", "spheroid", "box", "pipe"),
                       default="icosphere")
        p.add_argument("--f", type=int, default=4,
                       help="icosphere subdivision frequency")
        p.add_argument("--a", type=float, default=1.0, help="radius / z semi-axis")
        p.add_argument("--b", type=float, default=1.0, help="equatorial semi-axis")
        p.add_argument("--grading", type=float, default=0.0,
                       help="polar mesh grading strength (spheroid)")
        p.add_argument("--half-side", type=float, default=0.25, help="box half side")
        p.add_argument("--length", type=float, default=2.5, help="pipe half length")
        p.add_argument("--grid-h", type=float, default=0.1,
                       help="grid spacing for box/pipe walls")
        p.add_argument("--mesh-file", default=None,
                       help="read the mesh from a file instead of generating it")

    p_mesh = sub.add_parser("mesh", help="generate a mesh file")
    add_mesh_options(p_mesh)
    p_mesh.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a reference-traction flow field")
    add_mesh_options(p_eval)
    p_eval.add_argument("--traction", choices=("translate", "rotate"),
                        default="translate")
    p_eval.add_argument("--point", type=_vec3, action="append", default=None,
                        help="field point x,y,z (repeatable)")
    p_eval.add_argument("--eps", type=float, default=1e-4)
    p_eval.add_argument("--mu", type=float, default=1.0)
    p_eval.add_argument("--out", default=None, help="write x,y,z,ux,uy,uz CSV")

    p_solve = sub.add_parser("solve", help="resistance or swimmer solve")
    add_mesh_options(p_solve)
    p_solve.add_argument("--problem", choices=("drag", "torque", "squirmer"),
                         default="drag")
    p_solve.add_argument("--eps", type=float, default=1e-4)
    p_solve.add_argument("--mu", type=float, default=1.0)
    p_solve.add_argument("--out", default=None,
                         help="write per-vertex x,y,z,fx,fy,fz CSV")

    p_study = sub.add_parser("study", help="run a validation study")
    p_study.add_argument("--id", required=True, choices=studies.STUDY_IDS)
    p_study.add_argument("--f", type=_int_list, default=None,
                         help="comma-separated subdivision frequencies")
    p_study.add_argument("--eps", type=_float_list, default=None,
                         help="comma-separated regularizations")
    p_study.add_argument("--mu", type=float, default=1.0)
    p_study.add_argument("--a", type=float, default=None)
    p_study.add_argument("--b", type=float, default=None)
    p_study.add_argument("--grading", type=_float_list, default=None)
    p_study.add_argument("--h-cube", type=_float_list, default=None)
    p_study.add_argument("--eps-over-h", type=_float_list, default=None)
    p_study.add_argument("--nterms", type=int, default=50)
    p_study.add_argument("--out", default=None, help="write the report CSV")

    config = parser.parse_args(argv)
    if config.command == "study":
        if config.eps is not None and len(config.eps) == 0:
            parser.error("--eps must be non-empty")
        if config.f is not None and len(config.f) == 0:
            parser.error("--f must be non-empty")
    return config


def _build_mesh(config):
    if config.mesh_file:
        return read_mesh(config.mesh_file)
    if config.shape == "icosphere":
        return make_icosphere(config.f, radius=config.a)
    if config.shape == "spheroid":
        return make_spheroid_mesh(config.f, config.a, config.b,
                                  grading=config.grading)
    if config.shape == "box":
        return make_box_mesh((0.0, 0.0, 0.0), config.half_side, config.grid_h)
    return make_pipe_mesh(config.length, config.a, config.b, config.grid_h)


def _check_floor(mesh, eps):
    floor = epsilon_floor(mesh)
    if eps <= floor:
        raise FloatingFloorError(
            f"eps = {eps:g} violates the floor rule eps^2 > ulp(Lmax): "
            f"requires eps > {floor:g} for this mesh"
        )


def _thread_hint(config):
    count = config.threads
    if count is None:
        raw = os.environ.get(THREADS_ENV)
        count = int(raw) if raw and raw.isdigit() else None
    if count is None:
        return contextlib.nullcontext()
    try:
        import threadpoolctl

        return threadpoolctl.threadpool_limits(limits=count)
    except ImportError:
        return contextlib.nullcontext()


def _run_mesh(config):
    mesh = _build_mesh(config)
    stats = mesh_stats(mesh)
    write_mesh(mesh, config.out)
    print(f"mesh {config.shape} vertices={mesh.num_vertices} "
          f"faces={mesh.num_faces} h={stats.h:.6g} -> {config.out}")
    return EXIT_OK


def _sphere_tractions(mesh, config):
    if config.traction == "translate":
        t, _ = ref.sphere_translation_reference(
            config.a * np.array([1.0, 0, 0]), config.a, [1.0, 0, 0], config.mu
        )
        return np.tile(t, (mesh.num_vertices, 1))
    return np.array(
        [
            ref.sphere_rotation_reference(v, config.a, [0, 0, 1.0], config.mu)[0]
            for v in mesh.vertices
        ]
    )


def _run_eval(config):
    mesh = _build_mesh(config)
    _check_floor(mesh, config.eps)
    params = KernelParams(eps=config.eps, mu=config.mu)
    points = np.array(config.point) if config.point else mesh.vertices
    forces = _sphere_tractions(mesh, config)
    u = solver.evaluate_velocity(mesh, forces, points, params)
    for p, v in zip(points, u):
        print(f"u({p[0]:g},{p[1]:g},{p[2]:g}) = ({v[0]:.9g}, {v[1]:.9g}, {v[2]:.9g})")
    if config.out:
        studies.write_field_csv(config.out, points, u)
    return EXIT_OK


def _run_solve(config):
    mesh = _build_mesh(config)
    _check_floor(mesh, config.eps)
    params = KernelParams(eps=config.eps, mu=config.mu)
    if config.problem == "squirmer":
        r = np.linalg.norm(mesh.vertices, axis=1)
        theta = np.arccos(np.clip(mesh.vertices[:, 2] / r, -1, 1))
        phi = np.arctan2(mesh.vertices[:, 1], mesh.vertices[:, 0])
        slip = np.array(
            [ref.squirmer_slip(t, p) for t, p in zip(theta, phi)]
        )
        sol = solver.solve_swimmer(mesh, slip, params, center=np.zeros(3))
        forces = sol.forces
        print(f"squirmer U = ({sol.U[0]:.6g}, {sol.U[1]:.6g}, {sol.U[2]:.6g}) "
              f"Omega = ({sol.Omega[0]:.6g}, {sol.Omega[1]:.6g}, {sol.Omega[2]:.6g})")
    else:
        if config.problem == "drag":
            bc = np.tile([1.0, 0.0, 0.0], (mesh.num_vertices, 1))
        else:
            bc = np.cross([0.0, 0.0, 1.0], mesh.vertices)
        forces = solver.solve_resistance(mesh, bc, params)
        drag = -solver.net_force(mesh, forces)
        torque = -solver.net_torque(mesh, forces, center=np.zeros(3))
        print(f"drag = ({drag[0]:.6g}, {drag[1]:.6g}, {drag[2]:.6g}) "
              f"torque = ({torque[0]:.6g}, {torque[1]:.6g}, {torque[2]:.6g})")
    if config.out:
        studies.write_field_csv(config.out, mesh.vertices, forces)
    return EXIT_OK


def _run_study(config):
    params = {"mu": config.mu, "nterms": config.nterms}
    if config.f is not None:
        params["f_values"] = config.f
        params["f"] = config.f[0]
    if config.eps is not None:
        params["eps_values"] = config.eps
    if config.a is not None:
        params["a"] = config.a
    if config.b is not None:
        params["b"] = config.b
    if config.grading is not None:
        params["grading_values"] = config.grading
    if config.h_cube is not None:
        params["h_cube_values"] = config.h_cube
    if config.eps_over_h is not None:
        params["eps_over_h"] = config.eps_over_h
    # validate the floor up front for mesh/eps grids on sphere-based studies
    if config.eps is not None and config.f is not None and config.id != "pipe-leak":
        for f in config.f:
            mesh = make_icosphere(f, radius=params.get("a", 1.0))
            for eps in config.eps:
                _check_floor(mesh, eps)
    report = studies.run_study(config.id, params)
    for line in report.summary_lines():
        print(line)
    if config.out:
        studies.write_report_csv(report, config.out)
        print(f"report -> {config.out}")
    return EXIT_OK


def run(config) -> int:
    with _thread_hint(config):
        if config.command == "mesh":
            return _run_mesh(config)
        if config.command == "eval":
            return _run_eval(config)
        if config.command == "solve":
            return _run_solve(config)
        return _run_study(config)


def main(argv=None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return run(config)
    except FloatingFloorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLOOR
    except SingularSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (OSError, MeshFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
