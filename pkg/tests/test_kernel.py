import numpy as np
import pytest

from stokeslet_surfaces import (
    FloatingFloorError,
    KernelParams,
    SegmentBasis,
    boundary_ab,
    epsilon_floor,
    make_icosphere,
    point_stokeslet,
    segment_base,
    segment_recurse,
    t001,
    t003,
    t_table,
    triangle_frame,
    triangle_net_force,
    triangle_net_torque,
    triangle_velocity,
)
from stokeslet_surfaces.kernel import _velocity_blocks

import oracles

T_KEYS = [
    (0, 0, 1), (0, 0, 3), (1, 0, 1), (1, 0, 3), (0, 1, 1), (0, 1, 3),
    (2, 0, 3), (1, 1, 3), (0, 2, 3), (3, 0, 3), (2, 1, 3), (1, 2, 3), (0, 3, 3),
]


def test_point_stokeslet_structure():
    params = KernelParams(eps=0.1, mu=2.0)
    S = point_stokeslet([1.0, 2.0, 3.0], [0.5, 0.5, 0.5], params)
    assert np.allclose(S, S.T)
    # coincident points stay finite thanks to the regularization
    S0 = point_stokeslet([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], params)
    assert np.allclose(S0, 2.0 / 0.1 * np.eye(3))


@pytest.mark.parametrize("seed", range(5))
def test_segment_base_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    a, b, xf = rng.normal(size=(3, 3))
    eps = 10 ** rng.uniform(-2, 0)
    s0m1, s0p1 = segment_base(xf, a, b, eps)
    assert s0m1 == pytest.approx(
        oracles.segment_integral_quadrature(xf, a, b, eps, 0, -1), rel=1e-10
    )
    assert s0p1 == pytest.approx(
        oracles.segment_integral_quadrature(xf, a, b, eps, 0, 1), rel=1e-10
    )


@pytest.mark.parametrize("seed", range(5))
def test_segment_recurse_matches_quadrature(seed):
    rng = np.random.default_rng(100 + seed)
    a, b, xf = rng.normal(size=(3, 3))
    eps = 10 ** rng.uniform(-2, 0)
    basis = SegmentBasis(direction="e1")
    basis.s[(0, -1)], basis.s[(0, 1)] = segment_base(xf, a, b, eps)
    segment_recurse(basis, xf, a, b, eps, with_s1m1=True)
    for (m, q) in [(1, 1), (2, 1), (1, -1)]:
        ref = oracles.segment_integral_quadrature(xf, a, b, eps, m, q)
        assert basis.s[(m, q)] == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_segment_base_near_collinear_field_point():
    # field point close to the segment's carrier line: stable log/arctanh path
    a = np.array([0.0, 0.0, 0.0])
    b = np.array([1.0, 0.0, 0.0])
    xf = np.array([1.7, 1e-9, 0.0])
    eps = 1e-2
    s0m1, s0p1 = segment_base(xf, a, b, eps)
    assert np.isfinite(s0m1) and np.isfinite(s0p1)
    assert s0m1 == pytest.approx(
        oracles.segment_integral_quadrature(xf, a, b, eps, 0, -1), rel=1e-9
    )
    assert s0p1 == pytest.approx(
        oracles.segment_integral_quadrature(xf, a, b, eps, 0, 1), rel=1e-9
    )


def _side_bases(frame, xf, eps):
    sides = {
        "e1": (frame.y0, frame.y1),
        "e2": (frame.y1, frame.y2),
        "d": (frame.y2, frame.y0),
    }
    bases = {}
    for name, (a, b) in sides.items():
        basis = SegmentBasis(direction=name)
        basis.s[(0, -1)], basis.s[(0, 1)] = segment_base(xf, a, b, eps)
        segment_recurse(basis, xf, a, b, eps)
        bases[name] = basis
    return bases


@pytest.mark.parametrize("seed", range(3))
def test_boundary_ab_matches_direct_combination(seed):
    # A and B are alternating-binomial combinations of per-side integrals
    rng = np.random.default_rng(200 + seed)
    frame, xf, _, eps = oracles.random_triangle_case(rng)
    bases = _side_bases(frame, xf, eps)
    import math

    for (m, n) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        A, B = boundary_ab(m, n, 1, bases)
        dsum = sum(
            math.comb(m + n, k) * (-1) ** k * bases["d"].s[(k, 1)]
            for k in range(m + n + 1)
        )
        assert A == pytest.approx(bases["e2"].s[(n, 1)] - dsum, rel=1e-12, abs=1e-14)
        if n == 0:
            expected = -bases["e1"].s[(m, 1)] + sum(
                math.comb(m, k) * (-1) ** k * bases["d"].s[(k, 1)]
                for k in range(m + 1)
            )
        else:
            expected = dsum
        assert B == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_boundary_ab_rejects_bad_indices():
    rng = np.random.default_rng(0)
    frame, xf, _, eps = oracles.random_triangle_case(rng)
    bases = _side_bases(frame, xf, eps)
    with pytest.raises(ValueError):
        boundary_ab(0, 0, 2, bases)
    with pytest.raises(ValueError):
        boundary_ab(3, 1, 1, bases)


@pytest.mark.parametrize("seed", range(4))
def test_t003_t001_match_quadrature(seed):
    rng = np.random.default_rng(300 + seed)
    frame, xf, _, eps = oracles.random_triangle_case(rng)
    v3 = t003(xf, frame, eps)
    assert v3 == pytest.approx(
        oracles.t_integral_quadrature(xf, frame, eps, 0, 0, 3), rel=1e-9
    )
    v1 = t001(xf, frame, eps, v3)
    assert v1 == pytest.approx(
        oracles.t_integral_quadrature(xf, frame, eps, 0, 0, 1), rel=1e-9
    )


def test_t003_in_plane_point():
    # field point in the plane of the triangle, near the centroid
    frame = triangle_frame([0.0, 0, 0], [1.0, 0, 0], [0.3, 0.9, 0])
    xf = np.array([0.41, 0.33, 0.0])
    eps = 0.05
    got = t003(xf, frame, eps)
    assert got == pytest.approx(
        oracles.t_integral_quadrature(xf, frame, eps, 0, 0, 3), rel=1e-8
    )


def test_t003_far_field_limit():
    frame = triangle_frame([0.0, 0, 0], [0.1, 0, 0], [0.0, 0.1, 0])
    centroid = np.array([0.1 / 3, 0.1 / 3, 0.0])
    xf = centroid + np.array([0.0, 0.0, 50.0])
    d = np.linalg.norm(xf - centroid)
    # the parameter-space integral tends to (1/2) / d^3 at large distance
    assert t003(xf, frame, 1e-3) == pytest.approx(0.5 / d**3, rel=1e-4)


@pytest.mark.parametrize("seed", range(6))
def test_t_table_matches_quadrature(seed):
    rng = np.random.default_rng(400 + seed)
    frame, xf, _, eps = oracles.random_triangle_case(rng)
    table = t_table(xf, frame, eps)
    for key in T_KEYS:
        ref = oracles.t_integral_quadrature(xf, frame, eps, *key)
        assert table[key] == pytest.approx(ref, rel=1e-9), key


@pytest.mark.parametrize("seed", range(4))
def test_triangle_velocity_matches_quadrature(seed):
    rng = np.random.default_rng(500 + seed)
    frame, xf, forces, eps = oracles.random_triangle_case(rng)
    mu = 1.0 + rng.random()
    u = triangle_velocity(xf, frame, *forces, KernelParams(eps=eps, mu=mu))
    ref = oracles.triangle_velocity_quadrature(xf, frame, *forces, eps, mu)
    assert np.allclose(u, ref, rtol=1e-9, atol=1e-13)


def test_triangle_velocity_self_point_finite():
    # collocation on the triangle itself with a small regularization
    frame = triangle_frame([0, 0, 0], [0.01, 0, 0], [0.004, 0.008, 0.0])
    xf = (frame.y0 + frame.y1 + frame.y2) / 3.0
    forces = np.ones((3, 3))
    u = triangle_velocity(xf, frame, *forces, KernelParams(eps=1e-5))
    assert np.all(np.isfinite(u))


def test_triangle_velocity_linearity():
    rng = np.random.default_rng(42)
    frame, xf, forces, eps = oracles.random_triangle_case(rng)
    params = KernelParams(eps=eps)
    other = rng.normal(size=(3, 3))
    u1 = triangle_velocity(xf, frame, *forces, params)
    u2 = triangle_velocity(xf, frame, *other, params)
    u12 = triangle_velocity(xf, frame, *(2.5 * forces - other), params)
    assert np.allclose(u12, 2.5 * u1 - u2, rtol=1e-11, atol=1e-14)


def test_triangle_velocity_vertex_relabel_invariance():
    rng = np.random.default_rng(7)
    verts = rng.normal(size=(3, 3))
    forces = rng.normal(size=(3, 3))
    xf = rng.normal(size=3)
    params = KernelParams(eps=0.05)
    u0 = triangle_velocity(xf, triangle_frame(*verts), *forces, params)
    cycled_v = np.roll(verts, -1, axis=0)
    cycled_f = np.roll(forces, -1, axis=0)
    u1 = triangle_velocity(xf, triangle_frame(*cycled_v), *cycled_f, params)
    assert np.allclose(u0, u1, rtol=1e-10, atol=1e-13)


def test_triangle_velocity_rigid_motion_equivariance():
    rng = np.random.default_rng(8)
    verts = rng.normal(size=(3, 3))
    forces = rng.normal(size=(3, 3))
    xf = rng.normal(size=3)
    params = KernelParams(eps=0.07)
    # random rotation via QR, det fixed to +1
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    t = rng.normal(size=3)
    u = triangle_velocity(xf, triangle_frame(*verts), *forces, params)
    u_rot = triangle_velocity(
        Q @ xf + t, triangle_frame(*(verts @ Q.T + t)), *(forces @ Q.T), params
    )
    assert np.allclose(u_rot, Q @ u, rtol=1e-10, atol=1e-13)


def test_velocity_blocks_match_triangle_velocity():
    rng = np.random.default_rng(9)
    frame, xf, forces, eps = oracles.random_triangle_case(rng)
    params = KernelParams(eps=eps, mu=1.7)
    M0, M1, M2 = _velocity_blocks(xf[None, :], frame, params)
    via_blocks = M0[0] @ forces[0] + M1[0] @ forces[1] + M2[0] @ forces[2]
    direct = triangle_velocity(xf, frame, *forces, params)
    assert np.allclose(via_blocks, direct, rtol=1e-12, atol=1e-15)


def test_velocity_divergence_free():
    rng = np.random.default_rng(10)
    frame, _, forces, _ = oracles.random_triangle_case(rng)
    params = KernelParams(eps=0.1)
    x0 = np.array([0.8, -1.1, 0.9])
    h = 1e-5
    div = 0.0
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        up = triangle_velocity(x0 + step, frame, *forces, params)
        dn = triangle_velocity(x0 - step, frame, *forces, params)
        div += (up[i] - dn[i]) / (2 * h)
    scale = np.linalg.norm(triangle_velocity(x0, frame, *forces, params))
    assert abs(div) < 1e-6 * max(scale, 1.0)


def test_net_force_and_torque_match_quadrature():
    from scipy.integrate import dblquad

    rng = np.random.default_rng(11)
    frame, _, forces, _ = oracles.random_triangle_case(rng)
    yc = rng.normal(size=3)
    F = triangle_net_force(frame, *forces)
    T = triangle_net_torque(frame, *forces, yc)
    f0, fa, fb = forces[0], forces[1] - forces[0], forces[2] - forces[1]

    def quad_vec(fn):
        out = np.zeros(3)
        for i in range(3):
            out[i], _ = dblquad(
                lambda beta, alpha, i=i: fn(alpha, beta)[i] * frame.BH,
                0.0, 1.0, 0.0, lambda a: a, epsabs=1e-13, epsrel=1e-12,
            )
        return out

    Fref = quad_vec(lambda a, b: f0 + a * fa + b * fb)
    Tref = quad_vec(
        lambda a, b: np.cross(
            oracles.triangle_param_point(frame, a, b) - yc, f0 + a * fa + b * fb
        )
    )
    assert np.allclose(F, Fref, rtol=1e-12, atol=1e-14)
    assert np.allclose(T, Tref, rtol=1e-11, atol=1e-13)


def test_epsilon_floor_and_params_validation():
    mesh = make_icosphere(2)
    floor = epsilon_floor(mesh)
    assert floor == pytest.approx(np.sqrt(np.spacing(mesh.max_side_length())))
    KernelParams(eps=2 * floor).validate_for_mesh(mesh)  # fine
    with pytest.raises(FloatingFloorError):
        KernelParams(eps=0.5 * floor).validate_for_mesh(mesh)
    with pytest.raises(ValueError):
        KernelParams(eps=0.0)
    with pytest.raises(ValueError):
        KernelParams(eps=1e-4, mu=-1.0)
