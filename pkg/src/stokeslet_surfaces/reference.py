"""Closed-form reference solutions and error norms for the validation studies.

Tractions returned here are the single-layer force densities that reproduce
the corresponding exterior Stokes flow through the forward velocity map
u(x) = (1/8 pi mu) * integral of S . f: that is, the force the body exerts on
the fluid. The drag/torque exerted by the fluid on the body is the negative
of the integral of these densities.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "l2_error",
    "sphere_translation_reference",
    "sphere_rotation_reference",
    "spheroid_rotation_reference",
    "spheroid_net_torque",
    "squirmer_reference",
    "squirmer_slip",
    "pipe_reference",
    "flux_without_cube",
]


def l2_error(errors) -> float:
    """Root-mean-square of a non-empty list of pointwise error magnitudes."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("empty error list")
    return float(np.sqrt(np.mean(errors**2)))


def sphere_translation_reference(x, a: float, U, mu: float):
    """(traction, velocity) for a rigid sphere of radius a translating at U.

    The traction is the constant density (3 mu / 2a) U; the velocity is the
    classical exterior solution, valid for |x| >= a (equal to U on the
    surface).
    """
    x = np.asarray(x, dtype=float)
    U = np.asarray(U, dtype=float)
    traction = 3.0 * mu / (2.0 * a) * U
    r = np.linalg.norm(x)
    u = (a / (4.0 * r)) * (3.0 + a**2 / r**2) * U + (
        3.0 * a * (x @ U) / (4.0 * r**2)
    ) * (1.0 - a**2 / r**2) * x / r
    return traction, u


def sphere_rotation_reference(x, a: float, Omega, mu: float):
    """(traction, velocity) for a rigid sphere of radius a rotating at Omega.

    traction = (3 mu / a) Omega x X on the surface; velocity is the rotlet
    field a^3 (Omega x X) / r^3, equal to Omega x X on the surface.
    """
    x = np.asarray(x, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    traction = 3.0 * mu / a * np.cross(Omega, x)
    r = np.linalg.norm(x)
    u = a**3 * np.cross(Omega, x) / r**3
    return traction, u


def spheroid_net_torque(a: float, b: float, mu: float) -> np.ndarray:
    """Torque the fluid exerts on a prolate spheroid (semi-axes a > b along z)
    rotating with unit angular speed about z."""
    if not a > b:
        raise ValueError("requires a > b (prolate spheroid)")
    e = np.sqrt(a**2 - b**2) / a
    beta0 = a**2 * e**2 / (2.0 * e / (1.0 - e**2) - np.log((1.0 + e) / (1.0 - e)))
    return np.array([0.0, 0.0, -(32.0 / 3.0) * np.pi * mu * a * e * beta0])


def spheroid_rotation_reference(x, a: float, b: float, mu: float):
    """(traction, net torque on body) for a prolate spheroid (z semi-axis a,
    equatorial semi-axis b) rotating with unit angular speed about z.

    traction(x) = -3 (n . x) / (8 pi a b^4) * M x X with M the net torque on
    the body; the minus sign converts it to force-on-fluid. The surface
    velocity target is z_hat x X.
    """
    x = np.asarray(x, dtype=float)
    M = spheroid_net_torque(a, b, mu)
    # outward normal of x^2/b^2 + y^2/b^2 + z^2/a^2 = 1
    grad = np.array([x[0] / b**2, x[1] / b**2, x[2] / a**2])
    nhat = grad / np.linalg.norm(grad)
    traction = -3.0 * (nhat @ x) / (8.0 * np.pi * a * b**4) * np.cross(M, x)
    return traction, M


def squirmer_reference(r: float, theta: float, a: float, B1: float = 1.5):
    """(u_r, u_theta) of the steady squirmer flow in the co-moving frame,
    for the tangential-slip mode of amplitude B1 (unit swim speed at 3/2)."""
    s = (B1 / 1.5) * (a / r) ** 3
    return s * np.cos(theta), 0.5 * s * np.sin(theta)


def squirmer_slip(theta: float, phi: float, B1: float = 1.5) -> np.ndarray:
    """Cartesian slip velocity B1 * V1(cos theta) * theta_hat on the unit
    sphere, with V1(c) = sqrt(1 - c^2)."""
    that = np.array(
        [np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)]
    )
    return B1 * np.sin(theta) * that


def pipe_reference(y, z, a: float, b: float, dP: float, mu: float,
                   nterms: int = 50):
    """Axial velocity of pressure-driven flow in a rectangular duct
    |y| <= a, |z| <= b, as a truncated cosh/cos series with nterms terms."""
    if nterms < 1:
        raise ValueError("nterms must be >= 1")
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    n = np.arange(1, nterms + 1)
    alpha = (n - 0.5) * np.pi
    series = np.sum(
        (-1.0) ** n
        / alpha**3
        * np.cosh(alpha * y[..., None] / b)
        / np.cosh(alpha * a / b)
        * np.cos(alpha * z[..., None] / b),
        axis=-1,
    )
    u = dP / (2.0 * mu) * (b**2 - z**2 + 4.0 * b**2 * series)
    return u if u.ndim else float(u)


def flux_without_cube(s: float, a: float, b: float, dP: float, mu: float,
                      nterms: int = 50) -> float:
    """Flux of the unobstructed duct flow through the square |y|,|z| <= s."""
    if nterms < 1:
        raise ValueError("nterms must be >= 1")
    n = np.arange(1, nterms + 1)
    alpha = (n - 0.5) * np.pi
    series = np.sum(
        (-1.0) ** n
        / alpha**5
        * np.sinh(alpha * s / b)
        / np.cosh(alpha * a / b)
        * np.sin(alpha * s / b)
    )
    return float(
        -(2.0 / 3.0) * dP / mu * s**2 * (-3.0 * b**2 + s**2)
        + dP / (2.0 * mu) * 16.0 * b**4 * series
    )
