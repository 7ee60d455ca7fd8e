"""Formulas on the Poincaré disk, its boundary circle and the hyperboloid.

Points are numpy arrays with a trailing axis of length 2, so every function
accepts a single point or a batch. Circle points may be given as unit vectors
or as angles via :func:`circle_point`. Scalar covectors on the circle are taken
against the counterclockwise unit tangent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def circle_point(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def angle_of(y):
    y = np.asarray(y, dtype=float)
    return np.mod(np.arctan2(y[..., 1], y[..., 0]), 2 * np.pi)


def chord(theta1, theta2):
    """Euclidean distance between boundary points given by angle."""
    return 2.0 * np.abs(np.sin(0.5 * (np.asarray(theta1) - np.asarray(theta2))))


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _rot90(v):
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


# ---------------------------------------------------------------------------
# boundary projection and Poisson kernel


def stereo_G(y, yp):
    """Signed projection of ``yp`` onto the tangent line at base point ``y``.

    Equals cot((θ' − θ)/2); antipodal points give 0.
    """
    y = np.asarray(y, dtype=float)
    yp = np.asarray(yp, dtype=float)
    c = _dot(y, yp)
    if np.any(np.abs(1.0 - c) < 1e-28) or np.any(np.linalg.norm(y - yp, axis=-1) < 1e-14):
        raise ValidationError("projection is singular at the base point")
    # tangential part of the vector form; 1 − y·y' taken as |y − y'|²/2 to avoid cancellation
    d = y - yp
    return _dot(yp, _rot90(y)) / (0.5 * _dot(d, d))


def stereo_G_vector(y, yp):
    y = np.asarray(y, dtype=float)
    yp = np.asarray(yp, dtype=float)
    c = _dot(y, yp)
    return (yp - c[..., None] * y) / (1.0 - c)[..., None]


def stereo_G_angle(theta, theta_p):
    """Same as :func:`stereo_G` in angle coordinates, cot((θ'−θ)/2)."""
    half = 0.5 * (np.asarray(theta_p, dtype=float) - np.asarray(theta, dtype=float))
    s = np.sin(half)
    if np.any(np.abs(s) < 1e-14):
        raise ValidationError("projection is singular at the base point")
    return np.cos(half) / s


def poisson_kernel(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (1.0 - _dot(x, x)) / _dot(x - y, x - y)


# ---------------------------------------------------------------------------
# cotangent vectors and geodesic endpoints


@dataclass(frozen=True)
class DiskCotangent:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        if np.any(np.linalg.norm(x, axis=-1) >= 1 - 1e-12):
            raise ValidationError("base point must lie inside the unit disk")
        if np.any(np.linalg.norm(xi, axis=-1) <= 0):
            raise ValidationError("covector must be nonzero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True)
class Endpoints:
    B_plus: np.ndarray
    B_minus: np.ndarray
    p: np.ndarray
    Phi_plus: np.ndarray
    Phi_minus: np.ndarray


def metric_norm(x, xi):
    """Dual norm of ``xi`` for the metric 4|dx|²/(1−|x|²)²."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return 0.5 * (1.0 - _dot(x, x)) * np.linalg.norm(xi, axis=-1)


def endpoints_B(xc: DiskCotangent) -> Endpoints:
    """Forward and backward boundary endpoints of the geodesic through (x, ξ)."""
    x, xi = xc.x, xc.xi
    r2 = _dot(x, x)
    nxi = np.linalg.norm(xi, axis=-1)
    xdx = _dot(x, xi)
    p = 0.5 * (1.0 - r2) * nxi
    out = {}
    for sgn, key in ((1.0, "plus"), (-1.0, "minus")):
        phi = 0.5 * (1.0 + r2) * nxi + sgn * xdx
        num = (nxi + sgn * xdx)[..., None] * x + sgn * 0.5 * (1.0 - r2)[..., None] * xi
        out[key] = (num / phi[..., None], phi)
    return Endpoints(out["plus"][0], out["minus"][0], p, out["plus"][1], out["minus"][1])


@dataclass(frozen=True)
class KappaCoords:
    w: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    eta: np.ndarray


def kappa(xc: DiskCotangent, sign: int) -> KappaCoords:
    """(p, B∓, ±log P(x, B∓), ±p·G(B∓, B±)) for ``sign`` = ±1."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    e = endpoints_B(xc)
    y, other = (e.B_minus, e.B_plus) if sign == 1 else (e.B_plus, e.B_minus)
    theta = sign * np.log(poisson_kernel(xc.x, y))
    eta = sign * e.p * stereo_G(y, other)
    return KappaCoords(e.p, y, theta, eta)


def theta_generating(w, y, yp):
    """w·log(|y − y'|²/4)."""
    y = np.asarray(y, dtype=float)
    yp = np.asarray(yp, dtype=float)
    return np.asarray(w) * np.log(_dot(y - yp, y - yp) / 4.0)


def theta_gradients(w, y, yp):
    """(∂_wΘ, ∂_yΘ, ∂_{y'}Θ) with the circle derivatives as scalars."""
    y = np.asarray(y, dtype=float)
    yp = np.asarray(yp, dtype=float)
    w = np.asarray(w, dtype=float)
    d2 = _dot(y - yp, y - yp)
    c = _dot(y, yp)
    dy = -2.0 * w[..., None] * (yp - c[..., None] * y) / d2[..., None]
    dyp = -2.0 * w[..., None] * (y - c[..., None] * yp) / d2[..., None]
    return np.log(d2 / 4.0), _dot(dy, _rot90(y)), _dot(dyp, _rot90(yp))


def graph_check(k_plus: KappaCoords, k_minus: KappaCoords):
    """Residuals of the relations linking κ₋(x,ξ)=(w,y,θ,η) and κ₊(x,ξ)=(w,y',θ',η').

    θ − θ' = ∂_wΘ, η = ∂_yΘ and η' = −∂_{y'}Θ at (w, y, y').
    """
    w, y, yp = k_minus.w, k_minus.y, k_plus.y
    dw, dy, dyp = theta_gradients(w, y, yp)
    return (
        np.abs(k_minus.theta - k_plus.theta - dw),
        np.abs(k_minus.eta - dy),
        np.abs(k_plus.eta + dyp),
        np.abs(k_minus.w - k_plus.w),
    )


# ---------------------------------------------------------------------------
# hyperboloid model, signature (−, +, +)

_J = np.diag([-1.0, 1.0, 1.0])


def minkowski(a, b):
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def to_hyperboloid(x):
    x = np.asarray(x, dtype=float)
    r2 = _dot(x, x)
    den = 1.0 - r2
    return np.concatenate([((1 + r2) / den)[..., None], 2 * x / den[..., None]], axis=-1)


def from_hyperboloid(X):
    X = np.asarray(X, dtype=float)
    return X[..., 1:] / (1.0 + X[..., :1])


def covector_to_tangent(x, xi):
    """Hyperboloid tangent vector dual to the disk covector (x, ξ)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r2 = _dot(x, x)
    den = 1.0 - r2
    v = (0.25 * den * den)[..., None] * xi  # raise the index
    xv = _dot(x, v)
    v0 = 4.0 * xv / den**2
    vs = 2.0 * v / den[..., None] + (4.0 * xv / den**2)[..., None] * x
    return np.concatenate([v0[..., None], vs], axis=-1)


def tangent_to_covector(X, V):
    """Inverse of :func:`covector_to_tangent` at hyperboloid point X."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    x = from_hyperboloid(X)
    one = 1.0 + X[..., :1]
    v = V[..., 1:] / one - X[..., 1:] * V[..., :1] / one**2
    den = 1.0 - _dot(x, x)
    return x, (4.0 / den**2)[..., None] * v


def frame_of(xc: DiskCotangent):
    """Oriented Lorentz frame (X, V, W) with columns point, direction, normal."""
    X = to_hyperboloid(xc.x)
    V = covector_to_tangent(xc.x, xc.xi)
    V = V / np.sqrt(minkowski(V, V))[..., None]
    W = covector_to_tangent(xc.x, _rot90(xc.xi))
    W = W / np.sqrt(minkowski(W, W))[..., None]
    return np.stack([X, V, W], axis=-1)


def geodesic_flow(xc: DiskCotangent, t):
    """Move a unit covector time ``t`` along its geodesic."""
    if np.any(np.abs(metric_norm(xc.x, xc.xi) - 1.0) > 1e-10):
        raise ValidationError("geodesic flow expects unit covectors")
    F = frame_of(xc)
    X, V = F[..., 0], F[..., 1]
    t = np.asarray(t, dtype=float)[..., None]
    Xt = np.cosh(t) * X + np.sinh(t) * V
    Vt = np.sinh(t) * X + np.cosh(t) * V
    x, xi = tangent_to_covector(Xt, Vt)
    return DiskCotangent(x, xi)


def horocycle_unstable(xc: DiskCotangent, s) -> DiskCotangent:
    """Flow a unit covector along the horocycle that keeps B₋ fixed."""
    if np.any(np.abs(metric_norm(xc.x, xc.xi) - 1.0) > 1e-10):
        raise ValidationError("horocycle flow expects unit covectors (p = 1)")
    F = frame_of(xc)
    s = np.asarray(s, dtype=float)
    half = 0.5 * s * s
    P = np.stack([1 + half, -half, -s], axis=-1)
    Q = np.stack([half, 1 - half, -s], axis=-1)
    Xn = np.einsum("...ij,...j->...i", F, P)
    Vn = np.einsum("...ij,...j->...i", F, Q)
    x, xi = tangent_to_covector(Xn, Vn)
    return DiskCotangent(x, xi)


def random_unit_cotangents(rng: np.random.Generator, n: int, rmax: float = 0.95) -> DiskCotangent:
    r = rmax * np.sqrt(rng.random(n))
    a = rng.random(n) * 2 * np.pi
    x = np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)
    b = rng.random(n) * 2 * np.pi
    xi = np.stack([np.cos(b), np.sin(b)], axis=-1)
    xi = xi / metric_norm(x, xi)[:, None]
    return DiskCotangent(x, xi)


# ---------------------------------------------------------------------------
# Möbius maps

CAYLEY = np.array([[1.0, -1j], [1.0, 1j]])
CAYLEY_INV = np.array([[1j, 1j], [-1.0, 1.0]]) / (2j)


def cayley(z):
    """Upper half-plane to disk, w = (z − i)/(z + i)."""
    z = np.asarray(z, dtype=complex)
    return (z - 1j) / (z + 1j)


def cayley_inv(w):
    w = np.asarray(w, dtype=complex)
    return 1j * (1 + w) / (1 - w)


def to_disk_matrix(g):
    """SU(1,1) matrix acting on the disk that is conjugate to ``g`` in SL(2,R)."""
    G = CAYLEY @ np.asarray(g, dtype=complex) @ np.linalg.inv(CAYLEY)
    return G / np.sqrt(np.linalg.det(G))


def mobius(G, w):
    w = np.asarray(w, dtype=complex)
    return (G[0, 0] * w + G[0, 1]) / (G[1, 0] * w + G[1, 1])


def mobius_boundary_derivative(g, w):
    """|γ'(w)| for γ ∈ SL(2,R) acting on the boundary circle of the disk.

    ``w`` is a unit complex number (or an angle array via :func:`circle_point`).
    """
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g) - 1.0) > 1e-12:
        raise ValidationError("matrix must have determinant 1")
    w = np.asarray(w, dtype=complex)
    a, b, c, d = g.ravel()
    # homogeneous boundary coordinates: z = i(1+w)/(1−w) = u/v with u, v real
    # after multiplying through by the unit-modulus factor.
    phi = np.angle(w)
    u = -np.cos(0.5 * phi)  # z = -cot(φ/2)
    v = np.sin(0.5 * phi)
    num = u * u + v * v
    den = (a * u + b * v) ** 2 + (c * u + d * v) ** 2
    return num / den


def matrix_size(g) -> float:
    g = np.asarray(g, dtype=float)
    return float(np.sum(g * g))
