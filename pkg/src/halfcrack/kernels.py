"""Closed-form potential kernels for the lower half space.

Everything is built from the free-space fundamental solution of the
Laplacian, 1/(4 pi |x - y|).  The dipole kernel is its y-gradient dotted
with a direction v; the half-space variant adds the same kernel
evaluated at the mirror point (x1, x2, -x3), which cancels the x3
derivative on the surface plane {x3 = 0}.

Derivative kernels are hand-differentiated closed forms.  With
rvec = x - y and r = |rvec|:

    dipole(x, y, v)          = (rvec . v) / (4 pi r^3)
    d/dy_w dipole            = (-(v.w) + 3 (rvec.v)(rvec.w)/r^2) / (4 pi r^3)
    d/dx_s d/dy_w dipole     = 3 [ (v.w)(rvec.s) + (v.s)(rvec.w) + (w.s)(rvec.v)
                                   - 5 (rvec.v)(rvec.w)(rvec.s)/r^2 ] / (4 pi r^5)

and d/dx_s dipole = -d/dy_s dipole because the kernel depends on x - y
only.  Mirror-point terms pick up a sign flip on the third component of
any x-direction, handled explicitly below.

All functions broadcast over leading axes of x and y; direction vectors
may be single 3-vectors or broadcastable stacks.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .geometry import PlaneParams


class KernelDeriv(NamedTuple):
    """Values of d/da, d/db, d/dd of the weighted crack kernel."""

    d_a: np.ndarray
    d_b: np.ndarray
    d_d: np.ndarray

FOUR_PI = 4.0 * np.pi
E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def reflect(x: np.ndarray) -> np.ndarray:
    """Mirror point(s) across the surface plane: (x1, x2, -x3)."""
    out = np.array(x, dtype=float, copy=True)
    out[..., 2] = -out[..., 2]
    return out


def _dot(u, v):
    return np.sum(np.asarray(u, dtype=float) * np.asarray(v, dtype=float), axis=-1)


def fundamental(x, y):
    """Free-space fundamental solution 1/(4 pi |x - y|)."""
    rvec = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.sqrt(_dot(rvec, rvec))
    return 1.0 / (FOUR_PI * r)


def dipole(x, y, v):
    """Directional y-gradient of the fundamental solution: (x-y).v / (4 pi r^3)."""
    rvec = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r2 = _dot(rvec, rvec)
    r = np.sqrt(r2)
    return _dot(rvec, v) / (FOUR_PI * r2 * r)


def dipole_dy(x, y, v, w):
    """Directional y-derivative (direction w) of dipole(x, y, v)."""
    rvec = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r2 = _dot(rvec, rvec)
    r3 = r2 * np.sqrt(r2)
    rv = _dot(rvec, v)
    rw = _dot(rvec, w)
    return (-_dot(v, w) + 3.0 * rv * rw / r2) / (FOUR_PI * r3)


def dipole_dxdy(x, y, v, w, s):
    """Mixed second derivative: d/dx_s of d/dy_w of dipole(x, y, v)."""
    rvec = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r2 = _dot(rvec, rvec)
    r5 = r2 * r2 * np.sqrt(r2)
    rv = _dot(rvec, v)
    rw = _dot(rvec, w)
    rs = _dot(rvec, s)
    core = (
        _dot(v, w) * rs
        + _dot(v, s) * rw
        + _dot(w, s) * rv
        - 5.0 * rv * rw * rs / r2
    )
    return 3.0 * core / (FOUR_PI * r5)


def dipole_halfspace(x, y, v):
    """Half-space dipole kernel: free part plus its mirror image in x."""
    return dipole(x, y, v) + dipole(reflect(x), y, v)


def dipole_halfspace_dy3(x, y, v):
    """d/dy3 of the half-space dipole kernel."""
    return dipole_dy(x, y, v, E3) + dipole_dy(reflect(x), y, v, E3)


def dipole_halfspace_dx3(x, y, v):
    """d/dx3 of the half-space dipole kernel; vanishes identically at x3 = 0.

    The free part contributes -d/dy3 and the image part +d/dy3 evaluated
    at the mirror point, so at x3 = 0 the two terms cancel exactly.
    """
    return -dipole_dy(x, y, v, E3) + dipole_dy(reflect(x), y, v, E3)


def dipole_halfspace_dx3dy3(x, y, v):
    """Mixed d/dx3 d/dy3 of the half-space kernel; zero at x3 = 0."""
    return dipole_dxdy(x, y, v, E3, E3) - dipole_dxdy(reflect(x), y, v, E3, E3)


def plane_scaled_normal(m: PlaneParams) -> np.ndarray:
    """Surface-element-weighted normal n*sigma = (-a, -b, 1) of the plane."""
    return np.array([-m.a, -m.b, 1.0])


def _halfspace_geometry(x, y):
    """Shared distance geometry of the free and image kernel parts.

    The mirror point changes only the third component of x - y, so the
    horizontal part is computed once.  Returns the difference
    components (d1, d2), the free and image vertical differences and
    the corresponding inverse cubed distances.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d1 = x[..., 0] - y[..., 0]
    d2 = x[..., 1] - y[..., 1]
    h2 = d1 * d1 + d2 * d2
    zf = x[..., 2] - y[..., 2]
    zi = -x[..., 2] - y[..., 2]
    r2f = h2 + zf * zf
    r2i = h2 + zi * zi
    ir3f = r2f ** (-1.5)
    ir3i = r2i ** (-1.5)
    return d1, d2, zf, zi, r2f, r2i, ir3f, ir3i


def halfspace_dipole_matrix(x, y, v) -> np.ndarray:
    """Single-pass evaluation of the half-space dipole kernel.

    Matches dipole_halfspace but shares the distance geometry between
    the free and image parts; v may be a 3-vector or a stack.
    """
    d1, d2, zf, zi, _, _, ir3f, ir3i = _halfspace_geometry(x, y)
    v = np.asarray(v, dtype=float)
    v1, v2, v3 = v[..., 0], v[..., 1], v[..., 2]
    hpart = d1 * v1 + d2 * v2
    return ((hpart + zf * v3) * ir3f + (hpart + zi * v3) * ir3i) / FOUR_PI


def dipole_halfspace_dplane(x, y1, y2, m: PlaneParams):
    """Derivatives of the weighted crack kernel with respect to (a, b, d).

    Differentiates H(x, y(m), n sigma) at fixed footprint point
    (y1, y2), where y(m) = (y1, y2, a y1 + b y2 + d) and
    n sigma = (-a, -b, 1).  The chain rule gives

        d/da = y1 * dH/dy3 (x, y, n sigma) - H(x, y, e1)
        d/db = y2 * dH/dy3 (x, y, n sigma) - H(x, y, e2)
        d/dd =      dH/dy3 (x, y, n sigma)

    Returns the three components as arrays broadcast like the inputs;
    all pieces share one evaluation of the distance geometry.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    y = np.stack([y1, y2, m.height(y1, y2)], axis=-1)
    d1, d2, zf, zi, r2f, r2i, ir3f, ir3i = _halfspace_geometry(x, y)
    # rvec . (n sigma) for free and image parts
    hpart = -m.a * d1 - m.b * d2
    rvf = hpart + zf
    rvi = hpart + zi
    k3 = (
        (-1.0 + 3.0 * rvf * zf / r2f) * ir3f + (-1.0 + 3.0 * rvi * zi / r2i) * ir3i
    ) / FOUR_PI
    He1 = d1 * (ir3f + ir3i) / FOUR_PI
    He2 = d2 * (ir3f + ir3i) / FOUR_PI
    return KernelDeriv(y1 * k3 - He1, y2 * k3 - He2, k3)
