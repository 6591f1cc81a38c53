"""Forward crack problem: slip on a buried plane to data on the surface.

The potential generated by a slip g across the crack plane is the
double-layer integral of the half-space dipole kernel.  With the
surface-element-weighted normal (-a, -b, 1), the surface integral over
the tilted crack reduces to a plain integral over its rectangular
footprint, which is discretized with piecewise-bilinear nodal slips
(zero on the footprint boundary) and tensor Gauss-Legendre quadrature
per grid cell.

Because every admissible crack keeps a positive distance to the
surface, all integrands seen by the assembled operator are smooth and
no singular quadrature is needed; the graded near-crack evaluation
(used to measure the slip jump) lives in eval_field_refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse

from . import kernels
from .geometry import PlaneParams, SourceRegion, crack_depth_margin, make_frame, plane_points
from .quadrature import refined_region_rule, region_rule, richardson


@dataclass(frozen=True)
class SensorSet:
    """Dirichlet observation points on {x3 = 0} with L2 quadrature weights."""

    points: np.ndarray   # (S, 2)
    weights: np.ndarray  # (S,)

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("sensor points must be an (S, 2) array")
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError("one weight per sensor required")
        if not np.all(self.weights > 0):
            raise ValueError("sensor weights must be positive")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise ValueError("sensor points must be pairwise distinct")

    @classmethod
    def grid(cls, x1_min, x1_max, x2_min, x2_max, n1, n2) -> "SensorSet":
        """Cell-centered grid tiling the rectangle; weight = cell area."""
        h1 = (x1_max - x1_min) / n1
        h2 = (x2_max - x2_min) / n2
        c1 = x1_min + h1 * (np.arange(n1) + 0.5)
        c2 = x2_min + h2 * (np.arange(n2) + 0.5)
        P1, P2 = np.meshgrid(c1, c2, indexing="ij")
        pts = np.column_stack([P1.ravel(), P2.ravel()])
        return cls(points=pts, weights=np.full(len(pts), h1 * h2))

    def __len__(self) -> int:
        return len(self.points)

    def points3(self) -> np.ndarray:
        return np.column_stack([self.points, np.zeros(len(self.points))])

    def norm(self, values: np.ndarray) -> float:
        """Discrete L2(V) norm sqrt(sum w_i v_i^2)."""
        return float(np.sqrt(np.sum(self.weights * np.asarray(values) ** 2)))

    def shifted(self, s1: float, s2: float) -> "SensorSet":
        return SensorSet(self.points + np.array([s1, s2]), self.weights)


@dataclass
class BoundaryData:
    """One scalar per sensor, normed with the sensor weights."""

    sensors: SensorSet
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.sensors),):
            raise ValueError("one value per sensor required")

    def l2v_norm(self) -> float:
        return self.sensors.norm(self.values)


def _bump(r2_over_rho2):
    """Smooth compactly supported profile exp(1 - 1/(1 - s)) on s < 1."""
    s = np.asarray(r2_over_rho2, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return out


@dataclass
class SlipGrid:
    """Nodal slip values on the region grid, exactly zero on the boundary.

    The slip field is the piecewise-bilinear interpolant of the nodal
    values, which is the simplest conforming zero-trace discretization.
    """

    region: SourceRegion
    values: np.ndarray  # (n1, n2)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.region.n1, self.region.n2):
            raise ValueError("nodal array shape must match the region grid")
        edge = np.concatenate(
            [self.values[0], self.values[-1], self.values[:, 0], self.values[:, -1]]
        )
        if np.any(edge != 0.0):
            raise ValueError("boundary nodes must be exactly zero")

    @classmethod
    def zeros(cls, region: SourceRegion) -> "SlipGrid":
        return cls(region, np.zeros((region.n1, region.n2)))

    @classmethod
    def from_interior(cls, region: SourceRegion, interior: np.ndarray) -> "SlipGrid":
        vals = np.zeros((region.n1, region.n2))
        vals[1:-1, 1:-1] = np.asarray(interior, dtype=float).reshape(
            region.n1 - 2, region.n2 - 2
        )
        return cls(region, vals)

    @classmethod
    def from_function(cls, region: SourceRegion, fn) -> "SlipGrid":
        """Sample fn(x1, x2) at the nodes; boundary nodes are forced to zero."""
        X1, X2 = np.meshgrid(region.x1_nodes(), region.x2_nodes(), indexing="ij")
        vals = np.asarray(fn(X1, X2), dtype=float)
        vals[0, :] = vals[-1, :] = 0.0
        vals[:, 0] = vals[:, -1] = 0.0
        return cls(region, vals)

    @classmethod
    def from_family(cls, region: SourceRegion, family: str, **params) -> "SlipGrid":
        """Named closed-form slip families.

        bump: amplitude * exp(1 - 1/(1 - r^2/radius^2)) around a center.
        sine: amplitude * sin(k1 pi u) * sin(k2 pi v) in unit region coords.
        """
        if family == "bump":
            amp = params.get("amplitude", 1.0)
            c1 = params.get("center1", 0.0)
            c2 = params.get("center2", 0.0)
            rho = params.get("radius", 0.8)
            return cls.from_function(
                region,
                lambda x1, x2: amp * _bump(((x1 - c1) ** 2 + (x2 - c2) ** 2) / rho**2),
            )
        if family == "sine":
            amp = params.get("amplitude", 1.0)
            k1 = int(params.get("mode1", 1))
            k2 = int(params.get("mode2", 1))

            def fn(x1, x2):
                u = (x1 - region.x1_min) / (region.x1_max - region.x1_min)
                v = (x2 - region.x2_min) / (region.x2_max - region.x2_min)
                return amp * np.sin(k1 * np.pi * u) * np.sin(k2 * np.pi * v)

            return cls.from_function(region, fn)
        raise ValueError(f"unknown slip family '{family}'")

    def interior_vector(self) -> np.ndarray:
        return self.values[1:-1, 1:-1].ravel()

    def value_at(self, pts2d: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at footprint points; zero outside the region."""
        pts = np.atleast_2d(np.asarray(pts2d, dtype=float))
        r = self.region
        u = (pts[:, 0] - r.x1_min) / r.h1
        v = (pts[:, 1] - r.x2_min) / r.h2
        i = np.clip(np.floor(u).astype(int), 0, r.n1 - 2)
        j = np.clip(np.floor(v).astype(int), 0, r.n2 - 2)
        fu = u - i
        fv = v - j
        vals = (
            self.values[i, j] * (1 - fu) * (1 - fv)
            + self.values[i + 1, j] * fu * (1 - fv)
            + self.values[i, j + 1] * (1 - fu) * fv
            + self.values[i + 1, j + 1] * fu * fv
        )
        outside = (u < 0) | (u > r.n1 - 1) | (v < 0) | (v > r.n2 - 1)
        vals[outside] = 0.0
        return vals if np.asarray(pts2d).ndim == 2 else vals[0]

    def h1_norm(self) -> float:
        """H1 norm sqrt(int |grad g|^2 + int g^2) of the interpolant."""
        gram = h1_gram(self.region)
        v = self.values.ravel()
        return float(math.sqrt(max(v @ (gram @ v), 0.0)))

    def scaled(self, factor: float) -> "SlipGrid":
        return SlipGrid(self.region, factor * self.values)


def _lin1d_mats(n: int, h: float):
    """1-d linear-element mass and stiffness matrices on a uniform grid."""
    main_m = np.full(n, 2 * h / 3.0)
    main_m[0] = main_m[-1] = h / 3.0
    off_m = np.full(n - 1, h / 6.0)
    M = scipy.sparse.diags([off_m, main_m, off_m], [-1, 0, 1], format="csr")
    main_k = np.full(n, 2.0 / h)
    main_k[0] = main_k[-1] = 1.0 / h
    off_k = np.full(n - 1, -1.0 / h)
    K = scipy.sparse.diags([off_k, main_k, off_k], [-1, 0, 1], format="csr")
    return M, K


@lru_cache(maxsize=32)
def h1_gram(region: SourceRegion) -> scipy.sparse.csr_matrix:
    """Stiffness-plus-mass matrix of the bilinear interpolant, all nodes."""
    M1, K1 = _lin1d_mats(region.n1, region.h1)
    M2, K2 = _lin1d_mats(region.n2, region.h2)
    gram = (
        scipy.sparse.kron(K1, M2) + scipy.sparse.kron(M1, K2) + scipy.sparse.kron(M1, M2)
    )
    return gram.tocsr()


@lru_cache(maxsize=32)
def interior_h1_gram(region: SourceRegion) -> np.ndarray:
    """Dense interior-dof restriction of the H1 Gram matrix."""
    n1, n2 = region.n1, region.n2
    mask = np.zeros((n1, n2), dtype=bool)
    mask[1:-1, 1:-1] = True
    idx = np.flatnonzero(mask.ravel())
    gram = h1_gram(region)
    return gram[np.ix_(idx, idx)].toarray()


@dataclass
class ForwardMatrix:
    """Dense crack-to-boundary operator for one plane geometry."""

    entries: np.ndarray  # (num_sensors, num_interior_dofs)
    m: PlaneParams
    quad_order: int
    region: SourceRegion
    sensors: SensorSet

    def apply(self, slip) -> BoundaryData:
        vec = slip.interior_vector() if isinstance(slip, SlipGrid) else np.asarray(slip)
        return BoundaryData(self.sensors, self.entries @ vec)


def assemble_A(
    m: PlaneParams,
    region: SourceRegion,
    sensors: SensorSet,
    quad_order: int = 4,
) -> ForwardMatrix:
    """Discretize the crack-to-boundary map on the interior nodal basis.

    Entry (i, j) integrates the half-space dipole kernel, weighted with
    the scaled normal (-a, -b, 1), against the j-th interior bilinear
    basis function, evaluated at sensor i.
    """
    margin = crack_depth_margin(m, region)
    if margin <= 0:
        raise ValueError(
            f"crack plane reaches the surface: clearance {margin:.6g} <= 0 "
            f"for (a={m.a}, b={m.b}, d={m.d})"
        )
    if len(sensors) == 0:
        raise ValueError("empty sensor set")
    rule = region_rule(region, quad_order)
    ypts = plane_points(m, rule.pts)
    nsigma = kernels.plane_scaled_normal(m)
    K = kernels.halfspace_dipole_matrix(sensors.points3()[:, None, :], ypts[None, :, :], nsigma)
    return ForwardMatrix(
        entries=K @ rule.scatter,
        m=m,
        quad_order=quad_order,
        region=region,
        sensors=sensors,
    )


def _patch_distance(m: PlaneParams, region: SourceRegion, x: np.ndarray) -> np.ndarray:
    """Distance proxy from points to the crack patch (exact over the footprint)."""
    x = np.atleast_2d(x)
    frame = make_frame(m)
    signed = (x[:, 2] - m.height(x[:, 0], x[:, 1])) / frame.sigma
    c1 = np.clip(x[:, 0], region.x1_min, region.x1_max)
    c2 = np.clip(x[:, 1], region.x2_min, region.x2_max)
    nearest = plane_points(m, np.column_stack([c1, c2]))
    euclid = np.linalg.norm(x - nearest, axis=1)
    inside = (
        (x[:, 0] >= region.x1_min)
        & (x[:, 0] <= region.x1_max)
        & (x[:, 1] >= region.x2_min)
        & (x[:, 1] <= region.x2_max)
    )
    return np.where(inside, np.abs(signed), euclid)


def eval_field(
    m: PlaneParams,
    region: SourceRegion,
    slip: SlipGrid,
    x: np.ndarray,
    quad_order: int = 4,
) -> np.ndarray:
    """Double-layer potential of the slip at points x (shape (..., 3) or (3,)).

    Uses the same per-cell rule as assemble_A, so sensor-point values
    match matrix rows to rounding.  Raises when a point sits on or
    numerically too close to the crack patch.
    """
    x_arr = np.atleast_2d(np.asarray(x, dtype=float))
    margin = crack_depth_margin(m, region)
    dist = _patch_distance(m, region, x_arr)
    if np.any(dist <= 1e-6 * max(margin, 0.0)):
        raise ValueError("field point on or numerically within the crack patch")
    rule = region_rule(region, quad_order)
    ypts = plane_points(m, rule.pts)
    nsigma = kernels.plane_scaled_normal(m)
    wg = rule.scatter @ slip.interior_vector()
    K = kernels.halfspace_dipole_matrix(x_arr[:, None, :], ypts[None, :, :], nsigma)
    vals = K @ wg
    return vals if np.asarray(x).ndim == 2 else float(vals[0])


def eval_field_refined(
    m: PlaneParams,
    region: SourceRegion,
    slip: SlipGrid,
    x: np.ndarray,
    center2d,
    eps: float,
    quad_order: int = 4,
) -> float:
    """Field value with cells graded around center2d for offset-scale eps.

    Cells within 4*eps of the marked footprint point are split until
    their diameter is at most eps/2; needed only when x approaches the
    crack (slip-jump measurements).
    """
    pts, w = refined_region_rule(region, quad_order, center2d, eps)
    ypts = plane_points(m, pts)
    nsigma = kernels.plane_scaled_normal(m)
    gvals = slip.value_at(pts)
    K = kernels.halfspace_dipole_matrix(np.asarray(x, dtype=float), ypts, nsigma)
    return float(np.sum(K * w * gvals))


def extract_jump(
    m: PlaneParams,
    region: SourceRegion,
    slip: SlipGrid,
    p2d,
    eps_list,
    quad_order: int = 4,
) -> tuple[float, np.ndarray]:
    """Extrapolated jump of the field across the crack at a footprint point.

    Evaluates the field at +/- eps offsets along the unit normal and
    extrapolates eps -> 0; the limit equals the slip at the point.
    Returns (extrapolated jump, per-eps differences).
    """
    eps_arr = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps_arr) >= 0):
        raise ValueError("eps_list must be strictly decreasing")
    frame = make_frame(m)
    base = plane_points(m, np.asarray(p2d, dtype=float))
    diffs = []
    for eps in eps_arr:
        up = eval_field_refined(m, region, slip, base + eps * frame.n, p2d, eps, quad_order)
        dn = eval_field_refined(m, region, slip, base - eps * frame.n, p2d, eps, quad_order)
        diffs.append(up - dn)
    return richardson(eps_arr, diffs), np.asarray(diffs)


def check_harmonic(
    m: PlaneParams,
    region: SourceRegion,
    slip: SlipGrid,
    probes: np.ndarray,
    h_fd: float = 1e-3,
    quad_order: int = 4,
) -> float:
    """Max scaled 7-point finite-difference Laplacian over the probes.

    The probe scale is its distance to the crack patch, so the returned
    quantity is dimensionless; probes closer than 10*h_fd to the crack
    or to the surface plane are rejected.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    dist = _patch_distance(m, region, probes)
    if np.any(dist < 10 * h_fd) or np.any(np.abs(probes[:, 2]) < 10 * h_fd):
        raise ValueError("probe too close to the crack or to the surface for FD")
    offsets = np.array(
        [
            [0, 0, 0],
            [h_fd, 0, 0],
            [-h_fd, 0, 0],
            [0, h_fd, 0],
            [0, -h_fd, 0],
            [0, 0, h_fd],
            [0, 0, -h_fd],
        ]
    )
    stencil = probes[:, None, :] + offsets[None, :, :]
    vals = eval_field(m, region, slip, stencil.reshape(-1, 3), quad_order).reshape(
        len(probes), 7
    )
    lap = (vals[:, 1:].sum(axis=1) - 6.0 * vals[:, 0]) / h_fd**2
    scale = np.abs(vals[:, 0])
    floor = 1e-3 * max(scale.max(), 1e-300)
    rel = np.abs(lap) * dist**2 / np.maximum(scale, floor)
    return float(rel.max())


def check_neumann_top(
    m: PlaneParams,
    region: SourceRegion,
    slip: SlipGrid,
    probes2d: np.ndarray,
    quad_order: int = 4,
) -> tuple[float, float]:
    """Normal derivative of the field on the surface plane.

    Returns (max absolute value, max value relative to the one-sided
    derivative magnitude).  The half-space kernel's x3-derivative
    vanishes pointwise at x3 = 0, so both should be at rounding level.
    """
    probes2d = np.atleast_2d(np.asarray(probes2d, dtype=float))
    x = np.column_stack([probes2d, np.zeros(len(probes2d))])
    rule = region_rule(region, quad_order)
    ypts = plane_points(m, rule.pts)
    nsigma = kernels.plane_scaled_normal(m)
    wg = rule.scatter @ slip.interior_vector()
    K = kernels.dipole_halfspace_dx3(x[:, None, :], ypts[None, :, :], nsigma)
    vals = K @ wg
    one_sided = -kernels.dipole_dy(x[:, None, :], ypts[None, :, :], nsigma, kernels.E3)
    scale = np.abs(one_sided) @ np.abs(wg)
    max_abs = float(np.max(np.abs(vals)))
    if np.all(scale == 0.0):
        return max_abs, 0.0
    return max_abs, float(np.max(np.abs(vals) / np.maximum(scale, 1e-300)))
