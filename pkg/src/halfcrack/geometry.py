"""Planar crack geometry in the lower half space.

A planar crack is the portion of the tilted plane

    x3 = a*x1 + b*x2 + d

lying above a rectangular footprint in the (x1, x2) coordinates.  The
triple (a, b, d) is the geometry unknown of the inverse problem; d must
be negative enough that the whole crack stays strictly below the
surface plane {x3 = 0}.

The module also provides the two spherical-cap graph cracks used by the
non-uniqueness construction: Lipschitz height functions over the disk
of radius 2 that agree on the annulus 1 <= r < 2 and bound a lens
shaped domain between their caps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class PlaneParams:
    """Plane slopes (a, b) and depth offset d (d < 0 for buried cracks)."""

    a: float
    b: float
    d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.d], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "PlaneParams":
        a, b, d = (float(v) for v in arr)
        return cls(a, b, d)

    def height(self, x1, x2):
        """Plane height a*x1 + b*x2 + d at footprint coordinates."""
        return self.a * np.asarray(x1) + self.b * np.asarray(x2) + self.d


@dataclass(frozen=True)
class SourceRegion:
    """Axis-aligned rectangular footprint with a tensor node grid.

    Nodes are ordered row-major with the x1 index slowest:
    ``index = i1 * n2 + i2``.  Grid spacings are h1 = (x1_max - x1_min)
    / (n1 - 1) and similarly h2.
    """

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ValueError("region bounds must satisfy min < max on both axes")
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError("need at least 3 nodes per axis (no interior dof otherwise)")

    @property
    def h1(self) -> float:
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    @property
    def h2(self) -> float:
        return (self.x2_max - self.x2_min) / (self.n2 - 1)

    def corners(self) -> np.ndarray:
        return np.array(
            [
                [self.x1_min, self.x2_min],
                [self.x1_min, self.x2_max],
                [self.x1_max, self.x2_min],
                [self.x1_max, self.x2_max],
            ]
        )

    def x1_nodes(self) -> np.ndarray:
        return np.linspace(self.x1_min, self.x1_max, self.n1)

    def x2_nodes(self) -> np.ndarray:
        return np.linspace(self.x2_min, self.x2_max, self.n2)

    def num_interior(self) -> int:
        return (self.n1 - 2) * (self.n2 - 2)

    def shifted(self, s1: float, s2: float) -> "SourceRegion":
        return SourceRegion(
            self.x1_min + s1,
            self.x1_max + s1,
            self.x2_min + s2,
            self.x2_max + s2,
            self.n1,
            self.n2,
        )


@dataclass(frozen=True)
class CrackFrame:
    """Orthonormal frame attached to a tilted plane.

    n is the upward unit normal (-a, -b, 1)/sigma, t the in-plane unit
    vector obtained by projecting e3 onto the plane (undefined for a
    horizontal plane), and e3 = alpha*n + beta_t*t.
    """

    n: np.ndarray
    t: np.ndarray | None
    sigma: float
    alpha: float
    beta_t: float

    def tangent_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal in-plane basis (t1, t2); t1 = t when defined."""
        if self.t is None:
            return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        t2 = np.cross(self.n, self.t)
        return self.t, t2 / np.linalg.norm(t2)


def make_frame(m: PlaneParams) -> CrackFrame:
    """Normal, projected-e3 tangent and surface element of the plane of m."""
    sigma = math.sqrt(m.a * m.a + m.b * m.b + 1.0)
    n = np.array([-m.a, -m.b, 1.0]) / sigma
    alpha = 1.0 / sigma
    e3 = np.array([0.0, 0.0, 1.0])
    proj = e3 - alpha * n
    beta_t = float(np.linalg.norm(proj))
    if m.a == 0.0 and m.b == 0.0:
        return CrackFrame(n=n, t=None, sigma=sigma, alpha=alpha, beta_t=0.0)
    return CrackFrame(n=n, t=proj / beta_t, sigma=sigma, alpha=alpha, beta_t=beta_t)


def crack_depth_margin(m: PlaneParams, region: SourceRegion) -> float:
    """Clearance between the crack and the surface plane {x3 = 0}.

    The plane height is affine, so its maximum over the rectangle is
    attained at a corner.  Positive return means the crack is strictly
    below the surface; a negative value signals a violation.
    """
    corners = region.corners()
    heights = m.height(corners[:, 0], corners[:, 1])
    return float(-np.max(heights))


def grid_nodes(region: SourceRegion) -> tuple[np.ndarray, np.ndarray]:
    """All grid nodes (N, 2) in row-major order plus a boundary mask."""
    x1 = region.x1_nodes()
    x2 = region.x2_nodes()
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    nodes = np.column_stack([X1.ravel(), X2.ravel()])
    i1, i2 = np.meshgrid(np.arange(region.n1), np.arange(region.n2), indexing="ij")
    boundary = (
        (i1 == 0) | (i1 == region.n1 - 1) | (i2 == 0) | (i2 == region.n2 - 1)
    ).ravel()
    return nodes, boundary


def plane_points(m: PlaneParams, pts2d: np.ndarray) -> np.ndarray:
    """Lift footprint points (Q, 2) onto the crack plane as (Q, 3)."""
    pts2d = np.asarray(pts2d, dtype=float)
    x3 = m.height(pts2d[..., 0], pts2d[..., 1])
    return np.concatenate([pts2d, x3[..., None]], axis=-1)


@dataclass(frozen=True)
class ParamBox:
    """Closed component-wise box of admissible plane parameters.

    beta_dist is the minimum clearance every plane in the box must keep
    from the surface; check() verifies it on the box vertices (enough,
    because the clearance is affine in (a, b, d)).
    """

    lo: PlaneParams
    hi: PlaneParams
    beta_dist: float

    def __post_init__(self):
        if not (
            self.lo.a <= self.hi.a and self.lo.b <= self.hi.b and self.lo.d <= self.hi.d
        ):
            raise ValueError("box bounds must satisfy lo <= hi component-wise")
        if self.beta_dist <= 0:
            raise ValueError("beta_dist must be positive")

    def vertices(self) -> list[PlaneParams]:
        out = []
        for a in (self.lo.a, self.hi.a):
            for b in (self.lo.b, self.hi.b):
                for d in (self.lo.d, self.hi.d):
                    out.append(PlaneParams(a, b, d))
        return out

    def check(self, region: SourceRegion) -> None:
        for v in self.vertices():
            margin = crack_depth_margin(v, region)
            if margin < self.beta_dist:
                raise ValueError(
                    f"box vertex (a={v.a}, b={v.b}, d={v.d}) has crack-to-surface "
                    f"clearance {margin:.6g} < required {self.beta_dist:.6g}"
                )

    def contains(self, m: PlaneParams, rtol: float = 1e-12) -> bool:
        lo, hi = self.lo.as_array(), self.hi.as_array()
        v = m.as_array()
        pad = rtol * np.maximum(1.0, np.abs(hi - lo))
        return bool(np.all(v >= lo - pad) and np.all(v <= hi + pad))

    def clip(self, arr) -> np.ndarray:
        return np.clip(np.asarray(arr, dtype=float), self.lo.as_array(), self.hi.as_array())

    def grid(self, dims: tuple[int, int, int]) -> list[PlaneParams]:
        """Tensor grid of box points, endpoints included."""
        axes = []
        for lo, hi, n in zip(self.lo.as_array(), self.hi.as_array(), dims):
            axes.append(np.linspace(lo, hi, n) if n > 1 else np.array([(lo + hi) / 2]))
        return [
            PlaneParams(float(a), float(b), float(d))
            for a in axes[0]
            for b in axes[1]
            for d in axes[2]
        ]

    def sample(self, rng: np.random.Generator, count: int) -> list[PlaneParams]:
        lo, hi = self.lo.as_array(), self.hi.as_array()
        draws = lo + (hi - lo) * rng.random((count, 3))
        return [PlaneParams.from_array(row) for row in draws]


class CapKind(Enum):
    """Which spherical cap fills the unit-disk center of a graph crack."""

    CAP_LOW = "cap_low"    # sphere centered at (0,0,-3), cap bulging up to -3+sqrt(2)
    CAP_HIGH = "cap_high"  # sphere centered at (0,0,-1), cap dipping down to -1-sqrt(2)


@dataclass(frozen=True)
class CrackGraph:
    """Lipschitz graph crack: flat at depth -2 on 1 <= r < radius, spherical
    cap (radius sqrt(2)) over the unit disk."""

    radius: float
    cap: CapKind

    def height(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r2 = x1 * x1 + x2 * x2
        root = np.sqrt(np.maximum(2.0 - r2, 0.0))
        if self.cap is CapKind.CAP_LOW:
            capped = -3.0 + root
        else:
            capped = -1.0 - root
        return np.where(r2 < 1.0, capped, -2.0)

    def gradient(self, x1, x2) -> tuple[np.ndarray, np.ndarray]:
        """(d psi/dx1, d psi/dx2); zero on the flat annulus."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r2 = x1 * x1 + x2 * x2
        root = np.sqrt(np.maximum(2.0 - r2, 1e-300))
        sign = -1.0 if self.cap is CapKind.CAP_LOW else 1.0
        inside = r2 < 1.0
        g1 = np.where(inside, sign * x1 / root, 0.0)
        g2 = np.where(inside, sign * x2 / root, 0.0)
        return g1, g2


def graph_point(crack: CrackGraph, x1: float, x2: float):
    """Surface point, upward unit normal and surface element at (x1, x2).

    Raises for queries outside the open disk footprint.
    """
    if x1 * x1 + x2 * x2 >= crack.radius**2:
        raise ValueError(f"query ({x1}, {x2}) outside the disk of radius {crack.radius}")
    psi = float(crack.height(x1, x2))
    g1, g2 = crack.gradient(x1, x2)
    g1, g2 = float(g1), float(g2)
    sigma = math.sqrt(1.0 + g1 * g1 + g2 * g2)
    normal = np.array([-g1, -g2, 1.0]) / sigma
    return np.array([x1, x2, psi]), normal, sigma
