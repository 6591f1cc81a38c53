"""Weak jump relations of layer-potential derivatives across a plane.

Each relation pairs an epsilon-offset kernel difference

    K_eps(x, y) = k(x + eps*n, y) - k(x - eps*n, y)

with a density g and a test function phi on the plane and states the
limit of the double surface integral as eps -> 0.  The eight kernels k
are the dipole kernel with direction n or t and first derivatives in x
or y along n or t; the limits are either zero or pairings of g with
phi, its tangential derivative, or its surface Laplacian.

The plane patch is parametrized by an orthonormal in-plane basis, so
the surface calculus (tangential derivative, surface Laplacian, dS)
reduces to flat 2-d calculus in the patch coordinates.  Test functions
are smooth radial bumps vanishing with all derivatives at their support
boundary; their derivatives are closed forms.

Evaluation at fixed eps refines the inner quadrature near the outer
point (cells within 4*eps split until the diameter drops below eps) and
the limit is extrapolated from a decreasing eps sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .geometry import PlaneParams, make_frame
from .kernels import dipole, dipole_dxdy, dipole_dy
from .quadrature import gauss_rect, graded_cells, rects_rule, richardson


class JumpKind(Enum):
    """The eight kernel/derivative combinations with verified limits."""

    DOUBLE_LAYER = "double_layer"                        # k = G(., ., n); limit int g phi
    TGRAD_DOUBLE_LAYER = "tgrad_double_layer"            # d/dy_t G(., ., n); int g dphi/dt
    TANGENT_LAYER = "tangent_layer"                      # G(., ., t); 0
    NGRAD_DOUBLE_LAYER = "ngrad_double_layer"            # d/dy_n G(., ., n); 0
    NORMAL_DERIV_DOUBLE_LAYER = "normal_deriv_double_layer"    # d/dx_n G(., ., n); 0
    NORMAL_DERIV_TANGENT_LAYER = "normal_deriv_tangent_layer"  # d/dx_n G(., ., t); -int g dphi/dt
    HYPERSINGULAR = "hypersingular"                      # d/dx_n d/dy_n G(., ., n); int g lap phi
    NORMAL_DERIV_TGRAD_LAYER = "normal_deriv_tgrad_layer"      # d/dx_n d/dy_t G(., ., n); 0


ALL_KINDS = tuple(JumpKind)

ZERO_LIMIT_KINDS = frozenset(
    {
        JumpKind.TANGENT_LAYER,
        JumpKind.NGRAD_DOUBLE_LAYER,
        JumpKind.NORMAL_DERIV_DOUBLE_LAYER,
        JumpKind.NORMAL_DERIV_TGRAD_LAYER,
    }
)


def _bump_terms(pts, center, radius):
    """Profile b, db/ds and d2b/ds2 of exp(1 - 1/(1-s)), s = r^2/radius^2."""
    u = np.atleast_2d(pts) - np.asarray(center)
    s = (u[:, 0] ** 2 + u[:, 1] ** 2) / radius**2
    b = np.zeros_like(s)
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    inside = s < 1.0
    si = s[inside]
    one = 1.0 - si
    bi = np.exp(1.0 - 1.0 / one)
    b[inside] = bi
    b1[inside] = -bi / one**2
    b2[inside] = bi * (2.0 * si - 1.0) / one**4
    return u, s, b, b1, b2


@dataclass(frozen=True)
class TestPair:
    """Density g and test function phi: radial smooth bumps on the patch.

    Coordinates are the in-plane orthonormal patch coordinates; both
    supports must stay strictly inside the patch square.  The centers
    are offset by default so that the tangential-derivative pairings do
    not vanish by symmetry.
    """

    g_center: tuple[float, float] = (-0.15, 0.1)
    g_radius: float = 0.62
    g_amp: float = 1.0
    phi_center: tuple[float, float] = (0.12, -0.08)
    phi_radius: float = 0.58
    phi_amp: float = 1.0

    def g_value(self, pts):
        _, _, b, _, _ = _bump_terms(pts, self.g_center, self.g_radius)
        return self.g_amp * b

    def phi_value(self, pts):
        _, _, b, _, _ = _bump_terms(pts, self.phi_center, self.phi_radius)
        return self.phi_amp * b

    def phi_tgrad(self, pts):
        """Tangential derivative of phi along the first patch axis."""
        u, _, _, b1, _ = _bump_terms(pts, self.phi_center, self.phi_radius)
        return self.phi_amp * b1 * 2.0 * u[:, 0] / self.phi_radius**2

    def phi_surf_lap(self, pts):
        """Surface Laplacian of phi (flat 2-d Laplacian in patch coordinates)."""
        _, s, _, b1, b2 = _bump_terms(pts, self.phi_center, self.phi_radius)
        return self.phi_amp * (4.0 / self.phi_radius**2) * (s * b2 + b1)

    def support_margin(self, patch_half: float = 1.0) -> float:
        reach = max(
            max(abs(c) for c in self.g_center) + self.g_radius,
            max(abs(c) for c in self.phi_center) + self.phi_radius,
        )
        return patch_half - reach


def _patch_basis(m: PlaneParams):
    """(origin, t1, t2, n) of the plane patch; t1 is the jump-formula tangent."""
    frame = make_frame(m)
    t1, t2 = frame.tangent_pair()
    origin = np.array([0.0, 0.0, m.d])
    return origin, t1, t2, frame.n


def _to3d(origin, t1, t2, pts2d):
    return origin + np.outer(pts2d[:, 0], t1) + np.outer(pts2d[:, 1], t2)


def _support_rect(center, radius):
    return (center[0] - radius, center[0] + radius, center[1] - radius, center[1] + radius)


def _base_cells(center, radius, n: int):
    c1 = np.linspace(center[0] - radius, center[0] + radius, n + 1)
    c2 = np.linspace(center[1] - radius, center[1] + radius, n + 1)
    return [
        (c1[i], c1[i + 1], c2[j], c2[j + 1]) for i in range(n) for j in range(n)
    ]


@lru_cache(maxsize=8)
def _outer_rule(pair: TestPair, order: int):
    pts, w = gauss_rect(_support_rect(pair.phi_center, pair.phi_radius), order)
    return pts, w * pair.phi_value(pts)


@lru_cache(maxsize=32)
def _inner_batch(pair: TestPair, eps: float, base_n: int, cell_order: int, outer_order: int):
    """Per-outer-point graded inner rules, concatenated for one batched kernel call.

    Returns (outer - pts2d, outer phi-weights, inner pts2d, inner
    g-weights, segment counts); the grading depends only on eps and the
    pair geometry.
    """
    outer_pts, outer_w = _outer_rule(pair, outer_order)
    base = _base_cells(pair.g_center, pair.g_radius, base_n)
    pts_list = []
    w_list = []
    counts = np.empty(len(outer_pts), dtype=int)
    for i, xo in enumerate(outer_pts):
        cells = graded_cells(base, xo, eps, 4.0 * eps)
        pts, w = rects_rule(cells, cell_order)
        pts_list.append(pts)
        w_list.append(w * pair.g_value(pts))
        counts[i] = len(w)
    return (
        outer_pts,
        outer_w,
        np.concatenate(pts_list, axis=0),
        np.concatenate(w_list, axis=0),
        counts,
    )


def _kernel_diff(kind: JumpKind, xp, xm, y, n, t):
    """Difference of the kind's kernel at the +/- offset points."""
    if kind is JumpKind.DOUBLE_LAYER:
        return dipole(xp, y, n) - dipole(xm, y, n)
    if kind is JumpKind.TGRAD_DOUBLE_LAYER:
        return dipole_dy(xp, y, n, t) - dipole_dy(xm, y, n, t)
    if kind is JumpKind.TANGENT_LAYER:
        return dipole(xp, y, t) - dipole(xm, y, t)
    if kind is JumpKind.NGRAD_DOUBLE_LAYER:
        return dipole_dy(xp, y, n, n) - dipole_dy(xm, y, n, n)
    if kind is JumpKind.NORMAL_DERIV_DOUBLE_LAYER:
        # x-derivative of the free kernel flips the sign of the y-derivative
        return -(dipole_dy(xp, y, n, n) - dipole_dy(xm, y, n, n))
    if kind is JumpKind.NORMAL_DERIV_TANGENT_LAYER:
        return -(dipole_dy(xp, y, t, n) - dipole_dy(xm, y, t, n))
    if kind is JumpKind.HYPERSINGULAR:
        return dipole_dxdy(xp, y, n, n, n) - dipole_dxdy(xm, y, n, n, n)
    if kind is JumpKind.NORMAL_DERIV_TGRAD_LAYER:
        return dipole_dxdy(xp, y, n, t, n) - dipole_dxdy(xm, y, n, t, n)
    raise ValueError(f"unknown jump kind {kind}")


def lhs_eps(
    kind: JumpKind,
    m: PlaneParams,
    pair: TestPair,
    eps: float,
    base_n: int = 6,
    cell_order: int = 4,
    outer_order: int = 20,
) -> float:
    """The double surface integral of the kind's kernel difference at offset eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    margin = pair.support_margin()
    if eps > margin:
        raise ValueError(f"eps {eps} exceeds the support-to-boundary margin {margin}")
    outer_pts, outer_w, inner_pts, inner_w, counts = _inner_batch(
        pair, float(eps), base_n, cell_order, outer_order
    )
    origin, t1, t2, n = _patch_basis(m)
    outer3 = _to3d(origin, t1, t2, outer_pts)
    inner3 = _to3d(origin, t1, t2, inner_pts)
    x_rep = np.repeat(outer3, counts, axis=0)
    kvals = _kernel_diff(kind, x_rep + eps * n, x_rep - eps * n, inner3, n, t1)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    inner_vals = np.add.reduceat(kvals * inner_w, starts)
    return float(np.sum(outer_w * inner_vals))


def rhs_reference(kind: JumpKind, pair: TestPair, order: int = 60) -> float:
    """Closed-form right side of the kind's limit by high-order quadrature."""
    if kind in ZERO_LIMIT_KINDS:
        return 0.0
    pts, w = gauss_rect(_support_rect(pair.phi_center, pair.phi_radius), order)
    g = pair.g_value(pts)
    if kind is JumpKind.DOUBLE_LAYER:
        return float(np.sum(w * g * pair.phi_value(pts)))
    if kind is JumpKind.TGRAD_DOUBLE_LAYER:
        return float(np.sum(w * g * pair.phi_tgrad(pts)))
    if kind is JumpKind.NORMAL_DERIV_TANGENT_LAYER:
        return -float(np.sum(w * g * pair.phi_tgrad(pts)))
    if kind is JumpKind.HYPERSINGULAR:
        return float(np.sum(w * g * pair.phi_surf_lap(pts)))
    raise ValueError(f"unknown jump kind {kind}")


def pair_scale(pair: TestPair, order: int = 60) -> float:
    """Reference magnitude int |g| |phi| dS for relative errors of zero limits."""
    pts, w = gauss_rect(_support_rect(pair.phi_center, pair.phi_radius), order)
    return float(np.sum(w * np.abs(pair.g_value(pts)) * np.abs(pair.phi_value(pts))))


@dataclass
class JumpCheck:
    kind: JumpKind
    eps_list: np.ndarray
    lhs_values: np.ndarray
    limit: float
    rhs: float
    rel_err: float


def verify_jump(
    kind: JumpKind,
    m: PlaneParams,
    pair: TestPair,
    eps_list,
    **quad_opts,
) -> JumpCheck:
    """Extrapolate the eps-offset values to zero and compare with the limit.

    The extrapolation assumes an expansion of the offset integral in
    integer powers of eps (first order leading).  For zero limits the
    relative error is measured against the |g|,|phi| pairing scale.
    """
    eps_arr = np.asarray(eps_list, dtype=float)
    if len(eps_arr) < 3:
        raise ValueError("need at least 3 eps values to extrapolate")
    if np.any(np.diff(eps_arr) >= 0):
        raise ValueError("eps_list must be strictly decreasing")
    vals = np.array([lhs_eps(kind, m, pair, e, **quad_opts) for e in eps_arr])
    limit = richardson(eps_arr, vals)
    rhs = rhs_reference(kind, pair)
    denom = abs(rhs) if rhs != 0.0 else max(abs(rhs), pair_scale(pair))
    return JumpCheck(
        kind=kind,
        eps_list=eps_arr,
        lhs_values=vals,
        limit=limit,
        rhs=rhs,
        rel_err=abs(limit - rhs) / denom,
    )
