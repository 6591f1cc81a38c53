"""Empirical stability of plane recovery from fixed-slip boundary data.

For a fixed slip h, the map from plane parameters (a, b, d) to boundary
data is smooth and injective; its directional derivatives have closed
forms obtained by differentiating the weighted crack kernel.  This
module assembles that Jacobian analytically, certifies its full rank
through the smallest eigenvalue of the weighted Gram matrix, and
measures empirical Lipschitz constants:

  * pairwise data-distance over parameter-distance scans,
  * the projected residual  ||(I - P_m) A_m0 h0||  that lower-bounds
    the best-possible data fit with a wrong geometry, where P_m is the
    (spectrally truncated) orthogonal projector onto the range of the
    discrete crack-to-boundary operator,
  * scans of the same quantity uniformly over slips from an admissible
    set (bounded slip norm, data norm bounded below).

Truncation is unavoidable: the discrete operator has rapidly decaying
singular values, so its numerical range is meaningful only above a
relative spectral cutoff tau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .forward import BoundaryData, ForwardMatrix, SensorSet, SlipGrid, assemble_A, interior_h1_gram
from .geometry import ParamBox, PlaneParams, SourceRegion, plane_points
from .quadrature import region_rule


@dataclass
class FixedSlipMap:
    """Context for plane-to-data maps with one fixed slip.

    Caches assembled operators and Jacobian blocks per plane parameter,
    which the scan operations below hit heavily.
    """

    region: SourceRegion
    sensors: SensorSet
    h: SlipGrid
    quad_order: int = 4
    _ops: dict = field(default_factory=dict, repr=False)
    _jacs: dict = field(default_factory=dict, repr=False)

    def operator(self, m: PlaneParams) -> ForwardMatrix:
        key = (m.a, m.b, m.d)
        if key not in self._ops:
            self._ops[key] = assemble_A(m, self.region, self.sensors, self.quad_order)
        return self._ops[key]

    def jacobian_matrices(self, m: PlaneParams):
        key = (m.a, m.b, m.d)
        if key not in self._jacs:
            self._jacs[key] = assemble_jacobian_matrices(
                m, self.region, self.sensors, self.quad_order
            )
        return self._jacs[key]


def forward_data(map_: FixedSlipMap, m: PlaneParams) -> BoundaryData:
    """Boundary data of the fixed slip for plane parameters m."""
    return map_.operator(m).apply(map_.h)


def assemble_jacobian_matrices(
    m: PlaneParams,
    region: SourceRegion,
    sensors: SensorSet,
    quad_order: int = 4,
):
    """Derivative operators dA/da, dA/db, dA/dd under the assembly quadrature.

    Entries integrate the closed-form plane derivatives of the weighted
    kernel against the interior nodal basis, on exactly the same rule
    as the operator itself.
    """
    rule = region_rule(region, quad_order)
    x3 = sensors.points3()[:, None, :]
    deriv = kernels.dipole_halfspace_dplane(x3, rule.pts[:, 0], rule.pts[:, 1], m)
    return tuple(K @ rule.scatter for K in deriv)


@dataclass
class PhiJacobian:
    """Columns of the data derivative with respect to (a, b, d)."""

    sensors: SensorSet
    columns: np.ndarray  # (S, 3)

    def directional(self, q) -> np.ndarray:
        return self.columns @ np.asarray(q, dtype=float)


def forward_jacobian(map_: FixedSlipMap, m: PlaneParams) -> PhiJacobian:
    """Analytic Jacobian of m -> boundary data at fixed slip."""
    da, db, dd = map_.jacobian_matrices(m)
    h = map_.h.interior_vector()
    return PhiJacobian(map_.sensors, np.column_stack([da @ h, db @ h, dd @ h]))


def gram_matrix(jac: PhiJacobian) -> np.ndarray:
    """Weighted 3x3 Gram matrix of the Jacobian columns."""
    wcols = jac.sensors.weights[:, None] * jac.columns
    return jac.columns.T @ wcols


def gram_min_eig(jac: PhiJacobian) -> float:
    """Smallest eigenvalue of the weighted Gram matrix; > 0 means full rank."""
    return float(np.linalg.eigvalsh(gram_matrix(jac))[0])


def weighted_singular_values(A: ForwardMatrix) -> np.ndarray:
    """Singular values of the operator in the weighted data inner product."""
    sqrt_w = np.sqrt(A.sensors.weights)
    return np.linalg.svd(sqrt_w[:, None] * A.entries, compute_uv=False)


@dataclass
class RangeProjector:
    """Orthogonal projector onto the retained range of a forward operator.

    Retained means left singular vectors with sigma_k >= tau * sigma_1
    under the weighted data inner product.
    """

    sqrt_w: np.ndarray
    basis: np.ndarray    # (S, rank), orthonormal in the Euclidean weighted frame
    sigmas: np.ndarray   # full singular value list
    tau: float

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def apply(self, values: np.ndarray) -> np.ndarray:
        z = self.sqrt_w * np.asarray(values, dtype=float)
        return (self.basis @ (self.basis.T @ z)) / self.sqrt_w

    def complement_norm(self, values: np.ndarray) -> float:
        """Weighted norm of (I - P) values."""
        z = self.sqrt_w * np.asarray(values, dtype=float)
        return float(np.linalg.norm(z - self.basis @ (self.basis.T @ z)))


def range_projector(A: ForwardMatrix, tau: float) -> RangeProjector:
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    sqrt_w = np.sqrt(A.sensors.weights)
    U, s, _ = np.linalg.svd(sqrt_w[:, None] * A.entries, full_matrices=False)
    if s[0] == 0.0:
        raise ValueError("operator is zero; no singular value clears the threshold")
    rank = int(np.sum(s >= tau * s[0]))
    return RangeProjector(sqrt_w=sqrt_w, basis=U[:, :rank], sigmas=s, tau=tau)


def inf_residual(
    map_: FixedSlipMap,
    m: PlaneParams,
    m0: PlaneParams,
    h0: SlipGrid | None = None,
    mode: str = "projection",
    tau: float = 1e-8,
    lam: float | None = None,
) -> float:
    """Best-fit residual of the m-operator against data generated at m0.

    mode "projection" removes the retained range of the m-operator from
    the data ( ||(I - P_m) A_m0 h0|| ); mode "regularized" solves the
    penalized least-squares fit min_h ||A_m h - A_m0 h0||^2 + lam |h|^2
    and reports the unpenalized misfit.  Both lower-bound how well a
    wrong plane can explain the data.
    """
    h0 = map_.h if h0 is None else h0
    data = map_.operator(m0).apply(h0)
    A = map_.operator(m)
    if mode == "projection":
        return range_projector(A, tau).complement_norm(data.values)
    if mode == "regularized":
        sqrt_w = np.sqrt(A.sensors.weights)
        B = sqrt_w[:, None] * A.entries
        if lam is None:
            sigma1 = np.linalg.norm(B, 2)
            lam = 1e-10 * sigma1**2
        gram = interior_h1_gram(map_.region)
        lhs = B.T @ B + lam * gram
        rhs = B.T @ (sqrt_w * data.values)
        sol = scipy.linalg.solve(lhs, rhs, assume_a="pos")
        return A.sensors.norm(A.entries @ sol - data.values)
    raise ValueError(f"unknown mode '{mode}'")


@dataclass
class LipschitzScan:
    c_emp: float
    argmin_pair: tuple[PlaneParams, PlaneParams]
    pairs: list
    ratios: np.ndarray
    near_diagonal: list  # (m, m', distance, ratio) for the injected pairs


def lipschitz_scan(
    map_: FixedSlipMap,
    box: ParamBox,
    num_pairs: int,
    rng_seed: int,
    near_distances: tuple[float, ...] = (1e-2, 1e-3),
    near_count: int | None = None,
) -> LipschitzScan:
    """Minimum data-distance over parameter-distance ratio across sampled pairs.

    Uniform box pairs alone almost never probe the small-separation
    regime, so pairs at fixed small distances along random directions
    are injected on top (near_count per distance, default one tenth of
    num_pairs).
    """
    if num_pairs < 1:
        raise ValueError("need at least one pair")
    rng = np.random.default_rng(rng_seed)
    if near_count is None:
        near_count = max(num_pairs // 10, 1)
    uniform_count = max(num_pairs - near_count * len(near_distances), 0)

    pairs: list[tuple[PlaneParams, PlaneParams]] = []
    tags: list[float] = []  # 0 for uniform, else the injected distance
    draws = box.sample(rng, 2 * uniform_count)
    for i in range(uniform_count):
        ma, mb = draws[2 * i], draws[2 * i + 1]
        if np.allclose(ma.as_array(), mb.as_array()):
            continue
        pairs.append((ma, mb))
        tags.append(0.0)
    span = box.hi.as_array() - box.lo.as_array()
    for dist in near_distances:
        centers = box.sample(rng, near_count)
        for c in centers:
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            other = c.as_array() + dist * direction
            # keep the pair inside the box by flipping the direction if needed
            if np.any(other < box.lo.as_array()) or np.any(other > box.hi.as_array()):
                other = c.as_array() - dist * direction
            other = np.clip(other, box.lo.as_array(), box.hi.as_array())
            mb = PlaneParams.from_array(other)
            if np.allclose(c.as_array(), other):
                continue
            pairs.append((c, mb))
            tags.append(dist)

    ratios = np.empty(len(pairs))
    for i, (ma, mb) in enumerate(pairs):
        da = forward_data(map_, ma)
        db = forward_data(map_, mb)
        dist = np.linalg.norm(ma.as_array() - mb.as_array())
        ratios[i] = map_.sensors.norm(da.values - db.values) / dist
    if len(ratios) == 0:
        raise ValueError("no valid pairs sampled")
    imin = int(np.argmin(ratios))
    near = [
        (pairs[i][0], pairs[i][1], tags[i], float(ratios[i]))
        for i in range(len(pairs))
        if tags[i] > 0.0
    ]
    return LipschitzScan(
        c_emp=float(ratios[imin]),
        argmin_pair=pairs[imin],
        pairs=pairs,
        ratios=ratios,
        near_diagonal=near,
    )


def set_S_check(
    map_: FixedSlipMap,
    h: SlipGrid,
    box_grid: list[PlaneParams],
    M1: float,
    M2: float,
) -> tuple[bool, float, float]:
    """Membership in the admissible slip set with its two margins.

    Requires |h|_H1 <= M2 and min over the grid of the data norm >= M1;
    returns (ok, M2 - |h|_H1, min data norm - M1).
    """
    norm_margin = M2 - h.h1_norm()
    data_min = min(map_.operator(m).apply(h).l2v_norm() for m in box_grid)
    return (norm_margin >= 0.0 and data_min >= M1, norm_margin, data_min - M1)


def uniform_constant_scan(
    map_: FixedSlipMap,
    box_grid: list[PlaneParams],
    S_samples: list[SlipGrid],
    mode: str = "projection",
    tau: float = 1e-8,
    lam: float | None = None,
) -> tuple[float, tuple]:
    """Uniform empirical constant: min over (m, m', h) of inf-residual ratios.

    For every ordered grid pair m != m' and admissible slip h, the
    best-fit residual of the m-operator against A_{m'} h is divided by
    |m - m'|; the overall minimum and its argument are returned.
    """
    if not S_samples:
        raise ValueError("need at least one admissible slip sample")
    best = np.inf
    arg = None
    for h in S_samples:
        for m0 in box_grid:
            for m in box_grid:
                dist = np.linalg.norm(m.as_array() - m0.as_array())
                if dist == 0.0:
                    continue
                val = inf_residual(map_, m, m0, h0=h, mode=mode, tau=tau, lam=lam)
                ratio = val / dist
                if ratio < best:
                    best = ratio
                    arg = (m, m0, h)
    return float(best), arg


def directional_field(
    m: PlaneParams,
    region: SourceRegion,
    h: SlipGrid,
    q,
    x,
    quad_order: int = 4,
    g0: SlipGrid | None = None,
) -> np.ndarray:
    """Directional derivative field of the potential with respect to m.

    Evaluates, with f(y) = q1 y1 + q2 y2 + q3 from the direction q,

        w(x) = int dH/dy3(x, y, n sigma) h f  -  int H(x, y, grad f) h

    which equals q . grad_m of the potential at fixed slip h; an
    optional slip g0 adds the extra term  - int H(x, y, n sigma) g0.
    """
    q = np.asarray(q, dtype=float)
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    rule = region_rule(region, quad_order)
    ypts = plane_points(m, rule.pts)
    nsigma = kernels.plane_scaled_normal(m)
    wh = rule.scatter @ h.interior_vector()
    f = q[0] * rule.pts[:, 0] + q[1] * rule.pts[:, 1] + q[2]
    grad_f = np.array([q[0], q[1], 0.0])
    term1 = kernels.dipole_halfspace_dy3(xa[:, None, :], ypts[None, :, :], nsigma) @ (f * wh)
    term2 = kernels.dipole_halfspace(xa[:, None, :], ypts[None, :, :], grad_f) @ wh
    vals = term1 - term2
    if g0 is not None:
        wg0 = rule.scatter @ g0.interior_vector()
        vals = vals - kernels.dipole_halfspace(xa[:, None, :], ypts[None, :, :], nsigma) @ wg0
    return vals if np.asarray(x).ndim == 2 else float(vals[0])


def directional_field_dx3(
    m: PlaneParams,
    region: SourceRegion,
    h: SlipGrid,
    q,
    x,
    quad_order: int = 4,
    g0: SlipGrid | None = None,
) -> np.ndarray:
    """x3-derivative of the directional field; pointwise zero at x3 = 0."""
    q = np.asarray(q, dtype=float)
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    rule = region_rule(region, quad_order)
    ypts = plane_points(m, rule.pts)
    nsigma = kernels.plane_scaled_normal(m)
    wh = rule.scatter @ h.interior_vector()
    f = q[0] * rule.pts[:, 0] + q[1] * rule.pts[:, 1] + q[2]
    grad_f = np.array([q[0], q[1], 0.0])
    term1 = kernels.dipole_halfspace_dx3dy3(xa[:, None, :], ypts[None, :, :], nsigma) @ (f * wh)
    term2 = kernels.dipole_halfspace_dx3(xa[:, None, :], ypts[None, :, :], grad_f) @ wh
    vals = term1 - term2
    if g0 is not None:
        wg0 = rule.scatter @ g0.interior_vector()
        vals = vals - kernels.dipole_halfspace_dx3(xa[:, None, :], ypts[None, :, :], nsigma) @ wg0
    return vals if np.asarray(x).ndim == 2 else float(vals[0])
