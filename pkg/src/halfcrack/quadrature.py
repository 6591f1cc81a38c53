"""Tensor Gauss-Legendre rules, graded subdivision and limit extrapolation.

The forward map integrates smooth kernels over grid cells, so plain
tensor Gauss-Legendre per cell converges exponentially.  Near-crack
field evaluation and the jump-relation checks additionally need rules
whose cells are refined around a marked point until their diameter
matches the offset scale of the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import SourceRegion

# Rectangles are (x1_lo, x1_hi, x2_lo, x2_hi) tuples throughout.
Rect = tuple[float, float, float, float]


@lru_cache(maxsize=64)
def _leggauss(order: int):
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    return np.polynomial.legendre.leggauss(order)


def gauss_interval(order: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    xs, ws = _leggauss(order)
    half = 0.5 * (b - a)
    return a + half * (xs + 1.0), half * ws


def gauss_rect(rect: Rect, order: int):
    """Tensor Gauss-Legendre rule on a rectangle: points (Q, 2), weights (Q,)."""
    x1, w1 = gauss_interval(order, rect[0], rect[1])
    x2, w2 = gauss_interval(order, rect[2], rect[3])
    P1, P2 = np.meshgrid(x1, x2, indexing="ij")
    W = np.outer(w1, w2)
    return np.column_stack([P1.ravel(), P2.ravel()]), W.ravel()


def rects_rule(rects, order: int):
    """Concatenated tensor rule over many rectangles, built in one shot."""
    arr = np.asarray(rects, dtype=float).reshape(-1, 4)
    xs, ws = _leggauss(order)
    u = 0.5 * (xs + 1.0)
    h1 = arr[:, 1] - arr[:, 0]
    h2 = arr[:, 3] - arr[:, 2]
    p1 = arr[:, 0, None] + np.outer(h1, u)  # (C, o)
    p2 = arr[:, 2, None] + np.outer(h2, u)
    w1 = 0.5 * np.outer(h1, ws)
    w2 = 0.5 * np.outer(h2, ws)
    o = order
    pts = np.empty((len(arr), o, o, 2))
    pts[..., 0] = p1[:, :, None]
    pts[..., 1] = p2[:, None, :]
    w = w1[:, :, None] * w2[:, None, :]
    return pts.reshape(-1, 2), w.ravel()


def region_cells(region: SourceRegion) -> list[Rect]:
    x1 = region.x1_nodes()
    x2 = region.x2_nodes()
    return [
        (x1[i], x1[i + 1], x2[j], x2[j + 1])
        for i in range(region.n1 - 1)
        for j in range(region.n2 - 1)
    ]


def _rect_distance(rect: Rect, center: np.ndarray) -> float:
    dx = max(rect[0] - center[0], 0.0, center[0] - rect[1])
    dy = max(rect[2] - center[1], 0.0, center[1] - rect[3])
    return math.hypot(dx, dy)


def _rect_diam(rect: Rect) -> float:
    return math.hypot(rect[1] - rect[0], rect[3] - rect[2])


def graded_cells(
    base: list[Rect],
    center,
    diam_floor: float,
    within: float,
    grading: float = 0.5,
    max_levels: int = 24,
) -> list[Rect]:
    """Quadtree-split cells around a marked point with distance grading.

    Cells closer than ``within`` to ``center`` are split until their
    diameter drops below ``diam_floor``; farther cells are split while
    their diameter exceeds ``grading`` times their distance to the
    point, so cell size grows proportionally with distance and the
    near-point kernel variation stays resolved at every range.
    """
    center = np.asarray(center, dtype=float)
    out: list[Rect] = []
    stack = [(rect, 0) for rect in base]
    while stack:
        rect, level = stack.pop()
        dist = _rect_distance(rect, center)
        target = diam_floor if dist <= within else max(diam_floor, grading * dist)
        if level < max_levels and _rect_diam(rect) > target:
            mx = 0.5 * (rect[0] + rect[1])
            my = 0.5 * (rect[2] + rect[3])
            stack.extend(
                (
                    ((rect[0], mx, rect[2], my), level + 1),
                    ((mx, rect[1], rect[2], my), level + 1),
                    ((rect[0], mx, my, rect[3]), level + 1),
                    ((mx, rect[1], my, rect[3]), level + 1),
                )
            )
        else:
            out.append(rect)
    return out


@dataclass(frozen=True)
class RegionRule:
    """Per-cell tensor rule over a source region with nodal scatter maps.

    ``scatter`` has entries w_q * N_j(q) so that ``kernel_row @ scatter``
    integrates the kernel against the j-th interior nodal basis
    function; ``interp`` holds plain basis values N_j(q) for evaluating
    an interior nodal field at the quadrature points.
    """

    region: SourceRegion
    order: int
    pts: np.ndarray       # (Q, 2)
    weights: np.ndarray   # (Q,)
    scatter: np.ndarray   # (Q, D) weights times basis
    interp: np.ndarray    # (Q, D) basis values


@lru_cache(maxsize=32)
def region_rule(region: SourceRegion, order: int) -> RegionRule:
    """Tensor Gauss-Legendre rule of ``order`` per axis on every grid cell."""
    n1, n2 = region.n1, region.n2
    x1 = region.x1_nodes()
    x2 = region.x2_nodes()
    interior_index = -np.ones((n1, n2), dtype=int)
    k = 0
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            interior_index[i, j] = k
            k += 1
    num_dof = k

    xs, ws = _leggauss(order)
    u = 0.5 * (xs + 1.0)  # local coordinates in [0, 1]
    wu = 0.5 * ws

    pts_list = []
    w_list = []
    rows_scatter = []
    rows_interp = []
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            h1 = x1[i + 1] - x1[i]
            h2 = x2[j + 1] - x2[j]
            U, V = np.meshgrid(u, u, indexing="ij")
            WW = np.outer(wu * h1, wu * h2)
            p1 = x1[i] + U * h1
            p2 = x2[j] + V * h2
            pts_list.append(np.column_stack([p1.ravel(), p2.ravel()]))
            w_cell = WW.ravel()
            w_list.append(w_cell)
            # bilinear basis on the cell, corner order (i,j),(i+1,j),(i,j+1),(i+1,j+1)
            basis = np.column_stack(
                [
                    ((1 - U) * (1 - V)).ravel(),
                    (U * (1 - V)).ravel(),
                    ((1 - U) * V).ravel(),
                    (U * V).ravel(),
                ]
            )
            corner_dofs = [
                interior_index[i, j],
                interior_index[i + 1, j],
                interior_index[i, j + 1],
                interior_index[i + 1, j + 1],
            ]
            sc = np.zeros((basis.shape[0], num_dof))
            ip = np.zeros((basis.shape[0], num_dof))
            for c, dof in enumerate(corner_dofs):
                if dof >= 0:
                    sc[:, dof] += w_cell * basis[:, c]
                    ip[:, dof] += basis[:, c]
            rows_scatter.append(sc)
            rows_interp.append(ip)

    return RegionRule(
        region=region,
        order=order,
        pts=np.concatenate(pts_list, axis=0),
        weights=np.concatenate(w_list, axis=0),
        scatter=np.concatenate(rows_scatter, axis=0),
        interp=np.concatenate(rows_interp, axis=0),
    )


def refined_region_rule(
    region: SourceRegion,
    order: int,
    center,
    eps: float,
    within_factor: float = 4.0,
    diam_factor: float = 0.5,
):
    """Graded rule over the region: cells within ``within_factor * eps`` of
    ``center`` are split until their diameter is below ``diam_factor * eps``,
    with distance-proportional cell growth farther out."""
    cells = graded_cells(
        region_cells(region), center, diam_factor * eps, within_factor * eps
    )
    return rects_rule(cells, order)


def richardson(eps_list, values, powers=None) -> float:
    """Extrapolate values(eps) -> limit assuming an expansion in powers of eps.

    Fits values against [eps^0, eps^1, ..., eps^(k-1)] (or the supplied
    exponent list) and returns the constant term.
    """
    eps_arr = np.asarray(eps_list, dtype=float)
    vals = np.asarray(values, dtype=float)
    if eps_arr.ndim != 1 or eps_arr.shape != vals.shape:
        raise ValueError("eps_list and values must be 1-d and equally long")
    if powers is None:
        powers = range(len(eps_arr))
    columns = [eps_arr**p for p in powers]
    coeffs = np.linalg.solve(np.column_stack(columns), vals)
    return float(coeffs[0])
