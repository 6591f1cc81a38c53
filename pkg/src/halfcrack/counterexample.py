"""Two distinct Lipschitz graph cracks with identical surface data.

The two cracks share a flat annulus at depth -2 and differ only over
the unit disk, where one carries the upper cap of the sphere of radius
sqrt(2) centered at (0, 0, -3) and the other the lower cap of the
sphere centered at (0, 0, -1).  With the slip

    g(r) = 3          on r < 1
    g(r) = 4 - r^2    on 1 <= r < 2

the difference of their potentials is the constant-density dipole
integral over the closed lens between the caps: exactly -3 inside the
lens and 0 outside, hence zero Dirichlet and Neumann data on the whole
surface plane.  Inversion from surface data therefore cannot
distinguish the two cracks.

Surface integrals are computed in polar coordinates with separate
radial panels on [0, 1] and [1, 2] (the height functions have a
derivative kink at r = 1) and a uniform periodic rule in the angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .forward import SensorSet
from .geometry import CapKind, CrackGraph
from .quadrature import gauss_interval


def slip_profile(r):
    """Radial slip: 3 on the unit disk, 4 - r^2 on the annulus, 0 at r = 2."""
    r = np.asarray(r, dtype=float)
    return np.where(r < 1.0, 3.0, 4.0 - r * r)


@dataclass(frozen=True)
class CounterexampleSetup:
    """Twin graph cracks plus the polar quadrature resolution."""

    n_r: int = 40
    n_theta: int = 80
    crack_low: CrackGraph = field(default_factory=lambda: CrackGraph(2.0, CapKind.CAP_LOW))
    crack_high: CrackGraph = field(default_factory=lambda: CrackGraph(2.0, CapKind.CAP_HIGH))

    def crack(self, which: CapKind) -> CrackGraph:
        return self.crack_low if which is CapKind.CAP_LOW else self.crack_high

    def refined(self, factor: int = 2) -> "CounterexampleSetup":
        return CounterexampleSetup(n_r=self.n_r * factor, n_theta=self.n_theta * factor)


@lru_cache(maxsize=8)
def _surface_rule(setup: CounterexampleSetup, which: CapKind):
    """Quadrature points on the graph surface with slip-weighted measures.

    Returns (points (Q, 3), scaled normals (Q, 3), weights (Q,)) where
    the weights already include r dr dtheta and the slip value; the
    scaled normal (-grad psi, 1) absorbs the surface element.
    """
    crack = setup.crack(which)
    theta = 2.0 * np.pi * (np.arange(setup.n_theta) + 0.5) / setup.n_theta
    w_theta = np.full(setup.n_theta, 2.0 * np.pi / setup.n_theta)
    pts = []
    normals = []
    weights = []
    for r_lo, r_hi in [(0.0, 1.0), (1.0, 2.0)]:
        r, w_r = gauss_interval(setup.n_r, r_lo, r_hi)
        R, T = np.meshgrid(r, theta, indexing="ij")
        y1 = (R * np.cos(T)).ravel()
        y2 = (R * np.sin(T)).ravel()
        y3 = crack.height(y1, y2)
        g1, g2 = crack.gradient(y1, y2)
        pts.append(np.column_stack([y1, y2, y3]))
        normals.append(np.column_stack([-g1, -g2, np.ones_like(g1)]))
        w2d = np.outer(w_r * r, w_theta).ravel()
        weights.append(w2d * slip_profile(R.ravel()))
    return (
        np.concatenate(pts, axis=0),
        np.concatenate(normals, axis=0),
        np.concatenate(weights, axis=0),
    )


def eval_counterexample_field(setup: CounterexampleSetup, which: CapKind, x) -> np.ndarray:
    """Potential of the graph crack's slip at points x ((..., 3) or (3,))."""
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    ypts, nsig, w = _surface_rule(setup, which)
    K = kernels.dipole_halfspace(xa[:, None, :], ypts[None, :, :], nsig[None, :, :])
    vals = K @ w
    return vals if np.asarray(x).ndim == 2 else float(vals[0])


def counterexample_field_dx3(setup: CounterexampleSetup, which: CapKind, x) -> np.ndarray:
    """x3-derivative of the potential; identically zero on the surface plane."""
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    ypts, nsig, w = _surface_rule(setup, which)
    K = kernels.dipole_halfspace_dx3(xa[:, None, :], ypts[None, :, :], nsig[None, :, :])
    vals = K @ w
    return vals if np.asarray(x).ndim == 2 else float(vals[0])


def field_difference(setup: CounterexampleSetup, x) -> np.ndarray:
    """u_low - u_high: -3 inside the lens between the caps, 0 outside it."""
    return eval_counterexample_field(setup, CapKind.CAP_LOW, x) - eval_counterexample_field(
        setup, CapKind.CAP_HIGH, x
    )


def verify_indistinguishable(
    setup: CounterexampleSetup, sensors: SensorSet
) -> tuple[float, float, float]:
    """Max surface differences of the two fields and their x3-derivatives.

    Returns (max |u_low - u_high|, max |du_low - du_high|, field scale),
    where the scale is the max |u_low| over the sensors; both maxima
    should sit at the quadrature error level relative to the scale.
    """
    pts3 = sensors.points3()
    u_low = eval_counterexample_field(setup, CapKind.CAP_LOW, pts3)
    u_high = eval_counterexample_field(setup, CapKind.CAP_HIGH, pts3)
    du_low = counterexample_field_dx3(setup, CapKind.CAP_LOW, pts3)
    du_high = counterexample_field_dx3(setup, CapKind.CAP_HIGH, pts3)
    return (
        float(np.max(np.abs(u_low - u_high))),
        float(np.max(np.abs(du_low - du_high))),
        float(np.max(np.abs(u_low))),
    )
