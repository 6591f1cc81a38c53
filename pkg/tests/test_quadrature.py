import numpy as np
import pytest

from halfcrack.geometry import SourceRegion
from halfcrack.quadrature import (
    gauss_interval,
    gauss_rect,
    graded_cells,
    rects_rule,
    region_cells,
    region_rule,
    richardson,
)


def test_gauss_polynomial_exactness():
    # order n integrates degree 2n-1 exactly
    x, w = gauss_interval(4, 0.0, 2.0)
    for p in range(8):
        exact = 2.0 ** (p + 1) / (p + 1)
        assert np.sum(w * x**p) == pytest.approx(exact, rel=1e-13)


def test_gauss_rect_area_and_moments():
    pts, w = gauss_rect((-1.0, 2.0, 0.0, 1.0), 3)
    assert np.sum(w) == pytest.approx(3.0, rel=1e-14)
    assert np.sum(w * pts[:, 0] * pts[:, 1] ** 2) == pytest.approx(1.5 * (1.0 / 3.0), rel=1e-13)


def test_rects_rule_matches_single_rect():
    rect = (0.0, 0.5, -0.25, 1.0)
    p1, w1 = gauss_rect(rect, 4)
    p2, w2 = rects_rule([rect], 4)
    assert np.allclose(p1, p2)
    assert np.allclose(w1, w2)


def test_graded_cells_cover_and_refine():
    base = [(0.0, 1.0, 0.0, 1.0)]
    eps = 0.03
    cells = graded_cells(base, (0.4, 0.6), eps, 4 * eps)
    areas = sum((c[1] - c[0]) * (c[3] - c[2]) for c in cells)
    assert areas == pytest.approx(1.0, rel=1e-12)
    for c in cells:
        dx = max(c[0] - 0.4, 0.0, 0.4 - c[1])
        dy = max(c[2] - 0.6, 0.0, 0.6 - c[3])
        dist = np.hypot(dx, dy)
        diam = np.hypot(c[1] - c[0], c[3] - c[2])
        if dist <= 4 * eps:
            assert diam <= eps + 1e-15


def test_region_rule_integrates_bilinear_exactly(region):
    rule = region_rule(region, 2)
    # the scatter of a constant-1 interior field integrates the interior hat sum
    ones = np.ones(region.num_interior())
    direct = rule.weights @ (rule.interp @ ones)
    via_scatter = np.sum(rule.scatter @ ones)
    assert direct == pytest.approx(via_scatter, rel=1e-13)
    # total area from the weights
    assert np.sum(rule.weights) == pytest.approx(4.0, rel=1e-13)


def test_region_cells_count(region):
    assert len(region_cells(region)) == (region.n1 - 1) * (region.n2 - 1)


def test_richardson_polynomial_model():
    eps = np.array([0.2, 0.1, 0.05])
    limit, c1, c2 = 1.37, -0.6, 2.1
    vals = limit + c1 * eps + c2 * eps**2
    assert richardson(eps, vals) == pytest.approx(limit, abs=1e-12)


def test_richardson_validates_shapes():
    with pytest.raises(ValueError):
        richardson([0.1, 0.05], [1.0, 2.0, 3.0])


def test_region_rule_cached(region):
    assert region_rule(region, 4) is region_rule(region, 4)


def test_region_validation():
    with pytest.raises(ValueError):
        SourceRegion(1.0, -1.0, 0.0, 1.0, 5, 5)
    with pytest.raises(ValueError):
        SourceRegion(0.0, 1.0, 0.0, 1.0, 2, 5)
