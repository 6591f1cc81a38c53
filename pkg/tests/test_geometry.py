import math

import numpy as np
import pytest

from halfcrack import (
    CapKind,
    CrackGraph,
    ParamBox,
    PlaneParams,
    SourceRegion,
    crack_depth_margin,
    graph_point,
    grid_nodes,
    make_frame,
)


class TestMakeFrame:
    def test_horizontal_plane(self):
        fr = make_frame(PlaneParams(0.0, 0.0, -2.0))
        assert np.allclose(fr.n, [0.0, 0.0, 1.0])
        assert fr.sigma == 1.0
        assert fr.alpha == 1.0
        assert fr.beta_t == 0.0
        assert fr.t is None

    def test_single_slope(self):
        fr = make_frame(PlaneParams(1.0, 0.0, -3.0))
        assert fr.sigma == pytest.approx(math.sqrt(2.0), abs=1e-15)
        assert np.allclose(fr.n, np.array([-1.0, 0.0, 1.0]) / math.sqrt(2.0))
        assert fr.alpha == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)

    def test_steep_plane_decomposition(self):
        # direct arithmetic: sigma = sqrt(9 + 16 + 1)
        fr = make_frame(PlaneParams(3.0, 4.0, -30.0))
        assert fr.sigma == pytest.approx(math.sqrt(26.0), abs=1e-14)
        assert fr.alpha**2 + fr.beta_t**2 == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_frame_invariants(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.uniform(-2, 2, size=2)
        m = PlaneParams(a, b, -rng.uniform(1, 5))
        fr = make_frame(m)
        assert abs(np.linalg.norm(fr.n) - 1.0) < 1e-14
        if fr.t is not None:
            assert abs(np.dot(fr.n, fr.t)) < 1e-14
            recon = fr.alpha * fr.n + fr.beta_t * fr.t
            assert np.max(np.abs(recon - np.array([0.0, 0.0, 1.0]))) < 1e-14
        t1, t2 = fr.tangent_pair()
        assert abs(np.dot(t1, t2)) < 1e-14
        assert abs(np.dot(t1, fr.n)) < 1e-13


class TestDepthMargin:
    def test_horizontal(self):
        R = SourceRegion(0.0, 1.0, 0.0, 1.0, 3, 3)
        assert crack_depth_margin(PlaneParams(0.0, 0.0, -2.0), R) == 2.0

    def test_violation(self):
        R = SourceRegion(0.0, 2.0, 0.0, 2.0, 3, 3)
        assert crack_depth_margin(PlaneParams(1.0, 0.0, -1.0), R) == pytest.approx(-1.0)

    def test_corner_enumeration_oracle(self):
        R = SourceRegion(-1.0, 1.0, -1.0, 1.0, 5, 5)
        m = PlaneParams(0.2, -0.1, -1.5)
        corners = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
        oracle = -max(m.a * x1 + m.b * x2 + m.d for x1, x2 in corners)
        assert oracle == pytest.approx(1.2)
        assert crack_depth_margin(m, R) == pytest.approx(oracle, abs=1e-15)


class TestGridNodes:
    def test_3x3(self):
        nodes, boundary = grid_nodes(SourceRegion(0, 1, 0, 1, 3, 3))
        assert len(nodes) == 9
        assert np.sum(~boundary) == 1

    def test_5x5_interior(self):
        _, boundary = grid_nodes(SourceRegion(0, 1, 0, 1, 5, 5))
        assert np.sum(~boundary) == 9

    def test_spacing(self):
        R = SourceRegion(0, 2, 0, 1, 5, 3)
        assert R.h1 == pytest.approx(0.5)
        assert R.h2 == pytest.approx(0.5)
        nodes, _ = grid_nodes(R)
        # row-major: x1 index slowest
        assert np.allclose(nodes[0], [0.0, 0.0])
        assert np.allclose(nodes[1], [0.0, 0.5])
        assert np.allclose(nodes[3], [0.5, 0.0])


class TestParamBox:
    def test_margin_over_sampled_grid(self, box, region):
        for m in box.grid((4, 4, 4)):
            assert crack_depth_margin(m, region) >= box.beta_dist - 1e-12

    def test_vertex_violation_raises(self):
        R = SourceRegion(-1, 1, -1, 1, 3, 3)
        bad = ParamBox(PlaneParams(-1.0, 0.0, -1.2), PlaneParams(1.0, 0.0, -1.1), 0.5)
        with pytest.raises(ValueError):
            bad.check(R)

    def test_clip_and_contains(self, box):
        inside = PlaneParams(0.1, 0.0, -1.5)
        assert box.contains(inside)
        clipped = box.clip(np.array([1.0, 0.0, -1.0]))
        assert np.allclose(clipped, [0.25, 0.0, -1.4])


class TestCrackGraph:
    def test_cap_low_center(self):
        crack = CrackGraph(2.0, CapKind.CAP_LOW)
        point, normal, sigma = graph_point(crack, 0.0, 0.0)
        assert point[2] == pytest.approx(-3.0 + math.sqrt(2.0), abs=1e-14)
        assert np.allclose(normal, [0.0, 0.0, 1.0])
        assert sigma == pytest.approx(1.0)

    def test_cap_high_center(self):
        crack = CrackGraph(2.0, CapKind.CAP_HIGH)
        point, _, _ = graph_point(crack, 0.0, 0.0)
        assert point[2] == pytest.approx(-1.0 - math.sqrt(2.0), abs=1e-14)

    @pytest.mark.parametrize("cap", [CapKind.CAP_LOW, CapKind.CAP_HIGH])
    def test_flat_annulus(self, cap):
        crack = CrackGraph(2.0, cap)
        point, normal, sigma = graph_point(crack, 1.5, 0.0)
        assert point[2] == -2.0
        assert np.allclose(normal, [0.0, 0.0, 1.0])
        assert sigma == 1.0

    def test_out_of_disk_rejected(self):
        crack = CrackGraph(2.0, CapKind.CAP_LOW)
        with pytest.raises(ValueError):
            graph_point(crack, 2.0, 0.5)

    @pytest.mark.parametrize("cap", [CapKind.CAP_LOW, CapKind.CAP_HIGH])
    def test_unit_normals_everywhere(self, cap):
        crack = CrackGraph(2.0, cap)
        rng = np.random.default_rng(0)
        r = 1.99 * np.sqrt(rng.random(200))
        t = 2 * np.pi * rng.random(200)
        for x1, x2 in zip(r * np.cos(t), r * np.sin(t)):
            _, normal, _ = graph_point(crack, x1, x2)
            assert abs(np.linalg.norm(normal) - 1.0) < 1e-12

    def test_height_ranges(self):
        low = CrackGraph(2.0, CapKind.CAP_LOW)
        high = CrackGraph(2.0, CapKind.CAP_HIGH)
        x = np.linspace(-1.99, 1.99, 101)
        X1, X2 = np.meshgrid(x, x)
        inside = X1**2 + X2**2 < 4.0
        h_low = low.height(X1, X2)[inside]
        h_high = high.height(X1, X2)[inside]
        assert np.all(h_low >= -3.0) and np.all(h_low <= -3.0 + math.sqrt(2.0) + 1e-15)
        assert np.all(h_high >= -1.0 - math.sqrt(2.0) - 1e-15) and np.all(h_high <= -2.0 + 1e-15)

    def test_lipschitz_gradient_bound(self):
        # |grad psi| = r / sqrt(2 - r^2) <= 1 on the cap (r < 1)
        crack = CrackGraph(2.0, CapKind.CAP_LOW)
        x = np.linspace(-0.999, 0.999, 41)
        g1, g2 = crack.gradient(x, np.zeros_like(x))
        assert np.all(np.hypot(g1, g2) <= 1.0 + 1e-12)
