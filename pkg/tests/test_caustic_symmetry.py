import numpy as np
import pytest

from wulffkit import (
    SquaredDistance,
    caustic,
    hausdorff_distance,
    intrinsic_gradient,
    stabilize,
    sym_via_fronts,
    symmetry_set,
    wave_front,
)

from conftest import ellipse_dual_s1, round_s1, round_s2, triaxial_s2


def _one_axis():
    from wulffkit import RadialQuotient, SphereFunction

    return RadialQuotient(SphereFunction(1, [((0, 0), 1.0), ((1, 0), 0.2)]))


class TestWaveFront:
    def test_circle_focal_collapse(self):
        f = wave_front(round_s1(), 1.0, 64)
        assert np.linalg.norm(f.points, axis=1).max() < 1e-12
        assert f.singular.all()

    def test_circle_half_offset(self):
        f = wave_front(round_s1(), 0.5, 64)
        r = np.linalg.norm(f.points, axis=1)
        assert np.allclose(r, 0.5, atol=1e-12)
        assert not f.singular.any()

    def test_offset_identity(self):
        f = wave_front(ellipse_dual_s1(), 0.35, 128)
        assert np.array_equal(f.points, f.base_points + 0.35 * f.normals)

    def test_ellipse_first_cusp(self):
        # curvature maximum a/b^2 = 2 at (+-a, 0): first rank drop at t = 1/2
        f = wave_front(ellipse_dual_s1(), 0.5, 360)
        assert f.singular.sum() == 2
        sang = np.sort(np.abs(f.sources[f.singular][:, 0]))
        assert np.allclose(sang, 1.0, atol=1e-12)
        assert not wave_front(ellipse_dual_s1(), 0.4, 360).singular.any()

    def test_rank_drop_oracle(self):
        # brute force: the offset map's rank drop shows as a vanishing
        # derivative of the front along the curve parameter
        for t, expect_drop in [(0.5, True), (0.4, False)]:
            f = wave_front(ellipse_dual_s1(), t, 4096)
            d = np.linalg.norm(np.roll(f.points, -1, axis=0) - f.points, axis=1)
            base = np.linalg.norm(
                np.roll(f.base_points, -1, axis=0) - f.base_points, axis=1
            )
            ratio = float((d / base).min())
            assert (ratio < 1e-2) == expect_drop

    def test_sphere_front(self):
        f = wave_front(round_s2(), 0.5, 400)
        assert np.allclose(np.linalg.norm(f.points, axis=1), 0.5, atol=1e-12)


class TestCaustic:
    def test_circle_collapses_to_center(self):
        c = caustic(round_s1(), 256)
        assert np.linalg.norm(c.points, axis=1).max() < 1e-12
        assert c.det_residuals.max() <= 1e-6
        assert c.grad_residuals.max() <= 1e-10

    def test_round_sphere_collapses_to_center(self):
        c = caustic(round_s2(), 512)
        assert np.linalg.norm(c.points, axis=1).max() < 1e-7
        assert c.det_residuals.max() <= 1e-6

    def test_ellipse_matches_classical_evolute(self):
        # the classical evolute ((a^2-b^2)/a cos^3 u, (b^2-a^2)/b sin^3 u)
        # is the scaled astroid |x/1.5|^(2/3) + |y/3|^(2/3) = 1
        c = caustic(ellipse_dual_s1(), 1024)
        lhs = np.abs(c.points[:, 0] / 1.5) ** (2.0 / 3.0) + np.abs(
            c.points[:, 1] / 3.0
        ) ** (2.0 / 3.0)
        assert np.abs(lhs - 1.0).max() < 1e-9
        u = np.linspace(0.0, 2.0 * np.pi, 200_000, endpoint=False)
        classical = np.stack([1.5 * np.cos(u) ** 3, -3.0 * np.sin(u) ** 3], axis=1)
        assert hausdorff_distance(c.points, classical) < 1e-3

    def test_ellipse_cusps(self):
        c = caustic(ellipse_dual_s1(), 1024)
        for cusp in ([1.5, 0.0], [-1.5, 0.0], [0.0, 3.0], [0.0, -3.0]):
            d = np.linalg.norm(c.points - np.asarray(cusp), axis=1).min()
            assert d < 1e-3

    def test_certification(self):
        for gamma in [ellipse_dual_s1(), triaxial_s2()]:
            c = caustic(gamma, 512)
            assert c.det_residuals.max() <= 1e-6
            assert c.grad_residuals.max() <= 1e-8

    def test_triaxial_two_sheets(self):
        c = caustic(triaxial_s2(), 512)
        assert set(np.unique(c.sheet)) == {0, 1}

    def test_definition_at_emitted_points(self):
        # spot check: the squared-distance member at an emitted center has a
        # critical point at the source (gradient vanishes there)
        c = caustic(ellipse_dual_s1(), 64)
        gamma = ellipse_dual_s1()
        for k in range(0, 64, 16):
            f = SquaredDistance(gamma, c.points[k])
            g = intrinsic_gradient(f, c.sources[k] / np.linalg.norm(c.sources[k]))
            assert np.linalg.norm(g) < 1e-10


class TestSymmetrySet:
    def test_circle_degenerates_to_center(self):
        s = symmetry_set(round_s1(), 512)
        assert s.rotationally_degenerate
        assert s.points.shape == (1, 2)
        assert np.linalg.norm(s.points[0]) < 1e-12

    def test_ellipse_axes(self):
        s = symmetry_set(ellipse_dual_s1(), 1000)
        pts = s.points
        on_axis = np.minimum(np.abs(pts[:, 0]), np.abs(pts[:, 1])) < 1e-6
        assert on_axis.all()
        on_x = np.abs(pts[:, 1]) < 1e-6
        assert np.abs(pts[on_x, 0]).max() < 1.5
        assert np.abs(pts[~on_x, 1]).max() < 3.0
        assert np.abs(pts[on_x, 0]).max() > 1.45  # reaches toward the cusps
        assert np.abs(pts[~on_x, 1]).max() > 2.95

    def test_pairs_certified(self):
        s = symmetry_set(ellipse_dual_s1(), 500)
        gamma = ellipse_dual_s1()
        assert max(p.value_residual for p in s.pairs) <= 1e-8 * 4.0
        for p in list(s.pairs)[:: max(1, len(s.pairs) // 8)]:
            f = SquaredDistance(gamma, p.center)
            assert np.linalg.norm(intrinsic_gradient(f, p.theta1)) < 1e-9
            assert np.linalg.norm(intrinsic_gradient(f, p.theta2)) < 1e-9
            assert abs(f(p.theta1) - f(p.theta2)) < 1e-8

    def test_one_axis_curve_contains_axis_segment(self):
        s = symmetry_set(_one_axis(), 800)
        pts = s.points
        on_axis = pts[np.abs(pts[:, 1]) < 1e-8]
        assert on_axis.shape[0] > 100
        assert on_axis[:, 0].max() - on_axis[:, 0].min() > 0.01

    def test_stabilized_translation_avoids_symmetry_set(self):
        gamma = ellipse_dual_s1()
        res = stabilize(gamma, 0.15, seed=5)
        s = symmetry_set(gamma, 800)
        d = np.linalg.norm(s.points - res.v, axis=1).min()
        assert d > 1e-4

    def test_curves_only(self):
        with pytest.raises(ValueError):
            symmetry_set(round_s2())


class TestSymViaFronts:
    def test_circle_origin_only(self):
        pts = sym_via_fronts(round_s1(), grid=256)
        assert pts.shape[0] >= 1
        assert np.linalg.norm(pts, axis=1).max() < 5e-3

    def test_ellipse_oracle_agreement(self):
        grid = 600
        s = symmetry_set(ellipse_dual_s1(), grid)
        f = sym_via_fronts(ellipse_dual_s1(), t_range=(0.0, 4.1), grid=grid)
        spacing = 2.0 * np.pi * 2.0 / grid  # worst-case sample step
        assert hausdorff_distance(s.points, f) <= 5.0 * spacing

    def test_front_points_on_axes(self):
        f = sym_via_fronts(ellipse_dual_s1(), t_range=(0.0, 4.1), grid=600)
        assert np.minimum(np.abs(f[:, 0]), np.abs(f[:, 1])).max() < 1e-6

    def test_curves_only(self):
        with pytest.raises(ValueError):
            sym_via_fronts(round_s2())


class TestProp4Inclusion:
    def test_round_case_sym_inside_caustic(self):
        # both sets collapse to the center for the round case
        s = symmetry_set(round_s1(), 256)
        c = caustic(round_s1(), 256)
        for p in s.points:
            assert np.linalg.norm(c.points - p, axis=1).min() < 1e-9


class TestHausdorff:
    def test_known_distance(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        b = np.array([[0.0, 0.25]])
        assert hausdorff_distance(a, b) == pytest.approx(np.sqrt(1.0 + 0.0625))

    def test_empty_is_infinite(self):
        assert hausdorff_distance(np.zeros((0, 2)), np.zeros((1, 2))) == np.inf
