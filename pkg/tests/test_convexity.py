import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from wulffkit import (
    NotPositiveError,
    SphereFunction,
    build_dual_body,
    circle_grid,
    dual_embedding,
    invert_graph,
    is_convex_integrand,
    validate_positive,
)
from wulffkit.convexity import curve_geometry, orient2d, surface_geometry

from conftest import (
    conic_s1,
    ellipse_dual_s1,
    limacon_s1,
    negative_corpus_s1,
    positive_corpus_s1,
    positive_corpus_s2,
    round_s1,
)


class TestDualEmbedding:
    def test_round_is_identity(self):
        assert np.allclose(dual_embedding(round_s1(), [0.0, 1.0]), [0.0, 1.0])

    def test_affine_poles(self):
        f = conic_s1()
        assert np.allclose(dual_embedding(f, [1.0, 0.0]), [1.0, 0.0])
        assert np.allclose(dual_embedding(f, [-1.0, 0.0]), [-1.0 / 3.0, 0.0])

    def test_nonpositive_rejected(self):
        f = SphereFunction(1, [((1, 0), 1.0)])
        with pytest.raises(NotPositiveError):
            dual_embedding(f, [1.0, 0.0])


class TestDualBody:
    def test_round_circle_on_hull(self):
        body = build_dual_body(round_s1(), 360)
        assert body.residuals.max() <= 2e-4
        # chord sagitta of a 1 degree arc
        assert abs(body.sagitta - (1.0 - np.cos(np.pi / 360.0))) < 1e-12
        assert body.facets.shape[0] == 360  # every sample is a hull vertex

    def test_ellipse_dual_all_on_hull(self):
        body = build_dual_body(ellipse_dual_s1(), 720)
        assert body.residuals.max() <= 1e-12
        # the samples really are the ellipse
        p = body.points
        assert np.abs(p[:, 0] ** 2 / 4.0 + p[:, 1] ** 2 - 1.0).max() < 1e-12

    def test_limacon_concave_arcs_inside_hull(self):
        body = build_dual_body(limacon_s1(), 10_000)
        # independent hull-membership check via a different hull code
        qhull = ConvexHull(body.points)
        off_hull = np.setdiff1d(np.arange(10_000), qhull.vertices)
        assert off_hull.size > 1000  # two concave arcs
        assert np.all(body.residuals[off_hull] > 0.0)
        assert body.residuals.max() > 1e-3

    def test_sagitta_quadratic_rate(self):
        vals = [build_dual_body(round_s1(), m).sagitta for m in (180, 360, 720)]
        assert vals[0] > vals[1] > vals[2]
        assert 3.5 < vals[0] / vals[1] < 4.5
        assert 3.5 < vals[1] / vals[2] < 4.5

    def test_interior_margin(self):
        body = build_dual_body(round_s1(), 360)
        assert abs(body.interior_margin([0.0, 0.0]) - np.cos(np.pi / 360.0)) < 1e-12
        assert body.interior_margin([2.0, 0.0]) < 0.0
        assert abs(body.inradius - np.cos(np.pi / 360.0)) < 1e-12

    def test_radial_extent_of_circle(self):
        body = build_dual_body(round_s1(), 720)
        dirs = circle_grid(17)
        r = body.radial_extent(dirs)
        assert np.all(r <= 1.0 + 1e-12)
        assert np.all(r >= np.cos(np.pi / 720.0) - 1e-12)


class TestConvexityVerdicts:
    def test_round_yes(self):
        rep = is_convex_integrand(round_s1())
        assert rep.verdict == "yes"
        assert rep.max_residual < 1e-12
        assert rep.min_value == 1.0

    def test_positive_corpus_yes(self):
        for f in positive_corpus_s1() + positive_corpus_s2():
            assert is_convex_integrand(f).verdict == "yes"

    def test_negative_family_no(self):
        for f in negative_corpus_s1():
            rep = is_convex_integrand(f)
            assert rep.verdict == "no"
            assert rep.min_curvature_numerator < 0

    def test_negative_family_numerator_matches_closed_form(self):
        # rho = 1 + 0.6 cos 3t: numerator rho^2 + 2 rho'^2 - rho rho''
        # evaluated on a 10^4 grid has minimum -2 (at cos 3t = -1)
        t = np.linspace(0.0, 2.0 * np.pi, 10_000, endpoint=False)
        rho = 1.0 + 0.6 * np.cos(3.0 * t)
        rp = -1.8 * np.sin(3.0 * t)
        rpp = -5.4 * np.cos(3.0 * t)
        num = rho**2 + 2.0 * rp**2 - rho * rpp
        assert num.min() < 0
        rep = is_convex_integrand(negative_corpus_s1()[0], samples=10_000)
        assert abs(rep.min_curvature_numerator - num.min()) < 1e-9

    def test_limacon_no(self):
        assert is_convex_integrand(limacon_s1()).verdict == "no"

    def test_verdicts_stable_across_sampling(self):
        for f in [round_s1(), ellipse_dual_s1(), negative_corpus_s1()[0]]:
            verdicts = {is_convex_integrand(f, samples=m).verdict for m in (360, 720, 1440)}
            assert len(verdicts) == 1


class TestValidatePositive:
    def test_examples(self):
        assert validate_positive(round_s1()) == 1.0
        assert validate_positive(conic_s1()) == pytest.approx(1.0, abs=1e-6)

    def test_sign_change_witness(self):
        f = SphereFunction(1, [((1, 0), 1.0)])
        with pytest.raises(NotPositiveError) as err:
            validate_positive(f)
        assert err.value.value <= 0.0
        assert np.allclose(err.value.witness, [-1.0, 0.0], atol=1e-2)


class TestInversion:
    def test_involution_on_fixed_samples(self):
        dirs = circle_grid(32)
        radii = np.linspace(0.3, 3.0, 32)
        d2, r2 = invert_graph(*invert_graph(dirs, radii))
        assert np.array_equal(d2, dirs)
        # reciprocal rounding allows at most one ulp of drift
        assert np.all(np.abs(r2 - radii) <= np.spacing(radii))

    @given(st.lists(st.floats(1e-3, 1e3, allow_nan=False), min_size=1, max_size=50))
    @settings(max_examples=50, deadline=None)
    def test_involution_property(self, radii):
        radii = np.asarray(radii)
        dirs = circle_grid(len(radii))
        d2, r2 = invert_graph(*invert_graph(dirs, radii))
        assert np.array_equal(d2, dirs)
        assert np.all(np.abs(r2 - radii) <= np.spacing(radii))

    def test_rejects_nonpositive_radii(self):
        with pytest.raises(ValueError):
            invert_graph(circle_grid(4), np.array([1.0, -1.0, 2.0, 3.0]))


class TestGeometryHelpers:
    def test_circle_curvature(self):
        geo = curve_geometry(round_s1(), circle_grid(64))
        assert np.allclose(geo["curvature"], 1.0, atol=1e-12)
        assert np.allclose(geo["inward_normal"], -geo["points"], atol=1e-12)

    def test_ellipse_curvature_extremes(self):
        # kappa(a,0) = a/b^2, kappa(0,b) = b/a^2 for the standard ellipse
        theta = np.array([[1.0, 0.0], [0.0, 1.0]])
        geo = curve_geometry(ellipse_dual_s1(), theta)
        assert np.allclose(geo["curvature"], [2.0, 0.25], atol=1e-12)

    def test_round_sphere_forms(self):
        from conftest import round_s2

        geo = surface_geometry(round_s2(), np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))
        assert np.allclose(geo["principal_curvatures"], 1.0, atol=1e-12)
        assert np.allclose(geo["inward_normal"], -geo["points"], atol=1e-12)

    def test_orient2d_exactness(self):
        a, b = (0.0, 0.0), (1.0, 1.0)
        up = float(np.nextafter(0.5, 1.0))
        down = float(np.nextafter(0.5, 0.0))
        assert orient2d(a, b, (0.5, 0.5)) == 0
        assert orient2d(a, b, (0.5, up)) == 1
        assert orient2d(a, b, (0.5, down)) == -1
