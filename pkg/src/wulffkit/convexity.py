"""Inverted polar graphs, their convex hulls, and the convexity test.

A positive function gamma on S^n has an inverted graph: the set of
points theta / gamma(-theta).  gamma is a convex integrand exactly when
that set is the boundary of its own convex hull.  This module builds
the sampled hull (the dual body), measures how far each sample sits
from the hull boundary, and cross-checks the verdict with the
differential convexity criterion of the radial graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .sphere_fn import DomainError, SphereFunction, _check_unit, sphere_grid, tangent_basis

__all__ = [
    "NotPositiveError",
    "HullError",
    "DualBody",
    "ConvexityReport",
    "dual_embedding",
    "build_dual_body",
    "is_convex_integrand",
    "validate_positive",
    "invert_graph",
    "curve_geometry",
    "surface_geometry",
    "orient2d",
]

DEFAULT_SAMPLES = {1: 1024, 2: 1536}
HULL_TOL = 1e-7  # relative to max radius


class NotPositiveError(ValueError):
    """The function is not positive where positivity is required.

    ``witness`` is a direction realizing the nonpositive value.
    """

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


class HullError(RuntimeError):
    """Hull construction failed; for positive radial samples this is a bug."""


# ---------------------------------------------------------------------------
# exact orientation predicate (float filter, Fraction fallback)

_CCW_ERRBOUND = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


def orient2d(a, b, c) -> int:
    """Sign of the signed area of triangle (a, b, c); exact."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) >= _CCW_ERRBOUND * detsum:
        return int(det > 0) - int(det < 0)
    det = (Fraction(float(a[0])) - Fraction(float(c[0]))) * (
        Fraction(float(b[1])) - Fraction(float(c[1]))
    ) - (Fraction(float(a[1])) - Fraction(float(c[1]))) * (
        Fraction(float(b[0])) - Fraction(float(c[0]))
    )
    return int(det > 0) - int(det < 0)


def _monotone_chain(points: np.ndarray) -> np.ndarray:
    """Indices of the convex hull of 2-D points, counterclockwise."""
    order = np.lexsort((points[:, 1], points[:, 0]))

    def build(idx_iter):
        chain: list[int] = []
        for i in idx_iter:
            while len(chain) >= 2 and orient2d(points[chain[-2]], points[chain[-1]], points[i]) <= 0:
                chain.pop()
            chain.append(int(i))
        return chain

    lower = build(order)
    upper = build(order[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise HullError("degenerate hull: all sample points are collinear")
    return np.asarray(hull, dtype=np.int64)


# ---------------------------------------------------------------------------
# geometry of the inverted graph (exact derivatives)


def curve_geometry(gamma, theta: np.ndarray) -> dict:
    """Pointwise data of the radial curve rho(t) * theta(t), rho = 1/gamma(-theta).

    Returns points, unit tangents, inward unit normals, the polar
    curvature numerator rho^2 + 2 rho'^2 - rho rho'', the curvature
    (positive toward the inward normal), and rho with two derivatives.
    """
    th = np.asarray(theta, dtype=float)
    tp = np.stack([-th[..., 1], th[..., 0]], axis=-1)  # d theta / dt
    u = -th
    q = gamma.value(u)
    gq = gamma.gradient(u)
    hq = gamma.hessian(u)
    # q(t) = gamma(-theta(t)):  u' = -theta', u'' = theta
    up = -tp
    qp = np.sum(gq * up, axis=-1)
    qpp = np.einsum("...i,...ij,...j->...", up, hq, up) + np.sum(gq * th, axis=-1)
    rho = 1.0 / q
    rhop = -qp / q**2
    rhopp = -qpp / q**2 + 2.0 * qp**2 / q**3
    pts = rho[..., None] * th
    dx = rhop[..., None] * th + rho[..., None] * tp
    speed = np.linalg.norm(dx, axis=-1)
    tang = dx / speed[..., None]
    normal = np.stack([-tang[..., 1], tang[..., 0]], axis=-1)  # inward for ccw
    numerator = rho**2 + 2.0 * rhop**2 - rho * rhopp
    kappa = numerator / speed**3
    return {
        "points": pts,
        "tangent": tang,
        "inward_normal": normal,
        "curvature": kappa,
        "numerator": numerator,
        "rho": rho,
        "rho_t": rhop,
        "rho_tt": rhopp,
        "speed": speed,
    }


def surface_geometry(gamma, theta: np.ndarray) -> dict:
    """Pointwise data of the radial surface rho(theta) * theta on S^2.

    First and second fundamental forms are taken with respect to the
    inward unit normal, so a convex boundary has positive semidefinite
    second form and positive principal curvatures.
    """
    th = np.asarray(theta, dtype=float)
    basis = tangent_basis(th)  # (..., 3, 2)
    e1, e2 = basis[..., :, 0], basis[..., :, 1]
    u = -th
    q = gamma.value(u)
    gq = gamma.gradient(u)
    hq = gamma.hessian(u)
    # chart theta(s) = normalize(theta + s1 e1 + s2 e2); q(s) = gamma(-theta(s))
    radial = np.sum(gq * th, axis=-1)
    qj = np.stack([-np.sum(gq * e1, axis=-1), -np.sum(gq * e2, axis=-1)], axis=-1)
    qjk = np.einsum("...di,...de,...ej->...ij", basis, hq, basis)
    qjk = qjk + radial[..., None, None] * np.eye(2)
    r = 1.0 / q
    rj = -qj / q[..., None] ** 2
    rjk = -qjk / q[..., None, None] ** 2 + 2.0 * (
        qj[..., :, None] * qj[..., None, :]
    ) / q[..., None, None] ** 3
    pts = r[..., None] * th
    xj = rj[..., :, None] * th[..., None, :] + r[..., None, None] * np.stack([e1, e2], axis=-2)
    # X_jk = r_jk theta + r_j e_k + r_k e_j - r delta_jk theta
    ee = np.stack([e1, e2], axis=-2)
    xjk = (
        rjk[..., :, :, None] * th[..., None, None, :]
        + rj[..., :, None, None] * ee[..., None, :, :]
        + rj[..., None, :, None] * ee[..., :, None, :]
        - (r[..., None, None, None] * np.eye(2)[..., :, :, None]) * th[..., None, None, :]
    )
    cr = np.cross(xj[..., 0, :], xj[..., 1, :])
    nrm = cr / np.linalg.norm(cr, axis=-1, keepdims=True)
    sign = np.where(np.sum(nrm * pts, axis=-1) < 0, 1.0, -1.0)
    normal = nrm * sign[..., None]
    first = np.einsum("...id,...jd->...ij", xj, xj)
    second = np.einsum("...ijd,...d->...ij", xjk, normal)
    # principal curvatures: det(II - k I) = 0 with I = first form
    a = first[..., 0, 0] * first[..., 1, 1] - first[..., 0, 1] ** 2
    b = -(
        first[..., 0, 0] * second[..., 1, 1]
        + first[..., 1, 1] * second[..., 0, 0]
        - 2.0 * first[..., 0, 1] * second[..., 0, 1]
    )
    c = second[..., 0, 0] * second[..., 1, 1] - second[..., 0, 1] ** 2
    disc = np.sqrt(np.maximum(0.0, b * b - 4.0 * a * c))
    k1 = (-b - disc) / (2.0 * a)
    k2 = (-b + disc) / (2.0 * a)
    return {
        "points": pts,
        "inward_normal": normal,
        "first_form": first,
        "second_form": second,
        "principal_curvatures": np.stack([k1, k2], axis=-1),
        "rho": r,
    }


# ---------------------------------------------------------------------------
# dual body


@dataclass(frozen=True, eq=False)
class DualBody:
    """Sampled boundary of the convex hull of an inverted graph.

    Facets (chords on S^1, triangles for S^2) carry outward unit
    normals and offsets, so interior margins and radial extents are
    linear programs over the stored planes.  ``residuals`` is the
    perpendicular distance from each sample to the hull boundary
    (zero, up to rounding, means the sample is on the hull).
    """

    dimension: int
    directions: np.ndarray
    points: np.ndarray
    inward_normals: np.ndarray
    facets: np.ndarray
    facet_normals: np.ndarray
    facet_offsets: np.ndarray
    residuals: np.ndarray
    inradius: float
    sagitta: float

    @property
    def sample_count(self) -> int:
        return self.points.shape[0]

    @property
    def max_radius(self) -> float:
        return float(np.linalg.norm(self.points, axis=1).max())

    def interior_margin(self, v) -> float:
        """Distance from v to the hull boundary, negative outside."""
        v = np.asarray(v, dtype=float)
        return float(np.min(self.facet_offsets - self.facet_normals @ v))

    def contains(self, v, margin: float = 0.0) -> bool:
        return self.interior_margin(v) >= margin

    def radial_extent(self, dirs: np.ndarray) -> np.ndarray:
        """Hull radial function: r(u) with r(u) * u on the hull boundary."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        out = np.empty(dirs.shape[0])
        for start in range(0, dirs.shape[0], 1024):
            block = dirs[start : start + 1024]
            dots = block @ self.facet_normals.T
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(dots > 1e-14, self.facet_offsets / dots, np.inf)
            out[start : start + 1024] = ratios.min(axis=1)
        return out


def dual_embedding(gamma, theta) -> np.ndarray:
    """Point of the inverted graph sourced at theta: theta / gamma(-theta)."""
    th = _check_unit(theta, gamma.dimension + 1)
    val = float(gamma.value(-th))
    if val <= 0.0:
        raise NotPositiveError(
            f"not a positive integrand: value {val!r} at {(-th).tolist()}",
            witness=-th,
            value=val,
        )
    return th / val


def _hull_1d(points):
    idx = _monotone_chain(points)
    nxt = np.roll(idx, -1)
    facets = np.stack([idx, nxt], axis=1)
    edges = points[nxt] - points[idx]
    normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
    lens = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / lens
    offsets = np.sum(normals * points[idx], axis=1)
    return facets, normals, offsets


def _hull_2d(points):
    try:
        hull = ConvexHull(points)
    except QhullError as exc:  # impossible for positive radial samples around 0
        raise HullError(f"degenerate hull: {exc}") from exc
    normals = hull.equations[:, :3]
    offsets = -hull.equations[:, 3]
    return hull.simplices.astype(np.int64), normals, offsets


def build_dual_body(gamma, samples: int | None = None) -> DualBody:
    """Sample the inverted graph of gamma and build its convex hull.

    Raises NotPositiveError if gamma is not positive on the sample
    grid, and HullError if the hull degenerates (which a positive
    radial sample set surrounding the origin cannot do).
    """
    n = gamma.dimension
    m = samples if samples is not None else DEFAULT_SAMPLES[n]
    theta = sphere_grid(n, m)
    vals = gamma.value(-theta)
    if vals.min() <= 0.0:
        i = int(np.argmin(vals))
        raise NotPositiveError(
            f"not a positive integrand: min value {vals.min()!r}",
            witness=-theta[i],
            value=float(vals.min()),
        )
    if n == 1:
        geo = curve_geometry(gamma, theta)
        pts = geo["points"]
        inward = geo["inward_normal"]
        facets, fn, fo = _hull_1d(pts)
        mids = theta + np.roll(theta, -1, axis=0)
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        mid_pts = mids / gamma.value(-mids)[:, None]
        chord_a = pts
        chord_b = np.roll(pts, -1, axis=0)
        seg = chord_b - chord_a
        seglen = np.linalg.norm(seg, axis=1)
        crossv = np.abs(
            seg[:, 0] * (mid_pts[:, 1] - chord_a[:, 1]) - seg[:, 1] * (mid_pts[:, 0] - chord_a[:, 0])
        )
        sagitta = float(np.max(crossv / np.maximum(seglen, 1e-300)))
    else:
        geo = surface_geometry(gamma, theta)
        pts = geo["points"]
        inward = geo["inward_normal"]
        facets, fn, fo = _hull_2d(pts)
        # mid-facet deviation of the true surface from the hull planes
        centers = pts[facets].mean(axis=1)
        cdirs = centers / np.linalg.norm(centers, axis=1, keepdims=True)
        cpts = cdirs / gamma.value(-cdirs)[:, None]
        sagitta = float(np.max(np.abs(np.sum(fn * cpts, axis=1) - fo)))

    inradius = float(fo.min())
    # perpendicular distance from each sample to the hull boundary,
    # measured along its own ray
    radii = np.linalg.norm(pts, axis=1)
    out = np.empty(m)
    hit = np.empty(m, dtype=np.int64)
    for start in range(0, m, 1024):
        block = theta[start : start + 1024]
        dots = block @ fn.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(dots > 1e-14, fo / dots, np.inf)
        hit[start : start + 1024] = np.argmin(ratios, axis=1)
        out[start : start + 1024] = ratios.min(axis=1)
    cosines = np.sum(theta * fn[hit], axis=1)
    residuals = np.maximum(0.0, (out - radii) * cosines)

    return DualBody(
        dimension=n,
        directions=theta,
        points=pts,
        inward_normals=inward,
        facets=facets,
        facet_normals=fn,
        facet_offsets=fo,
        residuals=residuals,
        inradius=inradius,
        sagitta=sagitta,
    )


def validate_positive(gamma, samples: int | None = None) -> float:
    """Minimum of gamma over the validation grid; raises if not positive."""
    n = gamma.dimension
    m = samples if samples is not None else DEFAULT_SAMPLES[n]
    theta = sphere_grid(n, m)
    vals = gamma.value(theta)
    vmin = float(vals.min())
    if vmin <= 0.0:
        i = int(np.argmin(vals))
        raise NotPositiveError(
            f"not into R+: value {vmin!r} at direction {theta[i].tolist()}",
            witness=theta[i],
            value=vmin,
        )
    return vmin


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of the two-route convexity test."""

    verdict: str  # "yes" | "no" | "indeterminate"
    max_residual: float
    min_curvature_numerator: float
    min_value: float
    samples: int

    @property
    def exit_code(self) -> int:
        return {"yes": 0, "no": 2, "indeterminate": 3}[self.verdict]


def is_convex_integrand(gamma, tol: float = HULL_TOL, samples: int | None = None) -> ConvexityReport:
    """Decide whether gamma is a convex integrand, with an independent cross-check.

    Primary route: every sample of the inverted graph must lie on (not
    inside) its hull boundary within ``tol`` relative to the maximum
    radius.  Cross-check: the differential convexity criterion of the
    radial graph (sign of the polar curvature numerator on S^1,
    nonnegativity of the second fundamental form on S^2).  If the two
    routes disagree, the verdict is "indeterminate".
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = gamma.dimension
    m = samples if samples is not None else DEFAULT_SAMPLES[n]
    min_value = validate_positive(gamma, m)
    body = build_dual_body(gamma, m)
    max_res = float(body.residuals.max())
    hull_yes = max_res <= tol * body.max_radius

    theta = sphere_grid(n, m)
    if n == 1:
        geo = curve_geometry(gamma, theta)
        curv = geo["numerator"]
        scale = float(np.max(geo["rho"] ** 2 + 2.0 * geo["rho_t"] ** 2))
    else:
        geo = surface_geometry(gamma, theta)
        curv = geo["principal_curvatures"].min(axis=-1)
        scale = float(np.abs(geo["principal_curvatures"]).max())
    min_curv = float(curv.min())
    diff_yes = min_curv >= -tol * scale

    if hull_yes and diff_yes:
        verdict = "yes"
    elif not hull_yes and not diff_yes:
        verdict = "no"
    else:
        verdict = "indeterminate"
    return ConvexityReport(
        verdict=verdict,
        max_residual=max_res,
        min_curvature_numerator=min_curv,
        min_value=min_value,
        samples=m,
    )


def invert_graph(directions: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The polar-graph inversion (theta, r) -> (-theta, 1/r) on samples."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    return -np.asarray(directions, dtype=float), 1.0 / radii
