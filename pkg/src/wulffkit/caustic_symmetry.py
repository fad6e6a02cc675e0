"""Caustics, symmetry sets, and wave fronts of inverted graphs.

For the boundary curve or surface traced by a convex integrand's
inverted graph, the caustic is the set of centers whose distance
function has a degenerate critical point (the evolute / focal sheets),
and the symmetry set is the set of centers whose distance function
takes equal values at two distinct critical points.  Wave fronts are
inward normal offsets; their self-intersections sweep out the symmetry
set, which gives an independent oracle for the pair-scan construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .convexity import curve_geometry, orient2d, surface_geometry
from .perturbation import _phi_pieces
from .sphere_fn import sphere_grid, tangent_basis

__all__ = [
    "FrontSample",
    "CausticSet",
    "SymPair",
    "SymmetrySet",
    "wave_front",
    "caustic",
    "symmetry_set",
    "sym_via_fronts",
    "hausdorff_distance",
]

DEFAULT_GRID = {1: 1024, 2: 2048}
SINGULAR_TOL = 1e-8


def _angles(m: int) -> np.ndarray:
    return np.arange(m) * (2.0 * np.pi / m)


def _on_circle(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


# ---------------------------------------------------------------------------
# wave fronts


@dataclass(frozen=True, eq=False)
class FrontSample:
    """Inward normal offset of the sampled boundary at a fixed offset t.

    ``points`` equals ``base_points + t * normals`` exactly; ``singular``
    flags samples where the offset map drops rank (1 - t * curvature
    vanishes at tolerance).
    """

    t: float
    points: np.ndarray
    sources: np.ndarray
    singular: np.ndarray
    base_points: np.ndarray
    normals: np.ndarray


def wave_front(gamma, t: float, grid: int | None = None) -> FrontSample:
    """Offset the inverted graph inward by t along its unit normals."""
    n = gamma.dimension
    m = grid if grid is not None else DEFAULT_GRID[n]
    theta = sphere_grid(n, m)
    if n == 1:
        geo = curve_geometry(gamma, theta)
        base, normal = geo["points"], geo["inward_normal"]
        factors = 1.0 - t * geo["curvature"][..., None]
    else:
        geo = surface_geometry(gamma, theta)
        base, normal = geo["points"], geo["inward_normal"]
        factors = 1.0 - t * geo["principal_curvatures"]
    scale = np.maximum(1.0, np.abs(t) * np.max(np.abs(factors - 1.0), axis=-1) + 1.0)
    singular = np.min(np.abs(factors), axis=-1) <= SINGULAR_TOL * scale
    return FrontSample(
        t=float(t),
        points=base + t * normal,
        sources=theta,
        singular=singular,
        base_points=base,
        normals=normal,
    )


# ---------------------------------------------------------------------------
# caustic (evolute / focal sheets), certified against the definition


@dataclass(frozen=True, eq=False)
class CausticSet:
    """Sampled caustic with per-point certification residuals.

    ``det_residuals`` is |det tangent Hessian| of the squared-distance
    function at the generating source, scaled by the Hessian magnitude;
    ``grad_residuals`` the tangential gradient norm there.  ``skipped``
    counts samples with vanishing curvature (center at infinity).
    """

    dimension: int
    points: np.ndarray
    sources: np.ndarray
    sheet: np.ndarray
    det_residuals: np.ndarray
    grad_residuals: np.ndarray
    skipped: int


def _distance_tangent_data(gamma, theta, centers):
    """Tangential gradient norm and Hessian determinant of the
    squared-distance function, batched over (source, center) pairs."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    phi, grad_s, hess_s, jac = _phi_pieces(gamma, theta)
    w = phi - centers
    grad = np.einsum("...kj,...k->...j", jac, w)
    jtj = np.einsum("...ki,...kj->...ij", jac, jac)
    sym = w[..., :, None] * grad_s[..., None, :]
    wx = np.sum(w * theta, axis=-1)
    hess = jtj + sym + np.swapaxes(sym, -1, -2) + wx[..., None, None] * hess_s
    gt = grad - np.sum(grad * theta, axis=-1, keepdims=True) * theta
    basis = tangent_basis(theta)
    radial = np.sum(grad * theta, axis=-1)
    hraw = np.einsum("...di,...de,...ej->...ij", basis, hess, basis)
    ntan = basis.shape[-1]
    hb = hraw - radial[..., None, None] * np.eye(ntan)
    if ntan == 1:
        det = hb[..., 0, 0]
    else:
        det = hb[..., 0, 0] * hb[..., 1, 1] - hb[..., 0, 1] * hb[..., 1, 0]
    # measure degeneracy against the positive-definite part of the
    # Hessian (squared tangential speed of the embedding), which keeps
    # the scale meaningful where the full Hessian cancels to zero
    jtan = np.einsum("...di,...de,...ej->...ij", basis, jtj, basis)
    scale = np.maximum(np.abs(jtan).max(axis=(-1, -2)), np.abs(radial))
    return np.linalg.norm(gt, axis=-1), np.abs(det), scale


def caustic(gamma, grid: int | None = None, flat_tol: float = 1e-12) -> CausticSet:
    """Centers of curvature of the inverted graph (all sheets).

    Generated from the closed-form curvature data and certified point
    by point against the definition (degenerate critical point of the
    squared-distance function at the source).
    """
    n = gamma.dimension
    m = grid if grid is not None else DEFAULT_GRID[n]
    theta = sphere_grid(n, m)
    pts_list, src_list, sheet_list = [], [], []
    skipped = 0
    if n == 1:
        geo = curve_geometry(gamma, theta)
        kappa = geo["curvature"]
        keep = np.abs(kappa) > flat_tol
        skipped = int((~keep).sum())
        centers = geo["points"][keep] + (1.0 / kappa[keep])[:, None] * geo["inward_normal"][keep]
        pts_list.append(centers)
        src_list.append(theta[keep])
        sheet_list.append(np.zeros(keep.sum(), dtype=np.int64))
    else:
        geo = surface_geometry(gamma, theta)
        for sheet in range(2):
            kappa = geo["principal_curvatures"][:, sheet]
            keep = np.abs(kappa) > flat_tol
            skipped += int((~keep).sum())
            centers = geo["points"][keep] + (1.0 / kappa[keep])[:, None] * geo["inward_normal"][keep]
            pts_list.append(centers)
            src_list.append(theta[keep])
            sheet_list.append(np.full(keep.sum(), sheet, dtype=np.int64))
    points = np.concatenate(pts_list)
    sources = np.concatenate(src_list)
    sheets = np.concatenate(sheet_list)
    grad_res, det_abs, scale = _distance_tangent_data(gamma, sources, points)
    det_scale = np.maximum(scale**n, 1e-300)
    return CausticSet(
        dimension=n,
        points=points,
        sources=sources,
        sheet=sheets,
        det_residuals=det_abs / det_scale,
        grad_residuals=grad_res,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# symmetry set by pair scan with bisection refinement (curves only)


@dataclass(frozen=True, eq=False)
class SymPair:
    """Two distinct sources whose normal lines meet at a common center
    at equal distances."""

    theta1: np.ndarray
    theta2: np.ndarray
    center: np.ndarray
    radius: float
    line_residual: float
    value_residual: float


@dataclass(frozen=True, eq=False)
class SymmetrySet:
    """Pair-scan symmetry set of the inverted graph of a curve."""

    pairs: tuple
    points: np.ndarray
    rotationally_degenerate: bool = False


def _curve_data(gamma, t):
    geo = curve_geometry(gamma, _on_circle(t))
    return geo["points"], geo["inward_normal"]


def _normal_intersection(p1, n1, p2, n2):
    """Intersection of the two normal lines; returns (s, r, det) with
    center = p1 + s n1 = p2 + r n2."""
    det = -(n1[..., 0] * n2[..., 1] - n1[..., 1] * n2[..., 0])
    b = p2 - p1
    s = -(b[..., 0] * n2[..., 1] - b[..., 1] * n2[..., 0]) / det
    r = (n1[..., 0] * b[..., 1] - n1[..., 1] * b[..., 0]) / det
    return s, r, det


def symmetry_set(gamma, grid: int = 2000, tol: float = 1e-8) -> SymmetrySet:
    """Scan source pairs for common equidistant normal centers.

    For each of 2*grid pinned first sources, the equal-distance
    residual is scanned over the grid of second sources and its sign
    changes are refined by bisection in the second angle (the solution
    set is one-dimensional, so one angle stays pinned).  Every accepted
    pair is certified by its defining equations.  A boundary of
    constant curvature degenerates: all centers coincide, reported as a
    single point with ``rotationally_degenerate`` set.
    """
    if gamma.dimension != 1:
        raise ValueError("symmetry sets are computed for curves only")
    m = int(grid)
    cols_t = _angles(m)
    p_cols, n_cols = _curve_data(gamma, cols_t)

    geo = curve_geometry(gamma, _on_circle(cols_t))
    kappa = geo["curvature"]
    kbar = float(np.mean(kappa))
    if np.max(np.abs(kappa - kbar)) <= 1e-8 * abs(kbar):
        centers = geo["points"] + (1.0 / kappa)[:, None] * geo["inward_normal"]
        return SymmetrySet(
            pairs=(),
            points=np.mean(centers, axis=0, keepdims=True),
            rotationally_degenerate=True,
        )

    rows_t = (np.arange(4 * m) + 0.5) * (np.pi / (2 * m))
    band = 3.5 * (2.0 * np.pi / m)
    det_tol = 1e-9
    # genuine common centers stay within reach of the curvature centers;
    # near-parallel normal pairs intersect far away and are discarded
    diam = float(np.linalg.norm(geo["points"].max(axis=0) - geo["points"].min(axis=0)))
    s_max = 2.0 * float(np.max(1.0 / np.abs(kappa))) + diam

    found_i, found_j = [], []
    chunk = max(1, 262144 // m)
    for start in range(0, rows_t.size, chunk):
        rt = rows_t[start : start + chunk]
        p1, n1 = _curve_data(gamma, rt)
        with np.errstate(divide="ignore", invalid="ignore"):
            s, r, det = _normal_intersection(
                p1[:, None, :], n1[:, None, :], p_cols[None, :, :], n_cols[None, :, :]
            )
            diff = s * s - r * r
        sep = np.abs(rt[:, None] - cols_t[None, :]) % (2.0 * np.pi)
        sep = np.minimum(sep, 2.0 * np.pi - sep)
        valid = (
            (sep > band)
            & (np.abs(det) > det_tol)
            & (np.abs(s) <= s_max)
            & (np.abs(r) <= s_max)
            & np.isfinite(diff)
        )
        nxt = np.roll(np.arange(m), -1)
        flip = (diff * diff[:, nxt] < 0) & valid & valid[:, nxt]
        ii, jj = np.nonzero(flip)
        found_i.append(rt[ii])
        found_j.append(cols_t[jj])
    t1 = np.concatenate(found_i)
    lo = np.concatenate(found_j)
    hi = lo + 2.0 * np.pi / m

    if t1.size == 0:
        return SymmetrySet(pairs=(), points=np.zeros((0, 2)))

    p1, n1 = _curve_data(gamma, t1)

    def residual(t2):
        p2, n2 = _curve_data(gamma, t2)
        with np.errstate(divide="ignore", invalid="ignore"):
            s, r, _ = _normal_intersection(p1, n1, p2, n2)
            return s * s - r * r

    flo = residual(lo)
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        fmid = residual(mid)
        left = flo * fmid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fmid)
    t2 = 0.5 * (lo + hi)

    p2, n2 = _curve_data(gamma, t2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s, r, det = _normal_intersection(p1, n1, p2, n2)
        centers = p1 + s[:, None] * n1
        d1 = np.linalg.norm(p1 - centers, axis=1)
        d2 = np.linalg.norm(p2 - centers, axis=1)
        value_res = np.abs(d1 - d2)
        line_res = np.abs(
            np.sum((centers - p2) * np.stack([-n2[:, 1], n2[:, 0]], axis=1), axis=1)
        )
    scale = np.maximum(d1, 1.0)
    good = (
        (value_res <= tol * scale)
        & (np.abs(s) <= s_max)
        & (np.abs(r) <= s_max)
        & np.isfinite(centers).all(axis=1)
    )
    pairs = tuple(
        SymPair(
            theta1=_on_circle(a),
            theta2=_on_circle(b),
            center=c,
            radius=float(rr),
            line_residual=float(lr),
            value_residual=float(vr),
        )
        for a, b, c, rr, lr, vr in zip(
            t1[good], t2[good], centers[good], d1[good], line_res[good], value_res[good]
        )
    )
    return SymmetrySet(pairs=pairs, points=centers[good])


# ---------------------------------------------------------------------------
# symmetry set via wave-front self-intersections (the independent oracle)


def _segment_intersections(points):
    """Proper self-intersections of a closed polyline.

    Candidate pairs come from hashing segment boxes on a grid whose
    cell covers any single box (so overlapping segments share a cell);
    candidates then pass exact orientation tests.
    """
    m = points.shape[0]
    a = points
    b = np.roll(points, -1, axis=0)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    cell = max(float(np.max(hi - lo)), 1e-12)
    li = np.floor(lo / cell).astype(np.int64)
    ui = np.floor(hi / cell).astype(np.int64)
    # each box spans at most 2 cells per axis
    keys, segs = [], []
    for dx in (0, 1):
        for dy in (0, 1):
            cx = li[:, 0] + dx
            cy = li[:, 1] + dy
            mask = (cx <= ui[:, 0]) & (cy <= ui[:, 1])
            keys.append(np.stack([cx[mask], cy[mask]], axis=1))
            segs.append(np.flatnonzero(mask))
    keys = np.concatenate(keys)
    segs = np.concatenate(segs)
    span = int(keys[:, 1].max() - keys[:, 1].min()) + 2
    flat = (keys[:, 0] - keys[:, 0].min()) * span + (keys[:, 1] - keys[:, 1].min())
    order = np.argsort(flat, kind="stable")
    flat = flat[order]
    segs = segs[order]
    starts = np.flatnonzero(np.r_[True, flat[1:] != flat[:-1]])
    ends = np.r_[starts[1:], flat.size]
    counts = ends - starts
    if not (counts >= 2).any():
        return []

    two = np.flatnonzero(counts == 2)
    ii_parts = [segs[starts[two]]]
    jj_parts = [segs[starts[two] + 1]]
    for k in np.flatnonzero(counts >= 3):
        ids = segs[starts[k] : ends[k]]
        for ai in range(ids.size - 1):
            ii_parts.append(ids[ai : ai + 1].repeat(ids.size - ai - 1))
            jj_parts.append(ids[ai + 1 :])
    ii = np.concatenate(ii_parts)
    jj = np.concatenate(jj_parts)
    swap = ii > jj
    ii, jj = np.where(swap, jj, ii), np.where(swap, ii, jj)
    gap = jj - ii
    keep = (gap > 1) & (gap < m - 1)
    ii, jj = ii[keep], jj[keep]
    pairs = np.unique(ii.astype(np.int64) * m + jj)
    ii, jj = pairs // m, pairs % m
    overlap = (
        (np.maximum(lo[ii, 0], lo[jj, 0]) <= np.minimum(hi[ii, 0], hi[jj, 0]))
        & (np.maximum(lo[ii, 1], lo[jj, 1]) <= np.minimum(hi[ii, 1], hi[jj, 1]))
    )
    ii, jj = ii[overlap], jj[overlap]

    out = []
    for i, j in zip(ii, jj):
        p, q = a[i], b[i]
        u, w = a[j], b[j]
        o1, o2 = orient2d(p, q, u), orient2d(p, q, w)
        o3, o4 = orient2d(u, w, p), orient2d(u, w, q)
        if o1 * o2 < 0 and o3 * o4 < 0:
            d1 = q - p
            d2 = w - u
            denom = d1[0] * d2[1] - d1[1] * d2[0]
            t = ((u[0] - p[0]) * d2[1] - (u[1] - p[1]) * d2[0]) / denom
            out.append(p + t * d1)
    return out


def sym_via_fronts(
    gamma,
    t_range: tuple[float, float] | None = None,
    grid: int = 2000,
    t_step: float | None = None,
    gap_tol: float | None = None,
) -> np.ndarray:
    """Sweep wave fronts and collect their self-intersection points.

    The union over the sweep approximates the symmetry set.  The
    default range covers offsets up to twice the largest radius of
    curvature; the default step keeps consecutive fronts closer than
    the polyline spacing.  Offsets where intersection points appear,
    disappear, or jump farther than ``gap_tol`` are refined by
    bisection, which resolves the births and deaths at which the
    intersection point races along the set.  A front collapsing to a
    point (constant curvature at the focal offset) contributes its
    centroid.
    """
    if gamma.dimension != 1:
        raise ValueError("front sweeps are computed for curves only")
    m = int(grid)
    theta = _on_circle(_angles(m))
    geo = curve_geometry(gamma, theta)
    base, normal, kappa = geo["points"], geo["inward_normal"], geo["curvature"]
    if t_range is None:
        t_range = (0.0, 2.0 * float(np.max(1.0 / np.abs(kappa))))
    if t_step is None:
        edges = np.linalg.norm(np.roll(base, -1, axis=0) - base, axis=1)
        t_step = float(np.mean(edges))
    if gap_tol is None:
        gap_tol = t_step
    ts = np.arange(t_range[0], t_range[1] + 0.5 * t_step, t_step)
    collapse_tol = 1.5 * t_step

    def front_points(t):
        front = base + t * normal
        extent = np.linalg.norm(front.max(axis=0) - front.min(axis=0))
        if extent <= collapse_tol:
            return [front.mean(axis=0)]
        return _segment_intersections(front)

    def spread(pa, pb):
        if not pa and not pb:
            return 0.0
        if not pa or not pb:
            return np.inf
        aa, bb = np.asarray(pa), np.asarray(pb)
        da = cKDTree(bb).query(aa)[0].max()
        db = cKDTree(aa).query(bb)[0].max()
        return max(da, db)

    levels = [front_points(t) for t in ts]
    points = [p for lv in levels for p in lv]
    stack = [(ts[k], ts[k + 1], levels[k], levels[k + 1]) for k in range(len(ts) - 1)]
    while stack:
        lo, hi, plo, phi_ = stack.pop()
        if hi - lo <= 1e-9 or spread(plo, phi_) <= gap_tol:
            continue
        mid = 0.5 * (lo + hi)
        pmid = front_points(mid)
        points.extend(pmid)
        stack.append((lo, mid, plo, pmid))
        stack.append((mid, hi, pmid, phi_))
    if not points:
        return np.zeros((0, 2))
    return np.asarray(points)


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        return np.inf
    da = cKDTree(b).query(a)[0].max()
    db = cKDTree(a).query(b)[0].max()
    return float(max(da, db))
