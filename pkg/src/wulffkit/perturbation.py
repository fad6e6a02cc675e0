"""Translating the dual body and rebuilding the integrand.

For a convex integrand, the inverted graph bounds a convex body W.
Translating W by -v (v interior) and reading the boundary back in
polar form gives a new integrand; as v -> 0 the new integrand
converges to the original, and for almost every v it is stable.  The
module provides the recentering diffeomorphism of the sphere, the
radial function of the translated body (by Newton inversion of the
recentering map), the squared-distance family, the rebuild, and the
seeded stabilization loop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .convexity import DualBody, build_dual_body, curve_geometry, surface_geometry
from .sphere_fn import SampledFunction, _check_unit, sphere_grid, tangent_basis
from .stability import StabilityConfig, StabilityVerdict, is_stable

__all__ = [
    "PerturbationError",
    "StabilizeError",
    "SquaredDistance",
    "BoundaryDistance",
    "PerturbationResult",
    "recentered_direction",
    "translated_radial",
    "distance_sq",
    "perturb",
    "stabilize",
]

DEFAULT_GRID = {1: 720, 2: 1280}


class PerturbationError(RuntimeError):
    """Translation vector out of the interior, or inversion failure."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class StabilizeError(RuntimeError):
    """The stabilization loop exhausted its tries."""

    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result


# ---------------------------------------------------------------------------
# the embedding x -> x / gamma(-x) and its derivatives


def _phi_pieces(gamma, x):
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    q = gamma.value(-x)
    gq = -gamma.gradient(-x)  # ambient gradient of q(x) = gamma(-x)
    hq = gamma.hessian(-x)
    s = 1.0 / q
    grad_s = -gq / (q**2)[..., None]
    hess_s = 2.0 * (gq[..., :, None] * gq[..., None, :]) / (q**3)[..., None, None] - hq / (
        q**2
    )[..., None, None]
    phi = x * s[..., None]
    jac = s[..., None, None] * np.eye(d) + x[..., :, None] * grad_s[..., None, :]
    return phi, grad_s, hess_s, jac


def _phi(gamma, x):
    x = np.asarray(x, dtype=float)
    return x / gamma.value(-x)[..., None]


class SquaredDistance:
    """Half the squared distance from the inverted graph to a fixed center.

    A member of the two-parameter family behind caustics and symmetry
    sets; restricted to the sphere it is the composition of the
    translated radial function with the recentering map and X^2/2.
    """

    def __init__(self, gamma, v):
        self.gamma = gamma
        self.v = np.asarray(v, dtype=float)
        self.dimension = gamma.dimension
        if self.v.shape != (self.dimension + 1,):
            raise ValueError("center must be an ambient vector")

    @property
    def seed_degree(self) -> int:
        return getattr(self.gamma, "seed_degree", 4) + 1

    def value(self, x):
        w = _phi(self.gamma, x) - self.v
        return 0.5 * np.sum(w * w, axis=-1)

    def gradient(self, x):
        phi, _, _, jac = _phi_pieces(self.gamma, x)
        w = phi - self.v
        return np.einsum("...kj,...k->...j", jac, w)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        phi, grad_s, hess_s, jac = _phi_pieces(self.gamma, x)
        w = phi - self.v
        jtj = np.einsum("...ki,...kj->...ij", jac, jac)
        sym = w[..., :, None] * grad_s[..., None, :]
        wx = np.sum(w * x, axis=-1)
        return jtj + sym + np.swapaxes(sym, -1, -2) + wx[..., None, None] * hess_s

    def __call__(self, theta):
        th = _check_unit(theta, self.dimension + 1)
        return float(self.value(th))


class BoundaryDistance:
    """Distance from the inverted graph to a fixed center (the square
    root of twice the squared-distance family member)."""

    def __init__(self, gamma, v):
        self._sq = SquaredDistance(gamma, v)
        self.gamma = gamma
        self.v = self._sq.v
        self.dimension = gamma.dimension

    @property
    def seed_degree(self) -> int:
        return self._sq.seed_degree

    def value(self, x):
        return np.sqrt(2.0 * self._sq.value(x))

    def gradient(self, x):
        r = self.value(x)
        return self._sq.gradient(x) / r[..., None]

    def hessian(self, x):
        r = self.value(x)
        g = self._sq.gradient(x)
        h = self._sq.hessian(x)
        outer = g[..., :, None] * g[..., None, :]
        return h / r[..., None, None] - outer / (r**3)[..., None, None]

    def __call__(self, theta):
        th = _check_unit(theta, self.dimension + 1)
        return float(self.value(th))


# ---------------------------------------------------------------------------
# interior margin and the recentering map


def interior_margin_floor(body: DualBody) -> float:
    return max(1e-9, 1e-6 * body.inradius)


def _require_interior(gamma, v, body, samples=None):
    if body is None:
        body = build_dual_body(gamma, samples)
    v = np.asarray(v, dtype=float)
    margin = body.interior_margin(v)
    if margin < interior_margin_floor(body):
        raise PerturbationError(
            f"translation out of interior: margin {margin:.3e} below "
            f"{interior_margin_floor(body):.3e}"
        )
    return v, body


def recentered_direction(gamma, v, theta, body: DualBody | None = None) -> np.ndarray:
    """Unit direction from the translated center v to the boundary point
    sourced at theta; a diffeomorphism of the sphere for interior v."""
    th = _check_unit(theta, gamma.dimension + 1)
    v, _ = _require_interior(gamma, v, body)
    w = _phi(gamma, th) - v
    return w / np.linalg.norm(w)


def _invert_recentering(gamma, v, targets, table_sources, table_images, tol=1e-12, max_iter=60):
    """Solve recentered_direction(theta) = u for each target u by Newton.

    Seeds come from the nearest precomputed image.  Returns (theta,
    radial distances).  Raises PerturbationError when any target fails
    to converge, carrying the best residual reached.
    """
    u = np.atleast_2d(np.asarray(targets, dtype=float))
    m, d = u.shape
    seeds = np.empty(m, dtype=np.int64)
    for start in range(0, m, 2048):
        block = u[start : start + 2048]
        seeds[start : start + 2048] = np.argmax(block @ table_images.T, axis=1)
    theta = table_sources[seeds].copy()
    bu = tangent_basis(u)

    best = np.full(m, np.inf)
    for _ in range(max_iter):
        phi, _, _, jac = _phi_pieces(gamma, theta)
        w = phi - v
        dist = np.linalg.norm(w, axis=-1)
        h = w / dist[..., None]
        err = h - u
        res = np.linalg.norm(err, axis=-1)
        best = np.minimum(best, res)
        active = res > tol
        if not active.any():
            break
        bt = tangent_basis(theta[active])
        proj = np.eye(d) - h[active][..., :, None] * h[active][..., None, :]
        jh = np.einsum("...ik,...kj->...ij", proj, jac[active]) / dist[active][..., None, None]
        amat = np.einsum("...dk,...de,...ej->...kj", bu[active], jh, bt)
        rhs = -np.einsum("...dk,...d->...k", bu[active], err[active])
        if d == 2:
            step = (rhs[..., 0] / amat[..., 0, 0])[..., None]
        else:
            det = amat[..., 0, 0] * amat[..., 1, 1] - amat[..., 0, 1] * amat[..., 1, 0]
            s0 = (rhs[..., 0] * amat[..., 1, 1] - amat[..., 0, 1] * rhs[..., 1]) / det
            s1 = (amat[..., 0, 0] * rhs[..., 1] - rhs[..., 0] * amat[..., 1, 0]) / det
            step = np.stack([s0, s1], axis=-1)
        lens = np.linalg.norm(step, axis=-1, keepdims=True)
        step = np.where(lens > 0.5, step * (0.5 / lens), step)
        moved = theta[active] + np.einsum("...dk,...k->...d", bt, step)
        moved /= np.linalg.norm(moved, axis=-1, keepdims=True)
        theta[active] = moved

    phi = _phi(gamma, theta)
    w = phi - v
    dist = np.linalg.norm(w, axis=-1)
    res = np.linalg.norm(w / dist[..., None] - u, axis=-1)
    if np.any(res > 10 * tol):
        raise PerturbationError(
            f"recentering inversion did not converge for {int((res > 10 * tol).sum())} "
            f"target(s)",
            best_residual=float(res.max()),
        )
    return theta, dist


def translated_radial(gamma, v, u, body: DualBody | None = None) -> float:
    """The unique r > 0 with r*u + v on the hull boundary, for interior v.

    Computed by inverting the recentering map from the nearest sampled
    image and reading off the distance, which keeps the value smooth in
    u (no hull-facet noise).
    """
    uu = _check_unit(u, gamma.dimension + 1)
    v, body = _require_interior(gamma, v, body)
    images = _recentering_table(gamma, v, body)
    _, dist = _invert_recentering(gamma, v, uu[None, :], body.directions, images)
    return float(dist[0])


def _recentering_table(gamma, v, body: DualBody) -> np.ndarray:
    w = body.points - v
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def distance_sq(gamma, v, theta) -> float:
    """Value of the squared-distance family member at theta."""
    th = _check_unit(theta, gamma.dimension + 1)
    return float(SquaredDistance(gamma, v).value(th))


# ---------------------------------------------------------------------------
# the rebuild and the stabilization loop


@dataclass(frozen=True, eq=False)
class PerturbationResult:
    """Outcome of translating the dual body by v and rebuilding.

    ``radial`` is the translated body's radial function (sampled, with
    exact closures); ``integrand`` the rebuilt integrand, whose value
    at theta is the reciprocal of ``radial`` at -theta.  ``verdict`` is
    the stability verdict of the recentered radial profile, and
    ``sup_distance`` the grid sup-norm distance to the original
    integrand.
    """

    v: np.ndarray
    radial: SampledFunction
    integrand: SampledFunction
    sources: np.ndarray
    images: np.ndarray
    verdict: StabilityVerdict
    sup_distance: float
    tries: int = 1


def perturb(
    gamma,
    v,
    grid: int | None = None,
    body: DualBody | None = None,
    cfg: StabilityConfig | None = None,
) -> PerturbationResult:
    """Translate the dual body of gamma by v and rebuild the integrand.

    Samples the translated radial function on the recentered grid,
    attaches exact evaluator/gradient closures (Newton inversion of the
    recentering map), runs the stability decision on the recentered
    profile, and records the sup-norm change of the integrand.
    """
    n = gamma.dimension
    m = grid if grid is not None else DEFAULT_GRID[n]
    v, body = _require_interior(gamma, v, body)
    theta = sphere_grid(n, m)
    pts = _phi(gamma, theta)
    w = pts - v
    dist = np.linalg.norm(w, axis=-1)
    images = w / dist[..., None]
    table_images = _recentering_table(gamma, v, body)

    def radial_eval(dirs):
        _, r = _invert_recentering(gamma, v, dirs, body.directions, table_images)
        return r

    def radial_grad(dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        th, r = _invert_recentering(gamma, v, dirs, body.directions, table_images)
        if n == 1:
            outward = -curve_geometry(gamma, th)["inward_normal"]
        else:
            outward = -surface_geometry(gamma, th)["inward_normal"]
        denom = np.sum(outward * dirs, axis=-1)
        proj = outward - np.sum(outward * dirs, axis=-1, keepdims=True) * dirs
        return -(r / denom)[..., None] * proj

    radial = SampledFunction(
        dimension=n,
        directions=images,
        values=dist,
        interpolation="nearest",
        evaluator=radial_eval,
        gradient_fn=radial_grad,
    )

    def integrand_eval(dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        return 1.0 / radial_eval(-dirs)

    def integrand_grad(dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        r = radial_eval(-dirs)
        g = radial_grad(-dirs)
        return g / (r**2)[..., None]

    integrand = SampledFunction(
        dimension=n,
        directions=-images,
        values=1.0 / dist,
        interpolation="nearest",
        evaluator=integrand_eval,
        gradient_fn=integrand_grad,
    )

    verdict = is_stable(BoundaryDistance(gamma, v), cfg)
    sup_distance = float(np.max(np.abs(1.0 / dist - gamma.value(-images))))
    return PerturbationResult(
        v=v.copy(),
        radial=radial,
        integrand=integrand,
        sources=theta,
        images=images,
        verdict=verdict,
        sup_distance=sup_distance,
    )


def stabilize(
    gamma,
    epsilon: float,
    seed: int,
    max_tries: int = 20,
    grid: int | None = None,
    body: DualBody | None = None,
    cfg: StabilityConfig | None = None,
) -> PerturbationResult:
    """Draw translations uniformly from the epsilon-ball inside the dual
    body until the rebuilt integrand is stable.

    Deterministic for a fixed seed.  epsilon = 0 degenerates to the
    identity translation and returns the original integrand with its
    own verdict.  Raises StabilizeError when max_tries is exhausted,
    carrying the last result for diagnosis.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if body is None:
        body = build_dual_body(gamma)
    d = gamma.dimension + 1
    if epsilon == 0.0:
        return perturb(gamma, np.zeros(d), grid=grid, body=body, cfg=cfg)

    rng = np.random.default_rng(seed)
    floor = interior_margin_floor(body)
    last = None
    for k in range(1, max_tries + 1):
        for _ in range(10_000):
            x = rng.standard_normal(d)
            x /= np.linalg.norm(x)
            v = epsilon * rng.random() ** (1.0 / d) * x
            if body.interior_margin(v) >= floor:
                break
        else:
            raise StabilizeError("could not draw an interior translation")
        result = perturb(gamma, v, grid=grid, body=body, cfg=cfg)
        result = replace(result, tries=k)
        if result.verdict.status == "stable":
            return result
        last = result
    raise StabilizeError(
        f"no stable translation in {max_tries} tries "
        f"(last verdict: {last.verdict.status}: {last.verdict.diagnosis})",
        last_result=last,
    )
