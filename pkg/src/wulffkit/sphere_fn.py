"""Smooth real functions on the unit circle S^1 and sphere S^2.

Functions are restrictions of ambient expressions with closed-form
derivatives: polynomials in the ambient coordinates, square roots of
positive polynomials, and reciprocals of polynomial radial profiles.
On top of that representation the module provides the intrinsic
(tangential) gradient and Hessian, and a seeded Newton search for the
critical points of the restriction together with their Morse data.

All evaluators are vectorized: points may be passed as a single vector
of length n+1 or as an array of shape (..., n+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "IncompleteCensusError",
    "SphereFunction",
    "SqrtFunction",
    "RadialQuotient",
    "AffineImage",
    "Rotated",
    "SampledFunction",
    "CriticalPoint",
    "SolverConfig",
    "circle_grid",
    "fibonacci_grid",
    "tangent_basis",
    "evaluate",
    "intrinsic_gradient",
    "intrinsic_hessian",
    "critical_points",
]

UNIT_TOL = 1e-9


class DomainError(ValueError):
    """Input point is not a unit vector of the expected dimension."""


class IncompleteCensusError(RuntimeError):
    """Critical-point census failed a completeness or nondegeneracy check.

    Carries the partial census in ``census``.
    """

    def __init__(self, message, census=()):
        super().__init__(message)
        self.census = tuple(census)


# ---------------------------------------------------------------------------
# grids and tangent frames


def circle_grid(m: int) -> np.ndarray:
    """m equally spaced unit vectors on S^1, starting at (1, 0)."""
    t = np.arange(m) * (2.0 * np.pi / m)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def fibonacci_grid(m: int) -> np.ndarray:
    """m points of the Fibonacci lattice on S^2 (near-uniform, deterministic)."""
    i = np.arange(m, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / m
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    t = 2.0 * np.pi * i / golden
    return np.stack([r * np.cos(t), r * np.sin(t), z], axis=-1)


def sphere_grid(n: int, m: int) -> np.ndarray:
    """Default sample grid: uniform angles on S^1, Fibonacci lattice on S^2."""
    if n == 1:
        return circle_grid(m)
    if n == 2:
        return fibonacci_grid(m)
    raise ValueError(f"unsupported sphere dimension {n}")


def tangent_basis(theta: np.ndarray) -> np.ndarray:
    """Orthonormal tangent frame at unit points, shape (..., n+1, n).

    Deterministic: on S^1 the frame is the counterclockwise tangent; on
    S^2 the first leg is the projected coordinate axis least aligned
    with theta and the second is theta x first.
    """
    th = np.asarray(theta, dtype=float)
    d = th.shape[-1]
    if d == 2:
        b = np.stack([-th[..., 1], th[..., 0]], axis=-1)
        return b[..., :, None]
    if d == 3:
        k = np.argmin(np.abs(th), axis=-1)
        e = np.zeros_like(th)
        np.put_along_axis(e, k[..., None], 1.0, axis=-1)
        b1 = e - th * np.sum(e * th, axis=-1, keepdims=True)
        b1 /= np.linalg.norm(b1, axis=-1, keepdims=True)
        b2 = np.cross(th, b1)
        return np.stack([b1, b2], axis=-1)
    raise ValueError(f"unsupported ambient dimension {d}")


def _check_unit(theta, d):
    th = np.asarray(theta, dtype=float)
    if th.shape != (d,):
        raise DomainError(f"expected a vector of length {d}, got shape {th.shape}")
    if abs(np.linalg.norm(th) - 1.0) > UNIT_TOL:
        raise DomainError(f"not a unit vector: |theta| = {np.linalg.norm(th)!r}")
    return th


# ---------------------------------------------------------------------------
# ambient polynomial machinery


def _poly_eval(expo, coef, x):
    if expo.shape[0] == 0:
        return np.zeros(np.asarray(x).shape[:-1])
    mono = np.prod(np.asarray(x, dtype=float)[..., None, :] ** expo, axis=-1)
    return mono @ coef


def _poly_derivative(expo, coef, j):
    mask = expo[:, j] > 0
    if not mask.any():
        return np.zeros((0, expo.shape[1]), dtype=np.int64), np.zeros(0)
    e = expo[mask].copy()
    c = coef[mask] * e[:, j]
    e[:, j] -= 1
    return e, c


class SphereFunction:
    """Polynomial in the ambient coordinates, restricted to the unit sphere.

    Parameters
    ----------
    dimension : int
        Sphere dimension n, 1 or 2.
    terms : sequence of (exponents, coefficient)
        Monomials over the n+1 ambient coordinates; exponents are
        nonnegative integers of length n+1.
    """

    def __init__(self, dimension: int, terms: Sequence[tuple[Sequence[int], float]]):
        if dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {dimension}")
        terms = list(terms)
        if not terms:
            raise ValueError("term list must be nonempty")
        d = dimension + 1
        expo = np.zeros((len(terms), d), dtype=np.int64)
        coef = np.zeros(len(terms))
        for i, (e, c) in enumerate(terms):
            e = tuple(int(v) for v in e)
            if len(e) != d or any(v < 0 for v in e):
                raise ValueError(f"bad exponent multi-index {e} for dimension {dimension}")
            if not math.isfinite(float(c)):
                raise ValueError(f"non-finite coefficient {c!r}")
            expo[i] = e
            coef[i] = float(c)
        self.dimension = dimension
        self._expo = expo
        self._coef = coef
        self.degree = int(expo.sum(axis=1).max())
        self._grad = [_poly_derivative(expo, coef, j) for j in range(d)]
        self._hess = [
            [_poly_derivative(*self._grad[j], k) for k in range(d)] for j in range(d)
        ]

    @classmethod
    def constant(cls, dimension: int, c: float) -> "SphereFunction":
        return cls(dimension, [((0,) * (dimension + 1), c)])

    @property
    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(v) for v in e), float(c)) for e, c in zip(self._expo, self._coef)]

    @property
    def seed_degree(self) -> int:
        return max(1, self.degree)

    def value(self, x):
        return _poly_eval(self._expo, self._coef, x)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        for j, (e, c) in enumerate(self._grad):
            out[..., j] = _poly_eval(e, c, x)
        return out

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        out = np.empty(x.shape[:-1] + (d, d))
        for j in range(d):
            for k in range(j, d):
                e, c = self._hess[j][k]
                out[..., j, k] = _poly_eval(e, c, x)
                if k > j:
                    out[..., k, j] = out[..., j, k]
        return out

    def __call__(self, theta):
        return evaluate(self, theta)

    def __repr__(self):
        return f"SphereFunction(dimension={self.dimension}, terms={self.terms!r})"


class SqrtFunction:
    """Square root of a polynomial that is positive on the sphere."""

    def __init__(self, base: SphereFunction):
        self.base = base
        self.dimension = base.dimension

    @property
    def seed_degree(self) -> int:
        return max(1, self.base.degree // 2 + self.base.degree % 2)

    def value(self, x):
        return np.sqrt(self.base.value(x))

    def gradient(self, x):
        v = self.value(x)
        return self.base.gradient(x) / (2.0 * v[..., None])

    def hessian(self, x):
        v = self.value(x)[..., None, None]
        g = self.base.gradient(x)
        h = self.base.hessian(x)
        outer = g[..., :, None] * g[..., None, :]
        return h / (2.0 * v) - outer / (4.0 * v**3)

    def __call__(self, theta):
        return evaluate(self, theta)


class RadialQuotient:
    """The function theta -> 1 / radial(-theta) for a positive profile.

    Wraps a polynomial radial profile of a star-shaped boundary; the
    wrapped function is the integrand whose inverted polar graph is
    that boundary.
    """

    def __init__(self, radial: SphereFunction):
        self.radial = radial
        self.dimension = radial.dimension

    @property
    def seed_degree(self) -> int:
        return max(1, self.radial.degree)

    def value(self, x):
        return 1.0 / self.radial.value(-np.asarray(x, dtype=float))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        q = self.radial.value(-x)
        gq = self.radial.gradient(-x)
        return gq / (q**2)[..., None]

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        q = self.radial.value(-x)[..., None, None]
        gq = self.radial.gradient(-x)
        hq = self.radial.hessian(-x)
        outer = gq[..., :, None] * gq[..., None, :]
        return -hq / q**2 + 2.0 * outer / q**3

    def __call__(self, theta):
        return evaluate(self, theta)


class AffineImage:
    """Post-composition a*f + b (a > 0 keeps Morse data intact)."""

    def __init__(self, base, a: float = 1.0, b: float = 0.0):
        self.base = base
        self.a = float(a)
        self.b = float(b)
        self.dimension = base.dimension

    @property
    def seed_degree(self) -> int:
        return base_seed_degree(self.base)

    def value(self, x):
        return self.a * self.base.value(x) + self.b

    def gradient(self, x):
        return self.a * self.base.gradient(x)

    def hessian(self, x):
        return self.a * self.base.hessian(x)

    def __call__(self, theta):
        return evaluate(self, theta)


class Rotated:
    """Pre-composition with a rotation of the ambient space: x -> f(R x)."""

    def __init__(self, base, rotation: np.ndarray):
        r = np.asarray(rotation, dtype=float)
        d = base.dimension + 1
        if r.shape != (d, d):
            raise ValueError(f"rotation must be {d}x{d}")
        self.base = base
        self.rotation = r
        self.dimension = base.dimension

    @property
    def seed_degree(self) -> int:
        return base_seed_degree(self.base)

    def value(self, x):
        return self.base.value(np.asarray(x, dtype=float) @ self.rotation.T)

    def gradient(self, x):
        return self.base.gradient(np.asarray(x, dtype=float) @ self.rotation.T) @ self.rotation

    def hessian(self, x):
        h = self.base.hessian(np.asarray(x, dtype=float) @ self.rotation.T)
        return np.einsum("ji,...jk,kl->...il", self.rotation, h, self.rotation)

    def __call__(self, theta):
        return evaluate(self, theta)


def base_seed_degree(f) -> int:
    return int(getattr(f, "seed_degree", 4))


@dataclass(frozen=True)
class SampledFunction:
    """Function on the sphere known on a grid, optionally with exact closures.

    ``evaluator`` and ``gradient_fn`` are vectorized closures giving the
    exact value and tangent gradient at arbitrary unit directions; when
    absent, evaluation falls back to the stored grid (nearest sample).
    """

    dimension: int
    directions: np.ndarray
    values: np.ndarray
    interpolation: str = "nearest"
    evaluator: Callable | None = None
    gradient_fn: Callable | None = None

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "values", vals)
        if dirs.ndim != 2 or dirs.shape[1] != self.dimension + 1:
            raise ValueError("directions must have shape (M, n+1)")
        if vals.shape != (dirs.shape[0],):
            raise ValueError("values must match directions")
        if not np.isfinite(vals).all():
            raise ValueError("non-finite sample values")
        norms = np.linalg.norm(dirs, axis=1)
        if np.abs(norms - 1.0).max() > UNIT_TOL:
            raise ValueError("sample directions must be unit vectors")
        if np.unique(dirs.round(decimals=12), axis=0).shape[0] != dirs.shape[0]:
            raise ValueError("sample directions must be pairwise distinct")

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        single = th.ndim == 1
        pts = th[None, :] if single else th
        if self.evaluator is not None:
            out = np.asarray(self.evaluator(pts))
        else:
            idx = np.argmax(pts @ self.directions.T, axis=-1)
            out = self.values[idx]
        return float(out[0]) if single else out

    def tangent_gradient(self, theta):
        if self.gradient_fn is None:
            raise ValueError("no exact gradient closure attached")
        th = np.asarray(theta, dtype=float)
        single = th.ndim == 1
        out = np.asarray(self.gradient_fn(th[None, :] if single else th))
        return out[0] if single else out


# ---------------------------------------------------------------------------
# intrinsic calculus


def evaluate(f, theta) -> float:
    """Value of f at a unit vector; rejects off-sphere input."""
    th = _check_unit(theta, f.dimension + 1)
    return float(f.value(th))


def intrinsic_gradient(f, theta) -> np.ndarray:
    """Tangential projection of the ambient gradient at a unit vector."""
    th = _check_unit(theta, f.dimension + 1)
    g = f.gradient(th)
    return g - (g @ th) * th


def intrinsic_hessian(f, theta, basis: np.ndarray | None = None) -> np.ndarray:
    """Second derivative of the restriction, as an (n, n) matrix.

    The matrix represents the bilinear form B^T (H - (theta . grad) I) B
    in the orthonormal tangent frame ``basis`` (default
    ``tangent_basis(theta)``); it equals the second derivative of f
    along great circles through theta.
    """
    th = _check_unit(theta, f.dimension + 1)
    b = tangent_basis(th) if basis is None else np.asarray(basis, dtype=float)
    g = f.gradient(th)
    h = f.hessian(th)
    return b.T @ h @ b - (g @ th) * np.eye(f.dimension)


def _batch_tangent_gradient(f, theta):
    g = f.gradient(theta)
    return g - np.sum(g * theta, axis=-1, keepdims=True) * theta


def _batch_tangent_hessian(f, theta, basis):
    g = f.gradient(theta)
    h = f.hessian(theta)
    radial = np.sum(g * theta, axis=-1)
    hb = np.einsum("...di,...de,...ej->...ij", basis, h, basis)
    n = basis.shape[-1]
    return hb - radial[..., None, None] * np.eye(n)


# ---------------------------------------------------------------------------
# critical points


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the seeded Newton critical-point search."""

    seeds: int | None = None
    residual_tol: float = 1e-10
    merge_radius: float = 1e-6
    nd_rel_tol: float = 1e-8
    max_iter: int = 60
    max_step: float = 0.5


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    """A located critical point with Morse data.

    ``index`` is None when the nondegeneracy margin is below the
    solver's relative threshold (the point is reported, never silently
    classified).
    """

    theta: np.ndarray
    value: float
    index: int | None
    nd_margin: float
    hess_scale: float
    residual: float

    @property
    def degenerate(self) -> bool:
        return self.index is None


def default_seed_count(f) -> int:
    sd = base_seed_degree(f)
    if f.dimension == 1:
        return max(64, 8 * sd * sd)
    return max(512, 32 * sd * sd)


def _solve_tangent_step(h, g):
    """Newton step -h^{-1} g for batched 1x1 / 2x2 systems; NaN rows where singular."""
    n = g.shape[-1]
    if n == 1:
        det = h[..., 0, 0]
        bad = np.abs(det) < 1e-300
        step = np.where(bad, np.nan, -g[..., 0] / np.where(bad, 1.0, det))
        return step[..., None]
    a, b = h[..., 0, 0], h[..., 0, 1]
    c, e = h[..., 1, 0], h[..., 1, 1]
    det = a * e - b * c
    bad = np.abs(det) < 1e-300
    safe = np.where(bad, 1.0, det)
    s0 = -(e * g[..., 0] - b * g[..., 1]) / safe
    s1 = -(-c * g[..., 0] + a * g[..., 1]) / safe
    out = np.stack([s0, s1], axis=-1)
    out[bad] = np.nan
    return out


def critical_points(f, cfg: SolverConfig | None = None) -> list[CriticalPoint]:
    """Census of the critical points of f on the sphere.

    Newton iteration on the tangential gradient, seeded from a dense
    deterministic grid; converged points are merged within
    ``cfg.merge_radius`` (chordal) in seed order.  Each accepted point
    carries value, Morse index, nondegeneracy margin and residual.

    Raises
    ------
    IncompleteCensusError
        If any accepted point is degenerate at tolerance, or the
        alternating sum of index counts misses the Euler characteristic
        of the sphere.  The partial census is attached to the error.
    """
    cfg = cfg or SolverConfig()
    n = f.dimension
    m = cfg.seeds if cfg.seeds is not None else default_seed_count(f)
    theta = sphere_grid(n, m)

    alive = np.ones(m, dtype=bool)
    for _ in range(cfg.max_iter):
        gt = _batch_tangent_gradient(f, theta)
        res = np.linalg.norm(gt, axis=-1)
        active = alive & (res > cfg.residual_tol)
        if not active.any():
            break
        basis = tangent_basis(theta[active])
        ht = _batch_tangent_hessian(f, theta[active], basis)
        gtan = np.einsum("...di,...d->...i", basis, gt[active])
        step = _solve_tangent_step(ht, gtan)
        bad = ~np.isfinite(step).all(axis=-1)
        step = np.where(bad[..., None], 0.0, step)
        lens = np.linalg.norm(step, axis=-1, keepdims=True)
        step = np.where(lens > cfg.max_step, step * (cfg.max_step / lens), step)
        moved = theta[active] + np.einsum("...di,...i->...d", basis, step)
        norms = np.linalg.norm(moved, axis=-1, keepdims=True)
        ok = (norms[..., 0] > 1e-12) & ~bad
        safe = np.where(norms > 1e-12, norms, 1.0)
        theta[active] = np.where(ok[..., None], moved / safe, theta[active])
        dead = np.zeros(m, dtype=bool)
        dead[np.flatnonzero(active)[bad]] = True
        alive &= ~dead

    gt = _batch_tangent_gradient(f, theta)
    res = np.linalg.norm(gt, axis=-1)
    good = alive & (res <= cfg.residual_tol) & np.isfinite(theta).all(axis=-1)

    # deduplicate in seed order (deterministic)
    reps: list[int] = []
    for i in np.flatnonzero(good):
        ti = theta[i]
        if all(np.linalg.norm(ti - theta[j]) > cfg.merge_radius for j in reps):
            reps.append(int(i))

    census: list[CriticalPoint] = []
    for i in reps:
        th = theta[i]
        b = tangent_basis(th)
        h = intrinsic_hessian(f, th / np.linalg.norm(th), b)
        eigs = np.linalg.eigvalsh(h) if n == 2 else np.array([h[0, 0]])
        scale = float(np.abs(h).max())
        margin = float(np.abs(eigs).min())
        rel = margin / scale if scale > 0 else 0.0
        index = int(np.sum(eigs < 0)) if rel >= cfg.nd_rel_tol else None
        census.append(
            CriticalPoint(
                theta=th.copy(),
                value=float(f.value(th)),
                index=index,
                nd_margin=margin,
                hess_scale=scale,
                residual=float(res[i]),
            )
        )

    if any(p.index is None for p in census):
        raise IncompleteCensusError(
            "degenerate critical points at tolerance; no Morse census", census
        )
    chi = 2 if n % 2 == 0 else 0
    alt = sum((-1) ** p.index * 1 for p in census)
    if alt != chi or not census:
        raise IncompleteCensusError(
            f"Euler check failed: alternating index sum {alt} != {chi}", census
        )
    return census
