"""Shared corpus of integrands and independent numerical oracles."""

import numpy as np
import pytest

from wulffkit import RadialQuotient, SphereFunction, SqrtFunction

# --- S^1 corpus -------------------------------------------------------------
# cos(3t) = x^3 - 3xy^2 and sin(3t) = 3x^2y - y^3 on the unit circle.


def round_s1():
    return SphereFunction.constant(1, 1.0)


def conic_s1():
    # affine integrand; the inverted graph is an ellipse with a focus at 0
    return SphereFunction(1, [((0, 0), 2.0), ((1, 0), 1.0)])


def ellipse_dual_s1(a=2.0, b=1.0):
    # integrand of the centered ellipse x^2/a^2 + y^2/b^2 = 1
    return SqrtFunction(SphereFunction(1, [((2, 0), 1.0 / a**2), ((0, 2), 1.0 / b**2)]))


def quad_s1():
    return SphereFunction(1, [((0, 0), 1.0), ((1, 0), 0.1), ((2, 0), 0.05), ((0, 2), -0.05)])


def bump_s1(delta=0.08, phase="cos"):
    # integrand whose inverted graph is rho(t) = 1 + delta * trig(3t)
    cos3 = [((3, 0), delta), ((1, 2), -3.0 * delta)]
    sin3 = [((2, 1), 3.0 * delta), ((0, 3), -delta)]
    if phase == "cos":
        terms = cos3
    elif phase == "sin":
        terms = sin3
    else:  # cos(3t - pi/3)
        terms = [(e, 0.5 * c) for e, c in cos3] + [
            (e, np.sqrt(3.0) / 2.0 * c) for e, c in sin3
        ]
    return RadialQuotient(SphereFunction(1, [((0, 0), 1.0)] + terms))


def limacon_s1():
    # 1 - 0.5(x^2 - y^2): its inverted graph 1/(1 + 0.5 cos 2t) is not convex
    return SphereFunction(1, [((0, 0), 1.0), ((2, 0), -0.5), ((0, 2), 0.5)])


# --- S^2 corpus -------------------------------------------------------------


def round_s2():
    return SphereFunction.constant(2, 1.0)


def conic_s2():
    return SphereFunction(2, [((0, 0, 0), 2.0), ((1, 0, 0), 1.0)])


def triaxial_s2(a=1.3, b=1.0, c=0.8):
    return SqrtFunction(
        SphereFunction(
            2,
            [((2, 0, 0), 1.0 / a**2), ((0, 2, 0), 1.0 / b**2), ((0, 0, 2), 1.0 / c**2)],
        )
    )


def positive_corpus_s1():
    return [round_s1(), conic_s1(), ellipse_dual_s1(), quad_s1(), bump_s1()]


def positive_corpus_s2():
    return [round_s2(), conic_s2(), triaxial_s2()]


def negative_corpus_s1():
    return [bump_s1(0.6, "cos"), bump_s1(0.6, "sin"), bump_s1(0.6, "shift")]


# --- oracles ----------------------------------------------------------------


def great_circle(theta, u):
    """Unit-speed great circle through theta with initial direction u."""
    theta = np.asarray(theta, float)
    u = np.asarray(u, float)
    return lambda t: np.cos(t) * theta + np.sin(t) * u


def fd_gradient(f, theta, h=1e-5):
    """Tangent gradient by central differences along great circles."""
    from wulffkit import tangent_basis

    basis = tangent_basis(np.asarray(theta, float))
    out = np.zeros(len(theta))
    for j in range(basis.shape[1]):
        c = great_circle(theta, basis[:, j])
        d = (f.value(c(h)) - f.value(c(-h))) / (2.0 * h)
        out = out + d * basis[:, j]
    return out


def fd_hessian(f, theta, h=1e-5):
    """Tangent Hessian by second differences along tangent directions."""
    from wulffkit import tangent_basis

    basis = tangent_basis(np.asarray(theta, float))
    n = basis.shape[1]
    out = np.zeros((n, n))
    f0 = f.value(np.asarray(theta, float))
    for i in range(n):
        c = great_circle(theta, basis[:, i])
        out[i, i] = (f.value(c(h)) - 2.0 * f0 + f.value(c(-h))) / h**2
    if n == 2:
        mix = great_circle(theta, (basis[:, 0] + basis[:, 1]) / np.sqrt(2.0))
        dmix = (f.value(mix(h)) - 2.0 * f0 + f.value(mix(-h))) / h**2
        out[0, 1] = out[1, 0] = 0.5 * (2.0 * dmix - out[0, 0] - out[1, 1])
    return out


def brute_census_s1(f, n=1_000_000):
    """Local extrema of t -> f(cos t, sin t) on a dense circular grid.

    Returns (angles, values, indices): index 1 for maxima, 0 for minima.
    """
    t = np.arange(n) * (2.0 * np.pi / n)
    vals = f.value(np.stack([np.cos(t), np.sin(t)], axis=1))
    prev = np.roll(vals, 1)
    nxt = np.roll(vals, -1)
    ismax = (vals > prev) & (vals >= nxt)
    ismin = (vals < prev) & (vals <= nxt)
    angles = np.concatenate([t[ismax], t[ismin]])
    values = np.concatenate([vals[ismax], vals[ismin]])
    indices = np.concatenate([np.ones(ismax.sum(), int), np.zeros(ismin.sum(), int)])
    order = np.argsort(angles)
    return angles[order], values[order], indices[order]


def random_unit(rng, d):
    x = rng.standard_normal(d)
    return x / np.linalg.norm(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
