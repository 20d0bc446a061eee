"""Legendre transform and polar function against closed forms."""

import numpy as np
import pytest

from lcgeom.funcmodel import (
    LogConcaveFunction,
    MaxAffinePotential,
    PolytopeIndicatorPotential,
    QuadraticPotential,
)
from lcgeom import quadrature
from lcgeom.legendre import (
    exact_polar_potential,
    legendre,
    legendre_shifted,
    polar,
)


def test_legendre_of_quadratic_is_inverse_quadratic():
    # L(0.5 q x^2)(y) = 0.5 y^2 / q
    psi = QuadraticPotential([0.0], [[2.0]])
    dual = legendre(psi, dual_box=([-3.0], [3.0]), resolution=513)
    g = dual.grid
    ys = g.origin[0] + g.step[0] * np.arange(g.shape[0])
    exact = 0.25 * ys ** 2
    # discrete conjugate of a lattice-sampled parabola: O(step^2) error
    assert np.max(np.abs(g.values - exact)) < 5e-4


def test_legendre_of_interval_is_support_function():
    # L(1_{[-1,2]} potential)(y) = max(2y, -y)
    psi = PolytopeIndicatorPotential([[1.0], [-1.0]], [2.0, 1.0])
    dual = legendre(psi, dual_box=([-2.0], [2.0]), resolution=257)
    g = dual.grid
    ys = g.origin[0] + g.step[0] * np.arange(g.shape[0])
    exact = np.maximum(2.0 * ys, -ys)
    assert np.max(np.abs(g.values - exact)) < 1e-6


def test_legendre_shifted_matches_definition():
    # L_z psi(y) = sup_x <x - z, y - z> - psi(x); for psi = 0.5 x^2 and z = 1:
    # sup_x (x-1)(y-1) - 0.5 x^2 attained at x = y-1, giving
    # 0.5 (y-1)^2 - (y-1)
    psi = QuadraticPotential([0.0], [[1.0]])
    dual = legendre_shifted(psi, [1.0], dual_box=([-2.0], [4.0]), resolution=513)
    g = dual.grid
    ys = g.origin[0] + g.step[0] * np.arange(g.shape[0])
    exact = 0.5 * (ys - 1.0) ** 2 - (ys - 1.0)
    assert np.max(np.abs(g.values - exact)) < 5e-3


def test_exact_polar_of_gaussian():
    q = np.array([[2.0, 0.3], [0.3, 1.0]])
    psi = QuadraticPotential([0.4, -0.2], q, offset=0.1)
    dual = exact_polar_potential(psi)
    # check against a direct sup over a fine lattice
    xs = np.linspace(-6, 6, 201)
    lattice = np.stack([g.ravel() for g in np.meshgrid(xs, xs, indexing="ij")],
                       axis=-1)
    pvals = psi.values(lattice)
    for w in ([0.0, 0.0], [0.5, -0.3], [-1.0, 2.0]):
        w = np.array(w)
        brute = np.max(lattice @ w - pvals)
        assert dual.value(w) == pytest.approx(brute, abs=5e-3)


def test_exact_polar_of_polytope_is_support_function():
    square = PolytopeIndicatorPotential(
        [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], np.ones(4))
    dual = exact_polar_potential(square)
    for w in ([1.0, 1.0], [-2.0, 0.5], [0.0, 0.0]):
        exact = abs(w[0]) + abs(w[1])        # h_[-1,1]^2(w) = |w1| + |w2|
        assert dual.value(w) == pytest.approx(exact, abs=1e-12)


def test_exact_polar_of_max_affine_against_lp():
    from scipy.optimize import linprog
    rng = np.random.default_rng(3)
    slopes = rng.normal(size=(6, 2)) * 2.0
    intercepts = rng.normal(size=6)
    psi = MaxAffinePotential(slopes, intercepts)
    dual = exact_polar_potential(psi)
    assert dual is not None
    # conjugate of a max-affine at w in conv(slopes): the lower convex hull
    # of the lifted points, i.e. min of -sum(lam * intercepts) over the
    # simplex weights lam reproducing w
    for w in (slopes.mean(axis=0), 0.6 * slopes[0] + 0.4 * slopes[3]):
        res = linprog(-intercepts, A_eq=np.vstack([slopes.T, np.ones(6)]),
                      b_eq=np.concatenate([w, [1.0]]),
                      bounds=[(0, None)] * 6)
        assert res.success
        assert dual.value(w) == pytest.approx(res.fun, abs=1e-10)


def test_polar_of_standard_gaussian_is_self():
    f = LogConcaveFunction(QuadraticPotential([0.0, 0.0], np.eye(2)))
    g = polar(f)
    pts = np.random.default_rng(1).normal(size=(50, 2))
    assert np.max(np.abs(g.values(pts) - f.values(pts))) < 2e-2


def test_polar_mass_of_exponential_absolute_value():
    # (e^{-|x|})^0 = 1_{[-1,1]}: mass exactly 2
    f = LogConcaveFunction(MaxAffinePotential([[1.0], [-1.0]], [0.0, 0.0]))
    g = polar(f)
    assert quadrature.integrate(g) == pytest.approx(2.0, rel=1e-6)


def test_polar_clips_unbounded_recession():
    # f = e^{-x} on [-1, inf): polar slopes live in (-inf, -1]... actually
    # dom L psi = (-inf, 1] is cut on the right by the recession halfspace
    psi = MaxAffinePotential([[1.0]], [0.0], domain=([[-1.0]], [1.0]))
    f = LogConcaveFunction(psi)
    g = polar(f)
    # closed form: L psi(w) = sup_{x >= -1} x (w - 1) = 1 - w for w <= 1 and
    # +inf for w > 1, so f^0 = e^{w-1} on (-inf, 1] with mass exactly 1
    assert quadrature.integrate(g) == pytest.approx(1.0, rel=1e-4)
