"""John function: inscribed ellipsoid profiles and optimal level."""

import numpy as np
import pytest

from lcgeom.funcmodel import (
    AffineMap,
    EllipsoidIndicatorPotential,
    LogConcaveFunction,
    QuadraticPotential,
    apply_affine,
)
from lcgeom.john import domination_gap, john_function, john_profile


def gaussian_1d():
    return LogConcaveFunction(QuadraticPotential([0.0], [[1.0]]))


def test_john_profile_of_gaussian():
    # G_f(t) = [-r, r] with r = sqrt(-2 log t); objective t * 2r
    f = gaussian_1d()
    t = 0.5
    E, obj = john_profile(f, t)
    r = np.sqrt(-2.0 * np.log(t))
    assert E.shape[0, 0] == pytest.approx(r, abs=2e-3)
    assert obj == pytest.approx(2.0 * t * r, rel=2e-3)


def test_john_of_gaussian_1d():
    # maximizing 2 t sqrt(-2 log t): optimum at t0 = e^{-1/2}, E = [-1, 1]
    f = gaussian_1d()
    res = john_function(f)
    assert res.t0 == pytest.approx(np.exp(-0.5), abs=1e-3)
    assert res.ellipsoid.center[0] == pytest.approx(0.0, abs=1e-2)
    assert res.ellipsoid.shape[0, 0] == pytest.approx(1.0, abs=1e-2)
    assert res.objective == pytest.approx(2.0 * np.exp(-0.5), rel=5e-3)


def test_john_of_disk_indicator():
    # f = 1_{B}: every level gives the same ellipsoid, so t0 -> sup f = 1
    f = LogConcaveFunction(EllipsoidIndicatorPotential.ball([0.0, 0.0], 1.0))
    res = john_function(f)
    assert res.t0 == pytest.approx(1.0, abs=2e-3)
    assert np.allclose(res.ellipsoid.center, 0.0, atol=1e-2)
    assert np.allclose(res.ellipsoid.shape, np.eye(2), atol=1.5e-2)


def test_john_function_is_dominated():
    f = gaussian_1d()
    res = john_function(f)
    assert domination_gap(f, res) <= 1e-6
    # the result function is t0 on the ellipsoid and 0 outside
    assert res.function([0.0]) == pytest.approx(res.t0, rel=1e-10)
    assert res.function([5.0]) == 0.0


def test_john_covariance_1d():
    f = gaussian_1d()
    A = AffineMap([[0.5]], [0.2])
    left = john_function(apply_affine(f, A))
    right = john_function(f)
    assert left.t0 == pytest.approx(right.t0, abs=2e-3)
    # J(Af) = A(Jf): ellipsoid maps through A^{-1}... the level body of Af
    # is A^{-1} of the level body of f
    c, r = right.ellipsoid.center[0], right.ellipsoid.shape[0, 0]
    assert left.ellipsoid.center[0] == pytest.approx((c - 0.2) / 0.5, abs=2e-2)
    assert left.ellipsoid.shape[0, 0] == pytest.approx(r / 0.5, abs=2e-2)
