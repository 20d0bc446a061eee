"""Floating function: wet volumes, cut heights, closed forms, domination."""

import numpy as np
import pytest

from lcgeom.errors import ValidationError
from lcgeom.floating import (
    FloatingParams,
    alpha_root,
    floating_function,
    floating_potential_at,
    wet_volume,
)
from lcgeom.funcmodel import (
    AffineMap,
    LogConcaveFunction,
    MaxAffinePotential,
    apply_affine,
)
from lcgeom import quadrature


def exp_abs_1d():
    return LogConcaveFunction(MaxAffinePotential([[1.0], [-1.0]], [0.0, 0.0]))


def test_wet_volume_closed_form():
    # wet volume of e^{-|x|} under the plane -0.3 x + alpha: at u = 0 the
    # wet set is {|x| <= alpha}, volume = integral (alpha - |x|)^+ = alpha^2
    f = exp_abs_1d()
    assert wet_volume(f, [0.0], 0.7) == pytest.approx(0.49, abs=2e-4)
    # at u = 0.5, closed form integral (alpha + 0.5 x - |x|)^+ with alpha=1:
    # left branch (x<0): 1 - 1.5|x| on [-2/3, 0] area 1/3; right: 1 - 0.5x
    # on [0, 2] area 1; total 4/3
    assert wet_volume(f, [-0.5], 1.0) == pytest.approx(4.0 / 3.0, abs=2e-3)


def test_wet_volume_unbounded_direction():
    # |u| >= 1 never separates from |x|: infinite wet volume
    f = exp_abs_1d()
    assert np.isinf(wet_volume(f, [1.0], 0.1))


def test_alpha_root_closed_form():
    # alpha^2 = delta * integral f = 2 delta  =>  alpha = sqrt(2 delta)
    f = exp_abs_1d()
    for delta in (0.01, 0.05, 0.1):
        a = alpha_root(f, [0.0], delta)
        assert a == pytest.approx(np.sqrt(2.0 * delta), abs=2e-3)


def test_alpha_root_unbounded_returns_none():
    assert alpha_root(exp_abs_1d(), [1.0], 0.05) is None


def test_floating_potential_closed_form():
    # psi_delta(x0) = sqrt(x0^2 + 2 delta) for f = e^{-|x|}
    f = exp_abs_1d()
    for delta in (0.01, 0.05, 0.1):
        for x0 in (0.0, 0.5, 1.0):
            exact = np.sqrt(x0 ** 2 + 2.0 * delta)
            got = floating_potential_at(f, delta, [x0])
            assert got == pytest.approx(exact, rel=1e-2)


def test_floating_function_domination_and_mass():
    f = exp_abs_1d()
    g = floating_function(f, 0.05)
    xs = np.linspace(-6.0, 6.0, 501)[:, None]
    gap = g.values(xs) - f.values(xs)
    assert np.max(gap) <= 1e-12            # f_delta <= f everywhere
    ratio = quadrature.integrate(g) / quadrature.integrate(f)
    assert 0.8 < ratio < 1.0               # strictly wetter than nothing


def test_floating_function_profile_accuracy():
    f = exp_abs_1d()
    g = floating_function(f, 0.05)
    xs = np.array([[0.0], [0.5], [1.0]])
    exact = np.sqrt(xs[:, 0] ** 2 + 0.1)
    got = -np.log(g.values(xs))
    assert np.max(np.abs(got - exact) / exact) < 1e-2


def test_floating_delta_edge_cases():
    f = exp_abs_1d()
    assert floating_function(f, 0.0) is f
    with pytest.raises(ValidationError):
        floating_function(f, 1.0)
    with pytest.raises(ValidationError):
        FloatingParams(delta=-0.1)


def test_floating_covariance_1d():
    f = exp_abs_1d()
    delta = 0.05
    A = AffineMap([[0.7]], [0.4])
    left = floating_function(apply_affine(f, A), delta)
    right = floating_function(f, delta)
    xs = np.linspace(-1.5, 1.5, 101)[:, None]
    gap = np.abs(left.values(xs) - right.values(A(xs)))
    assert np.max(gap) < 1e-2
