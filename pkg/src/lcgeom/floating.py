"""Floating functions f_delta via the dual halfspace characterization.

The floating potential is psi_delta(x) = sup_u [alpha(u) - <u, x>] where
alpha(u) is the unique level at which the halfspace cut

    wet_volume(u, alpha) = integral of max{0, alpha - <x,u> - psi(x)} dx

removes exactly delta * integral(f) of epigraph volume.  On a lattice the
wet volume is piecewise linear and increasing in alpha, so alpha(u) comes
from sorted prefix sums instead of bisection, and one lattice evaluation of
psi is shared by every direction u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .funcmodel import (
    LogConcaveFunction,
    MaxAffinePotential,
    MaxPotential,
    _as_array,
)
from . import quadrature

#: lattice points per axis for wet-volume evaluation
WET_RESOLUTION = {1: 4097, 2: 257, 3: 49}

#: direction dictionary sizes (sphere directions x radial magnitudes)
DIRECTION_COUNT = {1: 2, 2: 48, 3: 96}
MAGNITUDE_COUNT = 14


@dataclass(frozen=True)
class FloatingParams:
    """Tunables for the dual search defining psi_delta."""

    delta: float
    directions: int = 0       # 0 = dimension default
    magnitudes: int = MAGNITUDE_COUNT
    ascent_steps: int = 50

    def __post_init__(self):
        if self.delta < 0:
            raise ValidationError("floating parameter delta must be >= 0")


class _WetLattice:
    """Shared lattice sample of psi used by every direction u."""

    def __init__(self, f: LogConcaveFunction, resolution=None):
        self.f = f
        self.dim = f.dim
        self.resolution = resolution or WET_RESOLUTION[self.dim]
        lo, hi = quadrature.truncation_box(f)
        pad = 0.25 * (hi - lo)
        self._build(lo - pad, hi + pad)

    def _build(self, lo, hi):
        m = self.resolution
        n = self.dim
        axes = [np.linspace(lo[j], hi[j], m) for j in range(n)]
        self.box = (lo, hi)
        self.cell = np.prod([(hi[j] - lo[j]) / (m - 1) for j in range(n)])
        grids = np.meshgrid(*axes, indexing="ij")
        self.points = np.stack([g.ravel() for g in grids], axis=-1)
        self.psi = self.f.potential.values(self.points)
        on_face = np.zeros(len(self.points), dtype=bool)
        for j in range(n):
            coord = self.points[:, j]
            on_face |= (coord == lo[j]) | (coord == hi[j])
        self.boundary = on_face

    def wet_volume(self, u, alpha):
        """Midpoint-rule cut volume; +inf when the wet set leaks outside."""
        phi = self.psi + self.points @ _as_array(u, self.dim)
        wet = alpha - phi
        if np.any(wet[self.boundary] > 0):
            return np.inf
        return float(np.sum(np.maximum(wet, 0.0)) * self.cell)

    def alpha_root(self, u, target):
        """alpha with wet_volume = target, or None when the set is unbounded.

        V(alpha) = sum_i (alpha - phi_i)+ * cell is piecewise linear and
        increasing, so the root sits in the sorted-prefix segment where
        alpha = (target/cell + prefix(phi)) / count lands between knots.
        """
        phi = self.psi + self.points @ _as_array(u, self.dim)
        finite = np.isfinite(phi)
        if not np.any(finite):
            return None
        vals = np.sort(phi[finite])
        prefix = np.cumsum(vals)
        counts = np.arange(1, len(vals) + 1)
        cand = (target / self.cell + prefix) / counts
        upper = np.append(vals[1:], np.inf)
        ok = (cand >= vals) & (cand <= upper)
        if not np.any(ok):
            return None
        alpha = float(cand[np.argmax(ok)])
        if np.isinf(self.wet_volume(u, alpha)):
            return None
        return alpha


def wet_volume(f: LogConcaveFunction, u, alpha: float, resolution=None) -> float:
    """Cut volume of the halfspace {(x, t): t <= alpha - <x,u>} in epi(psi)."""
    return _WetLattice(f, resolution).wet_volume(u, alpha)


def alpha_root(f: LogConcaveFunction, u, delta: float, resolution=None):
    """The cut level alpha(u) with wet_volume = delta * integral(f)."""
    if delta <= 0:
        raise ValidationError("alpha_root needs delta > 0")
    target = delta * quadrature.integrate(f)
    return _WetLattice(f, resolution).alpha_root(u, target)


def _slope_bound(f: LogConcaveFunction):
    """Upper bound on admissible |u|: the largest potential slope sampled."""
    lo, hi = f.potential.domain_box()
    m = 33
    axes = [np.linspace(lo[j], hi[j], m) for j in range(f.dim)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    vals = f.potential.values(pts).reshape((m,) * f.dim)
    best = 0.0
    for ax in range(f.dim):
        v = np.moveaxis(vals, ax, 0)
        d = np.abs(v[1:] - v[:-1]) / ((hi[ax] - lo[ax]) / (m - 1))
        d = d[np.isfinite(d)]
        if d.size:
            best = max(best, float(d.max()))
    # indicators sample zero slope everywhere inside the body; any tiny
    # magnitude then yields the flat cut alpha(u) = delta, which is exact
    # for them, so a small positive floor suffices
    return max(best, 1e-9)


def _unit_directions(n, count):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = np.linspace(0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    # Fibonacci sphere
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    theta = np.pi * (1 + 5 ** 0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi),
                     np.sin(theta) * np.sin(phi), np.cos(phi)], axis=-1)


def _direction_dictionary(f: LogConcaveFunction, params: FloatingParams):
    """Candidate u vectors: sphere directions times radial magnitudes."""
    n = f.dim
    count = params.directions or DIRECTION_COUNT[n]
    dirs = _unit_directions(n, count)
    s_max = _slope_bound(f)
    k = params.magnitudes
    low = np.linspace(0.08, 0.85, k // 2)
    high = 1.0 - np.geomspace(0.12, 0.004, k - k // 2)
    mags = s_max * np.concatenate([low, high])
    return np.concatenate([m * dirs for m in mags])


def _plane_dictionary(f: LogConcaveFunction, delta: float,
                      params: FloatingParams, lattice: _WetLattice):
    target = delta * quadrature.integrate(f)
    slopes, intercepts = [], []
    for u in _direction_dictionary(f, params):
        alpha = lattice.alpha_root(u, target)
        if alpha is None:
            continue
        slopes.append(-u)
        intercepts.append(alpha)
    if not slopes:
        raise ValidationError("floating function degenerate: no admissible cuts")
    return np.array(slopes), np.array(intercepts)


def _ascend(lattice: _WetLattice, target, x0, u0, alpha0, steps, s_max):
    """Coordinate ascent on u -> alpha(u) - <u, x0> from the dictionary best."""
    u, best = u0.copy(), alpha0 - float(u0 @ x0)
    h = 0.1 * s_max
    for _ in range(steps):
        improved = False
        for j in range(len(u)):
            for sign in (1.0, -1.0):
                cand = u.copy()
                cand[j] += sign * h
                alpha = lattice.alpha_root(cand, target)
                if alpha is None:
                    continue
                val = alpha - float(cand @ x0)
                if val > best + 1e-14:
                    u, best, improved = cand, val, True
        if not improved:
            h *= 0.5
            if h < 1e-6 * s_max:
                break
    return best


def floating_potential_at(f: LogConcaveFunction, delta: float, x0,
                          params: FloatingParams = None) -> float:
    """psi_delta(x0) = sup_u [alpha(u) - <u, x0>], global multi-start search."""
    x0 = _as_array(x0, f.dim)
    psi_x0 = f.potential.value(x0)
    if delta <= 0:
        return float(psi_x0)
    params = params or FloatingParams(delta=delta)
    lattice = _WetLattice(f)
    target = delta * quadrature.integrate(f)
    s_max = _slope_bound(f)
    best_u, best_val = None, -np.inf
    for u in _direction_dictionary(f, params):
        alpha = lattice.alpha_root(u, target)
        if alpha is None:
            continue
        val = alpha - float(u @ x0)
        if val > best_val:
            best_u, best_val = u, val
    if best_u is None:
        raise ValidationError("floating function degenerate: no admissible cuts")
    refined = _ascend(lattice, target, x0, best_u, best_val + float(best_u @ x0),
                      params.ascent_steps, s_max)
    return max(refined, float(psi_x0) if np.isfinite(psi_x0) else refined)


def floating_function(f: LogConcaveFunction, delta: float,
                      params: FloatingParams = None) -> LogConcaveFunction:
    """f_delta = exp(-psi_delta), kept as max(psi, dual cut planes).

    Clamping with psi itself preserves the pointwise domination
    f_delta <= f, which the finite direction dictionary alone cannot
    guarantee.
    """
    if delta < 0:
        raise ValidationError("floating parameter delta must be >= 0")
    if delta == 0:
        return f
    if delta >= 1:
        raise ValidationError("floating function degenerate for delta >= 1")
    params = params or FloatingParams(delta=delta)
    lattice = _WetLattice(f)
    slopes, intercepts = _plane_dictionary(f, delta, params, lattice)
    planes = MaxAffinePotential(slopes, intercepts)
    return LogConcaveFunction(MaxPotential([f.potential, planes]))
