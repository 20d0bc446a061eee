"""John function J(f): the largest t * indicator(ellipsoid) below f.

For fixed height t the best ellipsoid is the maximum-volume inscribed
ellipsoid of the super-level set G_f(t), so the search reduces to the
scalar profile t -> t * vol(MVIE(G_f(t))).  That profile is not known to be
unimodal, so a coarse logarithmic scan brackets the best level before
golden-section refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .funcmodel import (
    EllipsoidIndicatorPotential,
    LogConcaveFunction,
)
from .ellipsoid import Ellipsoid, mvie
from . import levelsets

#: lattice points per axis for the per-level hulls
JOHN_RESOLUTION = {1: 2049, 2: 129, 3: 33}

SCAN_LEVELS = 64
LEVEL_FLOOR = 1e-3          # scan starts at LEVEL_FLOOR * sup f
LEVEL_CEIL = 1.0 - 1e-3     # and stops short of sup f (G_f degenerates there)
GOLDEN_REL_WIDTH = 1e-4


@dataclass(frozen=True)
class JohnResult:
    """Optimal height, ellipsoid, objective t0 * vol(E), and t0 * 1_E."""

    t0: float
    ellipsoid: Ellipsoid
    objective: float
    function: LogConcaveFunction


def john_profile(f: LogConcaveFunction, t: float, resolution=None):
    """E(t) = MVIE(G_f(t)) and the objective value t * vol(E(t))."""
    sup = f.sup()
    if not 0 < t < sup:
        raise ValidationError("level above maximum")
    K = levelsets.superlevel(f, t, resolution or JOHN_RESOLUTION[f.dim])
    E = mvie(K)
    return E, t * E.volume()


def _objective(f, t, resolution):
    try:
        E, val = john_profile(f, t, resolution)
    except ValidationError:
        return None, -np.inf
    return E, val


def _indicator_function(t0: float, E: Ellipsoid) -> LogConcaveFunction:
    inv = np.linalg.inv(E.shape)
    pot = EllipsoidIndicatorPotential(inv, -inv @ E.center, offset=-np.log(t0))
    return LogConcaveFunction(pot)


def john_function(f: LogConcaveFunction, resolution=None) -> JohnResult:
    """Maximize t * vol(E(t)): log-spaced scan, then golden-section refine."""
    resolution = resolution or JOHN_RESOLUTION[f.dim]
    sup = f.sup()
    levels = sup * np.geomspace(LEVEL_FLOOR, LEVEL_CEIL, SCAN_LEVELS)
    values = np.full(SCAN_LEVELS, -np.inf)
    for i, t in enumerate(levels):
        values[i] = _objective(f, t, resolution)[1]
    if not np.any(np.isfinite(values)):
        raise SolverError("no inscribed ellipsoid")
    best = int(np.argmax(values))

    # golden-section on log t inside the bracketing neighbors of the scan
    lo = np.log(levels[max(best - 1, 0)])
    hi = np.log(levels[min(best + 1, SCAN_LEVELS - 1)])
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = _objective(f, np.exp(c), resolution)[1], \
        _objective(f, np.exp(d), resolution)[1]
    while (b - a) > GOLDEN_REL_WIDTH:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _objective(f, np.exp(c), resolution)[1]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _objective(f, np.exp(d), resolution)[1]
    t0 = float(np.exp(0.5 * (a + b)))
    E, val = _objective(f, t0, resolution)
    if E is None or not np.isfinite(val):
        raise SolverError("no inscribed ellipsoid")
    return JohnResult(t0=t0, ellipsoid=E, objective=val,
                      function=_indicator_function(t0, E))


def domination_gap(f: LogConcaveFunction, result: JohnResult, samples=None):
    """max over sampled points of J(f) - f; <= 0 certifies J(f) <= f there.

    Samples the ellipsoid on a lattice ten times finer than the level-set
    grid (interior points u scaled into the unit ball).
    """
    E, t0 = result.ellipsoid, result.t0
    n = E.dim
    m = 10 * JOHN_RESOLUTION[n] if n == 1 else {2: 129, 3: 33}[n] * 3
    axes = [np.linspace(-1.0, 1.0, m)] * n
    u = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    u = u[np.linalg.norm(u, axis=1) <= 1.0]
    pts = E.center + u @ E.shape.T
    return float(np.max(t0 - f.values(pts)))
