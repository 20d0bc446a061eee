"""Legendre transform, shifted transform and polar functions.

The grid transform factorizes into 1-D passes (the sup over a product
lattice separates coordinate-wise); each pass computes the exact discrete
conjugate for every dual node.  Polar functions are carried as global
max-affine potentials built from lattice support planes, so they stay
convex by construction and evaluable everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotIntegrableError, ValidationError
from .funcmodel import (
    GridField,
    GridPotential,
    LogConcaveFunction,
    MaxAffinePotential,
    Potential,
    _as_array,
)

#: lattice points per axis used to build polar support planes
POLAR_RESOLUTION = {1: 513, 2: 81, 3: 21}

#: lattice points per axis for the grid transform
GRID_RESOLUTION = {1: 513, 2: 129, 3: 33}


@dataclass(frozen=True)
class DualGrid:
    """Slope-space sample of the Legendre transform."""

    grid: GridField
    source_box: tuple

    def potential(self) -> GridPotential:
        return GridPotential(self.grid)

    def values(self):
        return self.grid.values


def _conjugate_axis(values, nodes, dual_nodes):
    """Exact discrete conjugate along axis 0 of `values` for every dual node.

    values: (m, ...) with +inf allowed and -inf marking empty lines from
    earlier passes.  Returns (len(dual_nodes), ...).
    """
    neg = np.where(np.isposinf(values), -np.inf, -values)
    out = np.empty((len(dual_nodes),) + values.shape[1:])
    for j, y in enumerate(dual_nodes):
        out[j] = np.max(nodes.reshape((-1,) + (1,) * (values.ndim - 1)) * y + neg,
                        axis=0)
    return out


def _slope_box(values, axes, steps):
    """Componentwise slope range of the sampled potential, padded 10 percent."""
    n = values.ndim
    lo, hi = np.zeros(n), np.zeros(n)
    for ax in range(n):
        v = np.moveaxis(values, ax, 0)
        d = (v[1:] - v[:-1]) / steps[ax]
        d = d[np.isfinite(d)]
        if d.size == 0:
            lo[ax], hi[ax] = -1.0, 1.0
            continue
        a, b = float(d.min()), float(d.max())
        pad = 0.1 * max(b - a, 1e-6)
        lo[ax], hi[ax] = a - pad, b + pad
    return lo, hi


def legendre(psi: Potential, dual_box=None, resolution=None) -> DualGrid:
    """Discrete Legendre transform of psi on a dual lattice.

    The primal lattice spans the domain box of psi; when no dual box is
    given it spans the sampled slopes (outside that range the transform is
    affine and adds nothing).
    """
    n = psi.dim
    m = resolution or GRID_RESOLUTION[n]
    lo, hi = psi.domain_box()
    axes = [np.linspace(lo[j], hi[j], m) for j in range(n)]
    steps = [(hi[j] - lo[j]) / (m - 1) for j in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    values = psi.values(pts).reshape((m,) * n)
    if not np.any(np.isfinite(values)):
        raise ValidationError("improper potential")

    if dual_box is None:
        dlo, dhi = _slope_box(values, axes, steps)
    else:
        dlo, dhi = (_as_array(dual_box[0], n), _as_array(dual_box[1], n))
    dual_axes = [np.linspace(dlo[j], dhi[j], m) for j in range(n)]

    # factorized passes: conjugating axis k of H gives C; feeding -C to the
    # next pass turns max(x.y - H) into the running max(sum x_j y_j - psi)
    work = values
    for ax in range(n):
        work = _conjugate_axis(np.moveaxis(work, ax, 0), np.asarray(axes[ax]),
                               np.asarray(dual_axes[ax]))
        work = np.moveaxis(work, 0, ax)
        if ax < n - 1:
            work = -work
    dstep = np.array([(dhi[j] - dlo[j]) / (m - 1) for j in range(n)])
    grid = GridField(dlo, dstep, (m,) * n, work)
    return DualGrid(grid=grid, source_box=(lo, hi))


def legendre_shifted(psi: Potential, z, dual_box=None, resolution=None) -> DualGrid:
    """L_z psi via the composition identity L_z = S_{-z} o L o S_z."""
    z = _as_array(z, psi.dim)
    shifted = psi.translate(z)
    inner_box = None
    if dual_box is not None:
        inner_box = (_as_array(dual_box[0], psi.dim) - z,
                     _as_array(dual_box[1], psi.dim) - z)
    dual = legendre(shifted, dual_box=inner_box, resolution=resolution)
    g = dual.grid
    return DualGrid(grid=GridField(g.origin + z, g.step, g.shape, g.values),
                    source_box=dual.source_box)


def exact_polar_potential(pot: Potential):
    """Closed-form L_0 psi for kinds whose conjugate is elementary, else None.

    - quadratic 0.5 (x-c)' Q (x-c) + o  ->  0.5 (w-m)' Q^{-1} (w-m) + k with
      m = -Q c and k = -o - 0.5 c' Q c;
    - polytope indicator (+ o)          ->  support function max_v <v, w> - o.
    """
    from .funcmodel import PolytopeIndicatorPotential, QuadraticPotential

    if isinstance(pot, QuadraticPotential):
        q = pot.matrix
        c = pot.center
        m = -q @ c
        k = -pot.offset - 0.5 * float(c @ q @ c)
        return QuadraticPotential(m, np.linalg.inv(q), k)
    if isinstance(pot, PolytopeIndicatorPotential):
        from .quadrature import _polytope_vertices

        vertices = _polytope_vertices(pot)
        return MaxAffinePotential(vertices,
                                  np.full(len(vertices), -pot.offset))
    if isinstance(pot, MaxAffinePotential) and pot.quad is None \
            and pot.domain is None:
        return _max_affine_conjugate(pot.slopes, pot.intercepts)
    return None


def _max_affine_conjugate(slopes, intercepts):
    """Conjugate of max_i(<s_i, x> + o_i): the lower convex hull of the
    lifted points (s_i, -o_i), restricted to conv{s_i}; None if degenerate."""
    from scipy.spatial import ConvexHull

    n = slopes.shape[1]
    lifted = np.column_stack([slopes, -intercepts])
    try:
        hull = ConvexHull(lifted)
        if n == 1:
            dom_normals = np.array([[1.0], [-1.0]])
            dom_offsets = np.array([float(slopes.max()), -float(slopes.min())])
        else:
            dom = ConvexHull(slopes)
            dom_normals = dom.equations[:, :-1]
            dom_offsets = -dom.equations[:, -1]
    except Exception:
        return None
    # lower facets: outward normal (a, b) with b < 0 describes the affine
    # piece v = -(d + <a, w>)/b of the hull's lower envelope
    eq = hull.equations
    lower = eq[:, n] < -1e-9
    if not np.any(lower):
        return None
    a, b, d = eq[lower, :n], eq[lower, n], eq[lower, n + 1]
    piece_slopes = -a / b[:, None]
    piece_intercepts = -d / b
    return MaxAffinePotential(piece_slopes, piece_intercepts,
                              domain=(dom_normals, dom_offsets))


def polar_planes(f: LogConcaveFunction, z, resolution=None):
    """Support planes of L_z psi from a primal lattice: slopes and intercepts.

    L_z psi(y) = max_i [(x_i - z) . y  - (x_i - z) . z - psi(x_i)] over finite
    lattice points x_i.
    """
    pot = f.potential
    n = pot.dim
    m = resolution or POLAR_RESOLUTION[n]
    lo, hi = pot.domain_box()
    axes = [np.linspace(lo[j], hi[j], m) for j in range(n)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    vals = pot.values(pts)
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise ValidationError("improper potential")
    x = pts[finite]
    slopes = x - z
    intercepts = -slopes @ z - vals[finite]
    slopes, intercepts = _prune_planes(slopes, intercepts, probe=2 * m + 1)
    return slopes, intercepts, _recession_domain(pot, z, lo, hi)


def _recession_domain(pot: Potential, z, lo, hi):
    """Halfspaces bounding dom L_z psi from directional recession slopes.

    Along each probe direction d the difference quotient
    (psi(c + 2R d) - psi(c + R d)) / R under-estimates the recession slope
    r(d), and L_z psi(y) = +inf whenever <d, y - z> exceeds r(d).  Clipping
    at the under-estimate is safe: where it bites, the true transform is
    already enormous, so e^{-L} is numerically zero there.
    """
    n = len(lo)
    center = 0.5 * (lo + hi)
    radius = 2.0 * float(np.max(hi - lo)) + 1.0
    dirs = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        dirs += [e, -e]
    if n >= 2:
        for signs in np.ndindex(*(2,) * n):
            d = np.array([1.0 if s else -1.0 for s in signs])
            dirs.append(d / np.linalg.norm(d))
    normals, offsets = [], []
    for d in dirs:
        v1 = pot.value(center + radius * d)
        v2 = pot.value(center + 2.0 * radius * d)
        if not (np.isfinite(v1) and np.isfinite(v2)):
            continue
        r = (v2 - v1) / radius
        normals.append(d)
        offsets.append(r + float(d @ z))
    if not normals:
        return None
    return np.array(normals), np.array(offsets)


def _prune_planes(slopes, intercepts, probe=65):
    """Keep only planes active somewhere on a probe lattice over slope space."""
    n = slopes.shape[1]
    if len(slopes) <= 4 * probe:
        return slopes, intercepts
    lo = slopes.min(axis=0)
    hi = slopes.max(axis=0)
    pad = 0.1 * (hi - lo) + 1e-9
    axes = [np.linspace(lo[j] - pad[j], hi[j] + pad[j], probe) for j in range(n)]
    Y = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    winners = np.zeros(len(slopes), dtype=bool)
    chunk = max(1, 10_000_000 // max(len(slopes), 1))
    for start in range(0, len(Y), chunk):
        block = Y[start:start + chunk]
        arg = np.argmax(block @ slopes.T + intercepts, axis=1)
        winners[np.unique(arg)] = True
    return slopes[winners], intercepts[winners]


def _interior_point_check(f: LogConcaveFunction, z):
    pot = f.potential
    z = _as_array(z, f.dim)
    lo, hi = pot.domain_box()
    eps = 1e-4 * float(np.max(hi - lo))
    probes = [z]
    for j in range(f.dim):
        e = np.zeros(f.dim)
        e[j] = eps
        probes += [z + e, z - e]
    vals = pot.values(np.array(probes))
    return bool(np.all(np.isfinite(vals)))


def polar(f: LogConcaveFunction, z=None, resolution=None) -> LogConcaveFunction:
    """Polar function f^z = exp(-L_z psi); requires z in int supp f."""
    z = np.zeros(f.dim) if z is None else _as_array(z, f.dim)
    if not _interior_point_check(f, z):
        raise ValidationError("polar center outside support")
    slopes, intercepts, domain = polar_planes(f, z, resolution)
    pot = MaxAffinePotential(slopes, intercepts, domain=domain)
    try:
        pot.min_value()
    except NotIntegrableError:
        raise ValidationError("polar center outside support")
    return LogConcaveFunction(pot)
