"""Integration of log-concave functions over R^n.

The truncation box is certified by an exponential envelope
f(x) <= exp(-||x||/rho + t): the envelope's tail mass outside the box is
computed in closed form (incomplete gamma), so no sampling of the tail is
needed.  Inside the box a composite Simpson tensor rule with a fixed
lexicographic summation order keeps results bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammaincc

from .errors import NotIntegrableError, ValidationError
from .funcmodel import (
    EllipsoidIndicatorPotential,
    LogConcaveFunction,
    PolytopeIndicatorPotential,
    unit_ball_volume,
)

#: Simpson points per axis by dimension.
DEFAULT_RESOLUTION = {1: 1025, 2: 257, 3: 61}

#: Relative envelope tail mass allowed outside the truncation box.
TAIL_REL_TOL = 1e-6

_CHUNK = 200_000


@dataclass(frozen=True)
class TailBound:
    """Certified bound f(x) <= exp(-||x||/rho + t) for all x."""

    rho: float
    t: float
    center: np.ndarray
    t_centered: float

    def envelope(self, X):
        return np.exp(-np.linalg.norm(X, axis=1) / self.rho + self.t)

    def tail_mass(self, radius):
        """Closed-form envelope mass outside the ball ||x - center|| > radius."""
        n = len(self.center)
        surface = 2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0)
        return (np.exp(self.t_centered) * surface * self.rho ** n
                * gamma(n) * gammaincc(n, radius / self.rho))


@dataclass(frozen=True)
class QuadratureBox:
    lo: np.ndarray
    hi: np.ndarray
    resolution: int

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if np.any(lo >= hi):
            raise ValidationError("quadrature box must satisfy lo < hi")
        if self.resolution < 9 or self.resolution % 2 == 0:
            raise ValidationError("resolution must be odd and >= 9")


def tail_bound(f: LogConcaveFunction, samples=10_000, seed=0) -> TailBound:
    """Exponential envelope via the sublevel set {psi <= psi(x_c) + 2}.

    rho is twice the circumradius of that set about the minimizer x_c; the
    additive constant is verified (and inflated if needed) at random samples.
    """
    if f.cached_tail is not None:
        return f.cached_tail
    pot = f.potential
    xc = pot.min_point()
    vmin = pot.value(xc)
    if not np.isfinite(vmin):
        raise NotIntegrableError("not integrable: no finite minimum found")
    try:
        box = pot.sublevel_box(vmin + 2.0)
    except NotIntegrableError:
        raise NotIntegrableError("not integrable")
    if box is None:
        raise NotIntegrableError("not integrable")
    lo, hi = box
    corners = np.stack([lo - xc, hi - xc])
    circum = float(np.linalg.norm(np.max(np.abs(corners), axis=0)))
    rho = max(2.0 * circum, 1e-8)
    t_centered = 1.0 - vmin
    t = t_centered + np.linalg.norm(xc) / rho

    rng = np.random.default_rng(seed)
    n = f.dim
    radii = rng.exponential(scale=rho, size=samples) + rng.random(samples) * rho
    dirs = rng.normal(size=(samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = xc + radii[:, None] * dirs
    fv = f.values(pts)
    env = np.exp(-np.linalg.norm(pts, axis=1) / rho + t)
    gap = np.max(fv - env, initial=0.0)
    if gap > 1e-9:
        t += np.log1p(gap / np.min(env[env > 0]))
    tb = TailBound(rho=rho, t=float(t), center=xc, t_centered=float(t_centered))
    f.cached_tail = tb
    return tb


def truncation_box(f: LogConcaveFunction, rel_tol=TAIL_REL_TOL):
    """Box outside which the certified envelope mass is below tolerance."""
    tb = tail_bound(f)
    pot = f.potential
    xc, rho = tb.center, tb.rho
    vmin = pot.min_value()

    # crude positive estimate of the integral for the relative criterion
    lo2, hi2 = pot.sublevel_box(vmin + 2.0)
    mids = [np.linspace(a, b, 17) for a, b in zip(lo2, hi2)]
    pts = np.stack([m.ravel() for m in np.meshgrid(*mids, indexing="ij")], axis=-1)
    cell = np.prod((hi2 - lo2) / 16.0) if np.all(hi2 > lo2) else 1.0
    estimate = max(float(np.sum(f.values(pts))) * cell, np.exp(-vmin) * 1e-12)

    radius = rho
    while tb.tail_mass(radius) > 0.5 * rel_tol * estimate and radius < 1e6 * rho:
        radius *= 1.25
    env_lo, env_hi = xc - radius, xc + radius

    # intersect with a pointwise-negligible sublevel box so smooth integrands
    # are not sampled at absurdly coarse steps
    env_vol = np.prod(env_hi - env_lo)
    margin = max(20.0, float(np.log(np.exp(-vmin) * max(env_vol, 1.0)
                                    / (0.5 * rel_tol * estimate))))
    dom = pot.sublevel_box(vmin + margin)
    lo = np.maximum(env_lo, dom[0])
    hi = np.minimum(env_hi, dom[1])
    hi = np.where(hi <= lo, lo + 1e-9, hi)
    return lo, hi


def _simpson_weights(m):
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def integrate_on_box(values_fn, dim, box, resolution=None, with_moment=False):
    """Composite Simpson tensor rule on a box; fixed lexicographic order."""
    if isinstance(box, QuadratureBox):
        lo, hi, resolution = box.lo, box.hi, box.resolution
    else:
        lo, hi = box
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
    m = resolution or DEFAULT_RESOLUTION[dim]
    if m % 2 == 0:
        m += 1
    axes = [np.linspace(lo[j], hi[j], m) for j in range(dim)]
    steps = [(hi[j] - lo[j]) / (m - 1) for j in range(dim)]
    w1 = _simpson_weights(m)
    total = 0.0
    moment = np.zeros(dim)
    n_pts = m ** dim
    # lexicographic enumeration in fixed-size chunks
    for start in range(0, n_pts, _CHUNK):
        stop = min(start + _CHUNK, n_pts)
        flat = np.arange(start, stop)
        idx = np.empty((len(flat), dim), dtype=int)
        rem = flat
        for j in range(dim - 1, -1, -1):
            idx[:, j] = rem % m
            rem = rem // m
        pts = np.stack([axes[j][idx[:, j]] for j in range(dim)], axis=-1)
        wts = np.prod([w1[idx[:, j]] * steps[j] for j in range(dim)], axis=0)
        vals = values_fn(pts)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        total += float(np.dot(wts, vals))
        if with_moment:
            moment += (wts * vals) @ pts
    return (total, moment) if with_moment else total


def _exact_indicator_mass_moment(pot):
    """Closed-form mass and first moment for indicator potentials, else None."""
    if isinstance(pot, EllipsoidIndicatorPotential):
        n = pot.dim
        vol = unit_ball_volume(n) / abs(np.linalg.det(pot.matrix))
        mass = np.exp(-pot.offset) * vol
        return mass, mass * pot.min_point()
    if isinstance(pot, PolytopeIndicatorPotential):
        verts = _polytope_vertices(pot)
        vol, cen = _hull_volume_centroid(verts)
        mass = np.exp(-pot.offset) * vol
        return mass, mass * cen
    return None


def _polytope_vertices(pot: PolytopeIndicatorPotential):
    n = pot.dim
    if n == 1:
        lo, hi = pot.sublevel_box(pot.offset)
        return np.array([[lo[0]], [hi[0]]])
    from scipy.spatial import HalfspaceIntersection
    interior = pot.min_point()
    hs = np.hstack([pot.normals, -pot.offsets[:, None]])
    inter = HalfspaceIntersection(hs, interior)
    return inter.intersections


def _hull_volume_centroid(vertices):
    n = vertices.shape[1]
    if n == 1:
        lo, hi = vertices.min(), vertices.max()
        return hi - lo, np.array([(lo + hi) / 2.0])
    from scipy.spatial import ConvexHull, Delaunay
    tri = Delaunay(vertices)
    simplices = vertices[tri.simplices]
    vols = np.abs(np.linalg.det(simplices[:, 1:] - simplices[:, :1])) \
        / np.prod(np.arange(1, n + 1))
    cents = simplices.mean(axis=1)
    vol = float(vols.sum())
    if vol <= 0:
        raise ValidationError("degenerate polytope")
    return vol, (vols @ cents) / vol


def integrate(f: LogConcaveFunction, resolution=None):
    """Total mass of f; closed form for indicator kinds, Simpson otherwise."""
    if f.cached_mass is not None and resolution is None:
        return f.cached_mass
    exact = _exact_indicator_mass_moment(f.potential)
    if exact is not None:
        mass = exact[0]
    else:
        mass = integrate_on_box(f.values, f.dim, truncation_box(f), resolution)
    if not (mass > 0 and np.isfinite(mass)):
        raise NotIntegrableError("not integrable")
    if resolution is None:
        f.cached_mass = mass
    return mass


def integrate_moment(f: LogConcaveFunction, resolution=None):
    """Componentwise integral of x f(x)."""
    if f.cached_moment is not None and resolution is None:
        return f.cached_moment
    exact = _exact_indicator_mass_moment(f.potential)
    if exact is not None:
        moment = exact[1]
    else:
        _, moment = integrate_on_box(f.values, f.dim, truncation_box(f),
                                     resolution, with_moment=True)
    if resolution is None:
        f.cached_moment = moment
    return moment
