"""Level-set polytopes of log-concave functions and convex potentials.

Super-level sets G_f(s) = {f >= s} and sub-level sets E_psi(t) = {psi <= t}
coincide through G_f(s) = E_psi(-log s).  Both are computed as inner
approximations: the convex hull of all lattice points passing the level
test, so downstream containment arguments (John function domination,
floating-body cuts) err on the feasible side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .errors import ValidationError
from .funcmodel import LogConcaveFunction, Potential, _as_array

#: lattice points per axis when sampling a level set
LEVELSET_RESOLUTION = {1: 2049, 2: 257, 3: 65}


@dataclass(frozen=True)
class Polytope:
    """Bounded polytope carrying both vertex and halfspace descriptions.

    Halfspaces are rows (a, b) meaning <a, x> <= b.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    full_dimensional: bool = field(default=True)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def halfspaces(self):
        return list(zip(self.normals, self.offsets))

    def contains(self, points, tol=1e-9):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(points @ self.normals.T <= self.offsets + tol, axis=1)

    def diameter(self):
        v = self.vertices
        if len(v) == 1:
            return 0.0
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))


def hull_of_points(points) -> Polytope:
    """Convex hull of a point cloud as a Polytope.

    Degenerate (lower-dimensional) clouds yield full_dimensional=False with
    a vertex list but an empty halfspace description in n >= 2.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[1]
    if len(points) == 0:
        raise ValidationError("no full-dimensional body")
    if n == 1:
        lo, hi = float(points.min()), float(points.max())
        vertices = np.array([[lo], [hi]]) if hi > lo else np.array([[lo]])
        normals = np.array([[1.0], [-1.0]])
        offsets = np.array([hi, -lo])
        return Polytope(vertices, normals, offsets, full_dimensional=hi > lo)
    try:
        hull = ConvexHull(points)
    except Exception:
        # flat cloud: keep extreme points, flag as degenerate
        keep = np.unique(points, axis=0)
        return Polytope(keep, np.zeros((0, n)), np.zeros(0),
                        full_dimensional=False)
    vertices = points[hull.vertices]
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    return Polytope(vertices, normals, offsets, full_dimensional=True)


def _level_lattice(potential: Potential, t: float, resolution=None):
    """Lattice points with psi <= t plus interpolated boundary crossings.

    For every lattice edge leaving the sub-level set with a finite value on
    the far end, the linear interpolation crossing psi = t is added.  The
    chord of a convex function lies above it, so these points are still
    inside the body; they make the hull (and anything optimized over it)
    vary continuously with t instead of jumping lattice cell by cell.
    """
    n = potential.dim
    m = resolution or LEVELSET_RESOLUTION[n]
    box = potential.sublevel_box(t)
    if box is None:
        return np.zeros((0, n))
    lo, hi = box
    axes = [np.linspace(lo[j], hi[j], m) for j in range(n)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    vals = potential.values(pts)
    keep = [pts[vals <= t + 1e-12]]
    vals_grid = vals.reshape((m,) * n)
    pts_grid = pts.reshape((m,) * n + (n,))
    for ax in range(n):
        v = np.moveaxis(vals_grid, ax, 0)
        p = np.moveaxis(pts_grid, ax, 0)
        for va, vb, pa, pb in ((v[:-1], v[1:], p[:-1], p[1:]),
                               (v[1:], v[:-1], p[1:], p[:-1])):
            cross = (va <= t + 1e-12) & (vb > t + 1e-12) & np.isfinite(vb)
            if not np.any(cross):
                continue
            frac = ((t - va[cross]) / (vb[cross] - va[cross]))[:, None]
            keep.append(pa[cross] + frac * (pb[cross] - pa[cross]))
    return np.concatenate(keep)


def sublevel(potential: Potential, t: float, resolution=None) -> Polytope:
    """E_psi(t) = {x : psi(x) <= t} as the hull of passing lattice points."""
    pts = _level_lattice(potential, t, resolution)
    if len(pts) == 0:
        raise ValidationError("level above maximum")
    return hull_of_points(pts)


def superlevel(f: LogConcaveFunction, s: float, resolution=None) -> Polytope:
    """G_f(s) = {x : f(x) >= s} via the identity G_f(s) = E_psi(-log s)."""
    if s <= 0:
        raise ValidationError("superlevel threshold must be positive")
    if s >= f.sup() * (1.0 + 1e-12):
        raise ValidationError("level above maximum")
    return sublevel(f.potential, -np.log(s), resolution)


def _point_to_polytope_distance(point, poly: Polytope):
    """Euclidean distance from a point to conv(vertices of poly)."""
    v = poly.vertices
    p = _as_array(point, poly.dim)
    if len(v) == 1:
        return float(np.linalg.norm(v[0] - p))
    if poly.full_dimensional and len(poly.normals) and poly.contains(p)[0]:
        return 0.0
    import cvxpy as cp

    lam = cp.Variable(len(v), nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(v.T @ lam - p)),
                      [cp.sum(lam) == 1])
    prob.solve(solver=cp.CLARABEL)
    return float(np.sqrt(max(prob.value, 0.0)))


def hausdorff(K: Polytope, L: Polytope) -> float:
    """Hausdorff distance between two polytopes (exact via vertex maxima)."""
    if len(K.vertices) == 0 or len(L.vertices) == 0:
        raise ValidationError("no full-dimensional body")
    d_kl = max(_point_to_polytope_distance(v, L) for v in K.vertices)
    d_lk = max(_point_to_polytope_distance(v, K) for v in L.vertices)
    return max(d_kl, d_lk)
