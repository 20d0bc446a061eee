"""Representations of log-concave functions f = exp(-psi) and affine maps.

A function is carried by its convex potential psi: R^n -> R u {+inf}.
Potentials come in a handful of analytic kinds plus a grid-sampled kind;
every kind knows how to evaluate itself in batch, translate itself, and
pull itself back through a nonsingular affine map, so the action
(Af)(x) = f(Ax) is exact for analytic kinds and a re-sampling for grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import linprog

from .errors import NotIntegrableError, ValidationError

INF = np.inf

_DET_RTOL = 1e-12


def _as_array(x, dim=None):
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and a.shape != (dim,):
        raise ValidationError(f"expected vector of length {dim}, got shape {a.shape}")
    return a


def _as_matrix(m, dim=None):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected square matrix, got shape {a.shape}")
    if dim is not None and a.shape != (dim, dim):
        raise ValidationError(f"expected {dim}x{dim} matrix, got shape {a.shape}")
    return a


def unit_ball_volume(n):
    """Volume of the Euclidean unit ball in R^n."""
    from scipy.special import gamma
    return np.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


class AffineMap:
    """Nonsingular affine map A(x) = T x + a acting on arguments: (Af)(x) = f(Ax)."""

    def __init__(self, linear, shift=None):
        self.linear = _as_matrix(linear)
        n = self.linear.shape[0]
        self.shift = np.zeros(n) if shift is None else _as_array(shift, n)
        det = np.linalg.det(self.linear)
        opnorm = np.linalg.norm(self.linear, 2)
        if abs(det) <= _DET_RTOL * max(opnorm, 1.0) ** n:
            raise ValidationError("singular linear part in affine map")
        self.det = det

    @property
    def dim(self):
        return self.linear.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.shift

    def compose(self, other):
        """Map x -> self(other(x))."""
        return AffineMap(self.linear @ other.linear,
                         self.linear @ other.shift + self.shift)

    def inverse(self):
        tinv = np.linalg.inv(self.linear)
        return AffineMap(tinv, -tinv @ self.shift)

    @staticmethod
    def identity(n):
        return AffineMap(np.eye(n))

    @staticmethod
    def translation(z):
        z = _as_array(z)
        return AffineMap(np.eye(len(z)), z)

    def __repr__(self):
        return f"AffineMap(linear={self.linear.tolist()}, shift={self.shift.tolist()})"


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------

class Potential:
    """Convex extended-real potential. Values are floats with +inf allowed."""

    dim: int

    def value(self, x):
        return float(self.values(np.asarray(x, dtype=float)[None, :])[0])

    def values(self, X):
        raise NotImplementedError

    def translate(self, z):
        """Potential x -> psi(x + z)."""
        raise NotImplementedError

    def precompose(self, A: AffineMap):
        """Potential x -> psi(A x)."""
        raise NotImplementedError

    def min_point(self):
        """A minimizer (or near-minimizer) of psi; guaranteed finite value."""
        raise NotImplementedError

    def min_value(self):
        return self.value(self.min_point())

    def sublevel_box(self, t):
        """Axis-aligned bounding box (lo, hi) of {psi <= t}, or None if empty.

        Conservative outward; raises NotIntegrableError when unbounded.
        """
        raise NotImplementedError

    def domain_box(self, margin=40.0):
        """Box containing everything that matters: {psi <= min + margin}."""
        return self.sublevel_box(self.min_value() + margin)

    def grad(self, x, h=1e-5):
        """Central-difference (sub)gradient where finite; one-sided at edges."""
        x = _as_array(x)
        g = np.zeros(self.dim)
        f0 = self.value(x)
        if not np.isfinite(f0):
            return g
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            fp, fm = self.value(x + e), self.value(x - e)
            if np.isfinite(fp) and np.isfinite(fm):
                g[j] = (fp - fm) / (2 * h)
            elif np.isfinite(fp):
                g[j] = (fp - f0) / h
            elif np.isfinite(fm):
                g[j] = (f0 - fm) / h
        return g


class QuadraticPotential(Potential):
    """psi(x) = 0.5 (x-c)' Q (x-c) + offset with Q symmetric positive definite."""

    kind = "quadratic-form"

    def __init__(self, center, matrix, offset=0.0):
        self.center = _as_array(center)
        self.dim = len(self.center)
        self.matrix = _as_matrix(matrix, self.dim)
        self.matrix = 0.5 * (self.matrix + self.matrix.T)
        if np.linalg.eigvalsh(self.matrix).min() <= 0:
            raise ValidationError("quadratic-form matrix must be positive definite")
        self.offset = float(offset)

    def values(self, X):
        d = X - self.center
        return 0.5 * np.einsum("ij,jk,ik->i", d, self.matrix, d) + self.offset

    def translate(self, z):
        return QuadraticPotential(self.center - _as_array(z, self.dim),
                                  self.matrix, self.offset)

    def precompose(self, A):
        t, a = A.linear, A.shift
        return QuadraticPotential(np.linalg.solve(t, self.center - a),
                                  t.T @ self.matrix @ t, self.offset)

    def min_point(self):
        return self.center.copy()

    def min_value(self):
        return self.offset

    def sublevel_box(self, t):
        r2 = 2.0 * (t - self.offset)
        if r2 < 0:
            return None
        half = np.sqrt(r2 * np.diag(np.linalg.inv(self.matrix)))
        return self.center - half, self.center + half


class AffineNormPotential(Potential):
    """psi(x) = ||M x + v|| + offset; the Loewner family e^{-||Ax|| + t}."""

    kind = "affine-norm"

    def __init__(self, matrix, vector, offset=0.0):
        self.matrix = _as_matrix(matrix)
        self.dim = self.matrix.shape[0]
        self.vector = _as_array(vector, self.dim)
        if abs(np.linalg.det(self.matrix)) <= _DET_RTOL:
            raise ValidationError("affine-norm matrix must be nonsingular")
        self.offset = float(offset)

    def values(self, X):
        return np.linalg.norm(X @ self.matrix.T + self.vector, axis=1) + self.offset

    def translate(self, z):
        z = _as_array(z, self.dim)
        return AffineNormPotential(self.matrix, self.vector + self.matrix @ z,
                                   self.offset)

    def precompose(self, A):
        return AffineNormPotential(self.matrix @ A.linear,
                                   self.matrix @ A.shift + self.vector, self.offset)

    def min_point(self):
        return -np.linalg.solve(self.matrix, self.vector)

    def min_value(self):
        return self.offset

    def sublevel_box(self, t):
        r = t - self.offset
        if r < 0:
            return None
        c = self.min_point()
        half = r * np.sqrt(np.diag(np.linalg.inv(self.matrix.T @ self.matrix)))
        return c - half, c + half


class EllipsoidIndicatorPotential(Potential):
    """psi(x) = offset on {||M x + v|| <= 1}, +inf outside."""

    kind = "indicator-ellipsoid"

    def __init__(self, matrix, vector, offset=0.0):
        self.matrix = _as_matrix(matrix)
        self.dim = self.matrix.shape[0]
        self.vector = _as_array(vector, self.dim)
        if abs(np.linalg.det(self.matrix)) <= _DET_RTOL:
            raise ValidationError("indicator-ellipsoid matrix must be nonsingular")
        self.offset = float(offset)

    @staticmethod
    def ball(center, radius, offset=0.0):
        center = _as_array(center)
        n = len(center)
        return EllipsoidIndicatorPotential(np.eye(n) / radius, -center / radius,
                                           offset)

    def values(self, X):
        r = np.linalg.norm(X @ self.matrix.T + self.vector, axis=1)
        out = np.full(len(X), INF)
        out[r <= 1.0 + 1e-12] = self.offset
        return out

    def translate(self, z):
        z = _as_array(z, self.dim)
        return EllipsoidIndicatorPotential(self.matrix,
                                           self.vector + self.matrix @ z,
                                           self.offset)

    def precompose(self, A):
        return EllipsoidIndicatorPotential(self.matrix @ A.linear,
                                           self.matrix @ A.shift + self.vector,
                                           self.offset)

    def min_point(self):
        return -np.linalg.solve(self.matrix, self.vector)

    def min_value(self):
        return self.offset

    def sublevel_box(self, t):
        if t < self.offset:
            return None
        c = self.min_point()
        half = np.sqrt(np.diag(np.linalg.inv(self.matrix.T @ self.matrix)))
        return c - half, c + half


class PolytopeIndicatorPotential(Potential):
    """psi(x) = offset on {Ax <= b}, +inf outside; the polytope must be bounded."""

    kind = "indicator-polytope"

    def __init__(self, halfspace_normals, halfspace_offsets, offset=0.0):
        self.normals = np.asarray(halfspace_normals, dtype=float)
        if self.normals.ndim != 2:
            raise ValidationError("halfspace normals must be a 2-D array")
        self.dim = self.normals.shape[1]
        self.offsets = _as_array(halfspace_offsets)
        if len(self.offsets) != len(self.normals):
            raise ValidationError("halfspace normals/offsets length mismatch")
        self.offset = float(offset)
        self._box = None

    def values(self, X):
        inside = np.all(X @ self.normals.T <= self.offsets + 1e-12, axis=1)
        out = np.full(len(X), INF)
        out[inside] = self.offset
        return out

    def translate(self, z):
        z = _as_array(z, self.dim)
        return PolytopeIndicatorPotential(self.normals,
                                          self.offsets - self.normals @ z,
                                          self.offset)

    def precompose(self, A):
        return PolytopeIndicatorPotential(self.normals @ A.linear,
                                          self.offsets - self.normals @ A.shift,
                                          self.offset)

    def min_point(self):
        # Chebyshev center: strictly interior by construction.
        norms = np.linalg.norm(self.normals, axis=1)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        a_ub = np.hstack([self.normals, norms[:, None]])
        res = linprog(c, A_ub=a_ub, b_ub=self.offsets, bounds=[(None, None)] * (self.dim + 1))
        if not res.success or res.x[-1] <= 0:
            raise ValidationError("indicator polytope has empty interior")
        return res.x[:-1]

    def min_value(self):
        return self.offset

    def sublevel_box(self, t):
        if t < self.offset:
            return None
        if self._box is None:
            lo, hi = np.zeros(self.dim), np.zeros(self.dim)
            for j in range(self.dim):
                for sign, out in ((1.0, hi), (-1.0, lo)):
                    c = np.zeros(self.dim)
                    c[j] = -sign
                    res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                                  bounds=[(None, None)] * self.dim)
                    if res.status == 3:
                        raise NotIntegrableError("not integrable: unbounded polytope")
                    if not res.success:
                        raise ValidationError("empty indicator polytope")
                    out[j] = sign * (-res.fun)
            self._box = (lo, hi)
        return self._box


class MaxAffinePotential(Potential):
    """psi(x) = max_i (s_i . x + o_i) [+ 0.5 x' Q x], Q symmetric PSD or None.

    An optional polytope domain (normals, offsets) restricts the potential to
    {x : <a_i, x> <= b_i}; psi = +inf outside.
    """

    kind = "pwl-max-affine"

    def __init__(self, slopes, intercepts, quad=None, domain=None):
        self.slopes = np.asarray(slopes, dtype=float)
        if self.slopes.ndim != 2 or len(self.slopes) == 0:
            raise ValidationError("max-affine slopes must be a nonempty 2-D array")
        self.dim = self.slopes.shape[1]
        self.intercepts = _as_array(intercepts)
        if len(self.intercepts) != len(self.slopes):
            raise ValidationError("max-affine slopes/intercepts length mismatch")
        self.quad = None if quad is None else _as_matrix(quad, self.dim)
        if self.quad is not None:
            self.quad = 0.5 * (self.quad + self.quad.T)
            if np.linalg.eigvalsh(self.quad).min() < -1e-12:
                raise ValidationError("max-affine quadratic term must be PSD")
        if domain is None:
            self.domain = None
        else:
            normals = np.atleast_2d(np.asarray(domain[0], dtype=float))
            offsets = _as_array(domain[1])
            if normals.shape != (len(offsets), self.dim):
                raise ValidationError("max-affine domain shape mismatch")
            self.domain = (normals, offsets)
        self._minimum = None

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(len(X))
        # bound the (points x planes) work matrix to ~100 MB
        chunk = max(1, 12_000_000 // max(len(self.slopes), 1))
        for s in range(0, len(X), chunk):
            block = X[s:s + chunk]
            out[s:s + chunk] = np.max(block @ self.slopes.T + self.intercepts,
                                      axis=1)
        if self.quad is not None:
            out = out + 0.5 * np.einsum("ij,jk,ik->i", X, self.quad, X)
        if self.domain is not None:
            normals, offsets = self.domain
            outside = np.any(X @ normals.T > offsets + 1e-12, axis=1)
            out[outside] = INF
        return out

    def translate(self, z):
        z = _as_array(z, self.dim)
        slopes = self.slopes
        intercepts = self.intercepts + slopes @ z
        quad = self.quad
        if quad is not None:
            # 0.5 (x+z)'Q(x+z) = 0.5 x'Qx + (Qz).x + const; linear and constant
            # parts fold into every plane
            slopes = slopes + quad @ z
            intercepts = intercepts + 0.5 * z @ quad @ z
        domain = self.domain
        if domain is not None:
            domain = (domain[0], domain[1] - domain[0] @ z)
        return MaxAffinePotential(slopes, intercepts, quad, domain)

    def precompose(self, A):
        t, a = A.linear, A.shift
        slopes = self.slopes @ t
        intercepts = self.intercepts + self.slopes @ a
        quad = self.quad
        if quad is not None:
            lin = t.T @ (quad @ a)
            const = 0.5 * a @ quad @ a
            slopes = slopes + lin
            intercepts = intercepts + const
            quad = t.T @ quad @ t
        domain = self.domain
        if domain is not None:
            domain = (domain[0] @ t, domain[1] - domain[0] @ a)
        return MaxAffinePotential(slopes, intercepts, quad, domain)

    def _solve_min(self):
        if self._minimum is not None:
            return self._minimum
        if self.quad is None:
            # LP: min t s.t. s_i.x + o_i <= t, domain rows a_j.x <= b_j
            n, k = self.dim, len(self.slopes)
            c = np.zeros(n + 1)
            c[-1] = 1.0
            a_ub = np.hstack([self.slopes, -np.ones((k, 1))])
            b_ub = -self.intercepts
            if self.domain is not None:
                normals, offsets = self.domain
                a_ub = np.vstack([a_ub,
                                  np.hstack([normals, np.zeros((len(offsets), 1))])])
                b_ub = np.concatenate([b_ub, offsets])
            res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                          bounds=[(None, None)] * (n + 1))
            if res.status == 3:
                raise NotIntegrableError("not integrable: max-affine unbounded below")
            if not res.success:
                raise ValidationError("max-affine minimization failed")
            self._minimum = (res.x[:n], res.x[-1])
        else:
            import cvxpy as cp
            x = cp.Variable(self.dim)
            obj = cp.max(self.slopes @ x + self.intercepts) \
                + 0.5 * cp.quad_form(x, cp.psd_wrap(self.quad))
            cons = []
            if self.domain is not None:
                cons.append(self.domain[0] @ x <= self.domain[1])
            prob = cp.Problem(cp.Minimize(obj), cons)
            prob.solve(solver=cp.CLARABEL)
            if prob.status not in ("optimal", "optimal_inaccurate"):
                raise NotIntegrableError("not integrable: unbounded potential")
            self._minimum = (np.asarray(x.value, dtype=float).reshape(self.dim),
                             float(prob.value))
        return self._minimum

    def min_point(self):
        return self._solve_min()[0].copy()

    def min_value(self):
        return self._solve_min()[1]

    def sublevel_box(self, t):
        if t < self.min_value():
            return None
        n = self.dim
        lo, hi = np.zeros(n), np.zeros(n)
        if self.quad is None:
            a_ub, b_ub = self.slopes, t - self.intercepts
            if self.domain is not None:
                a_ub = np.vstack([a_ub, self.domain[0]])
                b_ub = np.concatenate([b_ub, self.domain[1]])
            for j in range(n):
                for sign, out in ((1.0, hi), (-1.0, lo)):
                    c = np.zeros(n)
                    c[j] = -sign
                    res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                                  bounds=[(None, None)] * n)
                    if res.status == 3:
                        raise NotIntegrableError(
                            "not integrable: unbounded sublevel set")
                    if not res.success:
                        return None
                    out[j] = sign * (-res.fun)
        else:
            import cvxpy as cp
            x = cp.Variable(n)
            cons = [self.slopes @ x + self.intercepts
                    + 0.5 * cp.quad_form(x, cp.psd_wrap(self.quad)) <= t]
            if self.domain is not None:
                cons.append(self.domain[0] @ x <= self.domain[1])
            for j in range(n):
                for sign, out in ((1.0, hi), (-1.0, lo)):
                    prob = cp.Problem(cp.Maximize(sign * x[j]), cons)
                    prob.solve(solver=cp.CLARABEL)
                    if prob.status not in ("optimal", "optimal_inaccurate"):
                        raise NotIntegrableError(
                            "not integrable: unbounded sublevel set")
                    out[j] = sign * float(prob.value)
        return lo, hi


@dataclass(frozen=True)
class GridField:
    """Regular-lattice sample of an extended-real convex potential."""

    origin: np.ndarray
    step: np.ndarray
    shape: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_array(self.origin))
        object.__setattr__(self, "step", _as_array(self.step))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        vals = np.asarray(self.values, dtype=float).reshape(self.shape)
        object.__setattr__(self, "values", vals)
        if np.any(self.step <= 0):
            raise ValidationError("grid steps must be positive")
        if np.any(np.isneginf(vals)):
            raise ValidationError("grid values must never be -inf")
        if not np.any(np.isfinite(vals)):
            raise ValidationError("improper potential")
        finite = np.isfinite(vals)
        _, ncomp = ndimage.label(finite)
        if ncomp != 1:
            raise ValidationError("finite grid cells must form a connected set")

    @property
    def dim(self):
        return len(self.origin)

    def axes(self):
        return [self.origin[j] + self.step[j] * np.arange(self.shape[j])
                for j in range(self.dim)]

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class GridPotential(Potential):
    """Piecewise-multilinear interpolation of grid samples; +inf outside the box.

    A cell contributes only when all its corners are finite (closed-superlevel
    convention for sampled indicators).
    """

    kind = "grid"

    def __init__(self, grid: GridField):
        self.grid = grid
        self.dim = grid.dim
        if not self._has_interior_cube():
            raise ValidationError("grid potential is degenerate: "
                                  "needs a finite cube of side >= 2 steps")

    def _has_interior_cube(self):
        finite = np.isfinite(self.grid.values)
        block = finite
        for ax in range(self.dim):
            n = block.shape[ax]
            if n < 3:
                return False
            sl0 = [slice(None)] * self.dim
            sl1 = [slice(None)] * self.dim
            sl2 = [slice(None)] * self.dim
            sl0[ax] = slice(0, n - 2)
            sl1[ax] = slice(1, n - 1)
            sl2[ax] = slice(2, n)
            block = block[tuple(sl0)] & block[tuple(sl1)] & block[tuple(sl2)]
        return bool(np.any(block))

    def values(self, X):
        g = self.grid
        rel = (X - g.origin) / g.step
        out = np.full(len(X), INF)
        eps = 1e-9
        inside = np.all((rel >= -eps) & (rel <= np.array(g.shape) - 1 + eps), axis=1)
        if not np.any(inside):
            return out
        rel = np.clip(rel[inside], 0.0, np.array(g.shape) - 1.0)
        base = np.minimum(rel.astype(int), np.array(g.shape) - 2).astype(int)
        base = np.maximum(base, 0)
        frac = rel - base
        acc = np.zeros(len(rel))
        bad = np.zeros(len(rel), dtype=bool)
        for corner in range(2 ** self.dim):
            offs = np.array([(corner >> j) & 1 for j in range(self.dim)])
            idx = tuple((base + offs).T)
            vals = g.values[idx]
            w = np.prod(np.where(offs, frac, 1.0 - frac), axis=1)
            bad |= ~np.isfinite(vals)
            acc += np.where(np.isfinite(vals), vals, 0.0) * w
        acc[bad] = INF
        out[inside] = acc
        return out

    def translate(self, z):
        g = self.grid
        return GridPotential(GridField(g.origin - _as_array(z, self.dim),
                                       g.step, g.shape, g.values))

    def precompose(self, A):
        # Re-sample psi(Ax) at the same resolution on the pulled-back box.
        g = self.grid
        lo = g.origin
        hi = g.origin + g.step * (np.array(g.shape) - 1)
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(self.dim, -1).T
        ainv = A.inverse()
        mapped = ainv(corners)
        new_lo, new_hi = mapped.min(axis=0), mapped.max(axis=0)
        shape = g.shape
        step = (new_hi - new_lo) / (np.array(shape) - 1)
        step = np.where(step <= 0, 1e-12, step)
        new_grid = GridField(new_lo, step, shape, np.zeros(shape))
        pts = new_grid.points()
        vals = self.values(A(pts)).reshape(shape)
        return GridPotential(GridField(new_lo, step, shape, vals))

    def min_point(self):
        g = self.grid
        idx = np.unravel_index(np.nanargmin(np.where(np.isfinite(g.values),
                                                     g.values, INF)), g.shape)
        return g.origin + g.step * np.array(idx, dtype=float)

    def min_value(self):
        v = self.grid.values
        return float(np.min(v[np.isfinite(v)]))

    def sublevel_box(self, t):
        g = self.grid
        mask = np.isfinite(g.values) & (g.values <= t)
        if not np.any(mask):
            return None
        idx = np.argwhere(mask)
        lo_i = np.maximum(idx.min(axis=0) - 1, 0)
        hi_i = np.minimum(idx.max(axis=0) + 1, np.array(g.shape) - 1)
        return g.origin + g.step * lo_i, g.origin + g.step * hi_i


class MaxPotential(Potential):
    """Pointwise maximum of convex potentials (still convex)."""

    kind = "max"

    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise ValidationError("max potential needs at least one part")
        self.dim = self.parts[0].dim

    def values(self, X):
        out = self.parts[0].values(X)
        for p in self.parts[1:]:
            out = np.maximum(out, p.values(X))
        return out

    def translate(self, z):
        return MaxPotential([p.translate(z) for p in self.parts])

    def precompose(self, A):
        return MaxPotential([p.precompose(A) for p in self.parts])

    def _tightest_box(self, t):
        best = None
        for p in self.parts:
            try:
                box = p.sublevel_box(t)
            except (NotImplementedError, NotIntegrableError):
                continue
            if box is None:
                return None
            if best is None:
                best = [box[0].copy(), box[1].copy()]
            else:
                best[0] = np.maximum(best[0], box[0])
                best[1] = np.minimum(best[1], box[1])
        return None if best is None else (best[0], best[1])

    def sublevel_box(self, t):
        return self._tightest_box(t)

    def min_point(self):
        # Lattice search inside the tightest available parts box, then refine.
        t = min(p.min_value() for p in self.parts) + 60.0
        box = self._tightest_box(t)
        if box is None:
            raise ValidationError("empty max potential")
        lo, hi = box
        x = self.parts[0].min_point()
        best_val = self.value(x)
        for _ in range(4):
            axes = [np.linspace(lo[j], hi[j], 17) for j in range(self.dim)]
            pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")],
                           axis=-1)
            vals = self.values(pts)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, x = vals[i], pts[i]
            span = (hi - lo) / 8.0
            lo, hi = x - span, x + span
        return x


# ---------------------------------------------------------------------------
# Log-concave functions
# ---------------------------------------------------------------------------

class LogConcaveFunction:
    """f(x) = exp(-psi(x)) with convex potential psi, integrable, non-degenerate."""

    def __init__(self, potential: Potential):
        self.potential = potential
        self.cached_mass = None
        self.cached_moment = None
        self.cached_tail = None

    @property
    def dim(self):
        return self.potential.dim

    def __call__(self, x):
        return float(np.exp(-self.potential.value(np.asarray(x, dtype=float))))

    def values(self, X):
        return np.exp(-self.potential.values(np.asarray(X, dtype=float)))

    def sup(self):
        """||f||_inf = exp(-min psi)."""
        return float(np.exp(-self.potential.min_value()))

    def scale(self, c):
        """c * f for c > 0, as a log-concave function."""
        if c <= 0:
            raise ValidationError("scaling constant must be positive")
        return LogConcaveFunction(_add_offset(self.potential, -np.log(c)))

    def __repr__(self):
        return f"LogConcaveFunction({type(self.potential).__name__}, dim={self.dim})"


def _add_offset(potential, delta):
    """Return the potential psi + delta (shifts f by the factor e^{-delta})."""
    p = potential
    if isinstance(p, QuadraticPotential):
        return QuadraticPotential(p.center, p.matrix, p.offset + delta)
    if isinstance(p, AffineNormPotential):
        return AffineNormPotential(p.matrix, p.vector, p.offset + delta)
    if isinstance(p, EllipsoidIndicatorPotential):
        return EllipsoidIndicatorPotential(p.matrix, p.vector, p.offset + delta)
    if isinstance(p, PolytopeIndicatorPotential):
        return PolytopeIndicatorPotential(p.normals, p.offsets, p.offset + delta)
    if isinstance(p, MaxAffinePotential):
        return MaxAffinePotential(p.slopes, p.intercepts + delta, p.quad, p.domain)
    if isinstance(p, GridPotential):
        g = p.grid
        return GridPotential(GridField(g.origin, g.step, g.shape, g.values + delta))
    if isinstance(p, MaxPotential):
        return MaxPotential([_add_offset(q, delta) for q in p.parts])
    raise ValidationError(f"cannot offset potential of type {type(p).__name__}")


def apply_affine(f: LogConcaveFunction, A: AffineMap) -> LogConcaveFunction:
    """(Af)(x) = f(Ax)."""
    if A.dim != f.dim:
        raise ValidationError("affine map dimension mismatch")
    return LogConcaveFunction(f.potential.precompose(A))


def translate(f: LogConcaveFunction, z) -> LogConcaveFunction:
    """(S_z f)(x) = f(x + z)."""
    return LogConcaveFunction(f.potential.translate(_as_array(z, f.dim)))


def l1_distance(f: LogConcaveFunction, g: LogConcaveFunction, resolution=None):
    """Integral of |f - g| over the union of the two truncation boxes."""
    from . import quadrature
    box_f = quadrature.truncation_box(f)
    box_g = quadrature.truncation_box(g)
    lo = np.minimum(box_f[0], box_g[0])
    hi = np.maximum(box_f[1], box_g[1])
    return quadrature.integrate_on_box(
        lambda X: np.abs(f.values(X) - g.values(X)), f.dim, (lo, hi),
        resolution=resolution)


def convexity_residual(potential: Potential, rng=None, trials=1000):
    """Max violation of midpoint convexity over random triples in the domain box.

    Grid potentials are probed on lattice-aligned triples so the declared
    interpolation is what gets tested.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = potential.domain_box()
    n = potential.dim
    if isinstance(potential, GridPotential):
        # lattice-collinear triples: x = origin + step*i, y = x + L*step*d,
        # mid = x + m*step*d for integer 0 <= m <= L
        g = potential.grid
        shape = np.array(g.shape)
        i = rng.integers(0, shape, size=(trials, n))
        d = rng.integers(-3, 4, size=(trials, n))
        length = rng.integers(1, 5, size=trials)
        k = i + length[:, None] * d
        m = np.array([rng.integers(0, s + 1) for s in length])
        mid_idx = i + m[:, None] * d
        ok = np.all((k >= 0) & (k < shape), axis=1) & np.any(d != 0, axis=1)
        i, k, mid_idx, m, length = i[ok], k[ok], mid_idx[ok], m[ok], length[ok]
        x = g.origin + g.step * i
        y = g.origin + g.step * k
        mid = g.origin + g.step * mid_idx
        lam = 1.0 - m / length
        vx, vy, vm = potential.values(x), potential.values(y), potential.values(mid)
    else:
        x = rng.uniform(lo, hi, size=(trials, n))
        y = rng.uniform(lo, hi, size=(trials, n))
        lam = rng.random(trials)
        mid = lam[:, None] * x + (1 - lam[:, None]) * y
        vx, vy, vm = potential.values(x), potential.values(y), potential.values(mid)
    bound = lam * vx + (1 - lam) * vy
    finite = np.isfinite(bound) & np.isfinite(vm)
    if not np.any(finite):
        return 0.0
    return float(np.max(vm[finite] - bound[finite], initial=0.0))


# ---------------------------------------------------------------------------
# Function-spec files (JSON)
# ---------------------------------------------------------------------------

def _encode_values(values):
    return ["inf" if not np.isfinite(v) else v for v in np.asarray(values).ravel().tolist()]


def _decode_values(values):
    return np.array([INF if v == "inf" else float(v) for v in values])


def potential_to_spec(p: Potential) -> dict:
    if isinstance(p, QuadraticPotential):
        return {"kind": "quadratic-form", "center": p.center.tolist(),
                "matrix": p.matrix.tolist(), "offset": p.offset}
    if isinstance(p, AffineNormPotential):
        return {"kind": "affine-norm", "matrix": p.matrix.tolist(),
                "vector": p.vector.tolist(), "offset": p.offset}
    if isinstance(p, EllipsoidIndicatorPotential):
        return {"kind": "indicator-ellipsoid", "matrix": p.matrix.tolist(),
                "vector": p.vector.tolist(), "offset": p.offset}
    if isinstance(p, PolytopeIndicatorPotential):
        return {"kind": "indicator-polytope",
                "halfspaces": [list(a) + [b] for a, b in zip(p.normals.tolist(),
                                                             p.offsets.tolist())],
                "offset": p.offset}
    if isinstance(p, MaxAffinePotential):
        spec = {"kind": "pwl-max-affine",
                "planes": [list(s) + [o] for s, o in zip(p.slopes.tolist(),
                                                         p.intercepts.tolist())]}
        if p.quad is not None:
            spec["quad"] = p.quad.tolist()
        if p.domain is not None:
            spec["domain"] = [list(a) + [b] for a, b in zip(p.domain[0].tolist(),
                                                            p.domain[1].tolist())]
        return spec
    if isinstance(p, GridPotential):
        g = p.grid
        return {"kind": "grid", "origin": g.origin.tolist(), "step": g.step.tolist(),
                "shape": list(g.shape), "values": _encode_values(g.values)}
    if isinstance(p, MaxPotential):
        return {"kind": "max", "parts": [potential_to_spec(q) for q in p.parts]}
    raise ValidationError(f"potential type {type(p).__name__} has no spec form")


def potential_from_spec(spec: dict) -> Potential:
    kind = spec.get("kind")
    if kind == "quadratic-form":
        return QuadraticPotential(spec["center"], spec["matrix"],
                                  spec.get("offset", 0.0))
    if kind == "norm-cone":
        shift = _as_array(spec.get("shift", np.zeros(1)))
        rho = float(spec["scale"])
        n = len(shift)
        return AffineNormPotential(rho * np.eye(n), -rho * shift,
                                   spec.get("offset", 0.0))
    if kind == "affine-norm":
        return AffineNormPotential(spec["matrix"], spec["vector"],
                                   spec.get("offset", 0.0))
    if kind == "indicator-ball":
        return EllipsoidIndicatorPotential.ball(spec["center"], float(spec["radius"]),
                                                spec.get("offset", 0.0))
    if kind == "indicator-ellipsoid":
        return EllipsoidIndicatorPotential(spec["matrix"], spec["vector"],
                                           spec.get("offset", 0.0))
    if kind == "indicator-polytope":
        hs = np.asarray(spec["halfspaces"], dtype=float)
        return PolytopeIndicatorPotential(hs[:, :-1], hs[:, -1],
                                          spec.get("offset", 0.0))
    if kind == "pwl-max-affine":
        planes = np.asarray(spec["planes"], dtype=float)
        domain = None
        if "domain" in spec:
            hs = np.asarray(spec["domain"], dtype=float)
            domain = (hs[:, :-1], hs[:, -1])
        return MaxAffinePotential(planes[:, :-1], planes[:, -1], spec.get("quad"),
                                  domain)
    if kind == "grid":
        shape = tuple(spec["shape"])
        return GridPotential(GridField(spec["origin"], spec["step"], shape,
                                       _decode_values(spec["values"]).reshape(shape)))
    if kind == "max":
        return MaxPotential([potential_from_spec(q) for q in spec["parts"]])
    raise ValidationError(f"unknown function-spec kind: {kind!r}")


def function_from_spec(spec: dict) -> LogConcaveFunction:
    return LogConcaveFunction(potential_from_spec(spec))


def function_to_spec(f: LogConcaveFunction) -> dict:
    return potential_to_spec(f.potential)


def canonical_dumps(spec: dict) -> str:
    """Canonical serialization; round-trips bit-exactly through loads/dumps."""
    return json.dumps(spec, sort_keys=True, separators=(",", ":"))


def load_function(path) -> LogConcaveFunction:
    with open(path) as fh:
        return function_from_spec(json.load(fh))


def save_function(f: LogConcaveFunction, path):
    with open(path, "w") as fh:
        fh.write(canonical_dumps(function_to_spec(f)))
