"""Affine contravariant points: centroid, Santalo point, and combinators.

The Santalo point minimizes z -> integral of the polar f^z.  That integral
equals Phi(z) = integral of f^0(w) e^{<z,w>} dw, so one polar computation
suffices and every candidate z only re-tilts cached quadrature nodes.
log Phi is convex with gradient the tilted mean and Hessian the tilted
covariance, which makes damped Newton the natural solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError
from .funcmodel import (
    LogConcaveFunction,
    MaxAffinePotential,
    _as_array,
    translate,
)
from . import quadrature
from .legendre import exact_polar_potential, polar_planes
from . import levelsets


@dataclass(frozen=True)
class InvariantPoint:
    """A computed affine contravariant point with solver diagnostics."""

    location: np.ndarray
    kind: str
    objective: float = None
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "location", _as_array(self.location))
        if not np.all(np.isfinite(self.location)):
            raise ValidationError("invariant point location must be finite")


def centroid(f: LogConcaveFunction) -> InvariantPoint:
    """g(f) = (integral of x f(x) dx) / (integral of f)."""
    mass = quadrature.integrate(f)
    moment = quadrature.integrate_moment(f)
    return InvariantPoint(location=moment / mass, kind="centroid")


class _TiltedPolar:
    """Phi(zeta) = integral of f0(w) e^{<zeta, w>} dw for the centered f.

    Nodes, weights and polar potential values are cached; each evaluation is
    a single tilted exponential sum.  The node box is rebuilt (as a union)
    whenever the truncation box of the tilted integrand escapes it.
    """

    #: node resolutions: closed-form polars are cheap per node, lattice-plane
    #: polars are not
    NODE_RESOLUTION_EXACT = {1: 4097, 2: 513, 3: 97}

    def __init__(self, f_centered: LogConcaveFunction, resolution=None):
        self.f = f_centered
        n = f_centered.dim
        exact = exact_polar_potential(f_centered.potential)
        if exact is not None:
            self.polar_potential = exact
            self.node_resolution = self.NODE_RESOLUTION_EXACT[n]
        else:
            slopes, intercepts, domain = polar_planes(
                f_centered, np.zeros(n), resolution)
            self.polar_potential = MaxAffinePotential(slopes, intercepts,
                                                      domain=domain)
            self.node_resolution = quadrature.DEFAULT_RESOLUTION[n]
        self.dim = n
        self.box = None
        self.nodes = None
        self.weights = None
        self.node_values = None
        self.boundary = None
        self._ensure_box(np.zeros(n))

    def _tilted_potential(self, zeta):
        """Potential of w -> L psi(w) - <zeta, w> for truncation-box sizing."""
        p = self.polar_potential
        if isinstance(p, MaxAffinePotential):
            return MaxAffinePotential(p.slopes - zeta, p.intercepts,
                                      domain=p.domain)
        # quadratic: subtracting the linear tilt re-centers the paraboloid
        from .funcmodel import QuadraticPotential

        shift = np.linalg.solve(p.matrix, zeta)
        offset = p.offset - float(zeta @ p.center) - 0.5 * float(zeta @ shift)
        return QuadraticPotential(p.center + shift, p.matrix, offset)

    def fits(self, zeta) -> bool:
        """True when the tilted integrand is negligible on the box boundary."""
        a = -self.node_values + self.nodes @ _as_array(zeta, self.dim)
        finite = np.isfinite(a)
        if not np.any(finite & self.boundary):
            return True
        peak = np.max(a[finite])
        return np.max(a[self.boundary & finite]) <= peak - 30.0

    def _ensure_box(self, zeta):
        """Grow the node box to cover the tilt at zeta; nodes stay fixed
        between rebuilds so objective values remain comparable."""
        tilted = LogConcaveFunction(self._tilted_potential(zeta))
        lo, hi = quadrature.truncation_box(tilted)
        if self.box is not None:
            lo = np.minimum(lo, self.box[0])
            hi = np.maximum(hi, self.box[1])
        self.box = (lo, hi)
        m = self.node_resolution
        axes = [np.linspace(lo[j], hi[j], m) for j in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        self.nodes = np.stack([g.ravel() for g in grids], axis=-1)
        axis_weights = np.meshgrid(
            *[quadrature._simpson_weights(m) * (ax[1] - ax[0]) for ax in axes],
            indexing="ij")
        weights = np.ones(len(self.nodes))
        for g in axis_weights:
            weights *= g.ravel()
        self.weights = weights
        self.node_values = self.polar_potential.values(self.nodes)
        on_face = np.zeros(len(self.nodes), dtype=bool)
        for j in range(self.dim):
            coord = self.nodes[:, j]
            on_face |= (coord == lo[j]) | (coord == hi[j])
        self.boundary = on_face

    def moments(self, zeta):
        """(Phi, tilted mean, tilted covariance) at zeta."""
        zeta = _as_array(zeta, self.dim)
        a = -self.node_values + self.nodes @ zeta
        amax = np.max(a[np.isfinite(a)])
        e = self.weights * np.exp(np.where(np.isfinite(a), a - amax, -np.inf))
        phi_shifted = float(np.sum(e))
        if phi_shifted <= 0:
            raise SolverError("Santalo solver stalled")
        mean = (self.nodes.T @ e) / phi_shifted
        centered = self.nodes - mean
        cov = (centered.T * e) @ centered / phi_shifted
        return float(np.exp(amax) * phi_shifted), mean, cov

    def value(self, zeta):
        if not self.fits(zeta):
            self._ensure_box(zeta)
        return self.moments(zeta)[0]


def _interior_guard(f: LogConcaveFunction) -> levelsets.Polytope:
    """Superlevel polytope at 1e-6 * sup f, shrunk 1 percent about its mean."""
    poly = levelsets.superlevel(f, 1e-6 * f.sup())
    anchor = poly.vertices.mean(axis=0)
    vertices = anchor + 0.99 * (poly.vertices - anchor)
    return levelsets.hull_of_points(vertices)


def _require_interior(f: LogConcaveFunction, z):
    lo, hi = f.potential.domain_box()
    eps = 1e-4 * float(np.max(hi - lo))
    probes = [z] + [z + s * eps * e for s in (1.0, -1.0)
                    for e in np.eye(f.dim)]
    if not np.all(np.isfinite(f.potential.values(np.array(probes)))):
        raise ValidationError("polar center outside support")


def santalo_objective(f: LogConcaveFunction, z, resolution=None) -> float:
    """Phi(z) = integral of f^z = integral of f^0(w) e^{<z,w>} dw."""
    z = _as_array(z, f.dim)
    _require_interior(f, z)
    g = centroid(f).location
    tilted = _TiltedPolar(translate(f, g), resolution)
    return tilted.value(z - g)


def santalo(f: LogConcaveFunction, resolution=None, tol=1e-6,
            max_iter=50) -> InvariantPoint:
    """s(f) = argmin_z integral of f^z, by damped Newton on log Phi.

    Iterates start at the centroid (always interior) and stay inside the
    1e-6-superlevel polytope shrunk by 1 percent.
    """
    g = centroid(f).location
    fc = translate(f, g)
    tilted = _TiltedPolar(fc, resolution)
    guard = _interior_guard(fc)
    zeta = np.zeros(f.dim)
    total_iters = 0

    # Newton runs on a fixed node set; if an iterate's tilt escapes the box,
    # the box grows and the iteration restarts from the current point so all
    # line-search comparisons stay on one consistent quadrature.
    for _ in range(6):
        if not tilted.fits(zeta):
            tilted._ensure_box(zeta)
        restarted = False
        phi, mean, cov = tilted.moments(zeta)
        logphi = np.log(phi)
        while total_iters < max_iter:
            total_iters += 1
            grad = mean
            if np.linalg.norm(grad) <= tol:
                return InvariantPoint(location=g + zeta, kind="santalo",
                                      objective=phi, iterations=total_iters)
            # damped Newton step on log Phi (Hessian = tilted covariance, SPD)
            step = -np.linalg.solve(cov + 1e-12 * np.eye(f.dim), grad)
            t = 1.0
            accepted = False
            for _ in range(40):
                cand = zeta + t * step
                # guard was built from the centered function, so test the
                # centered iterate
                if guard.contains(cand)[0]:
                    if not tilted.fits(cand):
                        zeta = cand
                        restarted = True
                        break
                    cand_phi, cand_mean, cand_cov = tilted.moments(cand)
                    if np.log(cand_phi) <= logphi + 1e-4 * t * float(grad @ step):
                        zeta, phi, mean, cov = cand, cand_phi, cand_mean, cand_cov
                        logphi = np.log(phi)
                        accepted = True
                        break
                t *= 0.5
            if restarted:
                break
            if not accepted:
                raise SolverError("Santalo solver stalled")
        if not restarted:
            break
    raise SolverError("Santalo solver stalled")


def combine(p, q, lam: float):
    """(1 - lam) p + lam q; contravariant whenever p and q are."""

    def combined(f: LogConcaveFunction) -> InvariantPoint:
        a, b = p(f), q(f)
        return InvariantPoint(location=(1.0 - lam) * a.location
                              + lam * b.location, kind="combined")

    return combined


def point_of_map(p, P):
    """f -> p(P(f)): a contravariant point from a covariant mapping."""

    def composed(f: LogConcaveFunction) -> InvariantPoint:
        out = P(f)
        inner = out.function if hasattr(out, "function") else out
        q = p(inner)
        return InvariantPoint(location=q.location, kind="of-map",
                              objective=q.objective, iterations=q.iterations)

    return composed
