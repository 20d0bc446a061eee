"""Ellipsoids, the maximum-volume inscribed ellipsoid, and the shared
log-det cone subsolver used by the John and Loewner operators.

Both extremal-ellipsoid problems here have the same shape: decision
variables are a symmetric positive-definite matrix M, a vector v and a
scalar s; every constraint is a second-order-cone row

    || M x_i + gamma_i v ||  <=  d_i + tau_i s + <w_i, v>,

and the objective is log det M plus a linear term in s.  LogDetProgram
captures that form once; solve_logdet hands it to a conic solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError
from .funcmodel import _as_array, _as_matrix, unit_ball_volume
from .levelsets import Polytope


@dataclass(frozen=True)
class Ellipsoid:
    """{center + shape @ u : ||u|| <= 1} with shape symmetric positive-definite."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center))
        object.__setattr__(self, "shape", _as_matrix(self.shape, self.dim))
        sym_gap = np.max(np.abs(self.shape - self.shape.T))
        if sym_gap > 1e-8:
            raise ValidationError("ellipsoid shape matrix must be symmetric")
        object.__setattr__(self, "shape", 0.5 * (self.shape + self.shape.T))
        if np.linalg.eigvalsh(self.shape).min() <= 1e-10:
            raise ValidationError("ellipsoid shape matrix must be positive definite")

    @property
    def dim(self):
        return len(self.center)

    def volume(self):
        return unit_ball_volume(self.dim) * float(np.linalg.det(self.shape))

    def boundary_points(self, count=64, seed=0):
        """Deterministic sample of boundary points center + shape @ u, ||u||=1."""
        n = self.dim
        if n == 1:
            u = np.array([[1.0], [-1.0]])
        else:
            rng = np.random.default_rng(seed)
            u = rng.standard_normal((count, n))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        return self.center + u @ self.shape.T

    def contains(self, points, tol=1e-9):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        u = np.linalg.solve(self.shape, (points - self.center).T).T
        return np.linalg.norm(u, axis=1) <= 1.0 + tol

def map_ellipsoid(E: Ellipsoid, linear, shift=None) -> Ellipsoid:
    """Image {T c + a + T B u} of E under x -> T x + a, re-canonicalized SPD."""
    T = _as_matrix(linear, E.dim)
    a = np.zeros(E.dim) if shift is None else _as_array(shift, E.dim)
    center = T @ E.center + a
    F = T @ E.shape
    # polar decomposition: the SPD representative of the factor F
    shape = _spd_factor(F)
    return Ellipsoid(center, shape)


def _spd_factor(F):
    """SPD matrix B with B Q = F for some orthogonal Q (i.e. B = (F F^T)^{1/2})."""
    u, s, _ = np.linalg.svd(F)
    return u @ np.diag(s) @ u.T


@dataclass
class SocRow:
    """|| M x + gamma v || <= d + tau s + <w, v>."""

    x: np.ndarray
    gamma: float
    tau: float
    w: np.ndarray
    d: float


@dataclass
class LogDetProgram:
    """max/min of (sign) * [log det M + s_coef * s] over SOC rows."""

    dim: int
    rows: list = field(default_factory=list)
    s_coef: float = 0.0
    maximize: bool = True

    def add_row(self, x, gamma=0.0, tau=0.0, w=None, d=0.0):
        x = _as_array(x, self.dim)
        w = np.zeros(self.dim) if w is None else _as_array(w, self.dim)
        self.rows.append(SocRow(x, float(gamma), float(tau), w, float(d)))


@dataclass
class LogDetSolution:
    factor: np.ndarray
    vector: np.ndarray
    scalar: float
    objective: float
    status: str


def solve_logdet(prog: LogDetProgram) -> LogDetSolution:
    """Solve the log-det cone program with a conic interior-point solver."""
    import cvxpy as cp

    n = prog.dim
    if not prog.rows:
        raise ValidationError("log-det program has no constraint rows")
    M = cp.Variable((n, n), PSD=True)
    v = cp.Variable(n)
    s = cp.Variable()
    X = np.stack([r.x for r in prog.rows])            # (k, n)
    gam = np.array([r.gamma for r in prog.rows])
    tau = np.array([r.tau for r in prog.rows])
    W = np.stack([r.w for r in prog.rows])
    d = np.array([r.d for r in prog.rows])
    lhs = M @ X.T + cp.multiply(cp.reshape(v, (n, 1), order="F"),
                                gam[None, :])          # (n, k) columns Mx+gamma v
    rhs = d + tau * s + W @ v
    cons = [cp.norm(lhs, axis=0) <= rhs]
    obj = cp.log_det(M) + prog.s_coef * s
    problem = cp.Problem(cp.Maximize(obj) if prog.maximize else cp.Minimize(obj),
                         cons)
    last_exc = None
    for solver in (cp.CLARABEL, cp.SCS):
        try:
            problem.solve(solver=solver)
        except cp.error.SolverError as exc:
            last_exc = exc
            continue
        if problem.status in ("optimal", "optimal_inaccurate"):
            break
    else:
        if problem.status is None or M.value is None:
            raise SolverError(f"log-det solver failed: {last_exc}") from last_exc
    if problem.status not in ("optimal", "optimal_inaccurate"):
        err = SolverError(f"log-det solver returned status {problem.status}")
        err.best = None if M.value is None else LogDetSolution(
            np.asarray(M.value), np.asarray(v.value), float(s.value or 0.0),
            float(problem.value or np.nan), problem.status)
        raise err
    return LogDetSolution(factor=0.5 * (np.asarray(M.value) + np.asarray(M.value).T),
                          vector=np.asarray(v.value, dtype=float).reshape(n),
                          scalar=float(s.value) if s.value is not None else 0.0,
                          objective=float(problem.value),
                          status=problem.status)


def mvie_program(K: Polytope) -> LogDetProgram:
    """MVIE as a LogDetProgram: max log det B s.t. ||B a_i|| + <a_i, c> <= b_i."""
    prog = LogDetProgram(dim=K.dim, maximize=True)
    for a, b in zip(K.normals, K.offsets):
        scale = np.linalg.norm(a)
        if scale < 1e-14:
            continue
        prog.add_row(a / scale, gamma=0.0, tau=0.0, w=-a / scale, d=b / scale)
    return prog


def mvie(K: Polytope) -> Ellipsoid:
    """Maximum-volume inscribed ellipsoid of a full-dimensional polytope."""
    if not K.full_dimensional or len(K.normals) == 0:
        raise ValidationError("no full-dimensional body")
    sol = solve_logdet(mvie_program(K))
    try:
        return Ellipsoid(sol.vector, sol.factor)
    except ValidationError:
        raise ValidationError("no full-dimensional body")
