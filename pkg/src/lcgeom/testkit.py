"""Property-test harness: seeded random instances, invariance checks and
machine-readable reports.

Each check turns one theorem statement (contravariance of points,
covariance of mappings, continuity along perturbation schedules) into a
residual compared against a tolerance; reports serialize to JSON lines for
replay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .errors import ValidationError
from .funcmodel import (
    AffineMap,
    LogConcaveFunction,
    MaxAffinePotential,
    PolytopeIndicatorPotential,
    QuadraticPotential,
    apply_affine,
    l1_distance,
)
from . import quadrature


@dataclass(frozen=True)
class PropertyReport:
    """One property check: pass iff residual <= tolerance."""

    name: str
    instance: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self):
        return {"name": self.name, "instance": self.instance,
                "residual": self.residual, "tolerance": self.tolerance,
                "pass": bool(self.passed)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def write_reports(reports, path):
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")


def random_logconcave(seed, n=2, kind="gaussian", complexity=4) -> LogConcaveFunction:
    """Deterministic random LC instance of the requested kind."""
    if n not in (1, 2, 3):
        raise ValidationError("random instances support n in {1, 2, 3}")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        A = rng.normal(size=(n, n))
        Q = A @ A.T + 0.2 * np.eye(n)
        center = rng.uniform(-1.0, 1.0, size=n)
        return LogConcaveFunction(QuadraticPotential(center, Q))
    if kind == "polytope":
        pts = rng.uniform(-1.5, 1.5, size=(complexity + n + 2, n))
        if n == 1:
            normals = np.array([[1.0], [-1.0]])
            offsets = np.array([float(pts.max()), -float(pts.min())])
        else:
            hull = ConvexHull(pts)
            normals = hull.equations[:, :-1]
            offsets = -hull.equations[:, -1]
        return LogConcaveFunction(PolytopeIndicatorPotential(normals, offsets))
    if kind == "max-affine":
        slopes = rng.normal(scale=1.5, size=(complexity, n))
        intercepts = rng.uniform(-0.5, 0.5, size=complexity)
        # coercive guard planes keep the potential integrable regardless of
        # the random draw
        guard = 3.0 * np.vstack([np.eye(n), -np.eye(n)])
        slopes = np.vstack([slopes, guard])
        intercepts = np.concatenate([intercepts, np.zeros(2 * n)])
        return LogConcaveFunction(MaxAffinePotential(slopes, intercepts))
    raise ValidationError(f"unknown random instance kind: {kind!r}")


def random_affine(seed, n, max_condition=10.0) -> AffineMap:
    """Random nonsingular affine map with condition number <= max_condition."""
    rng = np.random.default_rng(seed)
    for _ in range(100):
        T = rng.normal(size=(n, n))
        s = np.linalg.svd(T, compute_uv=False)
        if s.min() > 1e-3 and s.max() / s.min() <= max_condition:
            break
    else:
        T = np.eye(n)
    return AffineMap(T, rng.uniform(-0.5, 0.5, size=n))


def support_diameter(f: LogConcaveFunction) -> float:
    lo, hi = quadrature.truncation_box(f)
    return float(np.linalg.norm(hi - lo))


def interior_samples(f: LogConcaveFunction, count=100, seed=0):
    """Points where f exceeds 1e-3 of its sup, drawn from the truncation box."""
    rng = np.random.default_rng(seed)
    lo, hi = quadrature.truncation_box(f)
    floor = 1e-3 * f.sup()
    out = []
    for _ in range(200):
        pts = rng.uniform(lo, hi, size=(max(4 * count, 256), f.dim))
        pts = pts[f.values(pts) >= floor]
        out.append(pts)
        if sum(len(p) for p in out) >= count:
            break
    pts = np.concatenate(out)
    if len(pts) < count:
        raise ValidationError("could not sample interior points")
    return pts[:count]


def check_contravariance(point_fn, f, A: AffineMap, tol,
                         name="contravariance", instance="") -> PropertyReport:
    """residual = || p(Af) - A^{-1} p(f) ||."""
    left = point_fn(apply_affine(f, A)).location
    right = A.inverse()(point_fn(f).location)
    return PropertyReport(name=name, instance=instance,
                          residual=float(np.linalg.norm(left - right)),
                          tolerance=tol)


def _as_function(output):
    return output.function if hasattr(output, "function") else output


def check_covariance(map_fn, f, A: AffineMap, tol, samples=100, seed=0,
                     name="covariance", instance="") -> PropertyReport:
    """residual = sup over interior x of |P(Af)(x) - (Pf)(Ax)| / sup f."""
    fA = apply_affine(f, A)
    left = _as_function(map_fn(fA))
    right = _as_function(map_fn(f))
    pts = interior_samples(fA, samples, seed)
    gap = np.max(np.abs(left.values(pts) - right.values(A(pts))))
    return PropertyReport(name=name, instance=instance,
                          residual=float(gap / f.sup()), tolerance=tol)


def _output_distance(a, b):
    if hasattr(a, "location"):
        return float(np.linalg.norm(a.location - b.location))
    if isinstance(a, LogConcaveFunction) or hasattr(a, "function"):
        return l1_distance(_as_function(a), _as_function(b))
    return abs(float(a) - float(b))


def check_continuity(computation, f, schedule, tol, slack=1e-9,
                     name="continuity", instance="") -> PropertyReport:
    """Deviations along f_m -> f must decrease monotonically to <= tol.

    residual = max(final deviation, largest monotonicity violation); with a
    constant schedule all deviations are zero.
    """
    reference = computation(f)
    deviations = [_output_distance(computation(g), reference) for g in schedule]
    worst_increase = max(
        (deviations[i + 1] - deviations[i] for i in range(len(deviations) - 1)),
        default=0.0)
    residual = max(deviations[-1], worst_increase - slack, 0.0)
    return PropertyReport(name=name, instance=instance,
                          residual=float(residual), tolerance=tol)


def default_corpus(seed=0):
    """The 12-instance corpus used by the full suite: (label, function)."""
    corpus = []
    specs = [(1, "gaussian"), (1, "polytope"), (1, "max-affine"),
             (2, "gaussian"), (2, "polytope"), (2, "max-affine")]
    for i, (n, kind) in enumerate(specs):
        for j in range(2):
            label = f"n{n}-{kind}-{j}"
            corpus.append((label, random_logconcave(seed + 31 * i + j, n=n,
                                                    kind=kind)))
    return corpus


def run_suite(seed=0, delta=0.05):
    """Five properties over the default corpus; deterministic in seed."""
    from . import points as pts_mod
    from . import floating as float_mod
    from . import john as john_mod
    from . import loewner as loewner_mod

    reports = []
    for idx, (label, f) in enumerate(default_corpus(seed)):
        A = random_affine(seed + 1000 + idx, f.dim)
        diam = support_diameter(f)
        reports.append(check_contravariance(
            pts_mod.centroid, f, A, tol=1e-3 * diam,
            name="centroid-contravariance", instance=label))
        reports.append(check_contravariance(
            pts_mod.santalo, f, A, tol=1e-3 * diam,
            name="santalo-contravariance", instance=label))
        reports.append(check_covariance(
            lambda g: float_mod.floating_function(g, delta), f, A, tol=1e-2,
            seed=seed + idx, name="floating-covariance", instance=label))
        reports.append(check_covariance(
            john_mod.john_function, f, A, tol=5e-2,
            seed=seed + idx, name="john-covariance", instance=label))
        reports.append(check_covariance(
            loewner_mod.loewner_function, f, A, tol=1e-2,
            seed=seed + idx, name="loewner-covariance", instance=label))
    return reports
