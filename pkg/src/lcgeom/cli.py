"""Command-line front end.

Loads a function-spec JSON file, runs one operator, and emits JSON (or CSV
for plot lattices).  Exit codes: 0 success, 2 validation error or bad
usage, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .funcmodel import (
    GridPotential,
    canonical_dumps,
    load_function,
    potential_to_spec,
)
from . import quadrature
from .legendre import legendre as legendre_transform, polar
from . import points as points_mod
from . import floating as floating_mod
from . import john as john_mod
from . import loewner as loewner_mod
from . import testkit


@dataclass(frozen=True)
class RunConfig:
    """Validated tunables shared by the subcommands."""

    resolution: int = 0          # 0 = per-dimension default
    tol_quad: float = 1e-6
    tol_solve: float = 1e-6
    delta: float = 0.05
    center: tuple = None
    seed: int = 0
    out: str = None

    def __post_init__(self):
        if self.resolution and (self.resolution < 9 or self.resolution % 2 == 0):
            raise ValidationError("resolution must be odd and >= 9")
        if self.tol_quad <= 0 or self.tol_solve <= 0:
            raise ValidationError("tolerances must be positive")


def _emit(payload, cfg: RunConfig):
    text = canonical_dumps(payload)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _resolution(cfg: RunConfig):
    return cfg.resolution or None


def _cmd_integrate(f, cfg):
    _emit({"mass": quadrature.integrate(f, resolution=_resolution(cfg))}, cfg)


def _cmd_centroid(f, cfg):
    p = points_mod.centroid(f)
    _emit({"point": p.location.tolist()}, cfg)


def _cmd_santalo(f, cfg):
    p = points_mod.santalo(f, resolution=_resolution(cfg), tol=cfg.tol_solve)
    _emit({"point": p.location.tolist(), "objective": p.objective,
           "iterations": p.iterations}, cfg)


def _cmd_legendre(f, cfg):
    dual = legendre_transform(f.potential, resolution=_resolution(cfg))
    _emit({"function": potential_to_spec(GridPotential(dual.grid))}, cfg)


def _cmd_polar(f, cfg):
    center = np.zeros(f.dim) if cfg.center is None else np.asarray(cfg.center)
    g = polar(f, center, resolution=_resolution(cfg))
    _emit({"function": potential_to_spec(g.potential)}, cfg)


def _cmd_floating(f, cfg):
    g = floating_mod.floating_function(f, cfg.delta)
    _emit({"function": potential_to_spec(g.potential)}, cfg)


def _cmd_john(f, cfg):
    r = john_mod.john_function(f, resolution=_resolution(cfg))
    _emit({"t0": r.t0, "objective": r.objective,
           "ellipsoid": {"center": r.ellipsoid.center.tolist(),
                         "shape": r.ellipsoid.shape.tolist()}}, cfg)


def _cmd_loewner(f, cfg):
    r = loewner_mod.loewner_function(f)
    _emit({"factor": r.factor.tolist(), "shift": r.shift.tolist(),
           "height": r.height, "objective": r.objective}, cfg)


def _cmd_points(f, cfg):
    out = {"centroid": points_mod.centroid(f).location.tolist(),
           "santalo": points_mod.santalo(f, tol=cfg.tol_solve).location.tolist()}
    composed = {
        "floating-centroid":
            lambda g: floating_mod.floating_function(g, cfg.delta),
        "john-centroid": john_mod.john_function,
        "loewner-point": loewner_mod.loewner_function,
    }
    for name, mapping in composed.items():
        point = points_mod.point_of_map(points_mod.centroid, mapping)(f)
        out[name] = point.location.tolist()
    _emit(out, cfg)


def _cmd_check(cfg):
    reports = testkit.run_suite(seed=cfg.seed, delta=cfg.delta)
    lines = [r.to_json() for r in reports]
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    return 0 if all(r.passed for r in reports) else 1


_PLOT_OPS = {
    "floating": lambda f, cfg: floating_mod.floating_function(f, cfg.delta),
    "polar": lambda f, cfg: polar(
        f, np.zeros(f.dim) if cfg.center is None else np.asarray(cfg.center),
        resolution=_resolution(cfg)),
    "john": lambda f, cfg: john_mod.john_function(
        f, resolution=_resolution(cfg)).function,
    "loewner": lambda f, cfg: loewner_mod.loewner_function(f).function,
}


def _cmd_plot_data(f, cfg, op):
    if f.dim > 2:
        raise ValidationError("plot-data supports 1-D and 2-D lattices")
    m = cfg.resolution or {1: 257, 2: 65}[f.dim]
    lo, hi = quadrature.truncation_box(f)
    axes = [np.linspace(lo[j], hi[j], m) for j in range(f.dim)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    columns = [pts[:, j] for j in range(f.dim)]
    header = [f"x{j + 1}" for j in range(f.dim)] + ["f"]
    columns.append(f.values(pts))
    if op is not None:
        g = _PLOT_OPS[op](f, cfg)
        header.append("value")
        columns.append(g.values(pts))
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lcgeom",
        description="Affine contravariant points and covariant mappings of "
                    "log-concave functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, needs_spec=True, **kwargs):
        p = sub.add_parser(name, **kwargs)
        if needs_spec:
            p.add_argument("spec", help="function-spec JSON file")
        p.add_argument("--resolution", type=int, default=0,
                       help="lattice points per axis (odd, >= 9)")
        p.add_argument("--tol-quad", type=float, default=1e-6)
        p.add_argument("--tol-solve", type=float, default=1e-6)
        p.add_argument("--delta", type=float, default=0.05,
                       help="floating-body volume fraction")
        p.add_argument("--center", type=float, nargs="+", default=None,
                       help="polar center z")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        return p

    add("integrate", help="integral of f")
    add("centroid", help="centroid g(f)")
    add("santalo", help="Santalo point s(f)")
    add("legendre", help="Legendre transform of the potential, as a grid")
    add("polar", help="polar function f^z")
    add("floating", help="floating function f_delta")
    add("john", help="John function J(f)")
    add("loewner", help="Loewner function L(f)")
    add("points", help="all contravariant points, including composed ones")
    add("check", needs_spec=False, help="run the property-test suite")
    plot = add("plot-data", help="CSV lattice of f and one operator output")
    plot.add_argument("--op", choices=sorted(_PLOT_OPS), default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(resolution=args.resolution, tol_quad=args.tol_quad,
                        tol_solve=args.tol_solve, delta=args.delta,
                        center=None if args.center is None
                        else tuple(args.center),
                        seed=args.seed, out=args.out)
        if args.command == "check":
            return _cmd_check(cfg)
        f = load_function(args.spec)
        if args.command == "plot-data":
            _cmd_plot_data(f, cfg, args.op)
            return 0
        {"integrate": _cmd_integrate, "centroid": _cmd_centroid,
         "santalo": _cmd_santalo, "legendre": _cmd_legendre,
         "polar": _cmd_polar, "floating": _cmd_floating,
         "john": _cmd_john, "loewner": _cmd_loewner,
         "points": _cmd_points}[args.command](f, cfg)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError,) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid function spec: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
