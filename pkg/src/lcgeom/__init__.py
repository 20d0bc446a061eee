"""Affine contravariant points and covariant mappings of log-concave
functions: centroid, Santalo point, Legendre/polar duality, floating, John
and Loewner functions, with a property-test kit."""

from .errors import NotIntegrableError, SolverError, ValidationError
from .funcmodel import (
    AffineMap,
    AffineNormPotential,
    EllipsoidIndicatorPotential,
    GridField,
    GridPotential,
    LogConcaveFunction,
    MaxAffinePotential,
    MaxPotential,
    PolytopeIndicatorPotential,
    QuadraticPotential,
    apply_affine,
    function_from_spec,
    function_to_spec,
    l1_distance,
    load_function,
    save_function,
    translate,
)
from .quadrature import integrate, integrate_moment, tail_bound, truncation_box
from .legendre import legendre, legendre_shifted, polar
from .levelsets import Polytope, hausdorff, sublevel, superlevel
from .ellipsoid import Ellipsoid, LogDetProgram, mvie, solve_logdet
from .points import InvariantPoint, centroid, combine, point_of_map, santalo, \
    santalo_objective
from .floating import FloatingParams, alpha_root, floating_function, \
    floating_potential_at, wet_volume
from .john import JohnResult, john_function, john_profile
from .loewner import LoewnerResult, constraint_violation, loewner_function
from .testkit import PropertyReport, check_contravariance, check_continuity, \
    check_covariance, random_logconcave, run_suite

__version__ = "0.1.0"
