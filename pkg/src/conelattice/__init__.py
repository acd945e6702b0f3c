"""Lattice-like operations induced by self-dual cones, and certificates for
sets that are invariant under them or admit isotone metric projections."""

from ._validation import DEFAULT_TOL, DimensionError, SchemaError
from .certify import (
    SamplerError,
    certify_hyperplane,
    certify_polyhedron,
    falsify_invariance,
    falsify_isotonicity,
    hyperplane_isotone_bilinear,
    hyperplane_isotone_lorentz,
    hyperplane_isotone_orthant,
    hyperplane_isotone_sampled,
    sublattice_check_orthant,
    subspace_invariant,
)
from .cones import (
    ConeSpec,
    Lorentz,
    MoreauPair,
    Orthant,
    Product,
    RotatedOrthant,
    cone_from_dict,
    cone_generators,
    cone_to_dict,
    contains,
    leq,
    moreau,
    project_cone,
    sample_cone,
)
from .lattice import (
    MinimalInvariantSet,
    Rectangle,
    comparable,
    join,
    meet,
    minimal_invariant,
    ncp_residual,
)
from .results import Certificate, Method, PolyhedronReport, Verdict
from .sets import (
    ConvergenceError,
    Halfspace,
    Hyperplane,
    InfeasibleError,
    Polyhedron,
    project_affine,
    project_cylinder,
    project_halfspace,
    project_hyperplane,
    project_polyhedron,
    projection_identities_check,
)
from .vi import Trajectory, VIProblem, affine_map, ncp_solve, solve_vi

__version__ = "0.1.0"
