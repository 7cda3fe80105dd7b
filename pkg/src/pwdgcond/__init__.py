"""Plane-wave discontinuous Galerkin for the 2D Helmholtz equation, with
tools for studying the conditioning of the plane-wave basis."""

from .analytic import ExactSolution, PlaneWaveSolution, bessel, hankel1, l2_error
from .assembly import BoundarySource, GlobalSystem, assemble, impedance_data_from_exact, local_block
from .conditioning import fit_scan, fit_value, hermitian_part, mass_cond, spectral_cond
from .mesh import ConvexPolygon, Mesh, aniso_rectangle, regular_polygon, unit_square_mesh
from .orthogonalization import (
    BlockTransform,
    block_transform,
    breakdown_threshold_scan,
    global_transform,
    mgs_local,
    recover_solution,
)
from .planewave import PlaneWaveBasis, local_mass_matrix, make_directions, segment_exp_integral
from .solvers import GmresConfig, gmres_solve, lu_solve, precision_cast

__version__ = "0.1.0"
