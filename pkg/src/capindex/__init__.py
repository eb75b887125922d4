"""Morse indices of capillary and CMC model hypersurfaces, with and without
volume / wetting-area constraints."""

from .constraint_index import (
    Constraint,
    IndexReport,
    constrained_index,
    criticality_offset,
    cylinder_typeI_closed_form,
    decomposition_abc,
    index_report,
    solve_inhomogeneous,
)
from .geometry import ModeProblem, SurfaceKind, SurfaceModel, make_surface, reduce_to_modes
from .roots import Equation, RootSpec, enumerate_roots, first_root
from .spectrum import (
    SpectralCount,
    count_dirichlet_nonpositive,
    count_negative_robin,
    count_steklov_below_one,
    cylinder_index_analytic,
    dense_oracle,
    mode_truncation_bound,
    morse_index_total,
)
from .upsilon import UpsilonMatrix, compute_upsilon, index_lower_bound, trace_identity_residual

__version__ = "0.1.0"

__all__ = [
    "Constraint",
    "IndexReport",
    "constrained_index",
    "criticality_offset",
    "cylinder_typeI_closed_form",
    "decomposition_abc",
    "index_report",
    "solve_inhomogeneous",
    "ModeProblem",
    "SurfaceKind",
    "SurfaceModel",
    "make_surface",
    "reduce_to_modes",
    "Equation",
    "RootSpec",
    "enumerate_roots",
    "first_root",
    "SpectralCount",
    "count_dirichlet_nonpositive",
    "count_negative_robin",
    "count_steklov_below_one",
    "cylinder_index_analytic",
    "dense_oracle",
    "mode_truncation_bound",
    "morse_index_total",
    "UpsilonMatrix",
    "compute_upsilon",
    "index_lower_bound",
    "trace_identity_residual",
]
