"""Hierarchical B-spline de Rham complexes: construction, exactness checks and diagnostics."""

from .admissibility import AdmissibilityReport, check_chain_condition, shortest_chain
from .cohomology import CohomologyReport, cohomology_dims, complex_matrices
from .greville_topology import betti, greville_subcomplex, topology_change
from .harmonics import all_harmonics, harmonic_representatives, sample_field
from .hierarchy import (
    DomainHierarchy,
    HierarchicalBasis,
    build_hierarchy,
    build_hierarchy_from_cells,
    hierarchical_basis,
)
from .scenario import Scenario, build_scenario, parse_scenario, serialize_scenario
from .splines_1d import KnotVector, dyadic_refinement, eval_basis, uniform_knot_vector, validate_knot_vector
from .tensor_forms import LevelSpaces, exterior_derivative_matrix, prolongation_matrix

__all__ = [
    "AdmissibilityReport",
    "CohomologyReport",
    "DomainHierarchy",
    "HierarchicalBasis",
    "KnotVector",
    "LevelSpaces",
    "Scenario",
    "all_harmonics",
    "betti",
    "build_hierarchy",
    "build_hierarchy_from_cells",
    "build_scenario",
    "check_chain_condition",
    "cohomology_dims",
    "complex_matrices",
    "dyadic_refinement",
    "eval_basis",
    "exterior_derivative_matrix",
    "greville_subcomplex",
    "harmonic_representatives",
    "hierarchical_basis",
    "parse_scenario",
    "prolongation_matrix",
    "sample_field",
    "serialize_scenario",
    "shortest_chain",
    "topology_change",
    "uniform_knot_vector",
    "validate_knot_vector",
]

__version__ = "0.1.0"
