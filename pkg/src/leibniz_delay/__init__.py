"""Leibniz and almost Leibniz dynamics with a constant time delay.

Tensor and scalar fields on the doubled space, bracket evaluation and law
checks, constructed dissipative metrics, a method-of-steps RK4 solver, a
catalog of example systems and a command-line front end.
"""
from .brackets import VectorFieldSpec, vector_field, verify_bracket_laws, verify_split_equivalence
from .catalog import CATALOG, CatalogEntry, ConstraintError, get_entry, list_entries
from .core import DelayPair, ScalarField, TensorField, check_gradient, check_symmetry
from .dde import DenseTrajectory, HistoryFunction, IntegrationConfig, IntegrationError, convergence_order, integrate
from .diagnostics import dissipation_monitor, first_integral_drift, structural_residual
from .revisit import build_annihilator_metric, build_outer_product_metric, build_revisited_system

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "CatalogEntry",
    "ConstraintError",
    "DelayPair",
    "DenseTrajectory",
    "HistoryFunction",
    "IntegrationConfig",
    "IntegrationError",
    "ScalarField",
    "TensorField",
    "VectorFieldSpec",
    "build_annihilator_metric",
    "build_outer_product_metric",
    "build_revisited_system",
    "check_gradient",
    "check_symmetry",
    "convergence_order",
    "dissipation_monitor",
    "first_integral_drift",
    "get_entry",
    "integrate",
    "list_entries",
    "structural_residual",
    "vector_field",
    "verify_bracket_laws",
    "verify_split_equivalence",
]
