"""Exact Gibbs distributions of boundary statistics in lattice-path and permutation models."""

from .errors import DomainError, ResourceLimitError
from .gibbs import GibbsDistribution, gibbs_moment, gibbs_pmf, partition_function, sample_statistic, tilted_pgf
from .models import CATALOG, coefficient_table, h_eval, parse_model, scheme_constants, watermelon_partition_formula
from .phase import classify, limit_law_for, regime_report, solve_rho, supercritical_constants
from .series import BivariateTable, Series

__version__ = "0.1.0"

__all__ = [
    "BivariateTable",
    "CATALOG",
    "DomainError",
    "GibbsDistribution",
    "ResourceLimitError",
    "Series",
    "classify",
    "coefficient_table",
    "gibbs_moment",
    "gibbs_pmf",
    "h_eval",
    "limit_law_for",
    "parse_model",
    "partition_function",
    "regime_report",
    "sample_statistic",
    "scheme_constants",
    "solve_rho",
    "supercritical_constants",
    "tilted_pgf",
    "watermelon_partition_formula",
]
