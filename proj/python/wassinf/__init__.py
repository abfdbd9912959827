"""Exact optimal transport and Wasserstein inference on finite spaces."""

from ._core import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    ParseError,
    SolverError,
    bootstrap,
    confidence_interval,
    convergence_study,
    euclidean_cost,
    grid,
    ks_distance,
    limit_sample,
    line_limit_sample,
    max_dual_null,
    solve_ot,
    tree_labels,
    tree_limit_sample,
    two_sample_test,
    wasserstein,
)

__version__ = "0.1.0"
