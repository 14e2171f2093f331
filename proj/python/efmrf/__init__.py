"""Neighbourhood-selection structure learning for pairwise exponential-family MRFs."""

from ._core import (
    ConfigError,
    DomainError,
    EfmrfError,
    Family,
    MissingFitError,
    Model,
    NeighborhoodFit,
    NotNormalizableError,
    NotSquareError,
    OverflowError,
    ParseError,
    SupportError,
    TooLargeError,
    fit_graph,
    fit_neighborhood,
    kappa_bounds,
    lattice_model,
    log_partition,
    null_lambda,
    sample,
    score,
    stars_select,
    theory_lambda,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "EfmrfError",
    "Family",
    "MissingFitError",
    "Model",
    "NeighborhoodFit",
    "NotNormalizableError",
    "NotSquareError",
    "OverflowError",
    "ParseError",
    "SupportError",
    "TooLargeError",
    "fit_graph",
    "fit_neighborhood",
    "kappa_bounds",
    "lattice_model",
    "log_partition",
    "null_lambda",
    "sample",
    "score",
    "stars_select",
    "theory_lambda",
]
