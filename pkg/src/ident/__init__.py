"""
IDM parameter identification.
"""

from .fit import (
    IdentProblem,
    IdentResult,
    StartResult,
    fit_idm,
    ident_cost,
    ident_cost_batch,
    identify,
    pattern_search,
    simulated_headways,
)

__all__ = [
    "IdentProblem",
    "IdentResult",
    "StartResult",
    "fit_idm",
    "ident_cost",
    "ident_cost_batch",
    "identify",
    "pattern_search",
    "simulated_headways",
]
