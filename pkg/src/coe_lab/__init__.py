"""Discrete causal inference with interventions, counterfactuals and bounds.

The package is organised bottom-up: factors and graphs, causal Bayesian
networks with regime nodes, structural models with twin networks, bounds on
the probability of causation, instrumental variables, and synthetic data.
"""

from .bounds import (
    BoundsInterval,
    Margins,
    MediatorData,
    StratifiedData,
    compare_bounds,
    pc_bounds_basic,
    pc_bounds_covariate,
    pc_bounds_mediator,
    pc_bounds_tian_pearl,
)
from .cbn import Cbn, Query, ace, back_door, intervene, joint_query
from .exceptions import (
    CoeLabError,
    CycleDetected,
    EstimandError,
    InfeasibleData,
    ModelError,
    PositivityViolation,
    UndefinedEstimand,
    WeakInstrument,
    ZeroMass,
)
from .factor import Distribution, Factor, Variable
from .graph import AugmentedDag, Dag, d_separated, validate
from .iv import IvData, LinearSemParams, PrincipalStrata, ace_bounds_lp, late, strata_estimands, wald_ratio
from .scm import Scm, StCm, StructuralEquation, pc_exact, twin_network

__version__ = "0.1.0"

__all__ = [
    "AugmentedDag",
    "BoundsInterval",
    "Cbn",
    "CoeLabError",
    "CycleDetected",
    "Dag",
    "Distribution",
    "EstimandError",
    "Factor",
    "InfeasibleData",
    "IvData",
    "LinearSemParams",
    "Margins",
    "MediatorData",
    "ModelError",
    "PositivityViolation",
    "PrincipalStrata",
    "Query",
    "Scm",
    "StCm",
    "StratifiedData",
    "StructuralEquation",
    "UndefinedEstimand",
    "Variable",
    "WeakInstrument",
    "ZeroMass",
    "ace",
    "ace_bounds_lp",
    "back_door",
    "compare_bounds",
    "d_separated",
    "intervene",
    "joint_query",
    "late",
    "pc_bounds_basic",
    "pc_bounds_covariate",
    "pc_bounds_mediator",
    "pc_bounds_tian_pearl",
    "pc_exact",
    "strata_estimands",
    "twin_network",
    "validate",
    "wald_ratio",
]
