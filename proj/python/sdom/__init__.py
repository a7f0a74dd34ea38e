"""Stochastic dominance verification and dominance-constrained portfolio optimization."""

from ._core import (
    DiscreteRandomVariable,
    DominanceCertificate,
    ScenarioSet,
    SolveReport,
    higher_order_risk,
    load_scenarios,
    load_variable,
    lower_partial_moment,
    max_return,
    min_risk,
    verify,
)

__all__ = [
    "DiscreteRandomVariable",
    "DominanceCertificate",
    "ScenarioSet",
    "SolveReport",
    "higher_order_risk",
    "load_scenarios",
    "load_variable",
    "lower_partial_moment",
    "max_return",
    "min_risk",
    "verify",
]
