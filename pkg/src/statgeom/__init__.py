"""Numerical verification of statistical manifolds with product-like structures,
their submanifolds and hypersurfaces."""

__version__ = "0.1.0"

from .expr import ExprDomainError, ExprError, ExprSyntaxError, eval_jet, eval_value, parse_expr, to_source  # noqa: E402
from .geometry import ChartGeometry, SamplePlan, SingularMetricError  # noqa: E402
from .report import CheckReport, RunReport  # noqa: E402
from .scenarios import (  # noqa: E402
    BUNDLED_IDS,
    Scenario,
    ScenarioError,
    bundled_document,
    bundled_scenario,
    load_scenario,
    validate_scenario,
)

__all__ = [
    "__version__",
    "BUNDLED_IDS",
    "ChartGeometry",
    "CheckReport",
    "ExprDomainError",
    "ExprError",
    "ExprSyntaxError",
    "RunReport",
    "SamplePlan",
    "Scenario",
    "ScenarioError",
    "SingularMetricError",
    "bundled_document",
    "bundled_scenario",
    "eval_jet",
    "eval_value",
    "load_scenario",
    "parse_expr",
    "to_source",
    "validate_scenario",
]
