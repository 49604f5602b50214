"""Location privacy game: user best responses, company commitment strategies,
baseline comparisons and an RSS localization simulator for the expected
localization error."""

from lpgame.errors import ConfigError, DomainError, GeometryError
from lpgame.model import (
    CompanyStrategy,
    DerivedConstants,
    GameParams,
    Mixed,
    Pure,
    TypeDistribution,
    UserType,
    company_payoff,
    derived_constants,
    expected_level,
    experienced_service,
    privacy,
    realize_mixed,
    user_payoff,
)
from lpgame.solver import (
    BestResponse,
    SolveResult,
    Threshold,
    best_response,
    best_response_oracle,
    solve_sse,
    solve_sse_oracle,
    threshold,
)
from lpgame.baselines import BaselineSpec, baseline_level, evaluate_strategy

__version__ = "0.1.0"

__all__ = [
    "BaselineSpec",
    "BestResponse",
    "CompanyStrategy",
    "ConfigError",
    "DerivedConstants",
    "DomainError",
    "GameParams",
    "GeometryError",
    "Mixed",
    "Pure",
    "SolveResult",
    "Threshold",
    "TypeDistribution",
    "UserType",
    "baseline_level",
    "best_response",
    "best_response_oracle",
    "company_payoff",
    "derived_constants",
    "evaluate_strategy",
    "expected_level",
    "experienced_service",
    "privacy",
    "realize_mixed",
    "solve_sse",
    "solve_sse_oracle",
    "threshold",
    "user_payoff",
]
