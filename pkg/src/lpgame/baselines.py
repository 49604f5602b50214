"""Non-strategic and mis-specified company strategies used as comparisons.

Every baseline picks an expected level by its own rule; the level is then
evaluated against the true type prior with users best-responding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from lpgame.errors import ConfigError
from lpgame.model import GameParams, company_payoff
from lpgame.solver import BestResponse, best_response, single_type_game, solve_sse

KINDS = ("Max", "Min", "Weighted", "Averaging")

DEFAULT_WEIGHTED_MAP = ((0.2, 2), (0.5, 5), (0.8, 8))

# matching tolerance between a map key and a type's privacy factor
_PF_MATCH_TOL = 1e-9
# guards floor() against sums like 4.999999999999999 for an exact 5
_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    weighted_map: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        kind = normalize_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.weighted_map is not None:
            object.__setattr__(
                self, "weighted_map", tuple((float(p), float(s)) for p, s in self.weighted_map))

    @property
    def name(self) -> str:
        return self.kind


def normalize_kind(kind: str) -> str:
    for k in KINDS:
        if k.lower() == str(kind).lower():
            return k
    raise ConfigError(f"unknown baseline kind {kind!r}; expected one of {', '.join(KINDS)}")


class StrategyEvaluation(NamedTuple):
    company_payoff: float
    responses: tuple[BestResponse, ...]
    user_payoffs: tuple[float, ...]


def evaluate_strategy(s_hat: float, params: GameParams) -> StrategyEvaluation:
    """Company payoff when every type best-responds to ``s_hat``."""
    responses = tuple(best_response(t, s_hat, params) for t in params.types.types)
    payoff = company_payoff(s_hat, [r.t_star for r in responses], params)
    return StrategyEvaluation(payoff, responses, tuple(r.payoff for r in responses))


def _mapped_level(pf: float, weighted_map) -> float:
    for key, level in weighted_map:
        if abs(key - pf) <= _PF_MATCH_TOL:
            return level
    raise ConfigError(f"weighted map has no entry for privacy factor {pf}", field="weighted_map")


def baseline_level(spec: BaselineSpec, params: GameParams, integer_levels: bool = False) -> float:
    """Expected level chosen by a baseline.

    Weighted takes ``floor(sum_i alpha_i * level(pi_i))`` clamped to the level
    range; Averaging solves the game for one type with the mean privacy
    factor.
    """
    if spec.kind == "Max":
        return float(params.s_max)
    if spec.kind == "Min":
        return float(params.s_min)
    if spec.kind == "Weighted":
        wmap = spec.weighted_map if spec.weighted_map is not None else DEFAULT_WEIGHTED_MAP
        total = math.fsum(
            alpha * _mapped_level(t.privacy_factor, wmap) for t, alpha in params.types.entries)
        level = float(math.floor(total + _FLOOR_GUARD))
        return min(max(level, float(params.s_min)), float(params.s_max))
    # Averaging
    homogeneous = single_type_game(params, params.types.mean_privacy_factor())
    return solve_sse(homogeneous, integer_levels=integer_levels).s_hat_star
