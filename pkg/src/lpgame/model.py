"""Domain types and closed-form payoffs of the location privacy game.

A company (leader) commits to an offered service level; a user of privacy
type ``i`` (follower) then picks a connection time ``t`` in ``[delta, T]``.
Both payoffs depend on a mixed company strategy only through its expected
level ``S_hat``.

All functions accept scalars or numpy arrays for the time argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from lpgame.errors import DomainError, ShapeError

WEIGHT_SUM_TOL = 1e-12
MIXTURE_TOL = 1e-12


@dataclass(frozen=True)
class UserType:
    """A user class characterised by its privacy factor in [0, 1].

    ``privacy_factor == 1`` means the user ignores service entirely, so the
    best response is always the minimal connection time.
    """

    privacy_factor: float
    label: str = ""

    def __post_init__(self):
        pf = float(self.privacy_factor)
        if not (0.0 <= pf <= 1.0) or math.isnan(pf):
            raise DomainError(f"privacy_factor must lie in [0, 1], got {self.privacy_factor}")
        object.__setattr__(self, "privacy_factor", pf)

    @property
    def is_degenerate(self) -> bool:
        return self.privacy_factor in (0.0, 1.0)


@dataclass(frozen=True)
class TypeDistribution:
    """Prior over user types as ``(UserType, weight)`` entries."""

    entries: tuple[tuple[UserType, float], ...]

    def __post_init__(self):
        entries = tuple((t, float(w)) for t, w in self.entries)
        if not entries:
            raise DomainError("type distribution needs at least one entry")
        for t, w in entries:
            if not isinstance(t, UserType):
                raise DomainError(f"expected UserType, got {type(t).__name__}")
            if not w >= 0.0:
                raise DomainError(f"type weight must be >= 0, got {w}")
        total = math.fsum(w for _, w in entries)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"type weights must sum to 1, got {total!r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def uniform(cls, types: Sequence[UserType]) -> "TypeDistribution":
        types = list(types)
        if not types:
            raise DomainError("type distribution needs at least one entry")
        w = 1.0 / len(types)
        # last weight absorbs rounding so the sum check passes for any count
        weights = [w] * (len(types) - 1)
        weights.append(1.0 - math.fsum(weights))
        return cls(tuple(zip(types, weights)))

    @classmethod
    def single(cls, user_type: UserType) -> "TypeDistribution":
        return cls(((user_type, 1.0),))

    @property
    def types(self) -> tuple[UserType, ...]:
        return tuple(t for t, _ in self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    def __len__(self):
        return len(self.entries)

    def mean_privacy_factor(self) -> float:
        return math.fsum(w * t.privacy_factor for t, w in self.entries)


@dataclass(frozen=True)
class GameParams:
    """Game-level scalars plus the user-type prior.

    Times are in minutes, ``expected_loc_error`` in meters.  ``visit_time`` is
    treated as real-valued.
    """

    visit_time: float
    min_connect: float
    expected_loc_error: float
    unit_service_cost: float
    unit_service_benefit: float
    service_levels: tuple[int, ...]
    types: TypeDistribution = field(repr=False)

    def __post_init__(self):
        for name in ("visit_time", "min_connect", "expected_loc_error",
                     "unit_service_cost", "unit_service_benefit"):
            value = float(getattr(self, name))
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be a positive finite number, got {getattr(self, name)}")
            object.__setattr__(self, name, value)
        if self.min_connect > self.visit_time:
            raise DomainError(
                f"min_connect ({self.min_connect}) must not exceed visit_time ({self.visit_time})")
        levels = tuple(self.service_levels)
        if not levels:
            raise DomainError("service_levels must be non-empty")
        for s in levels:
            if isinstance(s, bool) or int(s) != s or s < 1:
                raise DomainError(f"service levels must be integers >= 1, got {s!r}")
        levels = tuple(int(s) for s in levels)
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError(f"service_levels must be strictly increasing, got {levels}")
        object.__setattr__(self, "service_levels", levels)
        if not isinstance(self.types, TypeDistribution):
            raise DomainError("types must be a TypeDistribution")

    @property
    def s_min(self) -> int:
        return self.service_levels[0]

    @property
    def s_max(self) -> int:
        return self.service_levels[-1]

    @property
    def psi(self) -> float:
        """Company benefit per minute of connection."""
        return self.unit_service_benefit / (self.visit_time * self.expected_loc_error)

    def psi1(self, user_type: UserType) -> float:
        return user_type.privacy_factor * self.visit_time * self.expected_loc_error

    def psi2(self, user_type: UserType) -> float:
        return (1.0 - user_type.privacy_factor) / self.visit_time

    def replace(self, **changes) -> "GameParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedConstants:
    psi: float
    psi1: tuple[float, ...]
    psi2: tuple[float, ...]


def derived_constants(params: GameParams) -> DerivedConstants:
    types = params.types.types
    return DerivedConstants(
        psi=params.psi,
        psi1=tuple(params.psi1(t) for t in types),
        psi2=tuple(params.psi2(t) for t in types),
    )


@dataclass(frozen=True)
class Pure:
    level: int

    def __post_init__(self):
        if isinstance(self.level, bool) or int(self.level) != self.level or self.level < 1:
            raise DomainError(f"pure service level must be a positive integer, got {self.level!r}")
        object.__setattr__(self, "level", int(self.level))

    def expected_level(self) -> float:
        return float(self.level)


@dataclass(frozen=True)
class Mixed:
    """Distribution over service levels as ``(level, probability)`` pairs."""

    probs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        probs = tuple((int(s), float(p)) for s, p in self.probs)
        if not probs:
            raise DomainError("mixed strategy needs at least one level")
        if any(p < 0.0 for _, p in probs):
            raise DomainError("mixed strategy probabilities must be >= 0")
        if any(s < 1 for s, _ in probs):
            raise DomainError("service levels must be >= 1")
        if len({s for s, _ in probs}) != len(probs):
            raise DomainError("mixed strategy lists a level twice")
        total = math.fsum(p for _, p in probs)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"mixed strategy probabilities must sum to 1, got {total!r}")
        object.__setattr__(self, "probs", probs)

    def expected_level(self) -> float:
        return math.fsum(s * p for s, p in self.probs)


CompanyStrategy = Union[Pure, Mixed]


def expected_level(strategy: CompanyStrategy) -> float:
    return strategy.expected_level()


def realize_mixed(s_hat: float, levels: Sequence[int]) -> CompanyStrategy:
    """Smallest-support strategy over ``levels`` whose expected level is ``s_hat``.

    Uses the two adjacent levels bracketing ``s_hat``; returns ``Pure`` when
    ``s_hat`` is itself a level.
    """
    levels = sorted(int(s) for s in levels)
    s_hat = float(s_hat)
    if not levels[0] <= s_hat <= levels[-1]:
        raise DomainError(f"expected level {s_hat} outside [{levels[0]}, {levels[-1]}]")
    for s in levels:
        if s == s_hat:
            return Pure(s)
    hi_idx = next(i for i, s in enumerate(levels) if s > s_hat)
    lo, hi = levels[hi_idx - 1], levels[hi_idx]
    p_lo = (hi - s_hat) / (hi - lo)
    mixed = Mixed(((lo, p_lo), (hi, 1.0 - p_lo)))
    assert abs(mixed.expected_level() - s_hat) <= MIXTURE_TOL * max(1.0, s_hat)
    return mixed


def _check_time(t, params: GameParams):
    t_arr = np.asarray(t, dtype=float)
    if t_arr.size == 0:
        return
    lo, hi = float(np.min(t_arr)), float(np.max(t_arr))
    if lo < params.min_connect or math.isnan(lo):
        raise DomainError(f"connection time {lo} below min_connect {params.min_connect}")
    if hi > params.visit_time:
        raise DomainError(f"connection time {hi} above visit_time {params.visit_time}")


def _check_level(s_hat: float, params: GameParams):
    if not params.s_min <= s_hat <= params.s_max:
        raise DomainError(
            f"expected service level {s_hat} outside [{params.s_min}, {params.s_max}]")


def privacy(t, params: GameParams):
    """Location privacy ``(T / t) * l_hat`` after connecting for ``t`` minutes."""
    _check_time(t, params)
    return params.visit_time / t * params.expected_loc_error


def experienced_service(t, s_hat: float, params: GameParams):
    _check_time(t, params)
    _check_level(s_hat, params)
    return t / params.visit_time * s_hat


def user_payoff(user_type: UserType, s_hat: float, t, params: GameParams):
    """Privacy-weighted sum of privacy and experienced service.

    Convex in ``t``, so the maximum over ``[delta, T]`` sits at an endpoint.
    """
    pf = user_type.privacy_factor
    return pf * privacy(t, params) + (1.0 - pf) * experienced_service(t, s_hat, params)


def company_payoff(strategy, responses: Sequence[float], params: GameParams) -> float:
    """Expected company payoff ``sum_i alpha_i (Psi t_i - Theta S_hat)``.

    ``strategy`` may be a ``Pure``/``Mixed`` strategy or a bare expected level.
    """
    s_hat = strategy if isinstance(strategy, (int, float)) else expected_level(strategy)
    s_hat = float(s_hat)
    _check_level(s_hat, params)
    weights = params.types.weights
    if len(responses) != len(weights):
        raise ShapeError(
            f"expected {len(weights)} responses (one per type), got {len(responses)}")
    _check_time(list(responses), params)
    psi, theta = params.psi, params.unit_service_cost
    return math.fsum(a * (psi * t - theta * s_hat) for a, t in zip(weights, responses))
