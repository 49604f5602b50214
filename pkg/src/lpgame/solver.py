"""User best responses, thresholds and the company's optimal commitment.

The user payoff is convex in the connection time, so only the endpoints
``delta`` and ``T`` can be best responses, and the switch between them happens
at a per-type threshold ``mu_i`` on the expected service level.  The company
payoff is then piecewise affine in ``S_hat`` with slope ``-Theta`` between
thresholds, which leaves only left endpoints as optimum candidates.

``best_response_oracle`` and ``solve_sse_oracle`` are brute-force scans used
to validate the closed forms; they do not call into the threshold rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lpgame.errors import DomainError
from lpgame.model import (
    CompanyStrategy,
    GameParams,
    Pure,
    TypeDistribution,
    UserType,
    company_payoff,
    realize_mixed,
    user_payoff,
)

# absolute tolerance for declaring the two endpoint payoffs equal
TIE_TOL = 1e-9
# relative tolerance for leader ties between candidates
CANDIDATE_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Threshold:
    """Switch point ``mu`` on the expected service level and ``d mu / d T``."""

    mu: float
    slope: float


@dataclass(frozen=True)
class BestResponse:
    t_star: float
    tie: bool
    payoff: float


@dataclass(frozen=True)
class SolveResult:
    s_hat_star: float
    strategy: CompanyStrategy
    responses: tuple[BestResponse, ...]
    company_payoff: float
    user_payoffs: tuple[float, ...]
    candidates: tuple[tuple[float, float], ...]
    thresholds: tuple[Threshold, ...]


def threshold(user_type: UserType, params: GameParams) -> Threshold:
    """Smallest expected level at which the type stays connected for ``T``.

    ``mu = pi * l_hat * T / ((1 - pi) * delta)``; it is ``0`` for ``pi = 0``
    and ``+inf`` for ``pi = 1``.
    """
    pf = user_type.privacy_factor
    if pf == 0.0:
        return Threshold(0.0, 0.0)
    if pf == 1.0:
        return Threshold(math.inf, math.inf)
    l_hat, delta = params.expected_loc_error, params.min_connect
    slope = pf * l_hat / ((1.0 - pf) * delta)
    mu = pf * l_hat * params.visit_time / ((1.0 - pf) * delta)
    return Threshold(mu, slope)


def thresholds(params: GameParams) -> tuple[Threshold, ...]:
    return tuple(threshold(t, params) for t in params.types.types)


def _check_level(s_hat, params):
    if not params.s_min <= s_hat <= params.s_max:
        raise DomainError(
            f"expected service level {s_hat} outside [{params.s_min}, {params.s_max}]")


def best_response(user_type: UserType, s_hat: float, params: GameParams) -> BestResponse:
    """Threshold rule: ``T`` if ``s_hat >= mu`` (or the endpoints tie), else ``delta``."""
    _check_level(s_hat, params)
    delta, T = params.min_connect, params.visit_time
    u_delta = float(user_payoff(user_type, s_hat, delta, params))
    u_T = float(user_payoff(user_type, s_hat, T, params))
    tie = abs(u_delta - u_T) <= TIE_TOL
    if tie or s_hat >= threshold(user_type, params).mu:
        return BestResponse(T, tie, u_T)
    return BestResponse(delta, tie, u_delta)


def best_response_oracle(user_type: UserType, s_hat: float, params: GameParams,
                         grid_n: int = 10001) -> BestResponse:
    """Grid argmax of the user payoff over ``[delta, T]``.

    Exact payoff ties go to the larger connection time.  The returned
    ``t_star`` may be an interior grid point if the payoff were not convex.
    """
    if grid_n < 2:
        raise DomainError(f"grid_n must be >= 2, got {grid_n}")
    _check_level(s_hat, params)
    delta, T = params.min_connect, params.visit_time
    grid = np.linspace(delta, T, grid_n)
    grid[0], grid[-1] = delta, T
    values = user_payoff(user_type, s_hat, grid, params)
    best = np.max(values)
    idx = int(np.flatnonzero(values == best)[-1])
    tie = abs(float(values[0]) - float(values[-1])) <= TIE_TOL
    return BestResponse(float(grid[idx]), tie, float(values[idx]))


def _candidate_levels(params: GameParams, ths: Sequence[Threshold], integer_levels: bool):
    cands = {float(params.s_min)}
    for th in ths:
        mu = th.mu
        if not params.s_min <= mu <= params.s_max:
            continue
        if integer_levels:
            # cheapest offered level that still clears the threshold
            mu = float(next(s for s in params.service_levels if s >= mu))
        cands.add(mu)
    return sorted(cands)


def _evaluate(s_hat: float, params: GameParams):
    responses = tuple(best_response(t, s_hat, params) for t in params.types.types)
    payoff = company_payoff(s_hat, [r.t_star for r in responses], params)
    return responses, payoff


def solve_sse(params: GameParams, integer_levels: bool = False) -> SolveResult:
    """Strong Stackelberg equilibrium of the game.

    Candidates are ``min`` of the service levels plus every in-range
    threshold.  Payoff ties between candidates go to the smaller level.  With
    ``integer_levels`` the company is restricted to pure offered levels and
    each threshold is rounded up to the next available level.
    """
    ths = thresholds(params)
    best = None
    table = []
    for s_hat in _candidate_levels(params, ths, integer_levels):
        responses, payoff = _evaluate(s_hat, params)
        table.append((s_hat, payoff))
        if best is None or payoff > best[2] + CANDIDATE_TIE_RTOL * max(1.0, abs(best[2])):
            best = (s_hat, responses, payoff)
    s_hat, responses, payoff = best
    strategy = Pure(int(s_hat)) if integer_levels else realize_mixed(s_hat, params.service_levels)
    return SolveResult(
        s_hat_star=s_hat,
        strategy=strategy,
        responses=responses,
        company_payoff=payoff,
        user_payoffs=tuple(r.payoff for r in responses),
        candidates=tuple(table),
        thresholds=ths,
    )


def _scan_payoffs(params: GameParams, s_grid: np.ndarray):
    """Company payoff and per-type responses at each level, by direct comparison
    of the user payoff at both endpoints."""
    delta, T = params.min_connect, params.visit_time
    psi, theta = params.psi, params.unit_service_cost
    total = np.zeros_like(s_grid)
    responses = []
    for user_type, alpha in params.types.entries:
        pf, l_hat = user_type.privacy_factor, params.expected_loc_error
        u_delta = pf * T / delta * l_hat + (1.0 - pf) * delta / T * s_grid
        u_T = pf * l_hat + (1.0 - pf) * s_grid
        # floating-point ties are broken toward the company
        scale = np.maximum(np.abs(u_delta), np.abs(u_T))
        stays = u_T >= u_delta - 1e-12 * scale
        t = np.where(stays, T, delta)
        responses.append(t)
        total += alpha * (psi * t - theta * s_grid)
    return total, responses


def solve_sse_oracle(params: GameParams, grid_step: float = 1e-3) -> SolveResult:
    """Dense scan of ``S_hat`` over the level range plus exact threshold probes."""
    if not grid_step > 0:
        raise DomainError(f"grid_step must be > 0, got {grid_step}")
    lo, hi = float(params.s_min), float(params.s_max)
    n = int(math.floor((hi - lo) / grid_step)) + 1
    grid = lo + grid_step * np.arange(n)
    probes = [th.mu for th in thresholds(params) if lo <= th.mu <= hi]
    s_grid = np.unique(np.concatenate([grid[grid <= hi], [lo, hi], probes]))
    payoffs, responses = _scan_payoffs(params, s_grid)
    best = float(np.max(payoffs))
    idx = int(np.flatnonzero(payoffs == best)[0])
    s_hat = float(s_grid[idx])
    t_star = [float(r[idx]) for r in responses]
    brs = tuple(
        BestResponse(t, False, float(user_payoff(ut, s_hat, t, params)))
        for ut, t in zip(params.types.types, t_star))
    return SolveResult(
        s_hat_star=s_hat,
        strategy=realize_mixed(s_hat, params.service_levels),
        responses=brs,
        company_payoff=best,
        user_payoffs=tuple(b.payoff for b in brs),
        candidates=tuple(zip(s_grid.tolist(), payoffs.tolist())),
        thresholds=thresholds(params),
    )


def single_type_game(params: GameParams, privacy_factor: float, label: str = "avg") -> GameParams:
    """Copy of ``params`` whose prior is a single type with ``privacy_factor``."""
    return params.replace(types=TypeDistribution.single(UserType(privacy_factor, label)))
