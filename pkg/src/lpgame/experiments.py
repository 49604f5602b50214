"""Sweeps, localization runs and single solves driven by an ExperimentConfig.

CSV layout for sweeps (one row per sweep value and strategy)::

    sweep_var, sweep_value, strategy, s_hat, company_payoff,
    mu_<label>, t_star_<label>, user_payoff_<label>   (repeated per type)

Floats are written with ``repr`` so files round-trip exactly and are
byte-identical across runs.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from lpgame.baselines import baseline_level, evaluate_strategy
from lpgame.config import ExperimentConfig
from lpgame.errors import ConfigError
from lpgame.localization import (
    ErrorEstimate,
    LocalizationSample,
    estimate_error,
    simulate_samples,
    summarize,
    write_samples_csv,
)
from lpgame.model import GameParams, Mixed
from lpgame.solver import SolveResult, solve_sse, thresholds

LOCALIZE_COLUMNS = ("packets_per_sample", "mean_error", "std_error", "n_samples", "seed")


def sweep_columns(params: GameParams) -> list[str]:
    cols = ["sweep_var", "sweep_value", "strategy", "s_hat", "company_payoff"]
    for t in params.types.types:
        cols += [f"mu_{t.label}", f"t_star_{t.label}", f"user_payoff_{t.label}"]
    return cols


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_point(config: ExperimentConfig, value: float) -> list[list]:
    params = config.game.replace(visit_time=value)
    ths = thresholds(params)
    sse = solve_sse(params, integer_levels=config.integer_levels)
    entries = [("SSE", sse.s_hat_star, sse.company_payoff, sse.responses)]
    for spec in config.baselines:
        level = baseline_level(spec, params, integer_levels=config.integer_levels)
        ev = evaluate_strategy(level, params)
        entries.append((spec.name, level, ev.company_payoff, ev.responses))
    rows = []
    for name, s_hat, payoff, responses in entries:
        row = [config.sweep.variable, float(value), name, float(s_hat), payoff]
        for th, br in zip(ths, responses):
            row += [th.mu, br.t_star, br.payoff]
        rows.append(row)
    return rows


def resolve_lhat(config: ExperimentConfig, workers: int = 1) -> ExperimentConfig:
    """Fill in ``l_hat`` from the scene when the config does not give it."""
    if config.lhat_given:
        return config
    est = estimate_error(config.scene, config.n_samples, config.seed, workers)
    return config.with_lhat(est.mean_error)


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> tuple[list[str], list[list]]:
    """Rows for every sweep value, SSE first and then each configured baseline."""
    if config.sweep is None:
        raise ConfigError("a sweep section is required", field="sweep")
    config = resolve_lhat(config, jobs)
    values = config.sweep.values()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda v: _sweep_point(config, v), values))
    else:
        chunks = [_sweep_point(config, v) for v in values]
    return sweep_columns(config.game), [row for chunk in chunks for row in chunk]


def write_csv(path, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_gnuplot(path, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Whitespace-separated data, one index block per strategy (``index`` in gnuplot)."""
    blocks: dict[str, list] = {}
    for row in rows:
        blocks.setdefault(row[2], []).append(row)
    keep = [i for i, c in enumerate(columns) if c not in ("sweep_var", "strategy")]
    with open(path, "w") as fh:
        for n, (name, block) in enumerate(blocks.items()):
            if n:
                fh.write("\n\n")
            fh.write(f"# strategy {name}\n# " + " ".join(columns[i] for i in keep) + "\n")
            for row in block:
                fh.write(" ".join(_fmt(row[i]) for i in keep) + "\n")


def first_negative(rows: Sequence[Sequence], strategy: str) -> float:
    """Smallest sweep value at which ``strategy`` has a negative company payoff."""
    for row in rows:
        if row[2] == strategy and row[4] < 0:
            return row[1]
    return math.inf


@dataclass(frozen=True)
class LocalizeRun:
    packets_per_sample: int
    estimate: ErrorEstimate
    samples: list[LocalizationSample]


def run_localize(config: ExperimentConfig, jobs: int = 1) -> list[LocalizeRun]:
    """One Monte-Carlo error estimate per configured packet count, matched seeds."""
    if config.scene is None:
        raise ConfigError("localize needs a scene section", field="scene")
    runs = []
    for k in config.packet_counts or (config.scene.packets_per_sample,):
        samples = simulate_samples(config.scene.with_packets(k), config.n_samples, config.seed, jobs)
        runs.append(LocalizeRun(k, summarize(samples, config.seed), samples))
    return runs


def localize_rows(runs: Sequence[LocalizeRun]) -> list[list]:
    return [[r.packets_per_sample, r.estimate.mean_error, r.estimate.std_error,
             r.estimate.n_samples, r.estimate.seed] for r in runs]


def write_localize(runs: Sequence[LocalizeRun], out: Path) -> list[Path]:
    written = [out / "localize.csv"]
    write_csv(written[0], LOCALIZE_COLUMNS, localize_rows(runs))
    for r in runs:
        path = out / f"samples_k{r.packets_per_sample}.csv"
        write_samples_csv(r.samples, path)
        written.append(path)
    return written


def solve_once(config: ExperimentConfig) -> tuple[GameParams, SolveResult]:
    config = resolve_lhat(config)
    return config.game, solve_sse(config.game, integer_levels=config.integer_levels)


def _strategy_dict(strategy) -> dict:
    if isinstance(strategy, Mixed):
        return {"type": "mixed", "probs": [[s, p] for s, p in strategy.probs]}
    return {"type": "pure", "level": strategy.level}


def _json_float(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def solve_to_dict(params: GameParams, result: SolveResult) -> dict:
    return {
        "s_hat_star": result.s_hat_star,
        "strategy": _strategy_dict(result.strategy),
        "company_payoff": result.company_payoff,
        "types": [
            {"label": t.label, "privacy_factor": t.privacy_factor, "weight": a,
             "mu": _json_float(th.mu), "mu_slope": _json_float(th.slope),
             "t_star": br.t_star, "tie": br.tie, "user_payoff": br.payoff}
            for (t, a), th, br in zip(params.types.entries, result.thresholds, result.responses)
        ],
        "candidates": [{"s_hat": s, "company_payoff": p} for s, p in result.candidates],
        "params": {
            "visit_time": params.visit_time, "min_connect": params.min_connect,
            "expected_loc_error": params.expected_loc_error,
            "unit_service_cost": params.unit_service_cost,
            "unit_service_benefit": params.unit_service_benefit,
            "service_levels": list(params.service_levels),
        },
    }


def format_solve(params: GameParams, result: SolveResult) -> str:
    lines = [
        f"T = {params.visit_time:g} min, delta = {params.min_connect:g} min, "
        f"l_hat = {params.expected_loc_error:g} m, Theta = {params.unit_service_cost:g}, "
        f"Xi = {params.unit_service_benefit:g}, levels {params.s_min}..{params.s_max}",
        "",
        f"optimal expected level  S_hat* = {result.s_hat_star:.6g}",
    ]
    if isinstance(result.strategy, Mixed):
        mix = ", ".join(f"{s}: {p:.6g}" for s, p in result.strategy.probs)
        lines.append(f"realized mixture        Phi = {{{mix}}}")
    else:
        lines.append(f"realized strategy       pure level {result.strategy.level}")
    lines.append(f"company payoff          {result.company_payoff:.6g}")
    lines += ["", f"{'type':<8}{'Pi':>6}{'alpha':>8}{'mu':>12}{'t*':>10}{'payoff':>12}"]
    for (t, a), th, br in zip(params.types.entries, result.thresholds, result.responses):
        lines.append(f"{t.label:<8}{t.privacy_factor:>6g}{a:>8g}{th.mu:>12.6g}"
                     f"{br.t_star:>10g}{br.payoff:>12.6g}{'  (tie)' if br.tie else ''}")
    lines += ["", "candidates:", f"{'S_hat':>12}{'payoff':>14}"]
    for s, p in result.candidates:
        mark = "  <- argmax" if s == result.s_hat_star else ""
        lines.append(f"{s:>12.6g}{p:>14.6g}{mark}")
    return "\n".join(lines)
