"""Experiment configuration: JSON files, named presets and validation.

A config file is a JSON object; every key is optional when a ``profile`` (or
``--profile``) supplies it.  File values are deep-merged over the preset, and
a ``null`` value removes the preset's entry.  See README for the schema.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from lpgame.baselines import DEFAULT_WEIGHTED_MAP, BaselineSpec
from lpgame.errors import ConfigError, DomainError, GeometryError
from lpgame.localization import SEED_MAX, LocalizationScene, scene_from_dict
from lpgame.model import GameParams, TypeDistribution, UserType

GAME_KEYS = ("visit_time", "min_connect", "expected_loc_error", "unit_service_cost",
             "unit_service_benefit", "service_levels", "types")
TOP_KEYS = ("profile", "game", "scene", "n_samples", "sweep", "baselines", "output",
            "seed", "integer_levels")
SWEEP_VARIABLES = {"T": "T", "visit_time": "T"}

_ALL_BASELINES = ["Max", "Min", "Weighted", "Averaging"]

_LITERAL_TYPES = [
    {"label": "PU", "privacy_factor": 0.2, "weight": 0.2},
    {"label": "PP", "privacy_factor": 0.5, "weight": 0.55},
    {"label": "PF", "privacy_factor": 0.8, "weight": 0.25},
]
# privacy odds 1/3, 1 and 3; with l_hat / delta = 0.1 the thresholds grow
# at 0.033, 0.1 and 0.3 levels per minute
_CALIBRATED_TYPES = [
    {"label": "PU", "privacy_factor": 0.25, "weight": 0.2},
    {"label": "PP", "privacy_factor": 0.5, "weight": 0.55},
    {"label": "PF", "privacy_factor": 0.75, "weight": 0.25},
]
_CALIBRATED_MAP = [[0.25, 2], [0.5, 5], [0.75, 8]]

_BASE_GAME = {
    "visit_time": 84,
    "min_connect": 2,
    "unit_service_cost": 1.0,
    "unit_service_benefit": 1.5,
    "service_levels": {"min": 1, "max": 10},
}
_FULL_SWEEP = {"variable": "T", "start": 4, "stop": 180, "step": 1}


def _uniform(types):
    return [{k: v for k, v in t.items() if k != "weight"} for t in types]


PROFILES: dict[str, tuple[str, dict]] = {
    "westin": (
        "three privacy classes at 0.2/0.5/0.8 with prior 0.2/0.55/0.25, l_hat = 2 m",
        {"game": {**_BASE_GAME, "expected_loc_error": 2.0, "types": _LITERAL_TYPES},
         "sweep": _FULL_SWEEP, "baselines": _ALL_BASELINES},
    ),
    "fig1": (
        "SSE payoff against visit time with l_hat simulated for 1000/500/200 packets",
        {"game": {**_BASE_GAME, "types": _LITERAL_TYPES},
         "scene": {"stations": [[0, 0], [10, 0], [10, 10], [0, 10]],
                   "area": [0, 0, 10, 10],
                   "path_loss": {"p0": -59.0, "d0": 0.7, "exponent": 0.75, "noise_std": 1.0},
                   "packets_per_sample": [1000, 500, 200]},
         "n_samples": 1000,
         "sweep": _FULL_SWEEP, "baselines": []},
    ),
    "fig2": (
        "calibrated classes, uniform prior; SSE against Averaging and the other baselines",
        {"game": {**_BASE_GAME, "expected_loc_error": 0.2, "types": _uniform(_CALIBRATED_TYPES)},
         "sweep": _FULL_SWEEP,
         "baselines": ["Averaging", "Max", "Min", {"kind": "Weighted", "map": _CALIBRATED_MAP}]},
    ),
    "fig3": (
        "calibrated classes, prior 0.2/0.55/0.25; SSE against Max/Min/Weighted/Averaging",
        {"game": {**_BASE_GAME, "expected_loc_error": 0.2, "types": _CALIBRATED_TYPES},
         "sweep": _FULL_SWEEP,
         "baselines": ["Max", "Min", {"kind": "Weighted", "map": _CALIBRATED_MAP}, "Averaging"]},
    ),
    "fig5-calibrated": (
        "thresholds against visit time, slopes 0.033/0.1/0.3 per minute",
        {"game": {**_BASE_GAME, "expected_loc_error": 0.2, "types": _CALIBRATED_TYPES},
         "sweep": _FULL_SWEEP, "baselines": []},
    ),
    "fig5-literal": (
        "thresholds against visit time for privacy factors 0.2/0.5/0.8 and l_hat = 2 m",
        {"game": {**_BASE_GAME, "expected_loc_error": 2.0, "types": _LITERAL_TYPES},
         "sweep": _FULL_SWEEP, "baselines": []},
    ),
}


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]


@dataclass(frozen=True)
class ExperimentConfig:
    game: GameParams
    lhat_given: bool
    scene: Optional[LocalizationScene] = None
    packet_counts: tuple[int, ...] = ()
    n_samples: int = 1000
    sweep: Optional[Sweep] = None
    baselines: tuple[BaselineSpec, ...] = ()
    output: Path = Path("out")
    seed: int = 0
    profile: Optional[str] = None
    integer_levels: bool = False
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def with_lhat(self, lhat: float) -> "ExperimentConfig":
        from dataclasses import replace
        return replace(self, game=self.game.replace(expected_loc_error=lhat), lhat_given=True)


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if value is None:
            out.pop(key, None)
        elif isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def profile_dict(name: str) -> dict:
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}; available: {', '.join(PROFILES)}",
                          field="profile")
    return copy.deepcopy(PROFILES[name][1])


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc.strerror}", field=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", field=str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object", field=str(path))
    return data


def _number(d: dict, key: str, prefix: str, required=True, default=None):
    if key not in d:
        if required:
            raise ConfigError("missing required key", field=f"{prefix}.{key}")
        return default
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=f"{prefix}.{key}")
    return value


def _levels(spec, prefix="game.service_levels"):
    if isinstance(spec, dict):
        lo, hi = spec.get("min"), spec.get("max")
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise ConfigError("needs integer 'min' and 'max'", field=prefix)
        return tuple(range(lo, hi + 1))
    if isinstance(spec, list):
        return tuple(spec)
    raise ConfigError("expected a list of levels or {min, max}", field=prefix)


def _types(spec, prefix="game.types") -> TypeDistribution:
    if not isinstance(spec, list) or not spec:
        raise ConfigError("expected a non-empty list of types", field=prefix)
    types, weights, labels = [], [], set()
    for i, entry in enumerate(spec):
        p = f"{prefix}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError("expected an object", field=p)
        pf = _number(entry, "privacy_factor", p)
        label = str(entry.get("label", f"type{i + 1}"))
        if label in labels:
            raise ConfigError(f"duplicate label {label!r}", field=f"{p}.label")
        labels.add(label)
        try:
            types.append(UserType(pf, label))
        except DomainError as exc:
            raise ConfigError(str(exc), field=f"{p}.privacy_factor") from exc
        weights.append(_number(entry, "weight", p, required=False))
    try:
        if all(w is None for w in weights):
            return TypeDistribution.uniform(types)
        if any(w is None for w in weights):
            raise ConfigError("give a weight for every type or for none", field=prefix)
        return TypeDistribution(tuple(zip(types, weights)))
    except DomainError as exc:
        raise ConfigError(str(exc), field=prefix) from exc


def _baselines(spec) -> tuple[BaselineSpec, ...]:
    if not isinstance(spec, list):
        raise ConfigError("expected a list", field="baselines")
    out = []
    for i, entry in enumerate(spec):
        p = f"baselines[{i}]"
        if isinstance(entry, str):
            out.append(BaselineSpec(entry))
        elif isinstance(entry, dict) and "kind" in entry:
            wmap = entry.get("map")
            if wmap is not None:
                if not all(isinstance(m, list) and len(m) == 2 for m in wmap):
                    raise ConfigError("map entries must be [privacy_factor, level]", field=f"{p}.map")
            try:
                out.append(BaselineSpec(entry["kind"], wmap))
            except ConfigError as exc:
                raise ConfigError(str(exc), field=p) from exc
        else:
            raise ConfigError("expected a kind name or {kind, map}", field=p)
    return tuple(out)


def _sweep(spec) -> Sweep:
    if not isinstance(spec, dict):
        raise ConfigError("expected an object", field="sweep")
    var = spec.get("variable", "T")
    if var not in SWEEP_VARIABLES:
        raise ConfigError(f"unsupported sweep variable {var!r} (only T)", field="sweep.variable")
    start = _number(spec, "start", "sweep")
    stop = _number(spec, "stop", "sweep")
    step = _number(spec, "step", "sweep", required=False, default=1)
    if not start < stop:
        raise ConfigError(f"start ({start}) must be below stop ({stop})", field="sweep")
    if not step > 0:
        raise ConfigError(f"step must be > 0, got {step}", field="sweep.step")
    return Sweep(SWEEP_VARIABLES[var], float(start), float(stop), float(step))


def build_config(data: dict, profile: Optional[str] = None) -> ExperimentConfig:
    """Validate a merged config dict.  ``profile`` overrides ``data['profile']``."""
    name = profile or data.get("profile")
    merged = deep_merge(profile_dict(name), data) if name else copy.deepcopy(data)
    merged.pop("profile", None)
    unknown = set(merged) - set(TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field="<root>")

    sweep = _sweep(merged["sweep"]) if "sweep" in merged else None
    game = merged.get("game")
    if not isinstance(game, dict):
        raise ConfigError("missing required section", field="game")
    unknown = set(game) - set(GAME_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field="game")

    scene, packets = None, ()
    if "scene" in merged:
        try:
            scene, packets = scene_from_dict(merged["scene"])
        except GeometryError as exc:
            raise GeometryError(f"scene: {exc}") from exc
    lhat_given = "expected_loc_error" in game
    if lhat_given == (scene is not None):
        raise ConfigError("give exactly one of game.expected_loc_error and scene",
                          field="game.expected_loc_error")

    visit_time = _number(game, "visit_time", "game", required=sweep is None,
                         default=sweep.start if sweep else None)
    min_connect = _number(game, "min_connect", "game")
    if "service_levels" not in game:
        raise ConfigError("missing required key", field="game.service_levels")
    if "types" not in game:
        raise ConfigError("missing required key", field="game.types")
    values = dict(
        visit_time=visit_time,
        min_connect=min_connect,
        expected_loc_error=_number(game, "expected_loc_error", "game") if lhat_given else 1.0,
        unit_service_cost=_number(game, "unit_service_cost", "game"),
        unit_service_benefit=_number(game, "unit_service_benefit", "game"),
        service_levels=_levels(game["service_levels"]),
        types=_types(game["types"]),
    )
    try:
        params = GameParams(**values)
    except DomainError as exc:
        msg = str(exc)
        key = next((k for k in GAME_KEYS if msg.startswith(k) or f" {k}" in msg), None)
        raise ConfigError(msg, field=f"game.{key}" if key else "game") from exc
    if sweep is not None and sweep.start < params.min_connect:
        raise ConfigError(f"sweep start {sweep.start} below min_connect {params.min_connect}",
                          field="sweep.start")

    seed = merged.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= SEED_MAX:
        raise ConfigError(f"expected an integer in [0, 2**64), got {seed!r}", field="seed")
    n_samples = merged.get("n_samples", 1000)
    if isinstance(n_samples, bool) or not isinstance(n_samples, int) or n_samples < 1:
        raise ConfigError(f"expected a positive integer, got {n_samples!r}", field="n_samples")
    integer_levels = merged.get("integer_levels", False)
    if not isinstance(integer_levels, bool):
        raise ConfigError("expected true or false", field="integer_levels")
    baselines = _baselines(merged.get("baselines", []))
    for b in baselines:
        if b.kind == "Weighted":
            wmap = b.weighted_map if b.weighted_map is not None else DEFAULT_WEIGHTED_MAP
            for t in params.types.types:
                if not any(abs(k - t.privacy_factor) <= 1e-9 for k, _ in wmap):
                    raise ConfigError(
                        f"no weighted level for privacy factor {t.privacy_factor}",
                        field="baselines.Weighted.map")
    return ExperimentConfig(
        game=params,
        lhat_given=lhat_given,
        scene=scene,
        packet_counts=packets,
        n_samples=n_samples,
        sweep=sweep,
        baselines=baselines,
        output=Path(merged.get("output", "out")),
        seed=seed,
        profile=name,
        integer_levels=integer_levels,
        raw=merged,
    )


def load_config(path=None, profile: Optional[str] = None) -> ExperimentConfig:
    if path is None and profile is None:
        raise ConfigError("give --config and/or --profile", field="<root>")
    data = load_config_file(path) if path is not None else {}
    return build_config(data, profile)
