"""Passive RSS localization simulator.

Received power follows a log-distance path-loss model with Gaussian (in dB)
shadowing.  Averaging ``k`` packets per reading shrinks the shadowing std by
``sqrt(k)``.  Positions are recovered by multilateration: path-loss inversion
to ranges, a linear difference-of-squares start, then damped Gauss-Newton on
the range residuals.

Randomness is counter-based: sample ``i`` of a run with seed ``s`` draws from
its own Philox stream keyed by ``(s, i)``, so results do not depend on the
order or parallelism in which samples are produced.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from lpgame.errors import ConfigError, GeometryError

MAX_ITER = 100
STEP_TOL = 1e-9
BOX_INFLATION = 3.0
SEED_MAX = 2**64 - 1

SAMPLE_COLUMNS = ("true_x", "true_y", "est_x", "est_y", "error")


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss ``P0 - 10 n log10(d / d0) + X``, ``X ~ N(0, noise_std)`` dB."""

    p0: float = -59.0
    d0: float = 0.7
    exponents: tuple[float, ...] = (0.75,)
    noise_std: float = 1.0

    def __post_init__(self):
        exps = (self.exponents,) if np.isscalar(self.exponents) else self.exponents
        exps = tuple(float(n) for n in exps)
        object.__setattr__(self, "exponents", exps)
        if not self.d0 > 0:
            raise GeometryError(f"reference distance d0 must be > 0, got {self.d0}")
        if not self.noise_std >= 0:
            raise GeometryError(f"noise_std must be >= 0, got {self.noise_std}")
        if not exps or any(not n > 0 for n in exps):
            raise GeometryError(f"path-loss exponents must be > 0, got {exps}")

    def exponents_for(self, n_stations: int) -> np.ndarray:
        if len(self.exponents) == 1:
            return np.full(n_stations, self.exponents[0])
        if len(self.exponents) != n_stations:
            raise GeometryError(
                f"{len(self.exponents)} path-loss exponents for {n_stations} stations")
        return np.asarray(self.exponents, dtype=float)


@dataclass(frozen=True)
class LocalizationScene:
    stations: tuple[tuple[float, float], ...]
    area: tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0)  # xmin, ymin, xmax, ymax
    model: PathLossModel = field(default_factory=PathLossModel)
    packets_per_sample: int = 1

    def __post_init__(self):
        stations = tuple((float(x), float(y)) for x, y in self.stations)
        object.__setattr__(self, "stations", stations)
        object.__setattr__(self, "area", tuple(float(v) for v in self.area))
        if len(stations) < 3:
            raise GeometryError(f"need at least 3 stations, got {len(stations)}")
        pts = np.asarray(stations)
        if np.linalg.matrix_rank(pts[1:] - pts[0], tol=1e-9) < 2:
            raise GeometryError("stations are collinear")
        xmin, ymin, xmax, ymax = self.area
        if not (xmax > xmin and ymax > ymin):
            raise GeometryError(f"area must have positive width and height, got {self.area}")
        if isinstance(self.packets_per_sample, bool) or int(self.packets_per_sample) != self.packets_per_sample \
                or self.packets_per_sample < 1:
            raise GeometryError(f"packets_per_sample must be a positive integer, got {self.packets_per_sample!r}")
        object.__setattr__(self, "packets_per_sample", int(self.packets_per_sample))
        self.model.exponents_for(len(stations))

    @property
    def station_array(self) -> np.ndarray:
        return np.asarray(self.stations, dtype=float)

    @property
    def effective_noise_std(self) -> float:
        return self.model.noise_std / math.sqrt(self.packets_per_sample)

    def with_packets(self, k: int) -> "LocalizationScene":
        return LocalizationScene(self.stations, self.area, self.model, k)


@dataclass(frozen=True)
class LocalizationSample:
    true_loc: tuple[float, float]
    est_loc: tuple[float, float]
    error: float
    rss: tuple[float, ...]


@dataclass(frozen=True)
class ErrorEstimate:
    mean_error: float
    std_error: float
    n_samples: int
    seed: int


def corner_scene(size: float = 10.0, packets_per_sample: int = 1,
                 model: Optional[PathLossModel] = None) -> LocalizationScene:
    """Square ``[0, size]^2`` area with a station at each corner."""
    return LocalizationScene(
        stations=((0.0, 0.0), (size, 0.0), (size, size), (0.0, size)),
        area=(0.0, 0.0, size, size),
        model=model or PathLossModel(),
        packets_per_sample=packets_per_sample,
    )


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Philox generator dedicated to sample ``index`` of run ``seed``."""
    _check_seed(seed)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= SEED_MAX:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}", field="seed")


def mean_rss(scene: LocalizationScene, true_loc) -> np.ndarray:
    """Noise-free received power at each station, dBm."""
    loc = np.asarray(true_loc, dtype=float)
    d = np.linalg.norm(scene.station_array - loc, axis=1)
    if np.any(d == 0.0):
        raise GeometryError(f"user location {tuple(loc)} coincides with a station")
    m = scene.model
    n = m.exponents_for(len(d))
    return m.p0 - 10.0 * n * np.log10(d / m.d0)


def generate_rss(scene: LocalizationScene, true_loc, rng: np.random.Generator) -> np.ndarray:
    """Packet-averaged RSS reading per station.

    Draws one standard normal per station, in station order, scaled by
    ``noise_std / sqrt(packets_per_sample)``.
    """
    base = mean_rss(scene, true_loc)
    z = rng.standard_normal(len(base))
    return base + scene.effective_noise_std * z


def rss_to_distance(scene: LocalizationScene, rss) -> np.ndarray:
    m = scene.model
    rss = np.asarray(rss, dtype=float)
    n = m.exponents_for(len(rss))
    return m.d0 * 10.0 ** ((m.p0 - rss) / (10.0 * n))


def _linear_start(stations: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    # ||x - s_i||^2 - ||x - s_0||^2 = r_i^2 - r_0^2, linear in x
    a = 2.0 * (stations[1:] - stations[0])
    b = (ranges[0] ** 2 - ranges[1:] ** 2
         + np.sum(stations[1:] ** 2, axis=1) - np.sum(stations[0] ** 2))
    if np.linalg.matrix_rank(a, tol=1e-12) < 2:
        raise GeometryError("singular multilateration system (collinear stations)")
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def _residuals(x, stations, ranges):
    diff = x - stations
    dist = np.linalg.norm(diff, axis=1)
    return dist - ranges, diff, dist


def multilaterate(scene: LocalizationScene, rss) -> np.ndarray:
    """Position estimate from one RSS reading per station."""
    rss = np.asarray(rss, dtype=float)
    if rss.shape != (len(scene.stations),) or not np.all(np.isfinite(rss)):
        raise GeometryError(f"need one finite RSS value per station, got {rss!r}")
    stations = scene.station_array
    ranges = rss_to_distance(scene, rss)
    xmin, ymin, xmax, ymax = scene.area
    cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
    hw, hh = BOX_INFLATION * (xmax - xmin) / 2, BOX_INFLATION * (ymax - ymin) / 2
    lo, hi = np.array([cx - hw, cy - hh]), np.array([cx + hw, cy + hh])

    x = np.clip(_linear_start(stations, ranges), lo, hi)
    r, diff, dist = _residuals(x, stations, ranges)
    cost = float(r @ r)
    for _ in range(MAX_ITER):
        jac = diff / np.maximum(dist, 1e-12)[:, None]
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        scale = 1.0
        while scale > 1e-6:
            x_new = np.clip(x + scale * step, lo, hi)
            r_new, diff_new, dist_new = _residuals(x_new, stations, ranges)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                break
            scale *= 0.5
        else:
            break
        moved = float(np.linalg.norm(x_new - x))
        x, r, diff, dist, cost = x_new, r_new, diff_new, dist_new, cost_new
        if moved < STEP_TOL:
            break
    return x


def _one_sample(scene: LocalizationScene, seed: int, index: int) -> LocalizationSample:
    rng = sample_stream(seed, index)
    xmin, ymin, xmax, ymax = scene.area
    true = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
    rss = generate_rss(scene, true, rng)
    est = multilaterate(scene, rss)
    err = float(np.hypot(*(true - est)))
    return LocalizationSample(tuple(true.tolist()), tuple(est.tolist()), err, tuple(rss.tolist()))


def simulate_samples(scene: LocalizationScene, n_samples: int, seed: int,
                     workers: int = 1) -> list[LocalizationSample]:
    """``n_samples`` uniformly placed users, located from simulated RSS.

    Output is identical for any ``workers`` value.
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples!r}", field="n_samples")
    _check_seed(seed)
    seed = int(seed)
    indices = range(int(n_samples))
    if workers <= 1:
        return [_one_sample(scene, seed, i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda i: _one_sample(scene, seed, i), indices))


def summarize(samples: Sequence[LocalizationSample], seed: int) -> ErrorEstimate:
    errors = np.array([s.error for s in samples])
    mean = math.fsum(errors) / len(errors)
    std = float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0
    return ErrorEstimate(mean, std, len(errors), int(seed))


def estimate_error(scene: LocalizationScene, n_samples: int, seed: int,
                   workers: int = 1) -> ErrorEstimate:
    """Monte-Carlo estimate of the expected localization error ``l_hat``."""
    return summarize(simulate_samples(scene, n_samples, seed, workers), seed)


def write_samples_csv(samples: Sequence[LocalizationSample], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SAMPLE_COLUMNS)
        for s in samples:
            writer.writerow([repr(v) for v in (*s.true_loc, *s.est_loc, s.error)])


# -- scene files ----------------------------------------------------------

def scene_from_dict(data: dict, prefix: str = "scene") -> tuple[LocalizationScene, tuple[int, ...]]:
    """Build a scene from its JSON form.

    Returns the scene (with the first packet count) and every packet count
    listed, since ``packets_per_sample`` may be a single integer or a list.

    Schema::

        {"stations": [[x, y], ...],
         "area": [xmin, ymin, xmax, ymax],
         "path_loss": {"p0": -59, "d0": 0.7, "exponent": 0.75 | [n_1, ...],
                       "noise_std": 1.0},
         "packets_per_sample": 1000 | [1000, 500, 200]}
    """
    if not isinstance(data, dict):
        raise ConfigError("scene must be an object", field=prefix)
    if "stations" not in data:
        raise ConfigError("missing required key", field=f"{prefix}.stations")
    pl = data.get("path_loss", {})
    if not isinstance(pl, dict):
        raise ConfigError("must be an object", field=f"{prefix}.path_loss")
    unknown = set(pl) - {"p0", "d0", "exponent", "noise_std"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field=f"{prefix}.path_loss")
    defaults = PathLossModel()
    packets = data.get("packets_per_sample", 1)
    packets = tuple(packets) if isinstance(packets, (list, tuple)) else (packets,)
    if not packets:
        raise ConfigError("needs at least one value", field=f"{prefix}.packets_per_sample")
    try:
        model = PathLossModel(
            p0=float(pl.get("p0", defaults.p0)),
            d0=float(pl.get("d0", defaults.d0)),
            exponents=pl.get("exponent", defaults.exponents),
            noise_std=float(pl.get("noise_std", defaults.noise_std)),
        )
        scene = LocalizationScene(
            stations=tuple(tuple(s) for s in data["stations"]),
            area=tuple(data.get("area", (0.0, 0.0, 10.0, 10.0))),
            model=model,
            packets_per_sample=packets[0],
        )
        for k in packets:
            scene.with_packets(k)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise ConfigError(str(exc), field=prefix) from exc
    return scene, tuple(int(k) for k in packets)


def scene_to_dict(scene: LocalizationScene, packets: Optional[Sequence[int]] = None) -> dict:
    m = scene.model
    return {
        "stations": [list(s) for s in scene.stations],
        "area": list(scene.area),
        "path_loss": {
            "p0": m.p0,
            "d0": m.d0,
            "exponent": m.exponents[0] if len(m.exponents) == 1 else list(m.exponents),
            "noise_std": m.noise_std,
        },
        "packets_per_sample": list(packets) if packets else scene.packets_per_sample,
    }


def load_scene(path) -> tuple[LocalizationScene, tuple[int, ...]]:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))


def save_scene(scene: LocalizationScene, path, packets: Optional[Sequence[int]] = None) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene, packets), indent=2) + "\n")
