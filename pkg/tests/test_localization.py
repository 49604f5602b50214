import json
import math

import numpy as np
import pytest

from lpgame import GeometryError
from lpgame.errors import ConfigError
from lpgame.localization import (
    LocalizationScene,
    PathLossModel,
    corner_scene,
    estimate_error,
    generate_rss,
    load_scene,
    mean_rss,
    multilaterate,
    rss_to_distance,
    sample_stream,
    save_scene,
    scene_from_dict,
    simulate_samples,
    write_samples_csv,
)

NOISELESS = PathLossModel(noise_std=0.0)


def test_reference_distance_gives_reference_power():
    scene = LocalizationScene(((0, 0), (5, 0), (0, 5)), (0, 0, 5, 5), NOISELESS)
    rss = mean_rss(scene, (0.7, 0.0))
    assert rss[0] == pytest.approx(-59.0, abs=1e-12)


def test_hand_value_path_loss():
    # d = 7 = 10 * d0 -> 10 * 0.75 * log10(10) = 7.5 dB below P0
    scene = LocalizationScene(((0, 0), (20, 0), (0, 20)), (0, 0, 20, 20), NOISELESS)
    rss = generate_rss(scene, (7.0, 0.0), sample_stream(0, 0))
    assert rss[0] == pytest.approx(-66.5, abs=1e-12)


def test_packet_averaging_noise_std():
    scene = corner_scene(packets_per_sample=4, model=PathLossModel(noise_std=1.0))
    rng = np.random.default_rng(7)
    draws = np.array([generate_rss(scene, (3.0, 4.0), rng) for _ in range(25000)]).ravel()
    base = np.tile(mean_rss(scene, (3.0, 4.0)), 25000)
    assert np.std(draws - base) == pytest.approx(0.5, rel=0.05)


def test_user_on_station_is_degenerate():
    with pytest.raises(GeometryError):
        generate_rss(corner_scene(), (0.0, 0.0), sample_stream(0, 0))


def test_rss_decreases_with_distance():
    scene = corner_scene(model=NOISELESS)
    xs = np.linspace(0.1, 9.9, 50)
    first = [mean_rss(scene, (x, 0.0))[0] for x in xs]
    assert all(b < a for a, b in zip(first, first[1:]))


def test_distance_inversion_round_trip():
    scene = corner_scene(model=NOISELESS)
    d0 = scene.model.d0
    for d in np.geomspace(d0, 100 * d0, 40):
        rss = scene.model.p0 - 10 * 0.75 * math.log10(d / d0)
        got = rss_to_distance(scene, [rss] * 4)[0]
        assert got == pytest.approx(d, rel=1e-9)


class TestMultilaterate:
    def test_noiseless_corners(self, rng):
        scene = corner_scene(model=NOISELESS)
        for loc in rng.uniform(0, 10, size=(50, 2)):
            est = multilaterate(scene, mean_rss(scene, loc))
            assert np.hypot(*(est - loc)) < 1e-6

    def test_three_station_symmetric(self):
        scene = LocalizationScene(((0, 0), (10, 0), (0, 10)), (0, 0, 10, 10), NOISELESS)
        est = multilaterate(scene, mean_rss(scene, (5.0, 5.0)))
        assert est == pytest.approx([5.0, 5.0], abs=1e-6)

    def test_perturbed_reading_bounded(self):
        scene = corner_scene(model=NOISELESS)
        rss = mean_rss(scene, (3.0, 6.0))
        rss[1] += 1.0
        est = multilaterate(scene, rss)
        err = np.hypot(*(est - np.array([3.0, 6.0])))
        assert 0 < err <= math.hypot(30.0, 30.0)

    def test_estimate_stays_in_inflated_box(self):
        scene = corner_scene(model=NOISELESS)
        rss = mean_rss(scene, (5.0, 5.0)) + np.array([-40.0, 0.0, 0.0, 25.0])
        est = multilaterate(scene, rss)
        assert np.all(est >= -10.0) and np.all(est <= 20.0)

    def test_bad_input(self):
        with pytest.raises(GeometryError):
            multilaterate(corner_scene(), [-60.0, -61.0])
        with pytest.raises(GeometryError):
            multilaterate(corner_scene(), [-60.0, np.nan, -60.0, -60.0])


class TestScene:
    def test_collinear_rejected(self):
        with pytest.raises(GeometryError):
            LocalizationScene(((0, 0), (1, 1), (2, 2)))

    def test_too_few_stations(self):
        with pytest.raises(GeometryError):
            LocalizationScene(((0, 0), (1, 0)))

    def test_empty_area(self):
        with pytest.raises(GeometryError):
            LocalizationScene(((0, 0), (1, 0), (0, 1)), (0, 0, 0, 5))

    def test_exponent_count(self):
        with pytest.raises(GeometryError):
            LocalizationScene(((0, 0), (1, 0), (0, 1)), model=PathLossModel(exponents=(2.0, 2.0)))
        scene = LocalizationScene(((0, 0), (10, 0), (0, 10)),
                                  model=PathLossModel(exponents=(2.0, 2.5, 3.0), noise_std=0))
        est = multilaterate(scene, mean_rss(scene, (2.0, 3.0)))
        assert est == pytest.approx([2.0, 3.0], abs=1e-6)

    def test_file_round_trip(self, tmp_path):
        scene = corner_scene(size=12.0, packets_per_sample=500)
        path = tmp_path / "scene.json"
        save_scene(scene, path, packets=(1000, 500))
        loaded, packets = load_scene(path)
        assert packets == (1000, 500)
        assert loaded.with_packets(500) == scene
        assert json.loads(path.read_text())["path_loss"]["exponent"] == 0.75

    def test_schema_errors(self):
        with pytest.raises(ConfigError, match="stations"):
            scene_from_dict({"area": [0, 0, 1, 1]})
        with pytest.raises(ConfigError, match="path_loss"):
            scene_from_dict({"stations": [[0, 0], [1, 0], [0, 1]], "path_loss": {"gain": 3}})


class TestEstimateError:
    def test_noiseless_limit(self):
        est = estimate_error(corner_scene(model=NOISELESS), 200, seed=3)
        assert est.mean_error <= 1e-6

    def test_bit_identical_repeat(self):
        scene = corner_scene(packets_per_sample=10)
        assert estimate_error(scene, 300, 11) == estimate_error(scene, 300, 11)

    def test_parallel_matches_sequential(self):
        scene = corner_scene(packets_per_sample=10)
        assert simulate_samples(scene, 200, 5, workers=4) == simulate_samples(scene, 200, 5)

    def test_samples_are_prefix_stable(self):
        scene = corner_scene()
        assert simulate_samples(scene, 50, 9) == simulate_samples(scene, 80, 9)[:50]

    def test_error_field_is_distance(self):
        for s in simulate_samples(corner_scene(), 50, 1):
            assert s.error == pytest.approx(math.dist(s.true_loc, s.est_loc), abs=1e-9)
            assert 0 <= s.true_loc[0] <= 10 and 0 <= s.true_loc[1] <= 10

    def test_decreasing_noise_decreasing_error(self):
        means = [estimate_error(corner_scene(model=PathLossModel(noise_std=e)), 300, 2).mean_error
                 for e in (2.0, 0.5, 0.1)]
        assert means[0] > means[1] > means[2]

    def test_more_packets_less_error(self):
        means = [estimate_error(corner_scene(packets_per_sample=k), 500, 4).mean_error
                 for k in (1, 10, 100)]
        assert means[0] > means[1] > means[2]

    def test_validation(self):
        with pytest.raises(ConfigError):
            estimate_error(corner_scene(), 0, 1)
        with pytest.raises(ConfigError):
            estimate_error(corner_scene(), 10, -1)
        with pytest.raises(ConfigError):
            estimate_error(corner_scene(), 10, 2**64)

    def test_csv_export(self, tmp_path):
        samples = simulate_samples(corner_scene(), 5, 0)
        write_samples_csv(samples, tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "true_x,true_y,est_x,est_y,error"
        assert len(lines) == 6
        assert float(lines[1].split(",")[4]) == samples[0].error
