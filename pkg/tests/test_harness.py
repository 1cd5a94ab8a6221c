import numpy as np
import pytest

from risbeam.config import ConfigError, SystemConfig
from risbeam.harness import (
    ARMS,
    ZONE_CENTER,
    ZONE_RADIUS,
    draw_scenario,
    draw_trial_channels,
    paired_comparison,
    paired_differences,
    power_and_noise,
    run_sweep,
    run_trial,
    user_weights,
    write_results,
)

SMALL = dict(n_ris=2, j_users=2, trials=2, max_iter=30)


def test_power_and_noise_normalized():
    p, n = power_and_noise(SystemConfig(snr_db=10.0))
    assert p == pytest.approx(10.0)
    assert n == 1.0


def test_power_and_noise_physical():
    cfg = SystemConfig(power_mode="physical_dbm", snr_db=None, tx_power_dbm=30.0)
    p, n = power_and_noise(cfg)
    assert p == pytest.approx(1.0)  # 30 dBm = 1 W
    assert n == pytest.approx(1e-15)  # -220 dBm/Hz over 10 GHz


def test_scenario_users_inside_zone():
    cfg = SystemConfig(j_users=6, n_ris=6)
    rng = np.random.default_rng(0)
    for _ in range(20):
        geom = draw_scenario(cfg, rng)
        for u in geom.user_positions:
            assert np.linalg.norm(u - np.asarray(ZONE_CENTER)) <= ZONE_RADIUS + 1e-9


def test_trial_channels_deterministic():
    cfg = SystemConfig(**SMALL)
    a, _ = draw_trial_channels(cfg, 7)
    b, _ = draw_trial_channels(cfg, 7)
    assert np.array_equal(a.bs_to_ris, b.bs_to_ris)
    assert all(np.array_equal(x, y) for x, y in zip(a.direct, b.direct))


def test_direct_channels_shared_across_ris_sizes():
    # growing the RIS must not disturb the direct-link draws of the same seed
    small, _ = draw_trial_channels(SystemConfig(**{**SMALL, "n_ris": 2}), 3)
    large, _ = draw_trial_channels(SystemConfig(**{**SMALL, "n_ris": 4}), 3)
    assert all(np.array_equal(x, y) for x, y in zip(small.direct, large.direct))


def test_user_weights_uniform():
    cfg = SystemConfig(**SMALL)
    channels, _ = draw_trial_channels(cfg, 0)
    assert np.array_equal(user_weights(cfg, channels), np.ones(2))


def test_user_weights_inverse_pathloss():
    cfg = SystemConfig(**{**SMALL, "weights_rule": "inverse_pathloss"})
    channels, _ = draw_trial_channels(cfg, 0)
    w = user_weights(cfg, channels)
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(cfg.j_users)
    # the farther user (larger pathloss, smaller amplitude gain) weighs more
    order_gain = np.argsort(channels.pathloss_direct)
    order_weight = np.argsort(w)[::-1]
    assert np.array_equal(order_gain, order_weight)


def test_run_trial_deterministic():
    cfg = SystemConfig(**SMALL)
    a = run_trial(cfg, 1)
    b = run_trial(cfg, 1)
    assert a["wsr"] == b["wsr"]
    assert a["rates"] == b["rates"]


def test_run_trial_both_algorithms():
    for algorithm in ("bcd", "wmmse_ls"):
        cfg = SystemConfig(**{**SMALL, "algorithm": algorithm})
        res = run_trial(cfg, 0)
        assert res["wsr"] > 0
        assert len(res["rates"]) == 2


def test_sweep_shapes_and_values():
    cfg = SystemConfig(**SMALL)
    result = run_sweep(cfg, "snr_db", [-10.0, 0.0, 10.0])
    assert len(result.rows) == 3 * cfg.trials
    assert result.values == [-10.0, 0.0, 10.0]
    assert result.mean_wsr(10.0) > result.mean_wsr(-10.0)


def test_sweep_rejects_bad_inputs():
    cfg = SystemConfig(**SMALL)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "snr_db", [])
    with pytest.raises(ConfigError):
        run_sweep(cfg, "n_elements", [5])  # not a perfect square
    with pytest.raises(ConfigError):
        run_sweep(cfg, "users", [3])  # 4 elements not divisible by 3
    with pytest.raises(ConfigError):
        run_sweep(cfg, "bandwidth", [1])
    with pytest.raises(ConfigError):
        run_sweep(SystemConfig(**{**SMALL, "algorithm": "wmmse_ls"}), "iterations", [5])


def test_iterations_sweep_reads_history():
    cfg = SystemConfig(**{**SMALL, "trials": 1, "tol": 1e-12})
    result = run_sweep(cfg, "iterations", [0, 5, 25])
    wsrs = [result.mean_wsr(v) for v in [0, 5, 25]]
    assert wsrs[0] <= wsrs[1] + 1e-9 <= wsrs[2] + 2e-9


def test_paired_comparison_shares_channels():
    cfg = SystemConfig(**SMALL)
    results = paired_comparison(cfg, seeds=[0, 1])
    assert set(results) == set(ARMS)
    for arm in ARMS:
        assert [r["seed"] for r in results[arm].rows] == [0, 1]
    d = paired_differences(results, ("bcd", "whole"), ("wmmse_ls", "whole"))
    assert d.shape == (2,)


def test_write_results_deterministic(tmp_path):
    cfg = SystemConfig(**SMALL)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    path_a = write_results(run_sweep(cfg, "snr_db", [0.0]), out_a)
    path_b = write_results(run_sweep(cfg, "snr_db", [0.0]), out_b)
    assert path_a.read_bytes() == path_b.read_bytes()
    manifest = (out_a / "results_manifest.txt").read_text()
    assert "config_hash" in manifest
    assert "seeds: 0, 1" in manifest
    timings = (out_a / "results_timings.csv").read_text().splitlines()
    assert timings[0] == "sweep_value,trial,seed,wall_ms"
    assert len(timings) == 1 + cfg.trials  # header + one row per trial


def test_written_csv_matches_rows(tmp_path):
    cfg = SystemConfig(**SMALL)
    result = run_sweep(cfg, "snr_db", [5.0])
    path = write_results(result, tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "sweep_value,trial,seed,wsr,rate_user_1,rate_user_2,iterations_used"
    assert len(lines) == 1 + len(result.rows)
    first = lines[1].split(",")
    assert float(first[3]) == pytest.approx(result.rows[0]["wsr"])
