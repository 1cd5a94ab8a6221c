"""Monte-Carlo experiment driver: scenario generation, sweeps, paired runs,
CSV + manifest persistence.

Seed discipline: trial t of a run uses seed seed_base + t. Channel draws use a
generator keyed by (seed, 0), optimizer randomness one keyed by (seed, 1), and
the receive-vector search one keyed by (seed, 2); none depends on the
algorithm or partition mode, so the four arms of a paired comparison share
channels, random phase initializations, and candidate probes per trial.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bcd import bcd_solve, matched_phase_init
from .channel import (
    ChannelSet,
    RicianParams,
    ScenarioGeometry,
    UpaGeometry,
    build_channel_set,
)
from .config import ConfigError, SystemConfig, config_hash
from .ls_search import ReceiveGrid, ls_optimize, quantized_phase_set, search_receive_vectors
from .metrics import evaluate, noise_power
from .subarray import make_partition

BS_POSITION = (0.0, 0.0)
RIS_POSITION = (100.0, 0.0)
ZONE_CENTER = (100.0, 40.0)
ZONE_RADIUS = 20.0

SWEEP_NAMES = ("snr_db", "iterations", "n_elements", "users")
ARMS = (
    ("wmmse_ls", "whole"),
    ("wmmse_ls", "subarray"),
    ("bcd", "whole"),
    ("bcd", "subarray"),
)


@dataclass
class ExperimentResult:
    sweep_name: str
    values: list
    config: SystemConfig
    rows: list  # dicts: sweep_value, trial, seed, wsr, rates, iterations_used, wall_ms
    seeds: list

    def rows_for(self, value):
        return [r for r in self.rows if r["sweep_value"] == value]

    def mean_wsr(self, value) -> float:
        return float(np.mean([r["wsr"] for r in self.rows_for(value)]))

    def std_wsr(self, value) -> float:
        return float(np.std([r["wsr"] for r in self.rows_for(value)]))

    def mean_rates(self, value) -> np.ndarray:
        return np.mean([r["rates"] for r in self.rows_for(value)], axis=0)


def power_and_noise(config: SystemConfig):
    """Total transmit power and noise power under the configured power mode."""
    if config.power_mode == "normalized_snr":
        return 10 ** (config.snr_db / 10), 1.0
    noise = noise_power(config.noise_psd_dbm_hz, config.bandwidth_hz)
    return 10 ** ((config.tx_power_dbm - 30) / 10), noise


# Amplitude attenuation applied to the blocked BS -> user line-of-sight path
# in normalized-SNR mode: the gathering zone sits behind an obstruction, so
# the direct link is a weak scattered component relative to the RIS cascade.
DIRECT_BLOCKAGE_GAIN = 0.3
# Number of random restarts of the BCD solver per trial (best final WSR kept).
BCD_RESTARTS = 3


def unit_fading(channels: ChannelSet, direct_gain: float = 1.0) -> ChannelSet:
    """Replace each link's pathloss amplitude with a unit scale.

    Normalized-SNR mode works with unit-variance small-scale fading per link
    (times `direct_gain` on the blocked direct path) so the snr_db axis reads
    as transmit SNR against sigma^2 = 1. The pathloss metadata is kept for
    weighting rules that depend on geometry.
    """
    return ChannelSet(
        direct=[direct_gain * h / g for h, g in zip(channels.direct, channels.pathloss_direct)],
        bs_to_ris=channels.bs_to_ris / channels.pathloss_reflect_g,
        ris_to_user=[h / g for h, g in zip(channels.ris_to_user, channels.pathloss_reflect_r)],
        pathloss_direct=list(channels.pathloss_direct),
        pathloss_reflect_g=channels.pathloss_reflect_g,
        pathloss_reflect_r=list(channels.pathloss_reflect_r),
    )


def draw_scenario(config: SystemConfig, rng) -> ScenarioGeometry:
    """Users uniform by area over the gathering disk."""
    radii = ZONE_RADIUS * np.sqrt(rng.uniform(0, 1, config.j_users))
    angles = rng.uniform(0, 2 * np.pi, config.j_users)
    center = np.asarray(ZONE_CENTER)
    users = [center + r * np.array([np.cos(a), np.sin(a)]) for r, a in zip(radii, angles)]
    return ScenarioGeometry(
        bs_position=np.asarray(BS_POSITION),
        ris_position=np.asarray(RIS_POSITION),
        user_positions=users,
        zone_center=center,
        zone_radius=ZONE_RADIUS,
    )


def draw_trial_channels(config: SystemConfig, seed: int):
    """Channels for one trial, normalized when the power mode asks for it."""
    rng = np.random.default_rng([seed, 0])
    geometry = draw_scenario(config, rng)
    channels = build_channel_set(config, geometry, RicianParams(config.k1, config.k2), rng)
    if config.power_mode == "normalized_snr":
        channels = unit_fading(channels, DIRECT_BLOCKAGE_GAIN)
    return channels, geometry


def user_weights(config: SystemConfig, channels) -> np.ndarray:
    if config.weights_rule == "uniform":
        return np.ones(config.j_users)
    # inverse of the direct-link linear power gain, normalized to sum to J
    w = np.array([1.0 / g**2 for g in channels.pathloss_direct])
    return w * config.j_users / w.sum()


def run_trial(config: SystemConfig, seed: int, channels=None) -> dict:
    """One full optimize-and-evaluate pass; pass `channels` to reuse a draw."""
    if channels is None:
        channels, _ = draw_trial_channels(config, seed)
    total_power, noise = power_and_noise(config)
    weights = user_weights(config, channels)
    plan = make_partition(config.n_elements, config.j_users, config.mode)
    # optimizer randomness is keyed by the trial alone so paired arms start
    # from identical random phase draws
    rng = np.random.default_rng([seed, 1])
    # the receive search draws from a stream keyed only by the trial seed, so
    # paired arms rank candidates against identical probes
    rng_v = np.random.default_rng([seed, 2])
    grid = ReceiveGrid(
        UpaGeometry(config.n_r, config.m_r), config.q1_bits, config.q2_bits
    )
    start = time.perf_counter()
    v = search_receive_vectors(channels, plan, grid, rng_v, weights, noise, total_power)
    if config.algorithm == "wmmse_ls":
        theta, W, _ = ls_optimize(
            channels,
            plan,
            v,
            quantized_phase_set(config.r_bits),
            weights,
            noise,
            total_power,
            rng,
            tol=config.tol,
            max_iter=config.max_iter,
        )
        history = None
        iterations = config.n_elements
    else:
        # the BCD landscape is nonconvex in the phases; keep the best of a
        # matched-alignment start plus random restarts (drawn from the shared
        # per-trial stream)
        inits = [matched_phase_init(channels, plan, v)] + [None] * (BCD_RESTARTS - 1)
        theta = W = history = None
        for theta0 in inits:
            theta_k, W_k, history_k = bcd_solve(
                channels,
                plan,
                v,
                weights,
                noise,
                total_power,
                rng,
                tol=config.tol,
                max_outer=config.max_iter,
                theta_init=theta0,
            )
            if history is None or max(history_k) > max(history):
                theta, W, history = theta_k, W_k, history_k
        iterations = len(history) - 1
    wall_ms = (time.perf_counter() - start) * 1000
    report = evaluate(channels, theta, W, v, plan, weights, noise)
    return {
        "seed": seed,
        "wsr": report.wsr,
        "rates": [float(r) for r in report.rate],
        "iterations_used": iterations,
        "wall_ms": wall_ms,
        "wsr_history": history,
    }


def _sweep_config(config: SystemConfig, sweep_name: str, value) -> SystemConfig:
    if sweep_name == "snr_db":
        if config.power_mode != "normalized_snr":
            raise ConfigError("snr_db sweep requires power_mode normalized_snr")
        cfg = replace(config, snr_db=float(value))
    elif sweep_name == "n_elements":
        side = math.isqrt(int(value))
        if side * side != int(value):
            raise ConfigError(f"n_elements sweep value {value} is not a perfect square")
        cfg = replace(config, n_ris=side)
    elif sweep_name == "users":
        cfg = replace(config, j_users=int(value))
    elif sweep_name == "iterations":
        if config.algorithm != "bcd":
            raise ConfigError("iterations sweep requires algorithm bcd")
        cfg = replace(config, max_iter=int(max(value, config.max_iter)))
    else:
        raise ConfigError(f"unknown sweep variable {sweep_name!r}; choose from {SWEEP_NAMES}")
    cfg.validate()
    return cfg


def _trial_task(args):
    config, seed = args
    return run_trial(config, seed)


def _run_trials(tasks, threads: int):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_trial_task, tasks))
    return [_trial_task(t) for t in tasks]


def run_sweep(config: SystemConfig, sweep_name: str, values, threads: int = 1) -> ExperimentResult:
    """Monte-Carlo sweep over one experiment axis; deterministic in (config, seeds)."""
    if not values:
        raise ConfigError("sweep values must be nonempty")
    config.validate()
    seeds = [config.seed_base + t for t in range(config.trials)]
    rows = []
    if sweep_name == "iterations":
        # one BCD run per trial; each requested iteration index reads the
        # recorded WSR history (clamped to the last entry once converged)
        cfg = _sweep_config(config, sweep_name, max(int(v) for v in values))
        results = _run_trials([(cfg, s) for s in seeds], threads)
        for value in values:
            for trial, res in enumerate(results):
                hist = res["wsr_history"]
                idx = min(int(value), len(hist) - 1)
                rows.append(
                    {
                        "sweep_value": value,
                        "trial": trial,
                        "seed": res["seed"],
                        "wsr": hist[idx],
                        "rates": res["rates"],
                        "iterations_used": res["iterations_used"],
                        "wall_ms": res["wall_ms"],
                    }
                )
        return ExperimentResult(sweep_name, list(values), config, rows, seeds)

    # validate every value before any trial runs
    sweep_configs = {value: _sweep_config(config, sweep_name, value) for value in values}
    tasks = [(sweep_configs[value], s) for value in values for s in seeds]
    results = _run_trials(tasks, threads)
    it = iter(results)
    for value in values:
        for trial, seed in enumerate(seeds):
            res = next(it)
            rows.append(
                {
                    "sweep_value": value,
                    "trial": trial,
                    "seed": res["seed"],
                    "wsr": res["wsr"],
                    "rates": res["rates"],
                    "iterations_used": res["iterations_used"],
                    "wall_ms": res["wall_ms"],
                }
            )
    return ExperimentResult(sweep_name, list(values), config, rows, seeds)


def _paired_task(args):
    config, seed = args
    channels, _ = draw_trial_channels(config, seed)
    out = {}
    for algorithm, mode in ARMS:
        cfg = replace(config, algorithm=algorithm, mode=mode)
        cfg.validate()
        out[(algorithm, mode)] = run_trial(cfg, seed, channels=channels)
    return out


def paired_comparison(config: SystemConfig, seeds, threads: int = 1):
    """Run all four (algorithm x mode) arms on identical channel draws.

    Returns {(algorithm, mode): ExperimentResult}; the shared channels make
    per-trial paired differences meaningful.
    """
    config.validate()
    seeds = list(seeds)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(_paired_task, [(config, s) for s in seeds]))
    else:
        per_trial = [_paired_task((config, s)) for s in seeds]
    results = {}
    for arm in ARMS:
        rows = []
        for trial, res in enumerate(per_trial):
            r = res[arm]
            rows.append(
                {
                    "sweep_value": f"{arm[0]}/{arm[1]}",
                    "trial": trial,
                    "seed": r["seed"],
                    "wsr": r["wsr"],
                    "rates": r["rates"],
                    "iterations_used": r["iterations_used"],
                    "wall_ms": r["wall_ms"],
                }
            )
        results[arm] = ExperimentResult("paired", [f"{arm[0]}/{arm[1]}"], config, rows, seeds)
    return results


def paired_differences(results, arm_hi, arm_lo):
    """Per-trial WSR differences arm_hi - arm_lo, trial order preserved."""
    hi = [r["wsr"] for r in results[arm_hi].rows]
    lo = [r["wsr"] for r in results[arm_lo].rows]
    return np.array(hi) - np.array(lo)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12e}"
    return str(x)


def write_results(result: ExperimentResult, outdir, name: str = "results") -> Path:
    """Write <name>.csv (deterministic), <name>_timings.csv, <name>_manifest.txt.

    Wall-clock goes in the timings file so the results CSV is byte-identical
    across reruns of the same config and seeds.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    max_users = max(len(r["rates"]) for r in result.rows)
    csv_path = outdir / f"{name}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["sweep_value", "trial", "seed", "wsr"]
        header += [f"rate_user_{j + 1}" for j in range(max_users)]
        header += ["iterations_used"]
        writer.writerow(header)
        for r in result.rows:
            rates = [_fmt(x) for x in r["rates"]]
            rates += [""] * (max_users - len(rates))
            writer.writerow(
                [_fmt(r["sweep_value"]), r["trial"], r["seed"], _fmt(r["wsr"])]
                + rates
                + [r["iterations_used"]]
            )
    with open(outdir / f"{name}_timings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sweep_value", "trial", "seed", "wall_ms"])
        for r in result.rows:
            writer.writerow([_fmt(r["sweep_value"]), r["trial"], r["seed"], f"{r['wall_ms']:.3f}"])
    with open(outdir / f"{name}_manifest.txt", "w") as fh:
        fh.write(f"package_version: {__version__}\n")
        fh.write(f"config_hash: {config_hash(result.config)}\n")
        fh.write(f"sweep: {result.sweep_name}\n")
        fh.write(f"values: {', '.join(str(v) for v in result.values)}\n")
        fh.write(f"trials: {len(result.seeds)}\n")
        fh.write(f"seeds: {', '.join(str(s) for s in result.seeds)}\n")
        fh.write(f"algorithm: {result.config.algorithm}\n")
        fh.write(f"mode: {result.config.mode}\n")
        fh.write(f"power_mode: {result.config.power_mode}\n")
        if result.config.power_mode == "normalized_snr":
            fh.write(
                "snr_semantics: transmit SNR; sigma^2 = 1, unit-scale small-scale "
                "fading per link, blocked direct path attenuated by "
                f"{DIRECT_BLOCKAGE_GAIN:g} in amplitude\n"
            )
    return csv_path
