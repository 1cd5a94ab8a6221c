"""SINR / rate / weighted sum-rate evaluation: the single scoring path shared
by every optimizer and test."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .subarray import equivalent_row_channel


@dataclass
class RateReport:
    sinr: np.ndarray  # linear, per user
    rate: np.ndarray  # bits/s/Hz, per user
    wsr: float  # bits/s/Hz
    weights: np.ndarray


def equivalent_rows(channels, theta, plan, v) -> np.ndarray:
    """Stack the per-user equivalent row channels into a J x Nt matrix."""
    return np.stack(
        [equivalent_row_channel(j, channels, theta, plan, v[j]) for j in range(channels.n_users)]
    )


def evaluate(channels, theta, W, v, plan, weights, noise: float) -> RateReport:
    """Rates for a full (channels, theta, W, V) tuple under the given partition."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    rows = equivalent_rows(channels, theta, plan, v)
    return evaluate_rows(rows, W, weights, noise)


def evaluate_rows(rows: np.ndarray, W: np.ndarray, weights, noise: float) -> RateReport:
    """Rates when the equivalent row channels are already available."""
    weights = np.asarray(weights, dtype=float)
    M = rows @ W
    p = np.abs(M) ** 2
    sig = np.diag(p).copy()
    interf = p.sum(axis=1) - sig
    sinr = sig / (interf + noise)
    rate = np.log2(1.0 + sinr)
    return RateReport(sinr=sinr, rate=rate, wsr=float(np.sum(weights * rate)), weights=weights)


def noise_power(psd_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power in watts for a flat PSD over the given bandwidth."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    dbm = psd_dbm_per_hz + 10 * math.log10(bandwidth_hz)
    return 10 ** ((dbm - 30) / 10)
