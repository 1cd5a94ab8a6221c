"""Greedy local search over quantized RIS phases and user receive directions,
with a WMMSE precoder at the BS for every phase candidate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import UpaGeometry, steering_vector
from .metrics import evaluate_rows, equivalent_rows
from .subarray import random_phase_vector
from .wmmse import mrt_precoder, wmmse_precoder


def quantized_phase_set(r_bits: int) -> np.ndarray:
    """The 2^r unit-modulus phase values e^{j k 2pi / 2^r}, k = 0 .. 2^r - 1."""
    if r_bits < 1:
        raise ValueError("r_bits must be >= 1")
    k = np.arange(2**r_bits)
    return np.exp(1j * 2 * np.pi * k / 2**r_bits)


@dataclass(frozen=True)
class ReceiveGrid:
    """Quantized receive-direction codebook for a user UPA.

    q1 bits give 2^q1 azimuth points spanning (0, pi]; q2 bits give 2^q2
    elevation points spanning (-pi/2, pi/2].
    """

    geometry: UpaGeometry
    q1_bits: int
    q2_bits: int

    def angles(self):
        n_az = 2**self.q1_bits
        n_el = 2**self.q2_bits
        azimuths = [k * math.pi / n_az for k in range(1, n_az + 1)]
        elevations = [k * math.pi / n_el - math.pi / 2 for k in range(1, n_el + 1)]
        return azimuths, elevations

    def candidates(self) -> np.ndarray:
        """Unit-norm receive vectors, azimuth-major ordering."""
        azimuths, elevations = self.angles()
        scale = 1.0 / math.sqrt(self.geometry.size)
        return np.stack(
            [
                scale * steering_vector(self.geometry, az, el)
                for az in azimuths
                for el in elevations
            ]
        )


def search_receive_vectors(channels, plan, grid: ReceiveGrid, rng, weights, noise, total_power):
    """Greedy per-user pick from the receive codebook.

    Users are processed in index order; undecided users hold random codebook
    entries, decided ones stay fixed. Candidates are ranked by the WSR of a
    plain MRT precoder on the induced equivalent channels, against a single
    random phase probe held fixed for the whole search. Ties break to the
    lowest candidate index.
    """
    cands = grid.candidates()
    theta_probe = random_phase_vector(channels.n_elements, rng)
    picks = rng.integers(0, len(cands), size=channels.n_users)
    v = [cands[picks[j]] for j in range(channels.n_users)]
    for j in range(channels.n_users):
        best_score = -np.inf
        best_idx = 0
        for idx, cand in enumerate(cands):
            v[j] = cand
            rows = equivalent_rows(channels, theta_probe, plan, v)
            W = mrt_precoder(rows, total_power)
            score = evaluate_rows(rows, W, weights, noise).wsr
            if score > best_score:
                best_score = score
                best_idx = idx
        v[j] = cands[best_idx]
    return v


def ls_optimize(
    channels,
    plan,
    v,
    phase_set: np.ndarray,
    weights,
    noise: float,
    total_power: float,
    rng,
    tol: float = 1e-4,
    max_iter: int = 200,
):
    """Sequential per-element search of quantized RIS phases (2^r * N^2 WMMSE calls).

    Element n is scanned over the full phase set while elements after n hold
    random draws (redrawn once per n) and elements before n stay fixed at their
    argmax. Returns the best (theta, W, wsr) encountered anywhere in the search.
    """
    n_total = channels.n_elements
    theta = phase_set[rng.integers(0, len(phase_set), size=n_total)]
    best_wsr = -np.inf
    best_theta = theta.copy()
    best_W = None
    for n in range(n_total):
        if n + 1 < n_total:
            theta[n + 1 :] = phase_set[rng.integers(0, len(phase_set), size=n_total - n - 1)]
        local_best = -np.inf
        local_val = phase_set[0]
        for val in phase_set:
            theta[n] = val
            rows = equivalent_rows(channels, theta, plan, v)
            W = wmmse_precoder(rows, weights, noise, total_power, tol=tol, max_iter=max_iter)
            wsr = evaluate_rows(rows, W, weights, noise).wsr
            if wsr > local_best:
                local_best = wsr
                local_val = val
            if wsr > best_wsr:
                best_wsr = wsr
                best_theta = theta.copy()
                best_W = W
        theta[n] = local_val
    return best_theta, best_W, best_wsr
