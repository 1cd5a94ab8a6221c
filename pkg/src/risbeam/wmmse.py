"""Iterative WMMSE precoder for fixed per-user equivalent row channels.

Each outer iteration alternates MMSE receive scalars, MSE weights, and a
closed-form precoder update whose dual variable mu is found by root search so
that the total power constraint binds (or mu = 0 if already feasible).
"""
from __future__ import annotations

import numpy as np

_MSE_FLOOR = 1e-15


def project_power(W: np.ndarray, total_power: float) -> np.ndarray:
    """Scale all columns down together if total power exceeds the budget."""
    if total_power <= 0:
        raise ValueError("total_power must be positive")
    used = float(np.sum(np.abs(W) ** 2))
    if used <= total_power:
        return W
    return W * np.sqrt(total_power / used)


def _wsr_bits(rows: np.ndarray, W: np.ndarray, weights: np.ndarray, noise: float) -> float:
    M = rows @ W  # M[j, i] = h_j w_i
    p = np.abs(M) ** 2
    sig = np.diag(p)
    interf = p.sum(axis=1) - sig
    return float(np.sum(weights * np.log2(1.0 + sig / (interf + noise))))


def mrt_precoder(rows: np.ndarray, total_power: float) -> np.ndarray:
    """Matched-filter columns with equal power split, total power met with equality."""
    J = rows.shape[0]
    W = rows.conj().T.astype(complex)
    norms = np.linalg.norm(W, axis=0)
    active = norms > 0
    W[:, active] /= norms[active]
    n_active = int(active.sum())
    if n_active == 0:
        return np.zeros_like(W)
    W[:, active] *= np.sqrt(total_power / n_active)
    return W


def wmmse_precoder(
    rows: np.ndarray,
    weights: np.ndarray,
    noise: float,
    total_power: float,
    tol: float = 1e-4,
    max_iter: int = 200,
    W_init: np.ndarray | None = None,
) -> np.ndarray:
    """WSR-maximizing precoder (columns w_j), sum ||w_j||^2 <= total_power.

    `rows` is J x Nt with row j the equivalent channel of user j. The WSR is
    non-decreasing across iterations; stops when the gain drops below `tol`
    bits/s/Hz. `W_init` warm-starts the alternation (it is projected onto the
    power budget first); the default start is the MRT precoder.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    weights = np.asarray(weights, dtype=float)
    if noise <= 0:
        raise ValueError("noise power must be positive")
    if total_power <= 0:
        raise ValueError("total_power must be positive")
    J, nt = rows.shape
    if not np.any(np.abs(rows) > 0):
        return np.zeros((nt, J), dtype=complex)

    if W_init is not None and np.any(np.abs(W_init) > 0):
        W = project_power(np.asarray(W_init, dtype=complex), total_power)
    else:
        W = mrt_precoder(rows, total_power)
    wsr = _wsr_bits(rows, W, weights, noise)
    for _ in range(max_iter):
        M = rows @ W
        p = np.abs(M) ** 2
        denom = p.sum(axis=1) + noise
        u = np.diag(M) / denom
        mse = np.maximum(1.0 - (u.conj() * np.diag(M)).real, _MSE_FLOOR)
        lam = weights / mse

        scale = lam * np.abs(u) ** 2
        A = (rows.conj().T * scale) @ rows
        B = rows.conj().T * (lam * u)  # columns lam_j u_j h_j^H

        evals, Q = np.linalg.eigh(A)
        evals = np.maximum(evals, 0.0)
        C = Q.conj().T @ B
        c2 = np.abs(C) ** 2

        # mu = 0 is represented by a tiny positive value so zero eigenvalues
        # with zero coefficient do not produce 0/0
        mu_floor = 1e-18 * max(float(evals[-1]), 1.0)
        # sqrt(sum c^2 / P) - lambda_max lower-bounds the root; used power is
        # convex and decreasing in mu, so Newton from the left of the root
        # converges monotonically (and quadratically)
        mu = max(mu_floor, float(np.sqrt(c2.sum() / total_power)) - float(evals[-1]))
        for _ in range(200):
            d = evals[:, None] + mu
            r = c2 / d**2
            excess = float(r.sum()) - total_power
            if excess <= 0:
                break
            slope = -2.0 * float((r / d).sum())
            step = -excess / slope
            mu += step
            if step <= 1e-15 * mu:
                break
        W = Q @ (C / (evals[:, None] + mu))

        new_wsr = _wsr_bits(rows, W, weights, noise)
        if new_wsr - wsr < tol:
            wsr = new_wsr
            break
        wsr = new_wsr
    # WSR is strictly increasing under a uniform scale-up, so the power
    # constraint binds at the optimum: normalize to equality
    used = float(np.sum(np.abs(W) ** 2))
    if used > 0:
        W = W * np.sqrt(total_power / used)
    return W
