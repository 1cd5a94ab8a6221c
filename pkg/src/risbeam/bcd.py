"""Fractional-programming block coordinate descent over (alpha, beta, phases, W).

The log-of-ratio weighted sum-rate is lifted with per-user auxiliaries
(alpha_j, beta_j); the lifted objective is kept in nats internally (its
closed-form alpha update only holds for the natural log), while all reported
rates stay in bits/s/Hz. The RIS phases enter the lifted objective through a
quadratic form in x = conj(theta); `bcd_solve` converts at that boundary.
"""
from __future__ import annotations

import numpy as np

from .metrics import equivalent_rows, evaluate_rows
from .subarray import random_phase_vector, ris_cascade_matrix
from .wmmse import project_power, wmmse_precoder

LN2 = float(np.log(2.0))


def fp_objective(alpha, beta, rows, W, weights, noise) -> float:
    """Lifted WSR surrogate in nats; equals ln-WSR at jointly optimal (alpha, beta)."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    M = rows @ W
    diag = np.diag(M)
    denom = np.sum(np.abs(M) ** 2, axis=1) + noise
    return float(
        np.sum(
            weights * (np.log1p(alpha) - alpha)
            + 2 * np.sqrt(weights * (1 + alpha)) * (beta.conj() * diag).real
            - np.abs(beta) ** 2 * denom
        )
    )


def update_alpha(beta, rows, W, weights) -> np.ndarray:
    """Closed-form alpha maximizer given beta; negative roots clamp to zero."""
    beta = np.asarray(beta, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    diag = np.diag(rows @ W)
    eta = (beta.conj() * diag).real / np.sqrt(weights)
    alpha = (eta**2 + eta * np.sqrt(eta**2 + 4)) / 2
    return np.maximum(alpha, 0.0)


def update_beta(alpha, rows, W, weights, noise) -> np.ndarray:
    """Closed-form beta maximizer given alpha."""
    alpha = np.asarray(alpha, dtype=float)
    weights = np.asarray(weights, dtype=float)
    M = rows @ W
    diag = np.diag(M)
    denom = np.sum(np.abs(M) ** 2, axis=1) + noise
    return np.sqrt(weights * (1 + alpha)) * diag / denom


def refresh_auxiliaries(rows, W, weights, noise):
    """Joint fixed point of the alpha/beta closed forms.

    Alternating the two updates converges to alpha_j = SINR_j with beta at its
    closed form for that alpha; both are available directly, and at this point
    the lifted objective recovers the weighted sum-rate exactly.
    """
    weights = np.asarray(weights, dtype=float)
    M = rows @ W
    p = np.abs(M) ** 2
    sig = np.diag(p)
    interf = np.maximum(p.sum(axis=1) - sig, 0.0)
    alpha = sig / (interf + noise)
    beta = np.sqrt(weights * (1 + alpha)) * np.diag(M) / (sig + interf + noise)
    return alpha, beta


def build_quadratic_form(channels, v, W, alpha, beta, weights, plan):
    """Quadratic form (A, B) for the phase update, in the variable x = conj(theta).

    Minimizing x^H A x - 2 Re(x^H B) over unit-modulus x maximizes the lifted
    objective in the RIS phases. In subarray mode each user only touches its
    own block, so A is block diagonal and the whole RIS is updated in one form.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    n = channels.n_elements
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros(n, dtype=complex)
    for j in range(channels.n_users):
        s, e = plan.block_for_user(j)
        C = ris_cascade_matrix(j, channels, v[j], plan)  # (e - s) x Nt
        b = C @ W  # columns: cascade response to each user's precoder
        d = (v[j].conj() @ channels.direct[j]) @ W  # direct-path scalars
        w_b2 = np.abs(beta[j]) ** 2
        A[s:e, s:e] += w_b2 * (b @ b.conj().T)
        B[s:e] += (
            np.sqrt(weights[j] * (1 + alpha[j])) * beta[j].conj() * b[:, j]
            - w_b2 * (b @ d.conj())
        )
    return A, B


def update_phases(x: np.ndarray, A: np.ndarray, B: np.ndarray, sweeps: int = 1) -> np.ndarray:
    """Element-wise coordinate minimization of x^H A x - 2 Re(x^H B) on |x_n| = 1.

    Each single-element update is the exact unit-modulus minimizer, so the
    quadratic objective never increases. Elements whose coupling term vanishes
    keep their current value.
    """
    x = x.copy()
    n = x.shape[0]
    for _ in range(sweeps):
        for i in range(n):
            c = B[i] - (A[i, :] @ x - A[i, i] * x[i])
            mag = abs(c)
            # subnormal couplings are numerically meaningless and their
            # reciprocal overflows; keep the current phase in that case
            if mag > np.finfo(float).tiny:
                x[i] = c / mag
    return x


def quadratic_value(x, A, B) -> float:
    return float((x.conj() @ A @ x).real - 2 * (x.conj() @ B).real)


def update_precoder_proxlinear(W_bar, W_prev, tau, rows, weights, alpha, beta, total_power):
    """One extrapolated prox-linear step on the precoder, then power projection.

    The smooth part of the (negated) lifted objective is quadratic in each w_j
    with curvature matrix H = sum_i |beta_i|^2 h_i^H h_i, so a gradient step of
    length 1/L with L = 2 ||H|| is an exact majorize-minimize update.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    W_hat = W_bar + tau * (W_bar - W_prev)
    H = (rows.conj().T * (np.abs(beta) ** 2)) @ rows
    L = 2 * float(np.linalg.norm(H, 2))
    lin = rows.conj().T * (np.sqrt(weights * (1 + alpha)) * beta)  # per-user h_j^H terms
    grad = -2 * lin + 2 * (H @ W_hat)
    if L <= 0:
        # all beta vanish, which also zeroes the gradient: nothing to move
        return project_power(W_hat, total_power)
    return project_power(W_hat - grad / L, total_power)


def matched_phase_init(channels, plan, v) -> np.ndarray:
    """Deterministic phase start: align each user's block with its cascade.

    Block p (the partition's block for user p, reused as a tiling in whole
    mode) is set to the unit-modulus projection of the principal left singular
    vector of that user's cascade rows, i.e. the phases that maximize the
    aligned cascade gain toward the paired user before any precoding. This
    start sits near the dedicated-aperture optimum and shortens the BCD
    transient considerably; random restarts cover the cases where it is a poor
    basin.
    """
    n = channels.n_elements
    theta = np.ones(n, dtype=complex)
    # in whole mode there is no partition, so tile the aperture into
    # nearly-equal contiguous per-user segments for the starting point only
    edges = np.linspace(0, n, channels.n_users + 1).astype(int)
    for j in range(channels.n_users):
        s, e = plan.block_for_user(j)
        if plan.mode == "whole":
            s, e = edges[j], edges[j + 1]
        C = ris_cascade_matrix(j, channels, v[j], plan)
        if C.shape[0] != e - s:
            C = C[s:e]
        if e - s == 0:
            continue
        u = np.linalg.svd(C, compute_uv=True)[0][:, 0]
        mag = np.abs(u)
        # theta^T C should align, and x = conj(theta), so theta gets conj(u)'s
        # phases; elements the singular vector ignores stay at 1
        theta[s:e] = np.where(mag > np.finfo(float).tiny, u / np.maximum(mag, 1e-300), 1.0).conj()
    return theta


def solve_precoder_block(
    W, rows, weights, alpha, beta, total_power, max_steps: int = 100, rel_tol: float = 1e-10
):
    """Minimize the precoder block by repeated extrapolated prox-linear steps.

    With (alpha, beta) fixed the negated lifted objective is a convex quadratic
    in W over the power ball, so the Nesterov-extrapolated prox-linear
    iteration (momentum restarting to tau = 0 whenever the subproblem
    objective increases) converges to the exact block minimizer; the loop stops
    once the subproblem objective stalls.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    H = (rows.conj().T * (np.abs(beta) ** 2)) @ rows
    lin = rows.conj().T * (np.sqrt(weights * (1 + alpha)) * beta)

    def objective(M):
        return float((M.conj() * (H @ M)).sum().real - 2 * (lin.conj() * M).sum().real)

    W_prev = W
    t_acc = 1.0
    f_prev = objective(W)
    for _ in range(max_steps):
        t_next = (1 + np.sqrt(1 + 4 * t_acc**2)) / 2
        tau = (t_acc - 1) / t_next
        W_new = update_precoder_proxlinear(
            W, W_prev, tau, rows, weights, alpha, beta, total_power
        )
        f_new = objective(W_new)
        if tau > 0 and f_new > f_prev:
            W_new = update_precoder_proxlinear(
                W, W_prev, 0.0, rows, weights, alpha, beta, total_power
            )
            t_next = 1.0
            f_new = objective(W_new)
        done = abs(f_prev - f_new) <= rel_tol * max(1.0, abs(f_new))
        W_prev, W, t_acc, f_prev = W, W_new, t_next, f_new
        if done:
            break
    return W


def bcd_solve(
    channels,
    plan,
    v,
    weights,
    noise: float,
    total_power: float,
    rng,
    tol: float = 1e-4,
    max_outer: int = 200,
    sweeps: int = 1,
    theta_init=None,
):
    """Alternating closed-form optimization of phases, auxiliaries, and precoder.

    Phases start uniformly random on the unit circle (or from `theta_init`),
    the precoder starts from WMMSE on the induced equivalent channels, and the
    auxiliaries from their closed-form fixed point. Each outer iteration
    updates phases (coordinate sweeps from a Nesterov-extrapolated point,
    falling back to the unextrapolated sweep whenever extrapolation loses on
    the quadratic objective), beta, the precoder block (extrapolated
    prox-linear steps run to block convergence), then refreshes alpha and
    beta. Returns (theta, W, wsr_history) with the history in bits/s/Hz, one
    entry per outer iteration plus the initial point.
    """
    if theta_init is None:
        theta = random_phase_vector(channels.n_elements, rng)
    else:
        theta = np.asarray(theta_init, dtype=complex).copy()
    rows = equivalent_rows(channels, theta, plan, v)
    W = wmmse_precoder(rows, weights, noise, total_power, tol=tol)
    alpha, beta = refresh_auxiliaries(rows, W, weights, noise)
    history = [evaluate_rows(rows, W, weights, noise).wsr]
    best = (history[0], theta.copy(), W.copy())
    x_prev = theta.conj()
    t_acc = 1.0
    for _ in range(max_outer):
        A, B = build_quadratic_form(channels, v, W, alpha, beta, weights, plan)
        x_cur = theta.conj()
        t_next = (1 + np.sqrt(1 + 4 * t_acc**2)) / 2
        tau = (t_acc - 1) / t_next
        x_hat = x_cur + tau * (x_cur - x_prev)
        mag = np.abs(x_hat)
        x_hat = np.where(mag > np.finfo(float).tiny, x_hat / np.maximum(mag, 1e-300), x_cur)
        x = update_phases(x_hat, A, B, sweeps=sweeps)
        if quadratic_value(x, A, B) > quadratic_value(x_cur, A, B):
            # extrapolation overshot: restart the phase momentum sequence
            x = update_phases(x_cur, A, B, sweeps=sweeps)
            t_next = 1.0
        x_prev, t_acc = x_cur, t_next
        theta = x.conj()
        rows = equivalent_rows(channels, theta, plan, v)
        beta = update_beta(alpha, rows, W, weights, noise)
        W = solve_precoder_block(W, rows, weights, alpha, beta, total_power)
        wsr = evaluate_rows(rows, W, weights, noise).wsr

        alpha, beta = refresh_auxiliaries(rows, W, weights, noise)
        history.append(wsr)
        if wsr > best[0]:
            best = (wsr, theta.copy(), W.copy())
        if abs(history[-1] - history[-2]) < tol:
            break
    return best[1], best[2], history
