"""Dynamic RIS subarray partition and effective/equivalent channel assembly.

In subarray mode the RIS is split into P = J contiguous equal blocks and user j
is paired with block j; user j's channel only sees its own block. In whole mode
every user sees the full RIS.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet


@dataclass(frozen=True)
class PartitionPlan:
    mode: str  # "whole" or "subarray"
    n_elements: int
    blocks: tuple  # (start, stop) half-open index ranges, one per subarray

    def block_for_user(self, j: int) -> tuple:
        if self.mode == "whole":
            return (0, self.n_elements)
        return self.blocks[j]

    @property
    def n_subarrays(self) -> int:
        return len(self.blocks)


def make_partition(n_elements: int, n_users: int, mode: str) -> PartitionPlan:
    """Partition [0, n_elements) into one block (whole) or n_users equal blocks."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    if mode == "whole":
        return PartitionPlan(mode="whole", n_elements=n_elements, blocks=((0, n_elements),))
    if mode == "subarray":
        if n_elements % n_users != 0:
            raise ValueError(
                f"subarray mode needs n_elements divisible by users: "
                f"{n_elements} mod {n_users} != 0"
            )
        size = n_elements // n_users
        blocks = tuple((p * size, (p + 1) * size) for p in range(n_users))
        return PartitionPlan(mode="subarray", n_elements=n_elements, blocks=blocks)
    raise ValueError(f"unknown partition mode {mode!r}")


def random_phase_vector(n_elements: int, rng) -> np.ndarray:
    """Uniform random unit-modulus phases."""
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, n_elements))


def effective_channel(j: int, channels: ChannelSet, theta: np.ndarray, plan: PartitionPlan) -> np.ndarray:
    """H_j = H_d,j + H_r,j diag(theta) G restricted to user j's active block."""
    s, e = plan.block_for_user(j)
    g = channels.bs_to_ris[s:e, :]
    h_r = channels.ris_to_user[j][:, s:e]
    return channels.direct[j] + h_r @ (theta[s:e, None] * g)


def equivalent_row_channel(j, channels, theta, plan, v_j) -> np.ndarray:
    """Row channel v_j^H H_j seen by the BS after user j's receive combining."""
    return v_j.conj() @ effective_channel(j, channels, theta, plan)


def ris_cascade_matrix(j, channels, v_j, plan) -> np.ndarray:
    """Cascade C_j with v_j absorbed: diag(v_j^H H_r,j) G on the active block.

    Linearizes the equivalent channel in theta:
        v_j^H H_j = v_j^H H_d,j + theta_active^T C_j
    """
    s, e = plan.block_for_user(j)
    row = v_j.conj() @ channels.ris_to_user[j][:, s:e]
    return row[:, None] * channels.bs_to_ris[s:e, :]
