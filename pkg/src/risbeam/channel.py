"""Channel synthesis: UPA steering vectors, pathloss, Rician/Rayleigh draws.

Dimension conventions (fixed once for the whole package):
  direct[j]       user-antennas x BS-antennas
  bs_to_ris (G)   RIS-elements  x BS-antennas
  ris_to_user[j]  user-antennas x RIS-elements
All nodes live in a horizontal 2D plane; elevation is broadside (pi/2) and
azimuth is computed from plane geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BROADSIDE = math.pi / 2


@dataclass(frozen=True)
class UpaGeometry:
    """Uniform planar array: width x height elements, spacing in wavelengths."""

    width: int
    height: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("UPA dimensions must be >= 1")
        if self.spacing_ratio <= 0:
            raise ValueError("UPA spacing ratio must be positive")

    @property
    def size(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class RicianParams:
    k1: float  # BS -> RIS
    k2: float  # RIS -> user

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("Rician factors must be >= 0")


@dataclass
class ScenarioGeometry:
    """2D node placement in meters."""

    bs_position: np.ndarray
    ris_position: np.ndarray
    user_positions: list
    zone_center: np.ndarray
    zone_radius: float

    def __post_init__(self):
        self.bs_position = np.asarray(self.bs_position, dtype=float)
        self.ris_position = np.asarray(self.ris_position, dtype=float)
        self.zone_center = np.asarray(self.zone_center, dtype=float)
        self.user_positions = [np.asarray(u, dtype=float) for u in self.user_positions]
        if np.linalg.norm(self.ris_position - self.bs_position) <= 0:
            raise ValueError("BS and RIS positions must differ")
        for u in self.user_positions:
            if np.linalg.norm(u - self.zone_center) > self.zone_radius + 1e-9:
                raise ValueError("user position outside the gathering zone")


@dataclass
class ChannelSet:
    """All channel matrices and the pathloss amplitude gains they carry."""

    direct: list
    bs_to_ris: np.ndarray
    ris_to_user: list
    pathloss_direct: list
    pathloss_reflect_g: float
    pathloss_reflect_r: list

    @property
    def n_users(self) -> int:
        return len(self.direct)

    @property
    def n_elements(self) -> int:
        return self.bs_to_ris.shape[0]

    def scaled(self, factor: float) -> "ChannelSet":
        """Uniformly scale the end-to-end channel amplitude by `factor`.

        Applied to the direct matrices and the RIS->user matrices, so both the
        direct and the cascaded path scale linearly by `factor`.
        """
        return ChannelSet(
            direct=[factor * h for h in self.direct],
            bs_to_ris=self.bs_to_ris.copy(),
            ris_to_user=[factor * h for h in self.ris_to_user],
            pathloss_direct=list(self.pathloss_direct),
            pathloss_reflect_g=self.pathloss_reflect_g,
            pathloss_reflect_r=list(self.pathloss_reflect_r),
        )


def steering_vector(geom: UpaGeometry, azimuth: float, elevation: float) -> np.ndarray:
    """UPA directional vector, flattened horizontal-major: index = m * H + n.

    Entry (m, n) is exp(j*2*pi*(d/lambda)*(m*sin(az)*sin(el) + n*cos(el))),
    m in [0, W), n in [0, H).
    """
    m = np.arange(geom.width)
    n = np.arange(geom.height)
    phase = 2 * np.pi * geom.spacing_ratio * (
        m[:, None] * math.sin(azimuth) * math.sin(elevation)
        + n[None, :] * math.cos(elevation)
    )
    return np.exp(1j * phase).reshape(-1)


def pathloss_db(kind: str, distance: float, f_c_ghz: float) -> float:
    """Pathloss in dB; `kind` is 'reflect' (BS-RIS / RIS-user) or 'direct'."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if f_c_ghz <= 0:
        raise ValueError(f"carrier frequency must be positive, got {f_c_ghz}")
    if kind == "reflect":
        return 32.4 + 21 * math.log10(distance) + 20 * math.log10(f_c_ghz)
    if kind == "direct":
        return 22.4 + 35.3 * math.log10(distance) + 21.3 * math.log10(f_c_ghz)
    raise ValueError(f"unknown pathloss kind {kind!r}")


def amplitude_gain(db: float) -> float:
    """Linear amplitude gain for a pathloss in dB (power scales as 10^(-dB/10))."""
    return 10 ** (-db / 20)


def los_outer_product(rx_geom, rx_angles, tx_geom, tx_angles) -> np.ndarray:
    """Rank-1 LOS component a_rx(angles) * a_tx(angles)^H; every entry unit modulus."""
    a_rx = steering_vector(rx_geom, *rx_angles)
    a_tx = steering_vector(tx_geom, *tx_angles)
    return np.outer(a_rx, a_tx.conj())


def _cn_matrix(shape, rng) -> np.ndarray:
    # circularly-symmetric complex Gaussian, unit variance per entry
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def draw_rician(los: np.ndarray, k: float, pathloss_gain: float, rng) -> np.ndarray:
    """Rician draw: pathloss_gain * (sqrt(k/(k+1)) * los + sqrt(1/(k+1)) * CN(0,1))."""
    if k < 0:
        raise ValueError("Rician factor must be >= 0")
    nlos = _cn_matrix(los.shape, rng)
    return pathloss_gain * (
        math.sqrt(k / (k + 1)) * los + math.sqrt(1 / (k + 1)) * nlos
    )


def draw_rayleigh_direct(rows: int, cols: int, pathloss_gain: float, rng) -> np.ndarray:
    """i.i.d. pathloss_gain * CN(0,1) entries."""
    return pathloss_gain * _cn_matrix((rows, cols), rng)


def _azimuth(src: np.ndarray, dst: np.ndarray) -> float:
    # measured from the global x axis, which is the BS->RIS axis in the
    # default scenario; the convention is internal-only
    d = dst - src
    return math.atan2(d[1], d[0])


def build_channel_set(config, geometry: ScenarioGeometry, rician: RicianParams, rng) -> ChannelSet:
    """Synthesize all channels for one scenario draw.

    Pure function of (config, geometry, rician, rng state). The direct channels
    are drawn first so they are unchanged when only the RIS size varies.
    """
    if len(geometry.user_positions) != config.j_users:
        raise ValueError(
            f"geometry has {len(geometry.user_positions)} users, config expects {config.j_users}"
        )
    bs_geom = UpaGeometry(config.n_t, config.m_t)
    user_geom = UpaGeometry(config.n_r, config.m_r)
    ris_geom = UpaGeometry(config.n_ris, config.n_ris)
    bs = geometry.bs_position
    ris = geometry.ris_position

    pl_direct = []
    direct = []
    for u in geometry.user_positions:
        d = float(np.linalg.norm(u - bs))
        if d <= 0:
            raise ValueError("user coincident with BS")
        gain = amplitude_gain(pathloss_db("direct", d, config.f_c_ghz))
        pl_direct.append(gain)
        direct.append(draw_rayleigh_direct(user_geom.size, bs_geom.size, gain, rng))

    d_bs_ris = float(np.linalg.norm(ris - bs))
    gain_g = amplitude_gain(pathloss_db("reflect", d_bs_ris, config.f_c_ghz))
    az_bs_ris = _azimuth(bs, ris)
    los_g = los_outer_product(
        ris_geom, (_azimuth(ris, bs), BROADSIDE), bs_geom, (az_bs_ris, BROADSIDE)
    )
    bs_to_ris = draw_rician(los_g, rician.k1, gain_g, rng)

    ris_to_user = []
    pl_reflect_r = []
    for u in geometry.user_positions:
        d = float(np.linalg.norm(u - ris))
        if d <= 0:
            raise ValueError("user coincident with RIS")
        gain = amplitude_gain(pathloss_db("reflect", d, config.f_c_ghz))
        pl_reflect_r.append(gain)
        los = los_outer_product(
            user_geom, (_azimuth(u, ris), BROADSIDE), ris_geom, (_azimuth(ris, u), BROADSIDE)
        )
        ris_to_user.append(draw_rician(los, rician.k2, gain, rng))

    return ChannelSet(
        direct=direct,
        bs_to_ris=bs_to_ris,
        ris_to_user=ris_to_user,
        pathloss_direct=pl_direct,
        pathloss_reflect_g=gain_g,
        pathloss_reflect_r=pl_reflect_r,
    )
