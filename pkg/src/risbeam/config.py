"""Experiment configuration: system dimensions, quantization bits, power accounting."""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields

import yaml

MODES = ("whole", "subarray")
ALGORITHMS = ("wmmse_ls", "bcd")
POWER_MODES = ("normalized_snr", "physical_dbm")
WEIGHT_RULES = ("uniform", "inverse_pathloss")


class ConfigError(ValueError):
    """Raised when a configuration field is missing, unknown, or invalid."""


@dataclass
class SystemConfig:
    # BS and per-user UPA dimensions (horizontal x vertical)
    n_t: int = 2
    m_t: int = 2
    n_r: int = 2
    m_r: int = 2
    # RIS is an n_ris x n_ris square array
    n_ris: int = 10
    j_users: int = 4
    # quantization: RIS phase bits, user receive grid bits (azimuth, elevation)
    r_bits: int = 1
    q1_bits: int = 2
    q2_bits: int = 1
    mode: str = "subarray"
    algorithm: str = "bcd"
    power_mode: str = "normalized_snr"
    snr_db: float | None = 5.0
    tx_power_dbm: float | None = None
    k1: float = 10.0
    k2: float = 10.0
    f_c_ghz: float = 100.0
    bandwidth_hz: float = 1e10
    noise_psd_dbm_hz: float = -220.0
    weights_rule: str = "uniform"
    seed_base: int = 0
    trials: int = 10
    tol: float = 1e-4
    max_iter: int = 200

    @property
    def n_elements(self) -> int:
        return self.n_ris * self.n_ris

    @property
    def bs_antennas(self) -> int:
        return self.n_t * self.m_t

    @property
    def user_antennas(self) -> int:
        return self.n_r * self.m_r

    def validate(self) -> None:
        for name in ("n_t", "m_t", "n_r", "m_r", "n_ris", "j_users", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"field '{name}' must be a positive integer, got {v!r}")
        for name in ("r_bits", "q1_bits", "q2_bits"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"field '{name}' must be a positive integer, got {v!r}")
        if self.mode not in MODES:
            raise ConfigError(f"field 'mode' must be one of {MODES}, got {self.mode!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"field 'algorithm' must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.power_mode not in POWER_MODES:
            raise ConfigError(
                f"field 'power_mode' must be one of {POWER_MODES}, got {self.power_mode!r}"
            )
        if self.weights_rule not in WEIGHT_RULES:
            raise ConfigError(
                f"field 'weights_rule' must be one of {WEIGHT_RULES}, got {self.weights_rule!r}"
            )
        if self.mode == "subarray" and self.n_elements % self.j_users != 0:
            raise ConfigError(
                f"subarray mode requires n_ris^2 divisible by j_users: "
                f"{self.n_elements} mod {self.j_users} != 0"
            )
        if self.power_mode == "normalized_snr":
            if self.snr_db is None:
                raise ConfigError("field 'snr_db' must be set in normalized_snr mode")
            if self.tx_power_dbm is not None:
                raise ConfigError("field 'tx_power_dbm' must be null in normalized_snr mode")
        else:
            if self.tx_power_dbm is None:
                raise ConfigError("field 'tx_power_dbm' must be set in physical_dbm mode")
            if self.snr_db is not None:
                raise ConfigError("field 'snr_db' must be null in physical_dbm mode")
        if self.k1 < 0 or self.k2 < 0:
            raise ConfigError("Rician factors 'k1'/'k2' must be >= 0")
        if self.f_c_ghz <= 0:
            raise ConfigError("field 'f_c_ghz' must be positive")
        if self.bandwidth_hz <= 0:
            raise ConfigError("field 'bandwidth_hz' must be positive")
        if self.tol <= 0:
            raise ConfigError("field 'tol' must be positive")
        if self.max_iter < 1:
            raise ConfigError("field 'max_iter' must be >= 1")
        if self.seed_base < 0:
            raise ConfigError("field 'seed_base' must be >= 0")


def load_config(path) -> SystemConfig:
    """Parse a YAML config file; every SystemConfig field must be present exactly once."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    known = {f.name for f in fields(SystemConfig)}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config field(s): {sorted(extra)}")
    missing = known - set(raw)
    if missing:
        raise ConfigError(f"missing config field(s): {sorted(missing)}")
    cfg = SystemConfig(**raw)
    cfg.validate()
    return cfg


def write_config(cfg: SystemConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(asdict(cfg), fh, sort_keys=True)


def config_hash(cfg: SystemConfig) -> str:
    canonical = yaml.safe_dump(asdict(cfg), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()
