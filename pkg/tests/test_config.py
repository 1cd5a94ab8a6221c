from dataclasses import asdict, replace

import pytest
import yaml

from risbeam.config import (
    ConfigError,
    SystemConfig,
    config_hash,
    load_config,
    write_config,
)


def test_defaults_validate():
    SystemConfig().validate()


def test_derived_dimensions():
    cfg = SystemConfig()
    assert cfg.n_elements == 100
    assert cfg.bs_antennas == 4
    assert cfg.user_antennas == 4


def test_subarray_divisibility_rejected():
    cfg = SystemConfig(j_users=3)  # 100 not divisible by 3
    with pytest.raises(ConfigError, match="divisible"):
        cfg.validate()


def test_whole_mode_ignores_divisibility():
    replace(SystemConfig(j_users=3), mode="whole").validate()


def test_power_mode_field_coupling():
    with pytest.raises(ConfigError, match="snr_db"):
        replace(SystemConfig(), snr_db=None).validate()
    with pytest.raises(ConfigError, match="tx_power_dbm"):
        replace(SystemConfig(), tx_power_dbm=10.0).validate()
    replace(SystemConfig(), power_mode="physical_dbm", snr_db=None, tx_power_dbm=20.0).validate()
    with pytest.raises(ConfigError, match="snr_db"):
        replace(SystemConfig(), power_mode="physical_dbm", tx_power_dbm=20.0).validate()


@pytest.mark.parametrize(
    "field,value",
    [
        ("n_ris", 0),
        ("j_users", -1),
        ("r_bits", 0),
        ("mode", "half"),
        ("algorithm", "sgd"),
        ("weights_rule", "equal"),
        ("k1", -1.0),
        ("f_c_ghz", 0.0),
        ("bandwidth_hz", -1.0),
        ("tol", 0.0),
        ("max_iter", 0),
        ("seed_base", -3),
        ("trials", 0),
    ],
)
def test_invalid_field_named_in_error(field, value):
    cfg = replace(SystemConfig(), **{field: value})
    with pytest.raises(ConfigError):
        cfg.validate()


def test_roundtrip(tmp_path):
    cfg = SystemConfig(n_ris=6, j_users=2, snr_db=0.0, trials=3)
    path = tmp_path / "cfg.yaml"
    write_config(cfg, path)
    assert load_config(path) == cfg


def test_load_rejects_extra_field(tmp_path):
    cfg = SystemConfig()
    path = tmp_path / "cfg.yaml"
    write_config(cfg, path)
    raw = yaml.safe_load(path.read_text())
    raw["typo_field"] = 1
    path.write_text(yaml.safe_dump(raw))
    with pytest.raises(ConfigError, match="typo_field"):
        load_config(path)


def test_load_rejects_missing_field(tmp_path):
    cfg = SystemConfig()
    path = tmp_path / "cfg.yaml"
    write_config(cfg, path)
    raw = yaml.safe_load(path.read_text())
    del raw["n_ris"]
    path.write_text(yaml.safe_dump(raw))
    with pytest.raises(ConfigError, match="n_ris"):
        load_config(path)


def test_load_rejects_non_mapping(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_hash_stable_and_sensitive():
    a = SystemConfig()
    b = SystemConfig()
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(replace(a, snr_db=6.0))


def test_asdict_covers_all_fields(tmp_path):
    # the YAML form is the canonical serialization: every field appears
    cfg = SystemConfig()
    path = tmp_path / "cfg.yaml"
    write_config(cfg, path)
    raw = yaml.safe_load(path.read_text())
    assert raw == asdict(cfg)
