"""Config defaults, file parsing, validation, sweep specs."""

import pytest

from switchsim.config import (DEFAULT_SWEEP_VALUES, SWEEP_PARAM_FOR_KIND,
                              ConfigError, ScenarioConfig, SweepSpec,
                              load_config, parse_config_text)


def test_defaults_match_reference_parameters():
    cfg = ScenarioConfig()
    cfg.validate()
    assert cfg.fach_rate_bps == 33000
    assert cfg.dch_rate_bps == 384000
    assert cfg.switch_time_s == 0.250
    assert cfg.cbr_packet_bytes == 1000
    assert cfg.cbr_interval_s == pytest.approx(1 / 3)
    assert cfg.pareto_shape == 1.1
    assert cfg.mean_file_bytes == 30000
    assert cfg.t_on_s == 0.3
    assert cfg.p_off == 0.33
    assert cfg.t_off_s == 5.0
    assert cfg.packet_bytes == 280
    assert cfg.t_l == 1
    assert cfg.backhaul_rate_bps == 5_000_000
    assert cfg.backhaul_delay_s == 0.030
    assert cfg.mean_burst_packets() == pytest.approx(30000 / 280)


def test_parse_config_text_roundtrip():
    text = """
    # comment line
    policy = FSDCH
    n_tcp = 5          # trailing comment
    t_out = 0.75
    cbr_enabled = false
    """
    values = parse_config_text(text)
    assert values == {"policy": "FSDCH", "n_tcp": 5, "t_out": 0.75,
                      "cbr_enabled": False}


def test_parse_rejects_unknown_key_and_bad_value():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config_text("nope = 1")
    with pytest.raises(ConfigError, match="n_tcp"):
        parse_config_text("n_tcp = many")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("just some words")


def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("policy = FS\nseed = 9\n")
    cfg = load_config(str(path), {"seed": "11", "duration_s": "500"})
    assert cfg.policy == "FS"
    assert cfg.seed == 11
    assert cfg.duration_s == 500.0


def test_validation_names_offending_field():
    with pytest.raises(ConfigError, match="n_dch"):
        ScenarioConfig(n_dch=0).validate()
    with pytest.raises(ConfigError, match="policy"):
        ScenarioConfig(policy="BAD").validate()
    with pytest.raises(ConfigError, match="scheduler"):
        ScenarioConfig(scheduler="fifo").validate()
    with pytest.raises(ConfigError, match="p_off"):
        ScenarioConfig(p_off=1.5).validate()
    with pytest.raises(ConfigError, match="pareto_shape"):
        ScenarioConfig(pareto_shape=1.0).validate()
    with pytest.raises(ConfigError, match="w_max"):
        ScenarioConfig(w_max=0).validate()


def test_sweep_spec_validation():
    spec = SweepSpec(param="s", values=(1, 2), policies=("FS",), seeds=(1,))
    spec.validate()
    with pytest.raises(ConfigError, match="param"):
        SweepSpec(param="q").validate()
    with pytest.raises(ConfigError, match="seeds"):
        SweepSpec(param="s", seeds=()).validate()
    with pytest.raises(ConfigError, match="values"):
        SweepSpec(param="s", values=()).validate()
    with pytest.raises(ConfigError, match="policies"):
        SweepSpec(param="s", policies=("NEW",)).validate()


def test_sweep_apply_sets_the_right_fields():
    base = ScenarioConfig()
    spec = SweepSpec(param="both", values=(9,), policies=("QSFS",), seeds=(3,))
    cfg = spec.apply(base, "QSFS", 9, 3)
    assert cfg.t_h == 9 and cfg.s == 9 and cfg.seed == 3 and cfg.policy == "QSFS"
    spec_s = SweepSpec(param="s", values=(9,), policies=("FS",), seeds=(3,))
    cfg = spec_s.apply(base, "FS", 9, 3)
    assert cfg.s == 9 and cfg.t_h == base.t_h


def test_every_kind_has_a_sweep_param():
    from switchsim.policies import KINDS
    assert set(SWEEP_PARAM_FOR_KIND) == set(KINDS)
    assert all(v >= 1 for v in DEFAULT_SWEEP_VALUES)
