"""Tests for scenario loading and validation."""

import json

import pytest

from junctionq import ConfigurationError, ModelSetting, Scaling, ScenarioConfig, load_config
from junctionq.config import STATE_CAP_ENV, bundled_config_path, state_cap_from_env


def bundled_data(name):
    return json.loads(bundled_config_path(name).read_text(encoding="utf-8"))


def write_config(tmp_path, data):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_load_bundled_case_study():
    config = load_config("case_study")

    assert len(config.junction.routes) == 4
    assert len(config.junction.train_types) == 4
    assert len(config.junction.headways) == 40
    assert config.model.setting is ModelSetting.PH_PH
    assert config.model.waiting_slots == 5
    assert config.model.choice_rate == 600
    assert config.model.arrival_cv == 0.8
    assert config.traffic.time_horizon == 60


def test_load_from_path(tmp_path):
    path = write_config(tmp_path, bundled_data("validation"))
    assert load_config(path) == load_config("validation")


def test_missing_headway_is_named(tmp_path):
    data = bundled_data("case_study")
    data["junction"]["headways"] = [
        h
        for h in data["junction"]["headways"]
        if (h["leader"], h["follower"]) != ("r2/rf", "r1/s")
    ]
    with pytest.raises(ConfigurationError, match="r2/rf -> r1/s"):
        load_config(write_config(tmp_path, data))


def test_share_out_of_range(tmp_path):
    data = bundled_data("case_study")
    data["traffic"]["p_main"] = 1.3
    with pytest.raises(ConfigurationError, match="traffic.p_main"):
        load_config(write_config(tmp_path, data))


def test_phase_type_model_takes_no_scaling(tmp_path):
    data = bundled_data("case_study")
    data["model"]["scaling"] = "hertel"
    with pytest.raises(ConfigurationError, match="model"):
        load_config(write_config(tmp_path, data))


def test_unknown_route_in_line(tmp_path):
    data = bundled_data("case_study")
    data["traffic"]["lines"][0]["routes"].append("r9")
    with pytest.raises(ConfigurationError, match="r9"):
        load_config(write_config(tmp_path, data))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.json")


def test_canonical_round_trip():
    """The canonical dump re-loads to an equal configuration with the same hash."""
    config = load_config("case_study")
    reloaded = ScenarioConfig.model_validate_json(config.canonical_json())

    assert reloaded == config
    assert reloaded.config_hash() == config.config_hash()
    assert len(config.config_hash()) == 16


def test_overrides_change_the_hash():
    config = load_config("validation")
    changed = config.with_overrides(scaling=Scaling.KINGMAN, p_main=0.3, seed=9)

    assert changed.model.scaling is Scaling.KINGMAN
    assert changed.traffic.p_main == 0.3
    assert changed.simulation.seed == 9
    assert changed.config_hash() != config.config_hash()


def test_overrides_are_validated():
    with pytest.raises(ConfigurationError):
        load_config("case_study").with_overrides(scaling=Scaling.HERTEL)


def test_state_cap_from_environment(monkeypatch):
    monkeypatch.setenv(STATE_CAP_ENV, "1000")
    assert state_cap_from_env() == 1000

    monkeypatch.setenv(STATE_CAP_ENV, "many")
    with pytest.raises(ConfigurationError):
        state_cap_from_env()

    monkeypatch.delenv(STATE_CAP_ENV)
    assert state_cap_from_env() == 12_000_000
