import json
import math

import numpy as np
import pytest

from wptfocus.config import ENV_SCENARIO, load_scenario, scenario_from_dict, scenario_to_dict
from wptfocus.errors import ConfigError
from wptfocus.geometry import hallway_3p8


def test_preset_fallback(monkeypatch):
    monkeypatch.delenv(ENV_SCENARIO, raising=False)
    assert load_scenario().name == "hallway-3p8"
    assert load_scenario(preset="free-space-3p8").reflectors == ()
    with pytest.raises(ConfigError):
        load_scenario(preset="nope")


def test_env_fallback(tmp_path, monkeypatch):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"tx_power_w": 1000.0}))
    monkeypatch.setenv(ENV_SCENARIO, str(p))
    assert load_scenario().tx_power == 1000.0


def test_missing_and_malformed(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_SCENARIO, raising=False)
    with pytest.raises(ConfigError):
        load_scenario(str(tmp_path / "none.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_scenario(str(bad))
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_scenario(str(bad))


@pytest.mark.parametrize("doc", [
    {"unknown_key": 1},
    {"frequency_hz": -1},
    {"array": {"nx": 0, "ny": 2}},
    {"reflectors": [{"index": 1, "anchor_m": [0, 0, 0], "normal": [0, 0, 1]}]},
    {"array": {"nx": 2, "ny": 2, "spacing_m": 0.1, "spacing_wavelengths": 0.5}},
    {"reflectors": [{"index": 2, "anchor_m": [0, 0, 0], "normal": [0, 0, 0]}]},
])
def test_rejects_invalid(doc):
    with pytest.raises(ConfigError):
        scenario_from_dict(doc)


def test_round_trip():
    sc = hallway_3p8()
    doc = scenario_to_dict(sc)
    json.dumps(doc)  # serializable, inf encoded as null
    back = scenario_from_dict(doc)
    np.testing.assert_allclose(back.antenna_positions(), sc.antenna_positions())
    assert back.reflector(4).half_widths[1] == math.inf
    assert [r.polarization for r in back.reflectors] == [r.polarization for r in sc.reflectors]
    assert back.frequency == sc.frequency and back.tx_power == sc.tx_power


def test_partial_array_override():
    sc = scenario_from_dict({"array": {"nx": 4, "ny": 1}, "device_m": [3, 0, 1.5]})
    assert sc.num_antennas == 4
    assert sc.array.spacing_in_wavelengths and sc.array.spacing == 0.75
