import json

import numpy as np
import pytest

from coopmac.config import (
    ConfigError,
    build_channel,
    build_engine,
    build_policy,
    build_quantizer,
    config_hash,
    load_overrides,
    merge,
    validate,
)
from coopmac.expectation import MonteCarlo, Quadrature
from coopmac.export import format_value, provenance, to_jsonable, write_csv, write_json


BASE = {"channel": {"num_tx": 2, "num_rx": 1, "power": [1.0, 2.0]}}


@pytest.mark.parametrize("cfg, pointer", [
    ({"channel": {"num_tx": 2, "num_rx": 1, "power": [-1.0, 1.0]}}, "/channel/power/0"),
    ({"channel": {"num_tx": 2, "num_rx": 1, "colour": 1}}, "/channel/colour"),
    ({"bogus": {}}, "/bogus"),
    ({"engine": {"kind": "mc", "samples": 1}}, "/engine/samples"),
    ({"simulate": {"rates": [0.1], "n_list": [8], "trials": 10}}, "/simulate/trials"),
    ({"channel": {"num_tx": 2, "num_rx": 1, "power": 1, "power_db": 0}}, "/channel/power_db"),
    ({"csit": [{"kind": "threshold", "entry": [0], "cuts": [1]}]}, "/csit/0/entry"),
])
def test_validation_pointers(cfg, pointer):
    with pytest.raises(ConfigError) as info:
        validate(cfg)
    assert info.value.pointer == pointer


def test_merge_and_overrides():
    merged = merge(BASE, {"channel": {"power": [3.0, 3.0]}, "engine": {"kind": "quad"}})
    assert merged["channel"] == {"num_tx": 2, "num_rx": 1, "power": [3.0, 3.0]}
    assert BASE["channel"]["power"] == [1.0, 2.0]
    doc = {"provenance": {}, "config": {"a": 1}, "result": {}}
    assert load_overrides(doc) == {"a": 1}
    assert load_overrides({"a": 2}) == {"a": 2}


def test_config_hash_key_order():
    a = {"x": 1, "y": [1, 2]}
    b = json.loads('{"y": [1, 2], "x": 1}')
    assert config_hash(a) == config_hash(b) and len(config_hash(a)) == 64


def test_build_objects():
    cfg = {"channel": {"num_tx": 2, "num_rx": 1, "power_db": 20, "noise_db": 0},
           "csit": [{"kind": "threshold", "entry": [0, 0], "cuts": [1.0]}, {"kind": "none"}],
           "policy": {"power": [[50, 120], [100]]}}
    validate(cfg)
    spec = build_channel(cfg)
    assert spec.power_budget.tolist() == pytest.approx([100.0, 100.0])
    quant = build_quantizer(cfg, 2)
    assert quant.sizes == (2, 1)
    pol = build_policy(cfg, spec, quant)
    assert pol.power[0].tolist() == [50, 120] and pol.corr[1].tolist() == [0.0]
    assert build_engine({}) == Quadrature()
    assert build_engine({"engine": {"kind": "mc", "seed": 3}}) == MonteCarlo(200_000, 3)


def test_build_errors():
    with pytest.raises(ConfigError, match="/channel/power"):
        build_channel({"channel": {"num_tx": 2, "num_rx": 1, "power": [1, 2, 3]}})
    with pytest.raises(ConfigError, match="/csit/0/entry"):
        build_quantizer({"channel": {"num_tx": 2, "num_rx": 1},
                         "csit": [{"kind": "threshold", "entry": [1, 0], "cuts": [1]},
                                  {"kind": "none"}]}, 2)
    with pytest.raises(ConfigError, match="/channel/fading/matrix"):
        build_channel({"channel": {"num_tx": 2, "num_rx": 1, "power": 1,
                                   "fading": {"kind": "deterministic", "matrix": [[1]]}}})


def test_format_value():
    assert format_value(0.0) == "0"
    assert format_value(1 / 3) == "0.333333"
    assert format_value(np.int64(7)) == "7"
    assert format_value(True) == "true"
    assert format_value("R0-R1") == "R0-R1"
    assert to_jsonable({"a": np.arange(2), "b": np.float64(np.inf)}) == {"a": [0, 1], "b": None}


def test_writers(tmp_path):
    prov = provenance("abc", [1], {"kind": "quad", "nodes": 4})
    path = write_csv(str(tmp_path / "x.csv"), ["a", "b"], [[1, 0.5]], prov)
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# config_sha256:")
    assert lines[-2:] == ["a,b", "1,0.5"]
    path = write_json(str(tmp_path / "sub" / "x.json"), {"v": 1.0}, prov, {"c": 1})
    doc = json.load(open(path))
    assert doc["result"] == {"v": 1.0} and doc["config"] == {"c": 1}
    assert doc["provenance"]["tool"] == "coopmac"
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "y.csv"), ["a"], [], prov)
