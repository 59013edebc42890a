import json

import numpy as np
import pandas as pd
import pytest

from platoon.intel.auction import MonotonicNet
from platoon.intel.checkpoint import (
    artifact_meta,
    dumps_json,
    load_checkpoint,
    load_config,
    read_json,
    read_metrics,
    save_checkpoint,
    write_json,
    write_metrics,
)
from platoon.intel.commnet import CommNetPolicy
from platoon.intel.config import CheckpointError, CommNetConfig, ConfigError
from platoon.intel.utils import make_rng

# ----------------------------------------------------------
#  JSON
# ----------------------------------------------------------


def test_dumps_json_handles_numpy():
    text = dumps_json(
        {"a": np.arange(3), "b": np.float64(0.5), "c": np.int64(4), "d": np.bool_(True),
         "e": (1, 2)}
    )
    assert text.endswith("}\n")
    assert '\n  "a": [' in text
    assert json.loads(text) == {"a": [0, 1, 2], "b": 0.5, "c": 4, "d": True, "e": [1, 2]}


def test_dumps_json_floats_round_trip():
    values = [0.1, 1 / 3, 2.0**-40, 12345.678901234567]
    assert json.loads(dumps_json(values)) == values


def test_dumps_json_rejects_objects():
    with pytest.raises(TypeError, match="object"):
        dumps_json({"x": object()})


def test_write_json_to_stdout(capsys):
    write_json("-", {"revenue": 0.25})
    assert json.loads(capsys.readouterr().out) == {"revenue": 0.25}
    write_json(None, [1])
    assert capsys.readouterr().out == "[\n  1\n]\n"


def test_write_and_read_json(tmp_path):
    path = tmp_path / "report.json"
    write_json(path, {"x": [1.5, 2.5]})
    assert read_json(path) == {"x": [1.5, 2.5]}


def test_read_json_errors(tmp_path):
    with pytest.raises(CheckpointError, match="cannot read"):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(CheckpointError, match="invalid JSON") as info:
        read_json(bad)
    assert info.value.path == bad


def test_artifact_meta():
    meta = artifact_meta({"N": 2}, 7)
    assert meta["tool"] == "platoon_intel"
    assert meta["config"] == {"N": 2}
    assert meta["seed"] == 7
    assert "version" in meta


# ----------------------------------------------------------
#  Metrics CSV
# ----------------------------------------------------------


def test_metrics_round_trip(tmp_path):
    path = tmp_path / "train.csv"
    frame = pd.DataFrame({"iteration": [0, 1], "loss": [-0.25, -0.3]})
    write_metrics(path, frame, artifact_meta({"lr": 0.01}, 3))

    lines = path.read_text().splitlines()
    assert lines[0] == "# tool=platoon_intel"
    assert '# config={"lr":0.01}' in lines
    assert "# seed=3" in lines
    assert lines[4] == "iteration,loss"

    back = read_metrics(path)
    pd.testing.assert_frame_equal(back, frame)


def test_metrics_header_without_rows(tmp_path):
    path = tmp_path / "empty.csv"
    write_metrics(path, pd.DataFrame(columns=["episode", "return", "loss"]), {"seed": 0})
    assert path.read_text() == "# seed=0\nepisode,return,loss\n"


# ----------------------------------------------------------
#  Configuration files
# ----------------------------------------------------------


def test_load_config_yaml_and_json(tmp_path):
    yml = tmp_path / "auction.yaml"
    yml.write_text("N: 3\nlr: 0.01\ndist:\n  - kind: uniform\n")
    assert load_config(yml) == {"N": 3, "lr": 0.01, "dist": [{"kind": "uniform"}]}

    js = tmp_path / "env.json"
    js.write_text(json.dumps({"kind": "coverage", "W": 4}))
    assert load_config(js) == {"kind": "coverage", "W": 4}


def test_load_config_empty(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_config(empty) == {}
    assert load_config(None) == {}


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        load_config(tmp_path / "missing.yaml")

    listed = tmp_path / "list.yaml"
    listed.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(listed)

    broken = tmp_path / "broken.yaml"
    broken.write_text("a: [1, 2\n")
    with pytest.raises(ConfigError, match="Cannot parse"):
        load_config(broken)


# ----------------------------------------------------------
#  Checkpoints
# ----------------------------------------------------------


def test_auction_checkpoint_round_trip(tmp_path):
    net = MonotonicNet.initialize(3, 2, 4, shared=False, rng=make_rng(1))
    path = tmp_path / "net.json"
    doc = save_checkpoint(path, net, config={"N": 3}, seed=5)
    assert doc["meta"]["seed"] == 5
    assert read_json(path)["meta"]["config"] == {"N": 3}

    back = load_checkpoint(path)
    assert isinstance(back, MonotonicNet)
    assert not back.shared
    for name in ("alpha", "beta"):
        assert np.array_equal(back.store[name], net.store[name])


def test_commnet_checkpoint_round_trip(tmp_path, rng):
    policy = CommNetPolicy.initialize(2, 3, 4, CommNetConfig(hidden=3, layers=1), make_rng(2))
    path = tmp_path / "policy.json"
    save_checkpoint(path, policy, seed=1)

    back = load_checkpoint(path)
    assert isinstance(back, CommNetPolicy)
    obs = rng.standard_normal((2, 3))
    assert np.array_equal(back.forward(obs), policy.forward(obs))


def test_save_checkpoint_rejects_other_models(tmp_path):
    with pytest.raises(TypeError):
        save_checkpoint(tmp_path / "x.json", object())


def test_load_checkpoint_kind_errors(tmp_path):
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"version": 1, "kind": "lstm"}))
    with pytest.raises(CheckpointError, match="unknown checkpoint kind 'lstm'"):
        load_checkpoint(unknown)

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"version": 1}))
    with pytest.raises(CheckpointError, match="missing 'kind'"):
        load_checkpoint(missing)


def test_load_checkpoint_rejects_non_finite(tmp_path):
    path = tmp_path / "nan.json"
    path.write_text(
        '{"version": 1, "kind": "myerson", "shared": true, "N": 2, "K": 1, "J": 1,'
        ' "alpha": [[NaN]], "beta": [[0.0]]}'
    )
    with pytest.raises(CheckpointError, match="Non-finite"):
        load_checkpoint(path)
