import json

import numpy as np
import pytest

from corrfdd import cli
from corrfdd.signals import MeasurementMatrix, write_csv

FAST = ["--seed", "3"]


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run("simulate", "--out", root / "nom", "--n-sensors", 3, "--n-samples", 3000, "--seed", 1) == 0
    assert run("simulate", "--out", root / "test", "--n-sensors", 3, "--n-samples", 3000, "--seed", 2,
               "--fault", "c3:1500:2800") == 0
    assert run("train", root / "nom" / "data.csv", "--out", root / "bundle", *FAST) == 0
    return root


def test_simulate_outputs(work):
    labels = json.loads((work / "test" / "labels.json").read_text())
    assert labels == {"labels": [{"sensor": "c3", "start": 1500, "end": 2800, "kind": "disconnect_flatline"}]}
    assert (work / "nom" / "data.csv").read_text().startswith("timestamp,c1,c2,c3\n")


def test_manifest(work):
    man = json.loads((work / "bundle" / "manifest.json").read_text())
    assert man["pairs"] == [["c1", "c2"], ["c1", "c3"], ["c2", "c3"]]
    assert man["seed"] == 3 and man["config"]["seed"] == 3 and man["config"]["k"] == 100
    assert len(man["models"]) == 3
    pm = json.loads((work / "bundle" / man["models"][0]).read_text())
    assert pm["model"]["type"] == "rbm" and pm["model"]["n_visible"] == 10


def test_retrain_byte_identical(work, tmp_path):
    assert run("train", work / "nom" / "data.csv", "--out", tmp_path, *FAST) == 0
    for f in (work / "bundle").iterdir():
        assert (tmp_path / f.name).read_bytes() == f.read_bytes(), f.name


def test_monitor_nominal_exit_zero(work, tmp_path):
    assert run("monitor", work / "nom" / "data.csv", work / "bundle", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "diagnosis.json").read_text())["diagnoses"] == []
    assert len(list(tmp_path.glob("residuals_*.csv"))) == 3


def test_monitor_fault_exit_three_and_evaluate(work, tmp_path, capsys):
    out = tmp_path / "mon"
    assert run("monitor", work / "test" / "data.csv", work / "bundle", "--out", out) == 3
    diag = json.loads((out / "diagnosis.json").read_text())
    assert diag["conflicts"] == [["c1", "c3"], ["c2", "c3"]]
    assert diag["diagnoses"] == [["c3"], ["c1", "c2"]]
    assert diag["max_cardinality"] == 2
    capsys.readouterr()
    assert run("evaluate", out, "--labels", work / "test" / "labels.json", "--data", work / "test" / "data.csv") == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) == {"tp", "fp", "fn", "precision", "recall"}
    assert rep["recall"] > 0.5


def test_monitor_interval_mode(work, tmp_path):
    code = run("monitor", work / "test" / "data.csv", work / "bundle", "--out", tmp_path,
               "--interval", 20.0, 25.0, "--max-cardinality", 1)
    diag = json.loads((tmp_path / "diagnosis.json").read_text())
    assert diag["mode"] == "interval" and diag["time"] == [20.0, 25.0]
    assert code == 3 and diag["diagnoses"] == [["c3"]]


def test_uncorrelated_noise_exit_two(tmp_path):
    g = np.random.default_rng(0)
    write_csv(MeasurementMatrix(["a", "b"], np.arange(2000.0), g.normal(size=(2, 2000))), tmp_path / "n.csv")
    assert run("train", tmp_path / "n.csv", "--out", tmp_path / "b") == 2
    assert not (tmp_path / "b").exists()


def test_missing_input_exit_one(tmp_path):
    assert run("train", tmp_path / "absent.csv", "--out", tmp_path / "b") == 1
    assert run("monitor", tmp_path / "absent.csv", tmp_path / "nobundle", "--out", tmp_path / "m") == 1


def test_sensor_mismatch_exit_two(work, tmp_path):
    g = np.random.default_rng(0)
    write_csv(MeasurementMatrix(["c1", "c2"], np.arange(500.0), g.normal(size=(2, 500))), tmp_path / "x.csv")
    assert run("monitor", tmp_path / "x.csv", work / "bundle", "--out", tmp_path / "m") == 2


def test_bad_config_exit_two(tmp_path, work):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"kappa": 3}')
    assert run("train", work / "nom" / "data.csv", "--out", tmp_path / "b", "--config", cfg) == 2


def test_parse_fault():
    lab = cli.parse_fault("c1:5:9:stuck_value:2.5")
    assert (lab.sensor, lab.start, lab.end, lab.kind, lab.value) == ("c1", 5, 9, "stuck_value", 2.5)
    with pytest.raises(Exception):
        cli.parse_fault("c1:5")
