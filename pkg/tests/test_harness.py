import csv
import io
import json

import numpy as np
import pytest

from idla1d import cli, harness, rng
from idla1d.harness import EstimateWithError, ExperimentConfig, compare


def small(kind="gambler", **kw):
    base = dict(kind=kind, law="simple", N=20, c=2.0, replicas=200, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


# -- estimators and comparisons ---------------------------------------------

def test_compare_passes_within_three_se():
    v = compare(EstimateWithError(0.5, 0.002, 1000), 0.5)
    assert v.passed and v.z == 0.0


def test_compare_fails_far_off():
    v = compare(EstimateWithError(0.4, 0.002, 1000), 0.5)
    assert not v.passed and v.z == pytest.approx(50.0)


def test_compare_slack_widens_band():
    est = EstimateWithError(0.48, 0.002, 1000)
    assert not compare(est, 0.5).passed
    assert compare(est, 0.5, slack=0.02).passed


def test_single_replica_has_no_se():
    assert EstimateWithError.from_bernoulli(1, 1).se is None
    assert EstimateWithError.from_samples([3.0]).se is None
    v = compare(EstimateWithError.from_samples([0.5]), 0.5)
    assert v.z is None


def test_bernoulli_se():
    e = EstimateWithError.from_bernoulli(30, 100)
    assert e.estimate == 0.3 and e.se == pytest.approx(np.sqrt(0.21 / 100))


def test_samples_se():
    x = np.arange(10.0)
    e = EstimateWithError.from_samples(x)
    assert e.se == pytest.approx(x.std(ddof=1) / np.sqrt(10))


# -- streams and determinism --------------------------------------------------

def test_replica_streams_match_spawn():
    kids = np.random.SeedSequence(5).spawn(4)
    for i, kid in enumerate(kids):
        a = np.random.PCG64(kid).random_raw(3)
        b = rng.replica_stream(5, i).random_raw(3)
        assert (a == b).all()


def test_streams_uncorrelated():
    a = np.random.Generator(rng.replica_stream(11, 0)).random(10000)
    b = np.random.Generator(rng.replica_stream(11, 1)).random(10000)
    c = np.random.Generator(rng.aux_stream(11, 0)).random(10000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.05


def test_byte_identical_documents():
    a = harness.run_experiment(small())
    b = harness.run_experiment(small())
    assert harness.canonical_json(a) == harness.canonical_json(b)
    assert harness.canonical_json(a) != harness.canonical_json(
        harness.run_experiment(small(seed=8)))


def test_replica_order_independence():
    cfg = small(replicas=30)
    fwd = harness.map_replicas(harness._gambler_replica, cfg)
    rev = harness.map_replicas(harness._gambler_replica, cfg, indices=range(29, -1, -1))
    assert fwd == rev


def test_workers_do_not_change_document():
    one = harness.run_experiment(small(replicas=60))
    two = harness.run_experiment(small(replicas=60, workers=2))
    assert harness.canonical_json(one) == harness.canonical_json(two)


def test_document_fields():
    doc = harness.run_experiment(small())
    assert set(doc) == {"kind", "version", "backend", "config", "results", "table",
                        "verdicts", "passed", "timing"}
    assert doc["config"]["seed"] == 7 and "workers" not in doc["config"]
    assert doc["passed"] == all(v["passed"] for v in doc["verdicts"])


# -- writers -------------------------------------------------------------------

def test_json_and_csv_writers(tmp_path):
    doc = harness.run_experiment(small())
    jpath, cpath = tmp_path / "r.json", tmp_path / "r.csv"
    harness.write_document(doc, jpath, "json")
    harness.write_document(doc, cpath, "csv")
    assert json.loads(jpath.read_text())["results"] == json.loads(harness.to_json(doc))["results"]
    rows = list(csv.DictReader(io.StringIO(cpath.read_text())))
    assert list(rows[0]) == list(harness.CSV_FIELDS)
    assert rows[0]["kind"] == "gambler" and len(rows) == len(doc["table"])


def test_numpy_values_serialise():
    text = harness.to_json({"a": np.int64(3), "b": np.float32(0.5), "c": np.arange(2),
                            "d": np.bool_(True)})
    assert json.loads(text) == {"a": 3, "b": 0.5, "c": [0, 1], "d": True}


# -- errors --------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(kind="nope"), dict(replicas=0), dict(format="xml"),
                                dict(N=0), dict(c=-1.0), dict(kind="hitprob", y=(1.5,)),
                                dict(kind="overshoot", y=(10.5,)),
                                dict(kind="overshoot", y=(10,), method="magic"),
                                dict(kind="overshoot", y=(1000,), u=(2.0,),
                                     method="ladder-law", ladder_cutoff=2048),
                                dict(law="stable", alpha=2.5), dict(law="no_such_law")])
def test_config_errors(kw):
    with pytest.raises(harness.ConfigError):
        harness.run_experiment(small(**kw))


def test_inadmissible_law_rejected(tmp_path):
    path = tmp_path / "drift.json"
    path.write_text(json.dumps({"kind": "table", "support": [-1, 2], "probs": [0.5, 0.5]}))
    with pytest.raises(ValueError, match="mean"):
        harness.run_experiment(small(law=str(path)))


def test_replica_failure_lists_indices():
    with pytest.raises(harness.ReplicaFailure) as info:
        harness.run_experiment(small(N=200, replicas=5, step_cap=10))
    idx = [f["replica"] for f in info.value.failures]
    assert idx == sorted(idx) and len(idx) == 5


# -- CLI -----------------------------------------------------------------------

def test_cli_theory_json(capsys):
    code = cli.main(["theory", "--alpha", "1.5", "--y", "0.5"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0 and doc["kind"] == "theory"


def test_cli_gambler_csv(tmp_path):
    out = tmp_path / "g.csv"
    code = cli.main(["gambler", "--N", "20", "--c", "2", "--replicas", "200",
                     "--format", "csv", "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == ",".join(harness.CSV_FIELDS)


def test_cli_exit_codes(capsys):
    assert cli.main(["gambler", "--replicas", "0"]) == 2
    assert cli.main(["gambler", "--N", "200", "--replicas", "3", "--max-steps", "10"]) == 3
    err = capsys.readouterr().err
    assert "replica 0" in err
