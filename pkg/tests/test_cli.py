import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gccha import io
from gccha.cli import main

SPEC = {
    "graph": {"n": 6, "edges": [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 0.5], [3, 4, 1.0],
                                [4, 5, 2.0], [5, 0, 1.0], [1, 4, 0.3]]},
    "gso": "laplacian",
    "p": 2,
    "random_field": {"q": 3, "seed": 3, "complex": False},
    "realizations": 60,
    "seed": 1,
}


@pytest.fixture()
def synth_dir(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    out = tmp_path / "s"
    assert main(["synth", "--spec", str(spec), "--out", str(out)]) == 0
    return out


def _read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_synth_writes_population_artifacts(synth_dir):
    assert set(_files(synth_dir)) == {
        "graph.csv", "x.csv", "y.csv", "population_field.json", "population_coherence.csv",
    }
    x, labels = io.read_signal_csv(synth_dir / "x.csv")
    assert x.shape == (6, 2, 60) and labels == ["X1", "X2"]
    field = io.field_from_dict(json.loads((synth_dir / "population_field.json").read_text()))
    assert (field.p, field.q) == (2, 3)
    rows = _read(synth_dir / "population_coherence.csv")
    assert rows[0] == ["frequency_index", "lambda", "gamma_1", "gamma_2"]
    assert len(rows) == 7


def test_analyze_round_trip_satisfies_core_invariants(synth_dir, tmp_path):
    out = tmp_path / "a"
    rc = main(["analyze", "--graph", str(synth_dir / "graph.csv"), "--x", str(synth_dir / "x.csv"),
               "--y", str(synth_dir / "y.csv"), "--out", str(out)])
    assert rc == 0
    gamma = np.array([[float(v) for v in r[2:]] for r in _read(out / "coherence_curves.csv")[1:]])
    assert gamma.shape == (6, 2)
    assert np.all(np.diff(gamma, axis=1) <= 1e-12)
    assert np.all((gamma >= 0) & (gamma <= 1 + 1e-10))

    field = io.field_from_dict(json.loads((out / "field.json").read_text()))
    sol = json.loads((out / "solution.json").read_text())
    h = io.from_pairs(sol["H"], 3)
    f = io.from_pairs(sol["F"], 3)
    for ell in range(field.n):
        np.testing.assert_allclose(h[ell] @ field.P_X[ell] @ h[ell].conj().T, np.eye(2), atol=1e-8)
        np.testing.assert_allclose(f[ell] @ field.P_Y[ell] @ f[ell].conj().T, np.eye(2), atol=1e-8)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["coherence_nonincreasing"] and summary["rank"] == 2
    for cum in summary["cumulative_Z"], summary["cumulative_W"]:
        cum = np.array(cum)
        assert np.all(cum <= 1 + 1e-10) and np.all(np.diff(cum, axis=0) >= 0)
    header = _read(out / "loadings.csv")[0]
    assert header == ["component", "channel", "frequency_index", "lambda", "quantity", "value"]


def test_analyze_same_table_gives_unit_coherence(synth_dir, tmp_path):
    out = tmp_path / "xx"
    x = str(synth_dir / "x.csv")
    assert main(["analyze", "--graph", str(synth_dir / "graph.csv"), "--x", x, "--y", x,
                 "--out", str(out)]) == 0
    gamma = np.array([[float(v) for v in r[2:]] for r in _read(out / "coherence_curves.csv")[1:]])
    np.testing.assert_allclose(gamma[:, 0], 1, atol=1e-8)


@pytest.mark.parametrize("extra", [[], ["--estimator", "random-window", "--windows", "5"]])
def test_analyze_is_byte_deterministic(synth_dir, tmp_path, extra):
    args = ["analyze", "--graph", str(synth_dir / "graph.csv"), "--x", str(synth_dir / "x.csv"),
            "--y", str(synth_dir / "y.csv"), "--seed", "4", *extra]
    assert main([*args, "--out", str(tmp_path / "1")]) == 0
    assert main([*args, "--out", str(tmp_path / "2")]) == 0
    assert _files(tmp_path / "1") == _files(tmp_path / "2")


def test_diagnose_reports_json(synth_dir, capsys):
    assert main(["diagnose", "--graph", str(synth_dir / "graph.csv"), "--x", str(synth_dir / "x.csv"),
                 "--threshold", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["labels"] == ["X1", "X2"]
    assert np.array(report["off_diagonal_ratio"]).shape == (2, 2)
    assert report["supports_stationarity"] is True


def test_classify_prints_and_writes_tables(tmp_path, capsys):
    out = tmp_path / "c"
    rc = main(["classify", "--synthetic", "2", "--per-class", "15", "--reps", "2", "--rank", "2", "4",
               "--windows", "5", "--out", str(out)])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "r,K,K_fraction,mean_accuracy,std_accuracy,repetitions"
    assert len(lines) == 3
    assert _read(out / "accuracy.csv")[1][:3] == ["2", "4", "0.25"]
    assert len(_read(out / "repetitions.csv")) == 1 + 2 * 2


def test_classify_reads_image_csv(tmp_path):
    from gccha.pipelines import synthetic_images

    labels, pixels = synthetic_images(2, 12, seed=2)
    path = tmp_path / "imgs.csv"
    io.write_image_csv(path, labels, pixels)
    args = ["classify", "--images", str(path), "--per-class", "12", "--reps", "1", "--rank", "2",
            "--windows", "5"]
    assert main([*args, "--out", str(tmp_path / "1")]) == 0
    assert main([*args, "--out", str(tmp_path / "2")]) == 0
    assert _files(tmp_path / "1") == _files(tmp_path / "2")


def test_synth_is_byte_deterministic(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    for d in ("1", "2"):
        assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / d)]) == 0
    assert _files(tmp_path / "1") == _files(tmp_path / "2")


def test_validation_errors_exit_2(tmp_path, synth_dir, capsys):
    assert main(["analyze", "--graph", "missing.csv", "--x", "a", "--y", "b", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("label,p0\nx,1\n")
    assert main(["classify", "--images", str(bad)]) == 2
    assert main(["analyze", "--graph", str(synth_dir / "graph.csv"), "--x", str(synth_dir / "x.csv"),
                 "--y", str(synth_dir / "y.csv"), "--rank", "3", "--out", str(tmp_path / "r")]) == 2
    assert main(["synth", "--spec", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_numerical_failure_exits_3(synth_dir, tmp_path, capsys):
    rows = _read(synth_dir / "x.csv")
    zero = tmp_path / "zero.csv"
    with open(zero, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rows[0])
        for r in rows[1:]:
            w.writerow([r[0], r[1], 0, 0])
    rc = main(["analyze", "--graph", str(synth_dir / "graph.csv"), "--x", str(zero),
               "--y", str(synth_dir / "y.csv"), "--out", str(tmp_path / "z")])
    assert rc == 3
    assert "frequency index 0" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gccha", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "analyze" in res.stdout and "diagnose" in res.stdout
