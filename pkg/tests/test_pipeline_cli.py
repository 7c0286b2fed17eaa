import csv
import io
import json

import numpy as np
import pytest

from dncsc.cli import main
from dncsc.datasets import SyntheticSpec, generate, write_csv
from dncsc.estimator import PHASES, default_alpha
from dncsc.exceptions import StageError
from dncsc.pipeline import RunConfig, emit_report, read_labels, run_pipeline


def moons_config(**kw):
    base = dict(k=2, synthetic=SyntheticSpec("two_moons", 2000, noise=0.05, seed=1), p=200, K=5, alpha=50, seed=1)
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture(scope="module")
def moons_report():
    return run_pipeline(moons_config())


def test_report_contents(moons_report):
    r = moons_report
    assert r.n == 2000 and r.d == 2 and r.alpha == 50
    assert set(r.timings[0]) == set(PHASES) | {"total"}
    t = r.timings[0]
    assert t["total"] >= 0.99 * sum(t[ph] for ph in PHASES)
    assert r.landmarks == [200]
    assert r.metrics[0]["acc"] >= 0.99
    assert r.summary["acc_std"] == 0.0


def test_repeats_and_seeds(tmp_path):
    r = run_pipeline(moons_config(repeats=3, seed=4, labels_path=str(tmp_path / "l.txt")))
    assert r.seeds == [4, 5, 6]
    assert len(r.metrics) == len(r.timings) == 3
    accs = [m["acc"] for m in r.metrics]
    assert r.summary["acc_mean"] == pytest.approx(np.mean(accs))
    assert r.summary["acc_std"] == pytest.approx(np.std(accs, ddof=1))
    assert "nmi_std" in r.summary
    labels = read_labels(tmp_path / "l.txt")
    assert np.array_equal(labels, r.labels)
    assert labels.size == 2000


def test_determinism():
    a = run_pipeline(moons_config(selection="dnc-kmeans"))
    b = run_pipeline(moons_config(selection="dnc-kmeans"))
    assert np.array_equal(a.labels, b.labels)
    assert a.metrics == b.metrics


def test_json_round_trip(moons_report):
    text = emit_report(moons_report, "json")
    back = json.loads(text)
    assert back == json.loads(json.dumps(moons_report.to_dict()))
    assert back["timings"][0]["total"] == moons_report.timings[0]["total"]
    assert back["config"]["synthetic"]["shape"] == "two_moons"


def test_csv_summary(moons_report):
    rows = list(csv.DictReader(io.StringIO(emit_report(moons_report, "csv-summary"))))
    assert len(rows) == 1
    row = rows[0]
    assert row["dataset"] == "two_moons" and row["selection"] == "dnc"
    assert float(row["time_total"]) == moons_report.summary["time_total"]
    with pytest.raises(ValueError):
        emit_report(moons_report, "xml")


def test_unlabeled_data_has_no_metrics():
    data = generate(SyntheticSpec("gaussian_blobs", 300, seed=0))
    from dncsc.datasets import DataMatrix

    r = run_pipeline(RunConfig(k=3, input="unused", p=30), data=DataMatrix(data.points))
    assert r.metrics == [] and "acc_mean" not in r.summary


@pytest.mark.parametrize("selection", ["dnc", "dnc-kmeans", "kmeans"])
@pytest.mark.parametrize("knn", ["approx", "exact"])
def test_ablation_grid(selection, knn):
    r = run_pipeline(moons_config(selection=selection, knn=knn, p=100))
    assert r.metrics[0]["acc"] > 0.5


def test_config_errors():
    with pytest.raises(StageError) as exc:
        run_pipeline(moons_config(p=1))
    assert exc.value.stage == "config"
    assert exc.value.config["p"] == 1
    with pytest.raises(StageError) as exc:
        run_pipeline(RunConfig(k=2, input="/nonexistent/file.csv"))
    assert exc.value.stage == "input"


def test_stage_error_is_tagged(monkeypatch):
    import dncsc.estimator as est

    def boom(*a, **kw):
        raise FloatingPointError("bad")

    monkeypatch.setattr(est, "solve_reduced", boom)
    with pytest.raises(StageError) as exc:
        run_pipeline(moons_config())
    assert exc.value.stage == "partitioning"
    assert "bad" in str(exc.value)


def test_default_alpha_switch():
    assert default_alpha(99_999) == 200
    assert default_alpha(100_000) == 50


def test_cli_synthetic(tmp_path, capsys):
    report = tmp_path / "r.json"
    labels = tmp_path / "labels.txt"
    code = main(["--synthetic", "two_moons", "--n", "1500", "--k", "2", "--p", "100", "--seed", "2",
                 "--report", str(report), "--labels", str(labels)])
    assert code == 0
    data = json.loads(report.read_text())
    assert data["metrics"][0]["acc"] >= 0.99
    assert len(labels.read_text().split()) == 1500


def test_cli_csv_input(tmp_path, capsys):
    data = generate(SyntheticSpec("gaussian_blobs", 400, seed=3))
    path = tmp_path / "blobs.csv"
    write_csv(data, path)
    code = main(["--input", str(path), "--label-column", "2", "--k", "3", "--p", "40",
                 "--format", "csv-summary", "--selection", "kmeans", "--knn", "exact"])
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["acc_mean"]) > 0.6


def test_cli_export_data(tmp_path, capsys):
    path = tmp_path / "moons.csv"
    assert main(["--synthetic", "two_moons", "--n", "300", "--k", "2", "--p", "30", "--export-data", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 300


def test_cli_failures(tmp_path, capsys):
    assert main(["--input", str(tmp_path / "missing.csv"), "--k", "2"]) != 0
    assert "[input]" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    assert main(["--input", str(bad), "--k", "2"]) != 0
    assert "row 2, column 2" in capsys.readouterr().err
    assert main(["--synthetic", "two_moons", "--n", "100", "--k", "5", "--p", "3"]) != 0
    assert "[config]" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["--synthetic", "two_moons", "--k", "2", "--sigma", "median"])
    assert exc.value.code != 0
    with pytest.raises(SystemExit):
        main(["--k", "2"])
