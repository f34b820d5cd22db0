import csv
import json
from pathlib import Path

import pytest

from discwave.cli import main
from discwave.config import parse_config
from discwave.experiments import LifespanAborted, lifespan, run_experiment, sweep, verify_manifest

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def ref():
    return parse_config((CONFIGS / "reference.ini").read_text())


def read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_cli_run_reference(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "reference.ini"), "--output-dir", str(tmp_path)]) == 0
    assert "BlewUp at N_b=18" in capsys.readouterr().out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"]["status"] == "BlewUp" and report["verdict"]["N_b"] == 18
    assert report["hypotheses"]["applicable"] and report["monitor_failures"] == []
    assert verify_manifest(tmp_path) == []
    assert (tmp_path / "plot.svg").read_text().startswith("<svg")


def test_cli_run_zero_data_uses_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("DISCWAVE_OUTPUT_ROOT", str(tmp_path))
    assert main(["run", "-q", str(CONFIGS / "zero.ini")]) == 0
    report = json.loads((tmp_path / "out" / "zero" / "report.json").read_text())
    assert report["verdict"]["status"] == "BudgetExhausted"


def test_cli_rejects_bad_p(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text((CONFIGS / "reference.ini").read_text().replace("p = 2.0", "p = 1.0"))
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "o")]) == 2
    assert "scheme.p" in capsys.readouterr().err


def test_rerun_reproduces_digests(tmp_path, ref):
    a = run_experiment(ref, tmp_path / "a")
    b = run_experiment(ref, tmp_path / "b")
    ma = json.loads((a.out_dir / "manifest.json").read_text())
    mb = json.loads((b.out_dir / "manifest.json").read_text())
    assert ma == mb
    (a.out_dir / "trace.csv").write_text("tampered\n")
    assert verify_manifest(a.out_dir) == ["trace.csv"]


def test_sweep_amplitude_monotone(tmp_path, ref):
    res = sweep(ref, "epsilon", ["1", "2"], tmp_path, workers=1)
    rows = read_summary(tmp_path / "summary.csv")
    assert [r["value"] for r in rows] == ["1", "2"]
    assert int(rows[1]["N_b"]) <= int(rows[0]["N_b"])
    assert (tmp_path / "000_epsilon=1" / "manifest.json").exists()
    assert not res.all_failed


def test_sweep_p_all_applicable(tmp_path, ref):
    res = sweep(ref, "p", [1.5, 2.0, 2.5, 3.0], tmp_path, workers=1)
    assert all(r["applicable"] for r in res.rows)
    assert all(r["status"] == "BlewUp" for r in res.rows)


def test_sweep_parallel_matches_serial(tmp_path, ref):
    a = sweep(ref, "p", [1.5, 2.0, 3.0], tmp_path / "serial", workers=1)
    b = sweep(ref, "p", [1.5, 2.0, 3.0], tmp_path / "pool", workers=2)
    assert (tmp_path / "serial" / "summary.csv").read_text() == (tmp_path / "pool" / "summary.csv").read_text()
    assert a.n_b() == b.n_b()


def test_sweep_records_failures_and_continues(tmp_path, ref, capsys):
    res = sweep(ref, "p", ["0.5", "2.0"], tmp_path, workers=1)
    assert res.rows[0]["error"] and res.rows[1]["status"] == "BlewUp"
    assert main(["sweep", str(CONFIGS / "reference.ini"), "--axis", "p", "--values", "0.5,x",
                 "--output-dir", str(tmp_path / "all_bad"), "--workers", "1"]) == 1


def test_sweep_empty_rejected(tmp_path, ref):
    with pytest.raises(ValueError):
        sweep(ref, "p", [], tmp_path)
    assert main(["sweep", str(CONFIGS / "reference.ini"), "--axis", "p", "--values", ",",
                 "--output-dir", str(tmp_path)]) == 2


def test_lifespan_default_panel(tmp_path, ref):
    res = lifespan(ref, [0.1, 0.01, 0.001], tmp_path, workers=1)
    assert res.fit.slope < 0
    data = json.loads((tmp_path / "lifespan.json").read_text())
    assert data["fit"]["slope"] == res.fit.slope and data["reference_slope"] == -1.0
    assert (tmp_path / "lifespan.svg").exists()


def test_lifespan_rejects_two_epsilons(tmp_path, ref):
    with pytest.raises(ValueError):
        lifespan(ref, [0.1, 0.001], tmp_path)


def test_lifespan_aborts_on_budget(tmp_path, ref, capsys):
    from dataclasses import replace

    short = replace(ref, params=replace(ref.params, step_budget=200))
    with pytest.raises(LifespanAborted) as err:
        lifespan(short, [0.1, 0.01, 0.001], tmp_path, workers=1)
    assert err.value.epsilons == [0.01, 0.001]
    assert "step_budget" in str(err.value)


def test_cli_lemmas_deterministic(capsys):
    assert main(["lemmas", "--seeds", "50", "--seed", "3"]) == 0
    first = capsys.readouterr().out
    assert main(["lemmas", "--seeds", "50", "--seed", "3"]) == 0
    assert capsys.readouterr().out == first
    assert "FAIL" not in first


def test_cli_lemmas_vacuous_counting(capsys):
    assert main(["lemmas", "--max-R", "0", "--seeds", "5"]) == 0
    assert "VACUOUS" in capsys.readouterr().out


def test_cli_count(capsys):
    assert main(["count", "--d", "2", "--R", "2"]) == 0
    out = capsys.readouterr().out
    assert "count=13" in out and "bound=128" in out
