import json
import math

import pytest

from thoma_rsk.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_csv_example(capsys):
    code, out, _ = _run(capsys, "exact", "--alphas", "0.6", "--betas", "0.4", "--n", "2")
    assert code == 0
    assert out == "2;0.6\n1,1;0.4\n"


def test_exact_single_row(capsys):
    code, out, _ = _run(capsys, "exact", "--alphas", "1", "--n", "3")
    assert code == 0 and out == "3;1\n"


def test_exact_above_cap(capsys):
    code, _, err = _run(capsys, "exact", "--n", "40")
    assert code == 2 and "cap" in err


def test_exact_report_file(tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, _, _ = _run(capsys, "exact", "--alphas", "0.5", "0.3", "--betas", "0.2", "--n", "4", "--report", str(rep))
    data = json.loads(rep.read_text())
    assert code == 0 and data["passed"] and data["coherency_residual"] <= 1e-10


@pytest.mark.parametrize(
    "argv",
    [
        ["exact", "--alphas", "0.3", "0.5", "--n", "2"],
        ["exact", "--alphas", "0.7", "--betas", "0.7", "--n", "2"],
        ["sample", "--n", "-1"],
        ["clt", "--order", "x1", "y1", "--trials", "1"],
        ["walk", "--q1", "0.6", "--q3", "0.6"],
        ["exact", "--config", "/nonexistent.json"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


def test_sample_zero_trials(capsys):
    code, out, _ = _run(capsys, "sample", "--n", "5", "--trials", "0")
    assert code == 0 and out == ""


def test_sample_same_seed_identical(capsys):
    argv = ["sample", "--n", "12", "--trials", "300", "--seed", "4"]
    a = _run(capsys, *argv)[1]
    b = _run(capsys, *argv)[1]
    c = _run(capsys, *argv[:-1], "5")[1]
    assert a == b and a != c


def test_sample_histogram_matches_exact(capsys):
    trials = 100_000
    code, out, _ = _run(capsys, "sample", "--alphas", "0.6", "--betas", "0.4", "--n", "2", "--trials", str(trials), "--format", "json")
    rows = {tuple(r["shape"]): r for r in json.loads(out)["histogram"]}
    assert code == 0
    se = math.sqrt(0.6 * 0.4 / trials)
    assert abs(rows[(2,)]["frequency"] - 0.6) <= 4 * se


def test_sample_per_trial_lines(capsys):
    code, out, _ = _run(capsys, "sample", "--n", "6", "--trials", "5", "--per-trial")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 5
    assert all(sum(map(int, ln.split(";")[1].split(","))) == 6 for ln in lines)


def test_walk_report(capsys):
    code, out, _ = _run(capsys, "walk", "--q1", "0.2", "--q3", "0.5", "--n", "1000", "--trials", "2000")
    data = json.loads(out)
    assert code == 0
    assert data["bound"] == pytest.approx(20 / 9)
    assert data["expectation"] <= data["bound"]


def test_lemmas_small(capsys):
    code, out, _ = _run(capsys, "lemmas", "--exhaustive-cap", "6", "--trials", "2000")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert len(data["checks"]) == 12


def test_failed_check_exits_1(capsys):
    # a tolerance no estimate can meet
    code, _, err = _run(capsys, "lln", "--n-grid", "50", "--trials", "20", "--tol", "0")
    assert code == 1 and "check failed" in err


def test_config_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 7, "trials": 3, "seed": 9, "alphas": [0.6], "betas": [0.4]}))
    data = json.loads(_run(capsys, "sample", "--config", str(cfg), "--n", "4", "--format", "json")[1])
    assert data["config"]["n"] == 4 and data["config"]["trials"] == 3 and data["config"]["seed"] == 9
    assert data["config"]["alphas"] == [0.6]


def test_env_seed_fallback(capsys, monkeypatch):
    monkeypatch.setenv("THOMA_RSK_SEED", "17")
    data = json.loads(_run(capsys, "sample", "--n", "3", "--trials", "2", "--format", "json")[1])
    assert data["config"]["seed"] == 17
    data = json.loads(_run(capsys, "sample", "--n", "3", "--trials", "2", "--seed", "1", "--format", "json")[1])
    assert data["config"]["seed"] == 1


def test_config_is_echoed_in_csv_mode(capsys):
    _, _, err = _run(capsys, "sample", "--n", "3", "--trials", "2")
    assert '"order": ["x1", "x2", "y1", "G"]' in err


def test_report_reruns_identically_across_workers(tmp_path, capsys):
    first = tmp_path / "a.json"
    code = run(["clt", "--n", "200", "--trials", "2000", "--seed", "3", "--workers", "1", "-o", str(first)])
    capsys.readouterr()
    second = tmp_path / "b.json"
    run(["clt", "--config", str(first), "--workers", "2", "-o", str(second)])
    capsys.readouterr()
    assert code in (0, 1)
    assert first.read_bytes() == second.read_bytes()


def test_csv_output_writes_json_sidecar(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = run(["drift", "--n-grid", "50", "100", "--trials", "200", "--format", "csv", "-o", str(out)])
    capsys.readouterr()
    assert code == 0
    assert out.read_text().startswith("size,label,mean_abs,se\n")
    assert json.loads((tmp_path / "d.csv.json").read_text())["command"] == "drift"
