"""Acceptance criteria at their stated sizes and tolerances.

Each test records a single ``PASS``/``FAIL`` line, printed together in the
terminal summary. The Monte Carlo criteria go through the command line so the
very reports they produce are the ones rerun for the determinism criterion.
"""

import json
import math

import pytest

from thoma_rsk import verify
from thoma_rsk.cli import run

pytestmark = pytest.mark.slow

MC_RUNS = {
    "clt": ["clt", "--alphas", "0.4", "0.25", "--betas", "0.2", "--gamma", "0.15",
            "--K", "2", "--L", "1", "--n", "2000", "--trials", "100000"],
    "drift": ["drift", "--alphas", "0.4", "0.25", "--betas", "0.2", "--gamma", "0.15",
              "--K", "2", "--L", "1", "--n-grid", "100", "400", "1600", "6400", "--trials", "10000"],
    "poisson": ["poisson", "--alphas", "0.4", "0.25", "--betas", "0.2", "--gamma", "0.15",
                "--K", "2", "--L", "1", "--nu", "2000", "--trials", "100000"],
    "lemmas": ["lemmas", "--exhaustive-cap", "9", "--trials", "100000"],
}


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    """Run each Monte Carlo command once on one worker; keep its exit code and report path."""
    d = tmp_path_factory.mktemp("acceptance")
    out = {}
    for name, argv in MC_RUNS.items():
        path = d / f"{name}.json"
        code = run(argv + ["--seed", "2024", "--workers", "1", "--format", "json", "-o", str(path)])
        out[name] = (code, path)
    return out


def _load(reports, name):
    code, path = reports[name]
    return code, json.loads(path.read_text())


def _settle(verdict, number, title, checks):
    passed = all(c["passed"] for c in checks)
    failed = [c for c in checks if not c["passed"]]
    detail = "; ".join(f"{c['name']}={c['value']:.4g} (limit {c['threshold']})" for c in failed if c["value"] is not None)
    verdict(f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}" + (f" [{detail}]" if detail else ""))
    assert passed, detail or [c["name"] for c in failed]


def test_1_exact_oracle(verdict):
    c = verify.check_oracle(nmax_g=5, nmax=6, tol=1e-10)
    _settle(verdict, 1, "enumeration through RSK matches the Schur measure", [c.to_dict()])


def test_2_coherency(verdict):
    c = verify.check_coherency(nmax=7)
    _settle(verdict, 2, "coherency residual <= 1e-10 up to n=7", [c.to_dict()])


def test_3_clt(reports, verdict):
    code, data = _load(reports, "clt")
    assert data["passed"] == (code == 0)
    _settle(verdict, 3, "covariance within 4 SE and marginal KS < 0.01 at n=2000", data["checks"])


def test_4_drift(reports, verdict):
    code, data = _load(reports, "drift")
    assert data["config"]["n_grid"] == [100, 400, 1600, 6400]
    _settle(verdict, 4, "E|drift| at n=6400 inside the no-growth band", data["checks"])


def test_5_poisson(reports, verdict):
    code, data = _load(reports, "poisson")
    theory = data["report"]["theory"]
    assert [theory[i][i] for i in range(3)] == pytest.approx([0.4, 0.25, 0.2])
    _settle(verdict, 5, "poissonized covariance within 4 SE of diag(alpha, beta)", data["checks"])


def test_6_lemmas(reports, verdict):
    code, data = _load(reports, "lemmas")
    _settle(verdict, 6, "lemma suite", data["checks"])


def test_7_remark1(verdict):
    c = verify.check_remark1(tol=1e-12)
    _settle(verdict, 7, "conditional covariance equals the limit covariance", [c.to_dict()])


def test_8_worked_examples(verdict):
    c = verify.check_examples()
    _settle(verdict, 8, "worked RSK and restriction examples", [c.to_dict()])


def test_9_determinism(reports, tmp_path, verdict):
    checks = []
    for name, (_, path) in reports.items():
        again = tmp_path / f"{name}.json"
        run([name, "--config", str(path), "--workers", "2", "-o", str(again)])
        same = again.read_bytes() == path.read_bytes()
        checks.append({"name": f"{name} rerun on 2 workers", "passed": same, "value": None, "threshold": None})
    _settle(verdict, 9, "reports byte-identical across worker counts", checks)
