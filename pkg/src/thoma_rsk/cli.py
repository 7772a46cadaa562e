"""Command-line entry point: ``thoma-rsk <command> [options]``.

Every command resolves its configuration (flags over ``--config`` file over
defaults), echoes it into the output, and exits with 0 when all embedded
checks pass, 1 when one fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import subprocess
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__, exact, stats, verify
from .core import LinearOrder, ThomaParams, validate_params
from .diagnostics import WalkConfig, walk_expectations, walk_positions
from .sampling import SeededGenerator, default_workers

SEED_ENV = "THOMA_RSK_SEED"

THEOREM1 = {"alphas": [0.4, 0.25], "betas": [0.2], "gamma": 0.15}

DEFAULTS = {
    "exact": {**THEOREM1, "n": 5, "format": "csv"},
    "sample": {**THEOREM1, "n": 10, "trials": 1000, "format": "csv", "per_trial": False},
    "clt": {**THEOREM1, "K": 2, "L": 1, "n": 2000, "trials": 100_000, "format": "json"},
    "drift": {**THEOREM1, "K": 2, "L": 1, "n_grid": [100, 400, 1600, 6400], "trials": 10_000, "format": "json"},
    "lln": {**THEOREM1, "n_grid": [100, 400, 1600, 6400], "trials": 1000, "tol": 0.05, "format": "json"},
    "poisson": {**THEOREM1, "K": 2, "L": 1, "nu": 2000.0, "trials": 100_000, "nu_grid": None, "format": "json"},
    "lemmas": {"exhaustive_cap": 9, "trials": 100_000, "format": "json"},
    "walk": {"q1": 0.2, "q3": 0.5, "n": 1000, "trials": 10_000, "format": "json"},
}
PARAM_KEYS = ("alphas", "betas", "gamma")


class UsageError(Exception):
    pass


def build_id() -> str:
    """Package version plus ``git describe`` of the source tree when available."""
    try:
        here = Path(__file__).resolve().parent
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"], cwd=here, capture_output=True, text=True, timeout=5
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# --------------------------------------------------------------------------
# Argument parsing and configuration
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, params: bool = True, trials: bool = True) -> None:
    if params:
        p.add_argument("--alphas", type=float, nargs="*", help="row parameters, nonincreasing")
        p.add_argument("--betas", type=float, nargs="*", help="column parameters, nonincreasing")
        p.add_argument("--gamma", type=float, help="continuous part (default: 1 - sum)")
        p.add_argument("--params", help="JSON file with alphas, betas, gamma")
        p.add_argument("--order", nargs="+", help="linear order as tokens, e.g. x1 y1 x2 G")
        p.add_argument("--weak", nargs="*", help="letters of L_e (default: the x letters)")
    if trials:
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
        p.add_argument("--workers", type=int, help="worker processes (default: CPU count); results do not depend on it")
    p.add_argument("--config", help="JSON config file, or a previous report to rerun")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thoma-rsk", description="Generalized RSK for Thoma-parameter measures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact measure M_n on diagrams of size n, with coherency residual")
    _common(p, trials=False)
    p.add_argument("--n", type=int)
    p.add_argument("--report", help="also write the JSON residual report here")

    p = sub.add_parser("sample", help="sample RSK shapes of random words")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--nu", type=float, help="poissonized word length instead of --n")
    p.add_argument("--per-trial", dest="per_trial", action="store_true", default=None, help="one line per trial")

    p = sub.add_parser("clt", help="row/column fluctuations against the Gaussian limit")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=int)

    p = sub.add_parser("drift", help="E|lambda_i - N_{x_i}| across a grid of sizes")
    _common(p)
    p.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=int)

    p = sub.add_parser("lln", help="lambda_i / n and lambda'_j / n across a grid of sizes")
    _common(p)
    p.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    p.add_argument("--tol", type=float, help="allowed |mean - limit| at the largest size")

    p = sub.add_parser("poisson", help="poissonized fluctuations against independent limits")
    _common(p)
    p.add_argument("--nu", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--nu-grid", dest="nu_grid", type=float, nargs="+", help="also run the poissonized drift on this grid")

    p = sub.add_parser("lemmas", help="exhaustive and Monte Carlo lemma checks")
    _common(p, params=False)
    p.add_argument("--exhaustive-cap", dest="exhaustive_cap", type=int, help="longest exhaustively enumerated word")

    p = sub.add_parser("walk", help="reflecting walk: exact E position and its bound")
    _common(p, params=False)
    p.add_argument("--q1", type=float)
    p.add_argument("--q3", type=float)
    p.add_argument("--n", type=int)
    return parser


def _load_json(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    return data


def _update_params(cfg: dict, new: dict) -> None:
    """Apply ``new`` on top of ``cfg``; a partial parameter set replaces the whole one."""
    if any(k in new for k in PARAM_KEYS):
        for k, blank in (("alphas", []), ("betas", []), ("gamma", None)):
            cfg[k] = blank  # gamma None means the remainder of the given masses
    cfg.update(new)


def resolve_config(args: argparse.Namespace) -> dict:
    """Flags win over the config file, which wins over the command defaults."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    if args.config:
        data = _load_json(args.config)
        data = data.get("config", data)  # a previous report reruns as-is
        if "params" in data and isinstance(data["params"], dict):
            data = {**data, **data["params"]}
        _update_params(cfg, {k: v for k, v in data.items() if k in cfg or k in ("seed", "order", "weak")})
    if getattr(args, "params", None):
        _update_params(cfg, {k: v for k, v in _load_json(args.params).items() if k in PARAM_KEYS})
    explicit = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config", "params", "output", "report", "workers")}
    _update_params(cfg, explicit)
    if hasattr(args, "seed") and cfg.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        try:
            cfg["seed"] = int(env) if env else 0
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer") from exc
    if "alphas" in cfg:
        a, b = list(cfg.get("alphas") or []), list(cfg.get("betas") or [])
        g = cfg.get("gamma")
        if g is None:
            g = max(0.0, 1.0 - math.fsum(a + b))
            g = 0.0 if g < 1e-12 else g
        try:
            p = validate_params(a, b, g)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        cfg.update(p.to_dict())
        if cfg.get("order"):
            try:
                order = LinearOrder.from_tokens(cfg["order"], cfg.get("weak"))
                order.check_params(p)
            except (ValueError, KeyError) as exc:
                raise UsageError(f"bad order: {exc}") from exc
            cfg["order"] = order.tokens()
            cfg["weak"] = sorted(str(s) for s in order.weak)
        else:
            order = LinearOrder.p1(p)
            cfg["order"] = order.tokens()
            cfg["weak"] = sorted(str(s) for s in order.weak)
    for key in ("trials", "n", "K", "L", "exhaustive_cap"):
        if key in cfg and cfg[key] is not None and cfg[key] < 0:
            raise UsageError(f"--{key} must be nonnegative")
    return cfg


def _params(cfg: dict) -> ThomaParams:
    return validate_params(cfg["alphas"], cfg["betas"], cfg["gamma"])


def _order(cfg: dict) -> LinearOrder:
    return LinearOrder.from_tokens(cfg["order"], cfg.get("weak"))


# --------------------------------------------------------------------------
# Commands: each returns (payload dict, csv text or None, list of checks)
# --------------------------------------------------------------------------


def _csv(rows, header=None, delimiter=",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_exact(cfg: dict, workers: int):
    p, n = _params(cfg), cfg["n"]
    if n is None or n < 0:
        raise UsageError("--n is required")
    if n > exact.EXACT_CAP:
        raise UsageError(f"n={n} is above the exact cap {exact.EXACT_CAP}")
    measure = exact.measure_Mn(p, n)
    residual = exact.coherency_residual(p, n) if n >= 1 else 0.0
    check = verify.Check("coherency residual", residual <= 1e-10, residual, 1e-10)
    payload = {
        "measure": [{"shape": list(lam), "probability": prob} for lam, prob in measure.table.items()],
        "total": measure.total,
        "coherency_residual": residual,
    }
    return payload, measure.to_csv(), [check]


def cmd_sample(cfg: dict, workers: int):
    p, order = _params(cfg), _order(cfg)
    n, nu, trials = cfg.get("n"), cfg.get("nu"), cfg["trials"]
    if nu is not None:
        n = None
    elif n is None:
        raise UsageError("need --n or --nu")
    gen = SeededGenerator(cfg["seed"])
    width = n if n is not None else int(nu + 10 * math.sqrt(nu) + 10)
    progress(f"sample: {trials} trials, {'n=' + str(n) if n is not None else 'nu=' + str(nu)}")
    (batch,) = stats.sample_shapes(p, order, gen, "sample", trials, n=n, nu=nu, nrows=max(width, 1), ncols=1, workers=workers)
    shapes = [tuple(int(v) for v in r[r > 0]) for r in batch.rows]
    if cfg.get("per_trial"):
        lines = [(t, ",".join(map(str, s))) for t, s in enumerate(shapes)]
        text = _csv(lines, delimiter=";") if trials else ""
        payload = {"shapes": [list(s) for s in shapes]}
        return payload, text, []
    hist = Counter(shapes)
    keys = sorted(hist, key=lambda s: (-sum(s), tuple(-v for v in s)))
    ref = None
    if n is not None and n <= exact.EXACT_CAP:
        ref = exact.measure_Mn(p, n)
    rows, table = [], []
    for s in keys:
        c = hist[s]
        freq = c / trials
        entry = {"shape": list(s), "count": c, "frequency": freq}
        row = [",".join(map(str, s)), c, repr(freq)]
        if ref is not None:
            q = ref[s]
            se = math.sqrt(max(q * (1 - q), 1e-300) / trials)
            entry.update(exact=q, z=(freq - q) / se)
            row.append(repr(q))
        table.append(entry)
        rows.append(row)
    header = ["shape", "count", "frequency"] + (["exact"] if ref is not None else [])
    text = _csv(rows, header=header, delimiter=";") if trials else ""
    return {"histogram": table}, text, []


def _report_csv(rep: stats.CovarianceReport) -> str:
    rows = []
    d = len(rep.labels)
    for i in range(d):
        for j in range(d):
            rows.append([rep.labels[i], rep.labels[j], repr(float(rep.cov[i, j])), repr(float(rep.cov_se[i, j])),
                         repr(float(rep.theory[i, j])), repr(float(rep.cov_z[i, j]))])
    return _csv(rows, header=["a", "b", "cov", "cov_se", "theory", "dev_in_se"])


def _cov_checks(rep: stats.CovarianceReport, ks_limit: float | None) -> list:
    checks = [verify.Check("covariance within 4 SE", rep.max_cov_z <= stats.SE_BAND, rep.max_cov_z, stats.SE_BAND)]
    if ks_limit is not None:
        for lab, k in zip(rep.labels, rep.ks):
            checks.append(verify.Check(f"KS {lab}", bool(k < ks_limit), float(k), ks_limit))
    return checks


def cmd_clt(cfg: dict, workers: int):
    p, order = _params(cfg), _order(cfg)
    progress(f"clt: n={cfg['n']} trials={cfg['trials']}")
    try:
        _, rep = stats.run_clt(p, cfg["K"], cfg["L"], cfg["n"], cfg["trials"], order, SeededGenerator(cfg["seed"]), workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return {"report": rep.to_dict()}, _report_csv(rep), _cov_checks(rep, 0.01)


def _drift_csv(rep: stats.DriftReport) -> str:
    rows = []
    for g, m, s in zip(rep.grid, rep.mean_abs, rep.se):
        for lab, mi, si in zip(rep.labels, m, s):
            rows.append([g, lab, repr(float(mi)), repr(float(si))])
    return _csv(rows, header=["size", "label", "mean_abs", "se"])


def _drift_checks(rep: stats.DriftReport) -> list:
    ex = rep.band_excess()
    return [verify.Check(f"no drift growth {lab}", bool(e <= 0), float(e), 0.0) for lab, e in zip(rep.labels, ex)]


def cmd_drift(cfg: dict, workers: int):
    p, order = _params(cfg), _order(cfg)
    progress(f"drift: grid={cfg['n_grid']} trials={cfg['trials']}")
    try:
        rep = stats.run_drift(p, cfg["K"], cfg["L"], cfg["n_grid"], cfg["trials"], order, SeededGenerator(cfg["seed"]), workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return {"report": rep.to_dict()}, _drift_csv(rep), _drift_checks(rep)


def cmd_lln(cfg: dict, workers: int):
    p, order = _params(cfg), _order(cfg)
    progress(f"lln: grid={cfg['n_grid']} trials={cfg['trials']}")
    rep = stats.run_lln(p, cfg["n_grid"], cfg["trials"], order, SeededGenerator(cfg["seed"]), workers=workers)
    gap = np.abs(rep.mean[-1] - rep.target)
    checks = [verify.Check(f"LLN {lab}", bool(g < cfg["tol"]), float(g), cfg["tol"]) for lab, g in zip(rep.labels, gap)]
    rows = [[g, lab, repr(float(m)), repr(float(s)), repr(float(t))]
            for g, ms, ss in zip(rep.grid, rep.mean, rep.se) for lab, m, s, t in zip(rep.labels, ms, ss, rep.target)]
    return {"report": rep.to_dict()}, _csv(rows, header=["size", "label", "mean", "se", "limit"]), checks


def cmd_poisson(cfg: dict, workers: int):
    p, order = _params(cfg), _order(cfg)
    gen = SeededGenerator(cfg["seed"])
    progress(f"poisson: nu={cfg['nu']} trials={cfg['trials']}")
    try:
        _, rep = stats.run_clt_poisson(p, cfg["K"], cfg["L"], cfg["nu"], cfg["trials"], gen, order, workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload, checks, text = {"report": rep.to_dict()}, _cov_checks(rep, None), _report_csv(rep)
    if cfg.get("nu_grid"):
        progress(f"poisson drift: grid={cfg['nu_grid']}")
        drep = stats.run_drift_poisson(p, cfg["K"], cfg["L"], cfg["nu_grid"], cfg["trials"], order, gen, workers)
        payload["drift"] = drep.to_dict()
        checks += _drift_checks(drep)
        text += _drift_csv(drep)
    return payload, text, checks


def cmd_lemmas(cfg: dict, workers: int):
    progress(f"lemmas: exhaustive cap {cfg['exhaustive_cap']}, {cfg['trials']} trials")
    checks = verify.run_lemma_suite(cfg["exhaustive_cap"], cfg["trials"], cfg["seed"], workers)
    rows = [[c.name, "pass" if c.passed else "fail", c.value, c.threshold] for c in checks]
    return {}, _csv(rows, header=["check", "status", "value", "threshold"]), checks


def cmd_walk(cfg: dict, workers: int):
    try:
        wc = WalkConfig(cfg["q1"], cfg["q3"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n, trials = cfg["n"], cfg["trials"]
    e = walk_expectations(wc, n)
    bound = wc.bound()
    checks = [
        verify.Check("E position <= bound", bool(e.max() <= bound), float(e[-1]), bound),
        verify.Check("E position nondecreasing", bool(np.all(np.diff(e) >= -1e-12)), None, None),
    ]
    payload = {"expectation": float(e[-1]), "bound": bound}
    if trials:
        progress(f"walk: {trials} trials of {n} steps")
        pos = walk_positions(wc, n, trials, SeededGenerator(cfg["seed"]), workers=workers)
        mean = float(pos.mean())
        se = float(pos.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
        z = abs(mean - e[-1]) / se if se > 0 else (0.0 if mean == e[-1] else math.inf)
        payload.update(simulated_mean=mean, simulated_se=se)
        checks.append(verify.Check("simulated mean within 4 SE", bool(z <= 4), z, 4))
    rows = [["expectation", repr(float(e[-1]))], ["bound", repr(bound)]]
    if trials:
        rows += [["simulated_mean", repr(payload["simulated_mean"])], ["simulated_se", repr(payload["simulated_se"])]]
    return payload, _csv(rows, header=["quantity", "value"]), checks


COMMANDS = {
    "exact": cmd_exact,
    "sample": cmd_sample,
    "clt": cmd_clt,
    "drift": cmd_drift,
    "lln": cmd_lln,
    "poisson": cmd_poisson,
    "lemmas": cmd_lemmas,
    "walk": cmd_walk,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        workers = getattr(args, "workers", None) or default_workers()
        payload, text, checks = COMMANDS[args.command](cfg, workers)
    except UsageError as exc:
        print(f"thoma-rsk: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"thoma-rsk: error: {exc}", file=sys.stderr)
        return 2
    passed = all(c.passed for c in checks)
    report = _jsonable({
        "command": args.command,
        "build": build_id(),
        "config": cfg,
        "checks": [c.to_dict() for c in checks],
        "passed": passed,
        **payload,
    })
    report_text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    out = text if cfg["format"] == "csv" else report_text
    if args.output:
        Path(args.output).write_text(out)
        if cfg["format"] == "csv":
            Path(args.output + ".json").write_text(report_text)
    else:
        sys.stdout.write(out)
    if cfg["format"] == "csv":
        progress("config: " + json.dumps(report["config"], sort_keys=True))
    if getattr(args, "report", None):
        Path(args.report).write_text(report_text)
    for c in checks:
        progress(c.line())
    if not passed:
        first = next(c for c in checks if not c.passed)
        print(f"thoma-rsk: check failed: {first.name}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
