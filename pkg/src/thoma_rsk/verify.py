"""Exhaustive and Monte Carlo checks of the structural lemmas.

Every check returns a :class:`Check` with a pass flag and the measured
quantity, so the same code backs the test-suite, the acceptance run and
the ``lemmas`` command.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import exact
from .core import (
    G,
    ColLetter,
    ContLetter,
    LinearOrder,
    RowLetter,
    TableauType,
    ThomaParams,
    validate_params,
)
from .diagnostics import (
    WalkConfig,
    conditional_covariance,
    first_row_count,
    possible_transformation,
    restrict_word,
    rho,
    walk_expectations,
)
from .rsk import _Builder, greene_ck, greene_rk, rsk, rsk_bijection_inverse, rsk_shape
from .sampling import AmalgamationSpec, SeededGenerator, amalgamate, reduction_plan, sample_codes, decode_word
from .stats import TransposedView, View, dominance_violations, sample_shapes, theoretical_covariance

TEST_MATRIX = (
    validate_params([0.6], [0.4], 0.0),
    validate_params([0.5, 0.3], [0.2], 0.0),
    validate_params([0.4, 0.25], [0.2], 0.15),
)
WALK_CONFIGS = ((0.2, 0.5), (0.3, 0.4), (0.1, 0.8))


@dataclass
class Check:
    name: str
    passed: bool
    value: float | int | None = None
    threshold: float | int | None = None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: value={self.value} threshold={self.threshold}"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "threshold": self.threshold, "detail": self.detail}


def _label(p: ThomaParams) -> str:
    return f"a={list(p.alphas)} b={list(p.betas)} g={p.gamma}"


# --------------------------------------------------------------------------
# Exact measures
# --------------------------------------------------------------------------


def check_oracle(params_list: Sequence[ThomaParams] = TEST_MATRIX, nmax_g: int = 5, nmax: int = 6, tol: float = 1e-10) -> Check:
    """Exhaustive word enumeration through RSK against the Schur-specialization measure."""
    worst, detail = 0.0, {}
    for p in params_list:
        order = LinearOrder.p1(p)
        top = nmax_g if p.gamma > 0 else nmax
        for n in range(1, top + 1):
            gap = exact.max_table_gap(exact.enumerated_measure(p, n, order), exact.measure_Mn(p, n).table)
            detail[f"{_label(p)} n={n}"] = gap
            worst = max(worst, gap)
    return Check("exact-oracle equivalence", worst <= tol, worst, tol, detail)


def check_coherency(params_list: Sequence[ThomaParams] = TEST_MATRIX, nmax: int = 7, tol: float = 1e-10) -> Check:
    worst, detail = 0.0, {}
    for p in params_list:
        for n in range(1, nmax + 1):
            r = exact.coherency_residual(p, n)
            detail[f"{_label(p)} n={n}"] = r
            worst = max(worst, r)
    return Check("coherency", worst <= tol, worst, tol, detail)


def lemma1_orders(params: ThomaParams) -> list[LinearOrder]:
    """Three different orders with G an interval and the standard L_e / L_o classes."""
    xs = [RowLetter(i + 1) for i in range(len(params.alphas))]
    ys = [ColLetter(j + 1) for j in range(len(params.betas))]
    g = [G] if params.gamma > 0 else []
    weak = frozenset(xs)
    orders = [
        LinearOrder(tuple(xs + ys + g), weak),
        LinearOrder(tuple(g + list(reversed(ys)) + list(reversed(xs))), weak),
    ]
    inter = []
    for a, b in itertools.zip_longest(reversed(xs), ys):
        inter += [s for s in (b, a) if s is not None]
    mid = len(inter) // 2
    orders.append(LinearOrder(tuple(inter[:mid] + g + inter[mid:]), weak, g_reversed=True))
    return orders


def check_lemma1(params_list: Sequence[ThomaParams] = TEST_MATRIX, nmax: int = 5, tol: float = 1e-10) -> Check:
    """Joint law of (shape, tableau type) is the same under three orders."""
    worst, detail = 0.0, {}
    for p in params_list:
        orders = lemma1_orders(p)
        for n in range(1, nmax + 1):
            tables = [exact.enumerated_joint(p, n, o) for o in orders]
            gap = max(exact.max_table_gap(tables[0], t) for t in tables[1:])
            detail[f"{_label(p)} n={n}"] = gap
            worst = max(worst, gap)
    return Check("lemma 1 order invariance", worst <= tol, worst, tol, detail)


# --------------------------------------------------------------------------
# RSK structure
# --------------------------------------------------------------------------


def _alphabet4():
    x1, x2, y1, y2 = RowLetter(1), RowLetter(2), ColLetter(1), ColLetter(2)
    return (x1, x2, y1, y2), LinearOrder((x1, y1, x2, y2), frozenset({x1, x2}))


def check_greene(max_len: int = 8) -> Check:
    """r_k and c_k by brute force equal partial row / column sums, all words over 4 letters."""
    letters, order = _alphabet4()
    bad = 0
    count = 0
    for n in range(max_len + 1):
        for w in itertools.product(letters, repeat=n):
            sh = rsk_shape(w, order)
            cols = sh.columns
            for k in range(1, len(sh) + 1):
                bad += greene_rk(w, order, k) != sum(sh[:k])
            for k in range(1, len(cols) + 1):
                bad += greene_ck(w, order, k) != sum(cols[:k])
            count += 1
    return Check(f"greene invariants (words <= {max_len})", bad == 0, bad, 0, {"words": count})


def check_bijection(max_len: int = 8) -> Check:
    """inverse(rsk(w)) = w for all words over 3 letters; the image has |A|^n distinct pairs."""
    x1, x2, y1 = RowLetter(1), RowLetter(2), ColLetter(1)
    order = LinearOrder((x1, y1, x2), frozenset({x1, x2}))
    bad = 0
    for n in range(max_len + 1):
        seen = set()
        for w in itertools.product((x1, x2, y1), repeat=n):
            out = rsk(w, order)
            bad += rsk_bijection_inverse(out.R, out.S, order) != w
            seen.add((out.R.rows, out.S.rows))
        # every valid pair is hit: the number of (R, S) pairs of size n is also 3^n
        pairs = sum(
            exact.count_ap_tableaux(lam, TableauType((a, b), (n - a - b,), 0), order) * exact.dim_hook(lam)
            for lam in exact.partitions(n)
            for a in range(n + 1)
            for b in range(n - a + 1)
        )
        bad += (len(seen) != 3**n) + (pairs != 3**n)
    return Check(f"rsk bijection (words <= {max_len})", bad == 0, bad, 0)


def check_lemma3(
    params: ThomaParams = TEST_MATRIX[2], n: int = 50, trials: int = 100_000, seed: int = 0, workers: int = 1
) -> Check:
    order = LinearOrder.p1(params)
    a, b = sample_shapes(
        params, order, SeededGenerator(seed), "lemma3", trials, n=n, nrows=n, ncols=n,
        views=[View(params, order), TransposedView(params, order)], workers=workers,
    )
    mismatches = int(np.any(a.rows != b.cols, axis=1).sum() + np.any(a.cols != b.rows, axis=1).sum())
    return Check("lemma 3 transpose identity", mismatches == 0, mismatches, 0, {"trials": trials, "n": n})


def lemma2_views(params: ThomaParams, K: int = 2):
    """Amalgamations to test: the finite reduction and two single intervals."""
    order = LinearOrder.p1(params)
    views = [("reduction", reduction_plan(params, K))]
    segs = order.segments
    if len(segs) >= 3:
        views.append(("middle pair", amalgamate(params, order, AmalgamationSpec(1, 2))))
    if params.gamma > 0:
        gpos = order.position(G)
        views.append(("G prefix", amalgamate(params, order, AmalgamationSpec(gpos, gpos, (0.0, 0.5)))))
        views.append(("letter + G prefix", amalgamate(params, order, AmalgamationSpec(gpos - 1, gpos, (0.0, 0.3)))))
    return order, views


def check_lemma2(
    params: ThomaParams = TEST_MATRIX[2], n: int = 50, trials: int = 100_000, kmax: int = 5, seed: int = 0, workers: int = 1
) -> Check:
    order, named = lemma2_views(params)
    views = [View(params, order)] + [v for _, v in named]
    batches = sample_shapes(params, order, SeededGenerator(seed), "lemma2", trials, n=n, nrows=kmax, ncols=1, views=views, workers=workers)
    detail = {name: dominance_violations(batches[0], b, kmax) for (name, _), b in zip(named, batches[1:])}
    total = sum(detail.values())
    return Check("lemma 2 dominance", total == 0, total, 0, {"violations": detail, "trials": trials, "n": n})


def check_lemma4(configs: Iterable[tuple[float, float]] = WALK_CONFIGS, nmax: int = 1000) -> Check:
    """Exact E position after n steps stays below 2q/(1-q)^2 and never decreases."""
    worst, detail, ok = -math.inf, {}, True
    for q1, q3 in configs:
        cfg = WalkConfig(q1, q3)
        e = walk_expectations(cfg, nmax)
        bound = cfg.bound()
        mono = bool(np.all(np.diff(e) >= -1e-12))
        ok &= bool(np.all(e <= bound)) and mono
        worst = max(worst, float(e.max() - bound))
        detail[f"q1={q1} q3={q3}"] = {"max_E": float(e.max()), "bound": bound, "nondecreasing": mono}
    return Check("lemma 4 walk bound", ok, worst, 0.0, detail)


def _first_row_logs(word, order, letters):
    """Letters of ``letters`` in order of leaving the first row, then those left in it."""
    b = _Builder(order)
    log: list = []
    want = set(letters)

    def on_bump(row, x):
        if row == 0 and x in want:
            log.append(x)

    for x in word:
        b.insert(x, on_bump)
    tail = [x for x in (b.rows[0] if b.rows else ()) if x in want]
    return log + tail


def lemma5_violations(word, order: LinearOrder, pairs) -> int:
    seq = _first_row_logs(word, order, {x for p in pairs for x in p})
    bad = 0
    for a, b in pairs:
        d = tuple(x for x in seq if x == a or x == b)
        bad += rho(d, a, b) > rho(restrict_word(word, a, b), a, b)
    return bad


def check_lemma5(max_len: int = 9, random_words: int = 10_000, random_len: int = 40, seed: int = 0) -> Check:
    """rho never increases under the first-row bump order; exhaustive plus random words."""
    xs3 = tuple(RowLetter(i) for i in (1, 2, 3))
    order3 = LinearOrder(xs3, frozenset(xs3))
    pairs3 = [(xs3[0], xs3[1]), (xs3[1], xs3[2])]
    bad_ex = 0
    for n in range(max_len + 1):
        for w in itertools.product(xs3, repeat=n):
            bad_ex += lemma5_violations(w, order3, pairs3)
    xs5 = tuple(RowLetter(i) for i in range(1, 6))
    order5 = LinearOrder(xs5, frozenset(xs5))
    pairs5 = [(xs5[i], xs5[i + 1]) for i in range(4)]
    p5 = validate_params([0.2] * 5)
    codes, gvals, _ = sample_codes(p5, SeededGenerator(seed), "lemma5", range(random_words), n=random_len)
    bad_rand = 0
    for s in range(random_words):
        bad_rand += lemma5_violations(decode_word(p5, codes[s], gvals[s]), order5, pairs5)
    total = bad_ex + bad_rand
    return Check("lemma 5 result bound", total == 0, total, 0, {"exhaustive": bad_ex, "random": bad_rand})


def check_first_row(max_len: int = 14) -> Check:
    """RSK on a two-letter word leaves exactly rho letters b in the first row."""
    a, b = RowLetter(1), RowLetter(2)
    order = LinearOrder((a, b), frozenset({a, b}))
    bad = 0
    for n in range(max_len + 1):
        for w in itertools.product((a, b), repeat=n):
            bad += first_row_count(w, b, order) != rho(w, a, b)
    return Check(f"first-row count equals rho (words <= {max_len})", bad == 0, bad, 0)


def check_remark1(params_list: Sequence[ThomaParams] = TEST_MATRIX, tol: float = 1e-12) -> Check:
    worst, detail = 0.0, {}
    for p in params_list:
        K, L = len(p.alphas), len(p.betas)
        gap = float(np.abs(conditional_covariance(p, K, L) - theoretical_covariance(p, K, L)).max())
        detail[_label(p)] = gap
        worst = max(worst, gap)
    return Check("remark 1 conditional covariance", worst <= tol, worst, tol, detail)


# --------------------------------------------------------------------------
# Worked examples
# --------------------------------------------------------------------------


def check_examples() -> Check:
    x1, x2, x3, y1, y2 = RowLetter(1), RowLetter(2), RowLetter(3), ColLetter(1), ColLetter(2)
    order = LinearOrder((x1, x2, y1, y2), frozenset({x1, x2}))
    w = (x1, y1, y1, y2, x2, x1, y1)
    out = rsk(w, order)
    ok_rsk = (
        out.R.rows == ((x1, x1, y1), (x2, y2), (y1,), (y1,))
        and out.S.rows == ((1, 2, 4), (3, 7), (5,), (6,))
        and tuple(out.shape) == (3, 2, 1, 1)
    )
    o3 = LinearOrder((x1, x2, x3), frozenset({x1, x2, x3}))
    from .core import parse_word

    w2 = parse_word("x2 x1 x3 x2 x1 x2 x3 x3 x2 x3 x1 x3 x2")
    r = restrict_word(w2, x2, x3)
    d = possible_transformation(w2, x2, x3, o3)
    ok_restrict = r == parse_word("x2 x3 x2 x2 x3 x3 x2 x3 x3 x2")
    ok_rho = rho(r, x2, x3) == 2
    ok_d = d == parse_word("x2 x3 x2 x3 x2 x3 x2 x2 x3 x3")
    ok = ok_rsk and ok_restrict and ok_rho and ok_d
    return Check(
        "worked examples",
        ok,
        int(ok),
        1,
        {"rsk": ok_rsk, "restriction": ok_restrict, "rho": ok_rho, "possible_transformation": ok_d},
    )


def run_lemma_suite(exhaustive_cap: int = 9, trials: int = 100_000, seed: int = 0, workers: int = 1) -> list[Check]:
    """Everything the ``lemmas`` command runs; exhaustive lengths never exceed the cap."""
    return [
        check_examples(),
        check_bijection(min(8, exhaustive_cap)),
        check_greene(min(8, exhaustive_cap)),
        check_oracle(nmax_g=min(5, exhaustive_cap), nmax=min(6, exhaustive_cap)),
        check_coherency(nmax=min(7, exhaustive_cap)),
        check_lemma1(nmax=min(5, exhaustive_cap)),
        check_lemma2(trials=trials, seed=seed, workers=workers),
        check_lemma3(trials=trials, seed=seed, workers=workers),
        check_lemma4(),
        check_lemma5(max_len=min(9, exhaustive_cap), random_words=max(1, trials // 10), seed=seed),
        check_first_row(min(14, exhaustive_cap + 5)),
        check_remark1(),
    ]
