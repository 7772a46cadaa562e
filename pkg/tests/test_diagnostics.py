import itertools

import numpy as np
import pytest

from thoma_rsk import verify
from thoma_rsk.core import LinearOrder, RowLetter, parse_word, validate_params
from thoma_rsk.diagnostics import (
    WalkConfig,
    conditional_covariance,
    conditional_covariance_mc,
    first_row_count,
    possible_transformation,
    restrict_word,
    rho,
    walk_expectation_exact,
    walk_expectations,
    walk_position,
    walk_positions,
)
from thoma_rsk.sampling import SeededGenerator
from thoma_rsk.stats import theoretical_covariance

x1, x2, x3 = RowLetter(1), RowLetter(2), RowLetter(3)
O3 = LinearOrder((x1, x2, x3), frozenset({x1, x2, x3}))
WORKED_W = parse_word("x2 x1 x3 x2 x1 x2 x3 x3 x2 x3 x1 x3 x2")


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(0.5, 0.4)
    with pytest.raises(ValueError):
        WalkConfig(0.3, 0.8)
    assert WalkConfig(0.2, 0.5).q2 == pytest.approx(0.3)
    assert WalkConfig(0.2, 0.5).bound() == pytest.approx(20 / 9)


def test_walk_trivial():
    cfg = WalkConfig(0.0, 0.5)
    assert walk_position(cfg, 1000, SeededGenerator(0)) == 0
    assert walk_expectation_exact(WalkConfig(0.2, 0.5), 0) == 0
    assert walk_expectation_exact(WalkConfig(0.2, 0.5), 1) == pytest.approx(0.2)


def test_one_step_distribution():
    pos = walk_positions(WalkConfig(0.2, 0.5), 1, 100_000, SeededGenerator(1))
    assert set(np.unique(pos)) <= {0, 1}
    assert abs(pos.mean() - 0.2) < 4 * np.sqrt(0.16 / 100_000)


def test_exact_expectation_bounded_and_increasing():
    for q1, q3 in verify.WALK_CONFIGS:
        cfg = WalkConfig(q1, q3)
        e = walk_expectations(cfg, 1000)
        assert np.all(np.diff(e) >= -1e-12)
        assert e.max() <= cfg.bound()
    assert walk_expectation_exact(WalkConfig(0.2, 0.5), 1000) <= 2.2223


def test_exact_expectation_matches_two_step_hand_value():
    # after 2 steps: P(2) = q1^2, P(1) = q1 q2 + q2 q1 + q3 q1 (left from 0 holds)
    q1, q3 = 0.2, 0.5
    q2 = 1 - q1 - q3
    expected = 2 * q1**2 + (2 * q1 * q2 + q3 * q1)
    assert walk_expectation_exact(WalkConfig(q1, q3), 2) == pytest.approx(expected)


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_simulated_walk_matches_exact(n):
    cfg = WalkConfig(0.2, 0.5)
    pos = walk_positions(cfg, n, 100_000, SeededGenerator(2), experiment=f"walk{n}")
    se = pos.std(ddof=1) / np.sqrt(len(pos))
    assert abs(pos.mean() - walk_expectation_exact(cfg, n)) <= 4 * se


def test_long_walk_mean_below_bound():
    cfg = WalkConfig(0.2, 0.5)
    pos = walk_positions(cfg, 10_000, 20_000, SeededGenerator(3))
    assert pos.mean() <= cfg.bound()


def test_walk_positions_worker_free():
    cfg = WalkConfig(0.3, 0.4)
    a = walk_positions(cfg, 500, 3000, SeededGenerator(4), workers=1)
    b = walk_positions(cfg, 500, 3000, SeededGenerator(4), workers=2)
    assert np.array_equal(a, b)


def test_worked_restriction_rho_and_transformation():
    r = restrict_word(WORKED_W, x2, x3)
    assert r == parse_word("x2 x3 x2 x2 x3 x3 x2 x3 x3 x2")
    assert rho(r, x2, x3) == 2
    # the maximal suffix is the last six letters
    assert sum(1 if a == x3 else -1 for a in r[-6:]) == 2
    assert possible_transformation(WORKED_W, x2, x3, O3) == parse_word("x2 x3 x2 x3 x2 x3 x2 x2 x3 x3")


def test_restrict_and_rho_trivial():
    assert restrict_word((x1, x1), x2, x3) == ()
    assert restrict_word((x2, x3, x2), x2, x3) == (x2, x3, x2)
    assert rho((x2,) * 4, x2, x3) == 0
    assert rho((x3,) * 5, x2, x3) == 5
    with pytest.raises(ValueError):
        rho((x1,), x2, x3)


def test_possible_transformation_small_and_errors():
    o = LinearOrder((x1, x2), frozenset({x1, x2}))
    assert possible_transformation((x1, x2), x1, x2, o) == (x1, x2)
    with pytest.raises(ValueError):
        possible_transformation(WORKED_W, x1, x3, O3)
    with pytest.raises(ValueError):
        possible_transformation((x1,), x1, x2, LinearOrder((x1, x2), frozenset({x1})))


def test_transformation_is_a_rearrangement():
    for w in itertools.product((x1, x2, x3), repeat=7):
        d = possible_transformation(w, x1, x2, O3)
        assert sorted(d) == sorted(restrict_word(w, x1, x2))


def test_first_row_count_exhaustive():
    assert verify.check_first_row(14).passed


def test_lemma5():
    c = verify.check_lemma5()
    assert c.passed, c.detail


def test_conditional_covariance_examples():
    p = validate_params([0.4, 0.25], [0.2], 0.15)
    C = conditional_covariance(p, 2, 1)
    assert np.diag(C) == pytest.approx([0.24, 0.1875, 0.16])
    assert [C[0, 1], C[0, 2], C[1, 2]] == pytest.approx([-0.1, -0.08, -0.05])
    assert conditional_covariance(validate_params([1.0]), 1, 0)[0, 0] == 0


def test_remark1_identity():
    for p in verify.TEST_MATRIX:
        K, L = len(p.alphas), len(p.betas)
        assert np.abs(conditional_covariance(p, K, L) - theoretical_covariance(p, K, L)).max() <= 1e-12


def test_conditional_covariance_monte_carlo():
    p = validate_params([0.4, 0.25], [0.2], 0.15)
    cov, se = conditional_covariance_mc(p, 2, 1, 10**6, SeededGenerator(5))
    assert np.all(np.abs(cov - conditional_covariance(p, 2, 1)) <= 3 * se + 1e-15)
