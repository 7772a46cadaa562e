import math
from fractions import Fraction

import pytest

from thoma_rsk import exact, verify
from thoma_rsk.core import ColLetter, LinearOrder, RowLetter, TableauType, validate_params

P06 = validate_params([0.6], [0.4])
MATRIX = verify.TEST_MATRIX
x1, x2, y1, y2 = RowLetter(1), RowLetter(2), ColLetter(1), ColLetter(2)


def test_pi_h_examples():
    for p in MATRIX:
        assert exact.pi_h(p, 0) == 1
        assert exact.pi_h(p, 1) == pytest.approx(1, abs=1e-15)
    assert exact.pi_h(P06, 2) == pytest.approx(0.6, abs=1e-15)


def test_pi_h_against_word_count():
    # h_k is the total weight of weakly increasing words of length k in the super alphabet
    p = validate_params([0.5, 0.3], [0.2])
    h3 = sum(
        0.5**a * 0.3**b * (0.2 if c == 1 else 1.0)
        for a in range(4) for b in range(4) for c in range(2) if a + b + c == 3
    )
    assert exact.pi_h(p, 3) == pytest.approx(h3, abs=1e-15)


def test_schur_examples():
    assert exact.schur_specialization(P06, (1,)) == pytest.approx(1)
    assert exact.schur_specialization(P06, (2,)) == pytest.approx(0.6, abs=1e-15)
    assert exact.schur_specialization(P06, (1, 1)) == pytest.approx(0.4, abs=1e-15)
    assert exact.schur_specialization(validate_params([1.0]), (1, 1)) == 0


def test_row_and_column_determinants_agree():
    # the h-determinant on lambda equals the e-determinant on its transpose
    p = MATRIX[2]
    for lam in exact.partitions(7):
        h = exact.jacobi_trudi(lam, exact.h_values(p, 7))
        e = exact.jacobi_trudi(lam.transpose(), exact.e_values(p, 7))
        assert h == pytest.approx(e, abs=1e-13)


def test_dim_examples():
    assert exact.dim_hook((1,)) == 1
    assert exact.dim_hook((2, 1)) == 2
    assert exact.dim_hook((3, 2, 1, 1)) == 35


def test_dim_hook_matches_recursion():
    for n in range(16):
        for lam in exact.partitions(n):
            assert exact.dim_hook(lam) == exact.dim_paths(tuple(lam))


def test_partitions_reverse_lex_and_count():
    assert list(exact.partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert [sum(1 for _ in exact.partitions(n)) for n in range(11)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_measure_examples():
    m = exact.measure_Mn(validate_params([1.0]), 2)
    assert m[(2,)] == 1 and m[(1, 1)] == 0
    m = exact.measure_Mn(P06, 2)
    assert m[(2,)] == pytest.approx(0.6) and m[(1, 1)] == pytest.approx(0.4)
    for p in MATRIX:
        assert exact.measure_Mn(p, 1)[(1,)] == pytest.approx(1, abs=1e-15)


def test_measure_n2_by_hand():
    # words of length 2: x1x1, x1y1, y1x1 give (2); y1y1 gives (1,1)
    m = exact.measure_Mn(P06, 2)
    assert m[(2,)] == pytest.approx(0.36 + 0.24, abs=1e-15)
    assert m[(1, 1)] == pytest.approx(0.16 + 0.24, abs=1e-15)


def test_measure_cap():
    with pytest.raises(ValueError):
        exact.measure_Mn(P06, 40)


def test_mass_is_one():
    for p in MATRIX:
        for n in range(13):
            assert abs(exact.measure_Mn(p, n).total - 1) <= 1e-10


def test_nonnegative():
    for p in MATRIX:
        for n in range(10):
            assert min(exact.measure_Mn(p, n).table.values()) >= 0


def test_csv_roundtrip():
    m = exact.measure_Mn(P06, 2)
    assert m.to_csv() == "2;0.6\n1,1;0.4\n"
    back = exact.ExactMeasure.from_csv(m.to_csv())
    assert back.n == 2 and back[(2,)] == pytest.approx(0.6)


def test_exact_rationals():
    m = exact.measure_Mn(P06, 4, exact=True)
    assert sum(m.table.values()) == 1
    assert m[(2, 2)] == exact.schur_specialization(P06, (2, 2), exact=True) * 2
    assert isinstance(m[(4,)], Fraction)
    assert exact.coherency_residual(MATRIX[2], 5, exact=True) == 0


def test_coherency_examples():
    assert exact.coherency_residual(P06, 1) <= 1e-10
    assert exact.coherency_residual(validate_params([1.0]), 3) == 0
    for n in range(1, 8):
        assert exact.coherency_residual(MATRIX[2], n) <= 1e-10


def test_poisson_weight_examples():
    assert exact.poisson_weight(P06, 3.0, ()) == pytest.approx(math.exp(-3))
    assert exact.poisson_weight(validate_params([1.0]), 1.0, (2,)) == pytest.approx(math.exp(-1) / 2)
    assert exact.poisson_weight(P06, 2.0, (1, 1)) == pytest.approx(math.exp(-2) * 2 * 0.4)


def test_poisson_weights_sum_to_one():
    p, nu, N = MATRIX[2], 2.0, 20
    total = math.fsum(exact.poisson_weight(p, nu, lam) for n in range(N + 1) for lam in exact.partitions(n))
    assert total + exact.poisson_truncation(nu, N) == pytest.approx(1, abs=1e-10)


def test_count_tableaux_examples():
    o = LinearOrder((x1, x2, y1, y2), frozenset({x1, x2}))
    assert exact.count_ap_tableaux((1,), TableauType((1,), (), 0), o) == 1
    assert exact.count_ap_tableaux((2,), TableauType((), (2,), 0), o) == 0


def test_count_tableaux_order_free():
    t = TableauType((2, 1), (3, 1), 0)
    orders = [
        LinearOrder((x1, x2, y1, y2), frozenset({x1, x2})),
        LinearOrder((y2, x1, y1, x2), frozenset({x1, x2})),
        LinearOrder((y1, x2, y2, x1), frozenset({x1, x2})),
        LinearOrder((x2, y2, y1, x1), frozenset({x1, x2})),
    ]
    counts = {exact.count_ap_tableaux((3, 2, 1, 1), t, o) for o in orders}
    assert len(counts) == 1
    assert counts.pop() > 0


def test_type_probability_matches_enumeration():
    p = MATRIX[2]
    for order in verify.lemma1_orders(p):
        joint = exact.enumerated_joint(p, 4, order)
        for (shape, ttype), prob in joint.items():
            assert exact.type_probability(p, shape, ttype, order) == pytest.approx(prob, abs=1e-12)


def test_enumerated_words_sum_to_one():
    for p in MATRIX:
        assert math.fsum(w for _, w in exact.enumerate_words(p, 4)) == pytest.approx(1, abs=1e-12)


def test_oracle_equivalence():
    c = verify.check_oracle()
    assert c.passed, c.detail


def test_lemma1_order_invariance():
    c = verify.check_lemma1()
    assert c.passed, c.detail

