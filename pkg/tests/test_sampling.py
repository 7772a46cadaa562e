import math

import numpy as np
import pytest
from scipy import stats as sps

from thoma_rsk.core import G, ColLetter, ContLetter, LinearOrder, RowLetter, letter_counts, validate_params
from thoma_rsk.sampling import (
    AmalgamationSpec,
    SeededGenerator,
    amalgamate,
    amalgamate_word,
    chunk_bounds,
    code_letters,
    codes_from_uniforms,
    decode_word,
    encode_word,
    g_slices,
    map_chunks,
    reduction_plan,
    sample_codes,
    sample_word,
    sample_word_poisson,
    split_tail_search,
)
from thoma_rsk.stats import sample_shapes

x1, x2, y1, y2 = RowLetter(1), RowLetter(2), ColLetter(1), ColLetter(2)
THM1 = validate_params([0.4, 0.25], [0.2], 0.15)


def test_streams_reproducible_and_distinct():
    g = SeededGenerator(42)
    a = g.stream("exp", 3).random(5)
    assert np.array_equal(a, SeededGenerator(42).stream("exp", 3).random(5))
    assert not np.array_equal(a, g.stream("exp", 4).random(5))
    assert not np.array_equal(a, g.stream("other", 3).random(5))
    assert not np.array_equal(a, SeededGenerator(43).stream("exp", 3).random(5))


def test_bad_seed():
    with pytest.raises(ValueError):
        SeededGenerator(-1)


def test_deterministic_word():
    p = validate_params([1.0])
    assert sample_word(p, 5, SeededGenerator(0)) == (x1,) * 5


def test_cont_word():
    p = validate_params([], [], 1.0)
    w = sample_word(p, 3, SeededGenerator(0))
    assert all(isinstance(a, ContLetter) for a in w)
    assert len({a.value for a in w}) == 3


def test_inverse_transform_boundaries():
    codes, gvals = codes_from_uniforms(THM1, np.array([0.0, 0.3999, 0.4, 0.65, 0.865, 0.925, 0.999999]))
    assert codes.tolist() == [0, 0, 1, 2, -1, -1, -1]
    assert gvals[4] == pytest.approx(0.1)
    assert gvals[5] == pytest.approx(0.5)
    assert 0 <= gvals.max() < 1


def test_large_binary_word_concentrates():
    p = validate_params([0.5], [0.5])
    w = sample_word(p, 10**6, SeededGenerator(1))
    frac = letter_counts(w, p).rows[0] / 10**6
    assert 0.497 <= frac <= 0.503


def test_letter_frequencies_within_6_se():
    N = 10**6
    codes, _, _ = sample_codes(THM1, SeededGenerator(2), "freq", [0], n=N)
    masses = list(THM1.masses) + [THM1.gamma]
    observed = [(codes[0] == c).sum() for c in range(len(THM1.masses))] + [(codes[0] == -1).sum()]
    for obs, m in zip(observed, masses):
        se = math.sqrt(N * m * (1 - m))
        assert abs(obs - N * m) <= 6 * se


def test_g_values_uniform():
    codes, gvals, _ = sample_codes(validate_params([0.5], [], 0.5), SeededGenerator(3), "gu", [0], n=200_000)
    v = gvals[0][codes[0] == -1]
    assert sps.kstest(v, "uniform").pvalue > 0.001


def test_poisson_lengths():
    p = validate_params([0.5], [0.5])
    lengths = [len(sample_word_poisson(p, 100.0, SeededGenerator(4), "pl", t)) for t in range(10_000)]
    assert abs(np.mean(lengths) - 100) < 3
    assert abs(np.var(lengths) - 100) < 10


def test_poisson_tiny_rate():
    p = validate_params([1.0])
    assert all(sample_word_poisson(p, 1e-9, SeededGenerator(5), "tiny", t) == () for t in range(100))


def test_poisson_composition():
    p, nu = validate_params([1.0]), 2.0
    lengths = np.array([len(sample_word_poisson(p, nu, SeededGenerator(6), "comp", t)) for t in range(20_000)])
    for k in range(4):
        target = math.exp(-nu) * nu**k / math.factorial(k)
        se = math.sqrt(target * (1 - target) / len(lengths))
        assert abs((lengths == k).mean() - target) < 5 * se


def test_encode_decode_roundtrip():
    w = (x1, ContLetter(0.25), y1, x2)
    codes, gvals = encode_word(THM1, w)
    assert decode_word(THM1, codes, gvals) == w


def test_sample_codes_needs_one_size():
    with pytest.raises(ValueError):
        sample_codes(THM1, SeededGenerator(0), "x", [0])


def test_chunking_is_worker_free():
    assert chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    f = _Square()
    assert map_chunks(f, 10, 3, workers=1) == map_chunks(f, 10, 3, workers=2)


class _Square:
    def __call__(self, a, b):
        return [i * i for i in range(a, b)]


def test_shapes_identical_across_worker_counts():
    order = LinearOrder.p1(THM1)
    kw = dict(n=300, nrows=3, ncols=2)
    import thoma_rsk.stats as st

    old = st.CELLS_PER_CHUNK
    st.CELLS_PER_CHUNK = 300 * 50  # several chunks
    try:
        (a,) = sample_shapes(THM1, order, SeededGenerator(9), "w", 400, workers=1, **kw)
        (b,) = sample_shapes(THM1, order, SeededGenerator(9), "w", 400, workers=3, **kw)
    finally:
        st.CELLS_PER_CHUNK = old
    for f in ("rows", "cols", "nrows", "lengths", "counts", "cont"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


# --------------------------------------------------------------------------
# Amalgamation
# --------------------------------------------------------------------------


def test_amalgamate_two_betas():
    p = validate_params([0.5], [0.3, 0.2])
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec.of_letters(order, [y1, y2]))
    assert sorted(am.params.alphas) == [0.5, 0.5]
    assert am.params.betas == () and am.params.gamma == 0
    z = am.new_letter
    assert amalgamate_word((x1, y1, y2), am) == (am.map_letter(x1), z, z)
    assert am.new_letter in am.order.weak


def test_amalgamate_single_row_letter():
    p = validate_params([0.5, 0.3], [0.2])
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec.of_letters(order, [x2]))
    assert am.params == p
    w = (x1, x2, y1)
    assert [type(a) for a in amalgamate_word(w, am)] == [RowLetter, RowLetter, ColLetter]


def test_amalgamate_g_prefix():
    p = validate_params([0.7], [], 0.3)
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec(order.position(G), order.position(G), (0.0, 0.5)))
    assert am.params.gamma == pytest.approx(0.15)
    assert 0.15 in [pytest.approx(a) for a in am.params.alphas]
    assert am.map_letter(ContLetter(0.25)) == am.new_letter
    assert am.map_letter(ContLetter(0.75)) == ContLetter(0.5)


def test_amalgamate_rejects_non_interval():
    p = validate_params([0.5, 0.3], [0.2])
    order = LinearOrder.p1(p)
    with pytest.raises(ValueError):
        AmalgamationSpec.of_letters(order, [x1, y1])
    with pytest.raises(ValueError):
        amalgamate(validate_params([0.7], [], 0.3), LinearOrder.p1(validate_params([0.7], [], 0.3)), AmalgamationSpec(1, 1, (0.2, 0.4)))


def test_word_without_interval_letters_unchanged_in_kind():
    p = validate_params([0.5], [0.3, 0.2])
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec.of_letters(order, [y1, y2]))
    assert amalgamate_word((x1, x1), am) == (am.map_letter(x1),) * 2


def test_pushforward_matches_direct_sampling():
    p = THM1
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec(2, 3, (0.0, 0.4)))  # y1 and part of G
    N = 100_000
    codes, gvals, _ = sample_codes(p, SeededGenerator(7), "push", [0], n=N)
    mc, _ = am.map_codes(codes, gvals)
    direct, _, _ = sample_codes(am.params, SeededGenerator(8), "direct", [0], n=N)
    k = len(am.params.masses)
    bins = list(range(-1, k))
    a = [(mc[0] == c).sum() for c in bins]
    b = [(direct[0] == c).sum() for c in bins]
    assert sps.chi2_contingency(np.array([a, b])).pvalue > 0.001


def test_map_codes_agrees_with_map_letter():
    p = THM1
    order = LinearOrder.p1(p)
    am = amalgamate(p, order, AmalgamationSpec(2, 3, (0.0, 0.4)))
    codes, gvals, _ = sample_codes(p, SeededGenerator(3), "agree", range(20), n=30)
    mc, mg = am.map_codes(codes, gvals)
    for t in range(20):
        w = decode_word(p, codes[t], gvals[t])
        assert decode_word(am.params, mc[t], mg[t]) == amalgamate_word(w, am)


def test_reduction_plan_thm1():
    plan = reduction_plan(THM1, 2)
    assert plan.l == 2 and plan.l2 == 0 and plan.m == 1
    assert plan.params.betas == () and plan.params.gamma == 0
    assert plan.params.alphas == pytest.approx((0.4, 0.25, 0.2, 0.15))
    assert plan.params.strictly_monotone


def test_reduction_plan_long_tail():
    p = validate_params([0.3, 0.2, 0.1, 0.05, 0.05], [0.15, 0.05, 0.03], 0.07)
    plan = reduction_plan(p, 2)
    assert plan.params.alphas[:2] == (0.3, 0.2)
    assert plan.l == 5 and plan.l2 == 2 and plan.m == 3
    # the beta tail 0.03 and the three G pieces become row letters lighter than every alpha
    assert plan.params.gamma == 0 and plan.params.betas == (0.15, 0.05)
    assert plan.params.alphas[5:] == pytest.approx((0.03, 0.08 / 3, 0.07 / 3, 0.02))
    assert plan.params.is_strict(2, 0)
    codes, gvals, _ = sample_codes(p, SeededGenerator(1), "plan", range(10), n=40)
    mc, _ = plan.map_codes(codes, gvals)
    for t in range(10):
        w = decode_word(p, codes[t], gvals[t])
        assert decode_word(plan.params, mc[t], np.zeros(40)) == plan.map_word(w)


def test_g_slices():
    m, d = g_slices(0.4, 0.1)
    assert m == 5 and sum(d) == pytest.approx(0, abs=1e-15)
    assert all(d[i] > d[i + 1] for i in range(m - 1))
    assert 0.4 / m + d[0] < 0.1 and 0.4 / m + d[-1] > 0
    assert g_slices(0.0, 0.1) == (0, ())


def test_split_tail_search_bounded():
    with pytest.raises(LookupError):
        split_tail_search([0.4, 0.3, 0.2, 0.1], 1, bound=10)


def test_code_letters():
    assert code_letters(THM1) == [x1, x2, y1]
