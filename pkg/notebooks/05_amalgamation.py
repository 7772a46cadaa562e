"""
Amalgamation and the first row
==============================

Merging an interval of the alphabet into one row letter can only lengthen
the leading rows. The first-row bookkeeping for two adjacent row letters
is read off from suffix excesses of the restricted word.
"""

# %%
from thoma_rsk import (
    AmalgamationSpec, LinearOrder, RowLetter, SeededGenerator,
    amalgamate, format_word, parse_word, possible_transformation, reduction_plan, restrict_word, rho, rsk_shape,
    sample_word, validate_params,
)
from thoma_rsk.sampling import amalgamate_word

p = validate_params([0.4, 0.25], [0.2], 0.15)
order = LinearOrder.p1(p)
am = amalgamate(p, order, AmalgamationSpec(2, 3, (0.0, 0.4)))
print(am.params, am.order.tokens())

# %%
gen = SeededGenerator(5)
worse = 0
for t in range(500):
    w = sample_word(p, 60, gen, "amalgamate", t)
    a, b = rsk_shape(w, order), rsk_shape(amalgamate_word(w, am), am.order)
    worse += any(sum(b[:k]) < sum(a[:k]) for k in (1, 2, 3))
print("violations:", worse)

# %%
# The reduction used for the drift bound: all later letters become light row letters.
plan = reduction_plan(p, 2)
print(plan.l, plan.l2, plan.m, plan.params)

# %%
x2, x3 = RowLetter(2), RowLetter(3)
o3 = LinearOrder.from_tokens(["x1", "x2", "x3"])
w = parse_word("x2 x1 x3 x2 x1 x2 x3 x3 x2 x3 x1 x3 x2")
r = restrict_word(w, x2, x3)
print(format_word(r), rho(r, x2, x3))
print(format_word(possible_transformation(w, x2, x3, o3)))
