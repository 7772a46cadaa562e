"""
Inserting words over a mixed alphabet
=====================================

Row letters (x) may repeat along a row, column letters (y) may repeat down a
column, and points of G behave like distinct column letters.
"""

# %%
from thoma_rsk import (
    G, ColLetter, ContLetter, LinearOrder, RowLetter,
    format_word, greene_ck, greene_rk, parse_word, rsk, rsk_bijection_inverse, transposed_rsk,
)

x1, x2, y1, y2 = RowLetter(1), RowLetter(2), ColLetter(1), ColLetter(2)
order = LinearOrder((x1, x2, y1, y2), frozenset({x1, x2}))
w = parse_word("x1 y1 y1 y2 x2 x1 y1")
out = rsk(w, order)
print(out.R.rows)
print(out.S.rows)
print(out.shape)

# %%
# The recording tableau lets us walk back to the word.
assert rsk_bijection_inverse(out.R, out.S, order) == w

# %%
# Partial row sums are the longest unions of k increasing subsequences,
# column sums the decreasing ones.
for k in (1, 2):
    print(k, greene_rk(w, order, k), greene_ck(w, order, k))

# %%
# Swapping the roles of the two letter classes and reversing the order transposes the shape.
print(transposed_rsk(w, order).shape, out.shape.transpose())

# %%
# Continuous letters can sit anywhere in the order.
mixed = LinearOrder((y1, x1, G, x2), frozenset({x1, x2}))
v = (x1, ContLetter(0.7), y1, ContLetter(0.2), x2, x1)
print(format_word(v), rsk(v, mixed).shape)
