"""
The exact measure on diagrams
=============================

M_n(lambda) is the Schur specialization at the Thoma parameters times the
number of standard tableaux. It is checked here against brute-force
enumeration of words and against the down-transition of the Young graph.
"""

# %%
from thoma_rsk import coherency_residual, measure_Mn, validate_params
from thoma_rsk.exact import dim_hook, enumerated_joint
from thoma_rsk.core import LinearOrder

p = validate_params([0.4, 0.25], [0.2], 0.15)
m = measure_Mn(p, 5)
for lam, prob in sorted(m.table.items(), key=lambda kv: -kv[1])[:5]:
    print(lam, round(prob, 6), dim_hook(lam))
print("total", m.total)

# %%
# Summing enumerated word weights by RSK shape gives the same numbers.
joint = enumerated_joint(p, 4, LinearOrder.p1(p))
by_shape = {}
for (shape, _), w in joint.items():
    by_shape[shape] = by_shape.get(shape, 0.0) + w
m4 = measure_Mn(p, 4)
print(max(abs(by_shape.get(lam, 0.0) - m4[lam]) for lam in m4.table))

# %%
for n in range(1, 8):
    print(n, coherency_residual(p, n))

# %%
# Rational arithmetic gives exact coherency.
print(coherency_residual(validate_params([0.6], [0.4]), 5, exact=True))
print(measure_Mn(validate_params([0.6], [0.4]), 2).to_csv())
