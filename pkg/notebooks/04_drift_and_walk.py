"""
Bounded drift and the reflecting walk
=====================================

E|lambda_i(n) - N_{x_i}(n)| stays bounded in n. The proof compares the
number of letters pushed out of the first row with a walk on the
nonnegative integers reflected at zero.
"""

# %%
from thoma_rsk import SeededGenerator, WalkConfig, run_drift, validate_params, walk_expectation_exact
from thoma_rsk.diagnostics import walk_positions

p = validate_params([0.4, 0.25], [0.2], 0.15)
rep = run_drift(p, 2, 1, [100, 400, 1600], 2000, gen=SeededGenerator(3))
for n, m, s in zip(rep.grid, rep.mean_abs, rep.se):
    print(n, m.round(3), s.round(3))
print("band excess (<= 0 means no growth):", rep.band_excess())

# %%
wc = WalkConfig(0.2, 0.5)
for n in (10, 100, 1000):
    print(n, walk_expectation_exact(wc, n), wc.bound())

# %%
pos = walk_positions(wc, 1000, 5000, SeededGenerator(4))
print(pos.mean(), pos.std() / len(pos) ** 0.5)
