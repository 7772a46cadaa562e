"""
Row and column fluctuations
===========================

(lambda_i - alpha_i n) / sqrt(n) and (lambda'_j - beta_j n) / sqrt(n) settle
to a Gaussian vector whose covariance is that of the letter counts.
"""

# %%
import numpy as np

from thoma_rsk import SeededGenerator, run_clt, run_clt_poisson, theoretical_covariance, validate_params

p = validate_params([0.4, 0.25], [0.2], 0.15)
print(theoretical_covariance(p, 2, 1))

# %%
sample, report = run_clt(p, 2, 1, 1000, 5000, gen=SeededGenerator(1))
np.set_printoptions(precision=4, suppress=True)
print(report.cov)
print("largest deviation in SE:", report.max_cov_z)
print("means:", report.mean, "KS:", report.ks)

# %%
# The mean is not zero at finite n: lambda_i minus the count of x_i has a
# positive expectation of order one, which shows up divided by sqrt(n).
print(sample.values.mean(axis=0) * np.sqrt(1000))

# %%
# Poissonizing the length decouples the coordinates.
_, prep = run_clt_poisson(p, 2, 1, 1000.0, 5000, gen=SeededGenerator(2))
print(prep.cov)
