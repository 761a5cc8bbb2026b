"""
The bounded-Lipschitz distance on the line
==========================================

d_BL(mu, nu) = sup { int phi d(mu - nu) : |phi| <= 1, Lip(phi) <= 1 }.

On the line the supremum only needs the Lipschitz constraint between
neighbouring support points, and the exact value comes from a dynamic
programme over concave piecewise-linear value functions. Here it is checked
against the full pairwise LP and against W1, and used to measure how well
quantile sampling approximates a density.
"""

import time

import numpy as np
from scipy.special import erf

from swarmlimits import DiscreteMeasure, InitialData, dbl, dbl_pairwise_lp, init_from_density, w1_1d
from swarmlimits.harness.scans import fit_slope
from swarmlimits.sampling import sample_positions

rng = np.random.default_rng(1)

# %%
# Two small measures: exact DP, pairwise LP, and W1 (an upper bound)
mu = DiscreteMeasure(rng.normal(size=6), rng.dirichlet(np.ones(6)))
nu = DiscreteMeasure(rng.normal(size=5) + 0.3, rng.dirichlet(np.ones(5)))
print("DP", dbl(mu, nu), " LP", dbl_pairwise_lp(mu, nu), " W1", w1_1d(mu, nu))

# %%
# Far apart point masses saturate at 2: the test function is capped at +-1
print("dirac gap 0.5 ->", dbl(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([0.5], [1.0])))
print("dirac gap 10  ->", dbl(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([10.0], [1.0])))

# %%
# The DP scales to tens of thousands of points
big_a = DiscreteMeasure.empirical(rng.normal(size=20000))
big_b = DiscreteMeasure.empirical(rng.normal(size=20000))
tic = time.perf_counter()
value = dbl(big_a, big_b)
print(f"20000 vs 20000 points: {value:.4e} in {time.perf_counter() - tic:.3f}s")

# %%
# Quantile sampling of a Gaussian: error ~ 1/N
def rho(x):
    return np.exp(-0.5 * x**2) / (np.sqrt(2 * np.pi) * erf(4 / np.sqrt(2)))


data = InitialData(rho, -4.0, 4.0)
fine = init_from_density(rho, -4.0, 4.0, 2**16)
ref = DiscreteMeasure(fine.nodes, fine.weights)
Ns = 2 ** np.arange(6, 12)
errs = [dbl(DiscreteMeasure.empirical(sample_positions(data, int(N))), ref) for N in Ns]
for N, e in zip(Ns, errs):
    print(f"N={N:5d}  d_BL={e:.3e}  N*d_BL={N * e:.3f}")
print("slope", round(fit_slope(np.column_stack([Ns, errs])).slope, 3))
