"""
Particles versus their Euler-alignment limit
============================================

Sample N particles from a truncated Gaussian with velocity -tanh(x)/2, run
the damped flocking system to T = 1 and compare with a fine Lagrangian
Euler-alignment run. The bounded-Lipschitz distance at T should fall like
1/N and the kinetic gap E^N like 1/N^2.
"""

import numpy as np
from scipy.special import erf

from swarmlimits import (
    InitialData,
    PotentialSpec,
    dbl,
    evolve,
    init_from_density,
    modulated_kinetic_energy,
    sample_particles,
    simulate,
)
from swarmlimits.harness.scans import fit_slope
from swarmlimits.metrics import particle_measure, reference_measure

# %%
# Initial data and interaction kernels
mass = erf(4 / np.sqrt(2))


def rho0(x):
    return np.exp(-0.5 * x**2) / (np.sqrt(2 * np.pi) * mass)


def u0(x):
    return -0.5 * np.tanh(x)


spec = PotentialSpec(interaction="gaussian", communication="bump", radius=1.0, kappa=1.0)
data = InitialData(rho0, -4.0, 4.0, velocity=u0)

# %%
# The reference: 4096 Lagrangian nodes, RK4 with coarse steps (the flow is smooth)
ref = evolve(init_from_density(rho0, -4.0, 4.0, 4096, velocity=u0), spec, "euler_alignment",
             0.05, 1.0, gamma=1.0, epsilon=1.0)
final_ref = ref.state(len(ref) - 1)

# %%
# Particle runs
Ns = np.array([32, 64, 128, 256, 512])
dist, kin = [], []
for N in Ns:
    traj = simulate(sample_particles(data, int(N), epsilon=1.0, gamma=1.0), spec, 1e-2, 1.0)
    pT = traj.state(len(traj) - 1)
    dist.append(dbl(particle_measure(pT), reference_measure(final_ref)))
    kin.append(modulated_kinetic_energy(pT, final_ref))
    print(f"N={N:4d}  d_BL(T)={dist[-1]:.3e}  E(T)={kin[-1]:.3e}")

print("d_BL slope", round(fit_slope(np.column_stack([Ns, dist])).slope, 3))
print("E slope   ", round(fit_slope(np.column_stack([Ns, kin])).slope, 3))
