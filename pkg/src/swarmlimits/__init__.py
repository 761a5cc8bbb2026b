"""Particle swarms with alignment, their hydrodynamic and aggregation limits, and error metrics."""

from .continuum import (
    ContinuumState,
    ContinuumTrajectory,
    aggregation_residual,
    aggregation_velocity,
    euler_alignment_rhs,
    eval_velocity,
    evolve,
    init_from_density,
)
from .errors import (
    CharacteristicCrossing,
    ConfigError,
    MassMismatch,
    NoConvergence,
    NonPositiveDensity,
    NonPositiveValue,
    QuadratureFailure,
    SingularEvaluation,
    StiffnessWarning,
    SwarmLimitsError,
)
from .metrics import (
    DiscreteMeasure,
    ModulatedEnergyReport,
    dbl,
    dbl_pairwise_lp,
    local_moment_errors,
    modulated_kinetic_energy,
    modulated_potential_energy,
    w1_1d,
)
from .particle import (
    DiscreteFreeEnergy,
    ParticleState,
    ParticleTrajectory,
    dissipation_rate,
    dissipation_residual,
    free_energy,
    rhs,
    simulate,
    step,
)
from .potentials import PotentialSpec, V, W, grad_V, grad_W, grad_psi, psi
from .sampling import InitialData, sample_particles

__version__ = "0.1.0"
