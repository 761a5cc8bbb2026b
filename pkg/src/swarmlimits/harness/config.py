"""
Experiment configuration: one JSON object per run, unknown keys rejected.

Densities and velocity profiles are chosen by name from small registries so
a config file stays a plain data document.
"""

import json
from dataclasses import dataclass, field, fields
from math import erf, sqrt
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..potentials import PotentialSpec
from ..sampling import InitialData

EXPERIMENTS = ("mean_field_scan", "inertia_scan", "single_run", "dissipation_check")
CHECK_KEYS = {
    "error_decreasing",
    "dbl_slope",
    "sup_kinetic_slope",
    "integrated_kinetic_slope",
    "max_runtime",
    "min_separation_positive",
    "max_dissipation_residual",
    "min_halving_ratio",
    "max_energy_drift",
    "max_solver_residual",
}


def _gaussian(a, b):
    mass = 0.5 * (erf(b / sqrt(2.0)) - erf(a / sqrt(2.0)))

    def rho(x):
        return np.exp(-0.5 * np.asarray(x) ** 2) / (sqrt(2.0 * np.pi) * mass)

    return rho


def _uniform(a, b):
    def rho(x):
        return np.full(np.shape(x), 1.0 / (b - a))

    return rho


DENSITIES = {"gaussian": _gaussian, "uniform": _uniform}


def _tanh(amp):
    return lambda x: amp * np.tanh(x)


def _linear(amp):
    return lambda x: amp * np.asarray(x, dtype=float)


def _zero(amp):
    return lambda x: np.zeros(np.shape(x))


# "aggregation" means: take the aggregation velocity of the reference at t = 0
VELOCITIES = {"tanh": _tanh, "linear": _linear, "zero": _zero, "aggregation": None}


@dataclass
class ExperimentConfig:
    experiment: str
    name: str = "experiment"
    dimension: int = 1
    confinement: str = "quadratic"
    interaction: str = "gaussian"
    strength: float = 1.0
    width: float = 1.0
    alpha: float = 0.0
    communication: str = "bump"
    radius: float = 1.0
    kappa: float = 1.0
    density: str = "gaussian"
    domain: tuple = (-4.0, 4.0)
    velocity: str = "tanh"
    velocity_amplitude: float = -0.5
    sampling: str = "quantile"
    seed: int = 0
    perturbation: object = 0.0
    T: float = 1.0
    dt: float = 1e-3
    method: str = None
    M: int = 8192
    reference_dt: float = 0.05
    reference_method: str = None
    reference_model: str = None
    N_list: list = None
    epsilon_list: list = None
    N: int = 256
    epsilon: float = 1.0
    gamma: float = 1.0
    sample_every: int = 10
    self_convergence: bool = True
    output_dir: str = "out"
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not self.dt > 0 or not self.T > 0:
            raise ConfigError("dt and T must be positive")
        if not self.reference_dt > 0:
            raise ConfigError("reference_dt must be positive")
        self.domain = tuple(float(v) for v in self.domain)
        if len(self.domain) != 2 or not self.domain[1] > self.domain[0]:
            raise ConfigError("domain must be [a, b] with a < b")
        if self.density not in DENSITIES:
            raise ConfigError(f"unknown density {self.density!r}; expected one of {sorted(DENSITIES)}")
        if self.velocity not in VELOCITIES:
            raise ConfigError(f"unknown velocity {self.velocity!r}; expected one of {sorted(VELOCITIES)}")
        if not (isinstance(self.perturbation, (int, float)) or self.perturbation == "sqrt_epsilon"):
            raise ConfigError("perturbation must be a number or 'sqrt_epsilon'")
        if self.sample_every < 1 or round(self.T / self.dt) % self.sample_every:
            raise ConfigError(f"T/dt = {round(self.T / self.dt)} steps is not a multiple of sample_every={self.sample_every}")
        unknown = set(self.checks) - CHECK_KEYS
        if unknown:
            raise ConfigError(f"unknown checks {sorted(unknown)}")
        if self.experiment in ("mean_field_scan", "inertia_scan", "single_run") and self.dimension != 1:
            raise ConfigError("continuum reference runs are one-dimensional")
        if self.experiment == "mean_field_scan":
            self._need_list("N_list")
            self._finer_reference(max(self.N_list))
        if self.experiment == "inertia_scan":
            self._need_list("epsilon_list")
            if any(not e > 0 for e in self.epsilon_list):
                raise ConfigError("every epsilon must be positive")
            self._finer_reference(self.N)
            if self.velocity not in ("aggregation",):
                raise ConfigError("inertia_scan prepares velocities from the aggregation field; set velocity to 'aggregation'")
        try:
            self.spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def _need_list(self, key):
        values = getattr(self, key)
        if not values:
            raise ConfigError(f"{self.experiment} needs a non-empty {key}")
        if len(values) != len(set(values)):
            raise ConfigError(f"{key} has repeated entries")

    def _finer_reference(self, n):
        if self.M < 4 * n:
            raise ConfigError(f"reference resolution M={self.M} must be at least 4 x {n}")

    def spec(self):
        return PotentialSpec(
            dimension=self.dimension,
            confinement=self.confinement,
            interaction=self.interaction,
            strength=self.strength,
            width=self.width,
            alpha=self.alpha,
            communication=self.communication,
            radius=self.radius,
            kappa=self.kappa,
        )

    def density_fn(self):
        return DENSITIES[self.density](*self.domain)

    def velocity_fn(self):
        make = VELOCITIES[self.velocity]
        return None if make is None else make(self.velocity_amplitude)

    def delta(self, epsilon):
        if self.perturbation == "sqrt_epsilon":
            return sqrt(epsilon)
        return float(self.perturbation)

    def initial_data(self, epsilon=None, velocity=None):
        eps = self.epsilon if epsilon is None else epsilon
        a, b = self.domain
        return InitialData(
            self.density_fn(),
            a,
            b,
            velocity=velocity if velocity is not None else self.velocity_fn(),
            mode=self.sampling,
            seed=self.seed,
            perturbation=self.delta(eps),
        )

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["domain"] = list(self.domain)
        return out


def from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in raw:
        raise ConfigError("config needs an 'experiment' key")
    return ExperimentConfig(**raw)


def load_config(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if isinstance(raw, dict):
        raw.setdefault("name", path.stem)
    return from_dict(raw)
