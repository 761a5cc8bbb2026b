"""
Confinement, interaction and communication kernels.

Every kernel is radial. Interaction gradients are written as
``grad W(r) = g(|r|^2) * r`` so that ``grad_W(-r) == -grad_W(r)`` holds
bit-for-bit: negating a float is exact and ``|-r|^2 == |r|^2``.

Families
--------
confinement
    ``"none"`` or ``"quadratic"`` (``V(x) = |x|^2 / 2``).
interaction
    ``"none"``; ``"gaussian"`` (``W = strength * exp(-|x|^2 / (2 width^2))``);
    ``"coulomb"`` (``-|x|/2`` in 1D, ``-log|x| / (2 pi)`` in 2D,
    ``|x|^(2-d) / (d (d-2) alpha_d)`` for d >= 3); ``"riesz"``
    (``|x|^-alpha`` with ``max(d-2, 0) <= alpha < d``); ``"log"``
    (``-log|x|``, d = 1 or 2).
communication
    ``"none"`` or ``"bump"``: ``psi = kappa * (1 - |x|^2/R^2)^2`` for
    ``|x| < R`` and zero otherwise. It is C^1, even, and peaks at ``kappa``.
"""

from dataclasses import dataclass
from math import gamma as _gamma_fn
from math import pi

import numpy as np

from .errors import SingularEvaluation

CONFINEMENTS = ("none", "quadratic")
INTERACTIONS = ("none", "gaussian", "coulomb", "riesz", "log")
COMMUNICATIONS = ("none", "bump")

# Integer codes shared with the compiled pair kernels.
W_NONE, W_GAUSS, W_ABS, W_LOG, W_POWER = 0, 1, 2, 3, 4


def unit_ball_volume(d):
    return pi ** (d / 2) / _gamma_fn(d / 2 + 1)


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative description of V, W and psi on R^d."""

    dimension: int = 1
    confinement: str = "quadratic"
    interaction: str = "none"
    strength: float = 1.0
    width: float = 1.0
    alpha: float = 0.0
    communication: str = "none"
    radius: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        d = self.dimension
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ValueError(f"dimension must be a positive integer, got {d!r}")
        if self.confinement not in CONFINEMENTS:
            raise ValueError(f"unknown confinement {self.confinement!r}")
        if self.interaction not in INTERACTIONS:
            raise ValueError(f"unknown interaction {self.interaction!r}")
        if self.communication not in COMMUNICATIONS:
            raise ValueError(f"unknown communication {self.communication!r}")
        if self.interaction == "gaussian" and self.width <= 0:
            raise ValueError("gaussian width must be positive")
        if self.interaction == "riesz" and not (max(d - 2, 0) <= self.alpha < d):
            raise ValueError(
                f"riesz exponent must satisfy max(d-2, 0) <= alpha < d, got alpha={self.alpha}, d={d}"
            )
        if self.interaction == "log" and d > 2:
            raise ValueError("log interaction is defined for d = 1 or 2 only")
        if self.communication == "bump" and (self.radius <= 0 or self.kappa < 0):
            raise ValueError("bump needs radius > 0 and kappa >= 0")

    @property
    def singular(self):
        return self.interaction in ("coulomb", "riesz", "log")

    def kernel_params(self):
        """(code, c, a) triple describing W for the compiled kernels.

        gaussian: W = c exp(-r^2 / (2 a^2));  abs: W = -c r;
        log: W = -c log r;  power: W = c r^-a.
        """
        d = self.dimension
        kind = self.interaction
        if kind == "none":
            return W_NONE, 0.0, 1.0
        if kind == "gaussian":
            return W_GAUSS, float(self.strength), float(self.width)
        if kind == "coulomb":
            if d == 1:
                return W_ABS, 0.5, 1.0
            if d == 2:
                return W_LOG, 1.0 / (2.0 * pi), 0.0
            return W_POWER, 1.0 / (d * (d - 2) * unit_ball_volume(d)), float(d - 2)
        if kind == "riesz":
            return W_POWER, 1.0, float(self.alpha)
        return W_LOG, 1.0, 0.0

    def psi_params(self):
        if self.communication == "none":
            return 0, 1.0, 0.0
        return 1, float(self.radius), float(self.kappa)


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != d:
        if d == 1:
            x = x[..., None]
        else:
            raise ValueError(f"expected trailing dimension {d}, got shape {x.shape}")
    return x


def V(spec, x):
    x = _as_points(x, spec.dimension)
    if spec.confinement == "none":
        return np.zeros(x.shape[:-1])
    return 0.5 * np.sum(x * x, axis=-1)


def grad_V(spec, x):
    x = _as_points(x, spec.dimension)
    if spec.confinement == "none":
        return np.zeros_like(x)
    return x.copy()


def _radial_factor(spec, r2):
    """g(r^2) with grad W(r) = g * r; r2 must be nonzero for singular families."""
    code, c, a = spec.kernel_params()
    if code == W_NONE:
        return np.zeros_like(r2)
    if code == W_GAUSS:
        return -(c / (a * a)) * np.exp(-0.5 * r2 / (a * a))
    with np.errstate(divide="ignore"):
        if code == W_ABS:
            # sgn(0) = 0 convention for the 1D Coulomb force
            r = np.sqrt(r2)
            return np.where(r > 0, -c / np.where(r > 0, r, 1.0), 0.0)
        if code == W_LOG:
            return -c / r2
        return -a * c * r2 ** (-0.5 * a - 1.0)


def _check_singular(spec, r2):
    # a subnormal r^2 overflows 1/r^2 just like an exact zero
    code = spec.kernel_params()[0]
    if code in (W_LOG, W_POWER) and np.any(r2 < np.finfo(float).tiny):
        raise SingularEvaluation(
            f"{spec.interaction} interaction evaluated at zero separation; "
            "exclude the diagonal from the pair sum"
        )


def W(spec, r):
    """Interaction potential value W(r)."""
    r = _as_points(r, spec.dimension)
    r2 = np.sum(r * r, axis=-1)
    _check_singular(spec, r2)
    code, c, a = spec.kernel_params()
    if code == W_NONE:
        return np.zeros_like(r2)
    if code == W_GAUSS:
        return c * np.exp(-0.5 * r2 / (a * a))
    if code == W_ABS:
        return -c * np.sqrt(r2)
    if code == W_LOG:
        return -0.5 * c * np.log(r2)
    return c * r2 ** (-0.5 * a)


def grad_W(spec, r):
    """Gradient of W at displacement(s) r.

    Raises SingularEvaluation at r = 0 for the log and power-law families.
    The 1D Coulomb force is bounded and uses sgn(0) = 0 instead.
    """
    r = _as_points(r, spec.dimension)
    r2 = np.sum(r * r, axis=-1)
    _check_singular(spec, r2)
    return _radial_factor(spec, r2)[..., None] * r


def psi(spec, r):
    r = _as_points(r, spec.dimension)
    if spec.communication == "none":
        return np.zeros(r.shape[:-1])
    R, kappa = spec.radius, spec.kappa
    q = np.maximum(1.0 - np.sum(r * r, axis=-1) / (R * R), 0.0)
    return kappa * q * q


def grad_psi(spec, r):
    r = _as_points(r, spec.dimension)
    if spec.communication == "none":
        return np.zeros_like(r)
    R, kappa = spec.radius, spec.kappa
    q = np.maximum(1.0 - np.sum(r * r, axis=-1) / (R * R), 0.0)
    return (-4.0 * kappa / (R * R) * q)[..., None] * r
