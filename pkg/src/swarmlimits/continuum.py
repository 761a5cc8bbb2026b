"""
Lagrangian solvers for the pressureless Euler-alignment system and the
aggregation equation.

The density is carried by quadrature nodes that move along characteristics
with fixed weights, so mass is conserved exactly. Euler-alignment nodes carry
their own velocity and obey the particle equations with weights w_k. For the
aggregation equation the node velocity solves, at every instant, the linear
relation

    gamma u_k + sum_j w_j psi_kj (u_k - u_j) = -grad V(x_k) - sum_j w_j grad W(x_k - x_j).

Only the 1D reference runs are supported for interpolation; 1D node order
is monitored and a crossing raises :class:`CharacteristicCrossing`.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels
from .errors import CharacteristicCrossing, NoConvergence, NonPositiveDensity, SingularEvaluation
from .particle import check_step, n_steps_for, rk4_step, semi_implicit_step, weighted_rhs
from .potentials import grad_V

DIRECT_SOLVE_LIMIT = 4096


@dataclass
class ContinuumState:
    """Quadrature nodes, weights (summing to 1) and nodal velocities."""

    nodes: np.ndarray
    weights: np.ndarray
    velocities: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.nodes = np.array(self.nodes, dtype=float)
        if self.nodes.ndim == 1:
            self.nodes = self.nodes[:, None]
        self.velocities = np.array(self.velocities, dtype=float)
        if self.velocities.ndim == 1:
            self.velocities = self.velocities[:, None]
        self.weights = np.array(self.weights, dtype=float)
        if self.nodes.shape != self.velocities.shape or self.weights.shape != (self.nodes.shape[0],):
            raise ValueError("nodes, velocities and weights have inconsistent shapes")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {self.weights.sum()!r}, expected 1")

    @property
    def M(self):
        return self.nodes.shape[0]

    @property
    def d(self):
        return self.nodes.shape[1]

    def copy(self):
        return replace(self, nodes=self.nodes.copy(), velocities=self.velocities.copy())


def init_from_density(density, a, b, M, velocity=None):
    """Midpoint-rule nodes on [a, b] with weights rho0(x_k) dx, renormalized to sum 1."""
    if M < 2:
        raise ValueError(f"need M >= 2 quadrature nodes, got {M}")
    if not b > a:
        raise ValueError("empty interval")
    dx = (b - a) / M
    nodes = a + dx * (np.arange(M) + 0.5)
    rho = np.asarray(density(nodes), dtype=float)
    if rho.shape != nodes.shape:
        rho = np.broadcast_to(rho, nodes.shape).astype(float)
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise NonPositiveDensity("initial density must be positive at every quadrature node")
    w = rho * dx
    w = w / w.sum()
    u = np.zeros(M) if velocity is None else np.asarray(velocity(nodes), dtype=float)
    return ContinuumState(nodes[:, None], w, np.broadcast_to(u, nodes.shape)[:, None].copy())


def euler_alignment_rhs(state, spec, epsilon, gamma):
    """(dnodes, dvelocities) of the Euler-alignment system along characteristics."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    return weighted_rhs(state.nodes, state.velocities, state.weights, spec, gamma, epsilon)


def _is_sorted_1d(x):
    return x.shape[1] == 1 and bool(np.all(np.diff(x[:, 0]) > 0))


def _forcing(x, w, spec):
    """b_k = -grad V(x_k) - sum_j w_j grad W(x_k - x_j)."""
    b = -grad_V(spec, x)
    wcode, c, a = spec.kernel_params()
    if wcode:
        f = np.empty_like(x)
        status = _kernels.interaction_sum(x, w, wcode, c, a, f)
        if status >= 0:
            raise SingularEvaluation(f"node {status} coincides with another node under a singular interaction")
        b -= f
    return b


def alignment_bound(state, spec):
    """max_k sum_j w_j psi(x_k - x_j): the damping must exceed it for contraction."""
    pcode, R, kappa = spec.psi_params()
    if not pcode:
        return 0.0
    x = np.ascontiguousarray(state.nodes)
    s = np.empty(state.M)
    _kernels.psi_rowsum(x, state.weights, R, kappa, _is_sorted_1d(x), s)
    return float(s.max())


def _direct_solve(x, w, b, spec, gamma):
    M, d = x.shape
    pcode, R, kappa = spec.psi_params()
    diff = x[:, None, :] - x[None, :, :]
    q = np.maximum(1.0 - np.sum(diff * diff, axis=-1) / (R * R), 0.0)
    P = kappa * q * q * w[None, :]
    np.fill_diagonal(P, 0.0)
    A = np.diag(gamma + P.sum(axis=1)) - P
    return np.linalg.solve(A, b)


def aggregation_velocity(state, spec, gamma, tol=1e-12, max_iters=10_000, damping=0.5,
                         initial=None, return_info=False):
    """Velocity field of the aggregation equation at the nodes.

    Solved by the damped fixed-point iteration
    ``u <- (1 - damping) u + damping (b + A u) / gamma`` until the residual
    ``|gamma u - A u - b|_inf <= tol * max(1, |b|_inf)``. If the iteration
    stalls while ``gamma`` exceeds the alignment bound, a dense direct solve
    is used; otherwise :class:`NoConvergence` is raised.
    """
    if not gamma > 0:
        raise ValueError("aggregation velocity needs gamma > 0")
    x = np.ascontiguousarray(state.nodes)
    w = state.weights
    b = _forcing(x, w, spec)
    pcode, R, kappa = spec.psi_params()
    info = {"iterations": 0, "method": "closed_form", "residual": 0.0}
    if not pcode:
        u = b / gamma
        return (u, info) if return_info else u

    sorted1d = _is_sorted_1d(x)
    scale = tol * max(1.0, float(np.max(np.abs(b))))
    u = b / gamma if initial is None else np.array(initial, dtype=float).reshape(b.shape)
    Au = np.empty_like(u)
    res0 = None
    for it in range(max_iters + 1):
        _kernels.alignment_apply(x, w, u, R, kappa, sorted1d, Au)
        r = gamma * u - Au - b
        res = float(np.max(np.abs(r)))
        if res0 is None:
            res0 = max(res, 1e-300)
        if res <= scale:
            info.update(iterations=it, method="fixed_point", residual=res)
            return (u, info) if return_info else u
        if not np.isfinite(res) or res > 1e8 * res0:
            break
        u = u - (damping / gamma) * r

    bound = alignment_bound(state, spec)
    if bound < gamma and state.M <= DIRECT_SOLVE_LIMIT:
        u = _direct_solve(x, w, b, spec, gamma)
        _kernels.alignment_apply(x, w, u, R, kappa, sorted1d, Au)
        res = float(np.max(np.abs(gamma * u - Au - b)))
        info.update(iterations=it, method="direct", residual=res)
        return (u, info) if return_info else u
    raise NoConvergence(
        f"fixed-point iteration did not reach the residual tolerance after {it} iterations "
        f"(residual {res:.3e}); gamma={gamma:g} vs alignment bound {bound:.3g}"
    )


def aggregation_residual(state, spec, gamma, u):
    """max-norm residual of the aggregation relation, by direct dense summation."""
    x = state.nodes
    b = _forcing(np.ascontiguousarray(x), state.weights, spec)
    pcode, R, kappa = spec.psi_params()
    Au = np.zeros_like(u)
    if pcode:
        for k in range(state.M):
            r2 = np.sum((x[k] - x) ** 2, axis=1)
            q = np.maximum(1.0 - r2 / (R * R), 0.0)
            Au[k] = (state.weights * kappa * q * q) @ (u - u[k])
    return float(np.max(np.abs(gamma * u - Au - b)))


def eval_velocity(state, query):
    """Piecewise-linear interpolation of nodal velocity; constant outside the hull (1D)."""
    if state.d != 1:
        raise ValueError("velocity interpolation is implemented for 1D reference states")
    xn = state.nodes[:, 0]
    if np.any(np.diff(xn) <= 0):
        raise CharacteristicCrossing("reference nodes are not strictly ordered", t=state.t)
    q = np.asarray(query, dtype=float)
    if q.ndim == 2:
        q = q[:, 0]
    return np.interp(q, xn, state.velocities[:, 0])[:, None]


@dataclass
class ContinuumTrajectory:
    """Sampled continuum run; nodes and velocities have shape (K, M, d)."""

    times: np.ndarray
    nodes: np.ndarray
    velocities: np.ndarray
    weights: np.ndarray
    model: str
    gamma: float
    epsilon: float = None
    solver_residuals: np.ndarray = None

    def __len__(self):
        return len(self.times)

    def state(self, k):
        return ContinuumState(self.nodes[k], self.weights, self.velocities[k], float(self.times[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self.state(k)

    def _splines(self):
        if not hasattr(self, "_cached_splines"):
            if len(self.times) < 2:
                raise ValueError("need at least two samples to interpolate in time")
            self._cached_splines = (
                CubicSpline(self.times, self.nodes, axis=0),
                CubicSpline(self.times, self.velocities, axis=0),
            )
        return self._cached_splines

    def state_at(self, t):
        """State at time t; exact at sample times, cubic-spline interpolated between."""
        k = np.searchsorted(self.times, t)
        if k < len(self.times) and abs(self.times[k] - t) <= 1e-12 * max(1.0, abs(t)):
            return self.state(k)
        if k > 0 and abs(self.times[k - 1] - t) <= 1e-12 * max(1.0, abs(t)):
            return self.state(k - 1)
        if t < self.times[0] or t > self.times[-1]:
            raise ValueError(f"t={t} outside the sampled interval")
        sx, su = self._splines()
        return ContinuumState(sx(t), self.weights, su(t), float(t))

    def material_acceleration(self):
        """Finite-difference estimate of du/dt along nodes at the sample midpoints, shape (K-1, M, d)."""
        return np.diff(self.velocities, axis=0) / np.diff(self.times)[:, None, None]


def _check_order(x, t):
    if x.shape[1] == 1 and np.any(np.diff(x[:, 0]) <= 0):
        raise CharacteristicCrossing(f"characteristics crossed before t={t:.6g}", t=t)


def evolve(state, spec, model, dt, T, gamma, epsilon=None, method=None, every=1):
    """Integrate the continuum model and return the sampled trajectory.

    ``model`` is ``"euler_alignment"`` (needs ``epsilon``; ``method`` is
    ``"rk4"`` or ``"semi_implicit"``, the same steppers as the particle
    system) or ``"aggregation"`` (``method`` ``"rk2"`` or ``"rk4"`` on the
    node positions, recomputing the velocity at every stage).
    """
    n = n_steps_for(T, dt)
    if n % every:
        raise ValueError("the number of steps must be a multiple of the sampling stride")
    x = np.ascontiguousarray(state.nodes.copy())
    w = state.weights
    K = n // every + 1
    xs = np.empty((K,) + x.shape)
    us = np.empty_like(xs)
    if state.d == 1 and np.any(np.diff(x[:, 0]) <= 0):
        raise CharacteristicCrossing("initial nodes are not strictly ordered", t=state.t)

    if model == "euler_alignment":
        method = method or "rk4"
        if epsilon is None:
            raise ValueError("euler_alignment needs epsilon")
        check_step(dt, method, gamma, epsilon)
        step = rk4_step if method == "rk4" else semi_implicit_step
        u = state.velocities.copy()
        xs[0], us[0] = x, u
        for k in range(1, n + 1):
            x, u = step(x, u, w, spec, gamma, epsilon, dt)
            _check_order(x, state.t + k * dt)
            if k % every == 0:
                xs[k // every], us[k // every] = x, u
        times = state.t + dt * every * np.arange(K)
        return ContinuumTrajectory(times, xs, us, w.copy(), model, gamma, epsilon)

    if model != "aggregation":
        raise ValueError(f"unknown model {model!r}")
    method = method or "rk2"
    if method not in ("rk2", "rk4"):
        raise ValueError("aggregation stepping is 'rk2' or 'rk4'")
    if not dt > 0:
        raise ValueError("time step must be positive")
    residuals = []

    def velocity(pos, guess):
        st = ContinuumState(pos, w, np.zeros_like(pos), 0.0)
        u, info = aggregation_velocity(st, spec, gamma, initial=guess, return_info=True)
        residuals.append(info["residual"])
        return u

    u = velocity(x, None)
    xs[0], us[0] = x, u
    for k in range(1, n + 1):
        if method == "rk2":
            k2 = velocity(x + dt * u, u)
            x = x + 0.5 * dt * (u + k2)
        else:
            k2 = velocity(x + 0.5 * dt * u, u)
            k3 = velocity(x + 0.5 * dt * k2, k2)
            k4 = velocity(x + dt * k3, k3)
            x = x + (dt / 6.0) * (u + 2.0 * k2 + 2.0 * k3 + k4)
        _check_order(x, state.t + k * dt)
        u = velocity(x, u)
        if k % every == 0:
            xs[k // every], us[k // every] = x, u
    times = state.t + dt * every * np.arange(K)
    return ContinuumTrajectory(times, xs, us, w.copy(), model, gamma, None, np.array(residuals))
