"""
Error functionals between particle and continuum descriptions.

The bounded-Lipschitz distance

    d_BL(mu, nu) = sup { int phi d(mu - nu) : |phi|_inf <= 1, Lip(phi) <= 1 }

between finitely supported measures reduces to a finite LP in the values
phi_i on the union support. In 1D only the constraints between sorted
neighbours are needed, and the LP is a chain that :func:`_dbl_chain` solves
exactly by dynamic programming over concave piecewise-linear value
functions. In higher dimensions the full pairwise LP is handed to HiGHS.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from . import _kernels
from .continuum import eval_velocity
from .errors import MassMismatch, SingularEvaluation

CANONICAL_TOL = 1e-12
PAIRWISE_WARN = 2000


@dataclass
class DiscreteMeasure:
    """Weighted point masses on R^d; masses may be signed."""

    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        s = np.array(self.support, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        m = np.array(self.masses, dtype=float).reshape(-1)
        if s.shape[0] != m.shape[0]:
            raise ValueError("support and masses have different lengths")
        if not np.all(np.isfinite(m)) or not np.all(np.isfinite(s)):
            raise ValueError("support and masses must be finite")
        self.support, self.masses = s, m

    @property
    def d(self):
        return self.support.shape[1]

    @property
    def total(self):
        return float(self.masses.sum())

    @classmethod
    def empirical(cls, points):
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        return cls(points, np.full(n, 1.0 / n))

    def canonical(self, tol=CANONICAL_TOL):
        """Merge points closer than ``tol`` (1D: consecutive after sorting; else exact duplicates)."""
        return _merge(self.support, self.masses, tol)


def _merge(support, masses, tol):
    if support.shape[0] == 0:
        return DiscreteMeasure(support, masses)
    if support.shape[1] == 1:
        order = np.argsort(support[:, 0], kind="stable")
        z, m = support[order, 0], masses[order]
        new_group = np.concatenate([[True], np.diff(z) > tol])
        idx = np.cumsum(new_group) - 1
        return DiscreteMeasure(z[new_group][:, None], np.bincount(idx, weights=m))
    uniq, inv = np.unique(np.round(support / tol) * tol if tol > 0 else support, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    return DiscreteMeasure(uniq, np.bincount(inv, weights=masses, minlength=len(uniq)))


def _difference(mu, nu):
    if mu.d != nu.d:
        raise ValueError("measures live in different dimensions")
    pts = np.concatenate([mu.support, nu.support])
    c = np.concatenate([mu.masses, -nu.masses])
    return _merge(pts, c, CANONICAL_TOL)


def _dbl_chain(z, c):
    """max sum c_i phi_i s.t. |phi_i| <= 1, |phi_{i+1} - phi_i| <= z_{i+1} - z_i.

    The value function f_i(phi) (best partial objective with phi_i = phi)
    is concave and piecewise linear on [-1, 1]; it is stored by its
    breakpoints. Going from i-1 to i, f is dilated by the gap g (the part
    left of the argmax moves left by g, the part right of it moves right by
    g, the maximum is held flat in between), clipped to [-1, 1], and the
    linear term c_i phi is added.
    """
    X = np.array([-1.0, 1.0])
    Y = np.array([-c[0], c[0]])
    for i in range(1, len(c)):
        g = z[i] - z[i - 1]
        p = int(np.argmax(Y))
        Xs = np.concatenate([X[: p + 1] - g, X[p:] + g])
        Ys = np.concatenate([Y[: p + 1], Y[p:]])
        inner = (Xs > -1.0) & (Xs < 1.0)
        lo, hi = np.interp([-1.0, 1.0], Xs, Ys)
        X = np.concatenate([[-1.0], Xs[inner], [1.0]])
        Y = np.concatenate([[lo], Ys[inner], [hi]])
        Y = Y + c[i] * X
        if len(X) > 64:
            X, Y = _drop_collinear(X, Y)
    return float(np.max(Y))


def _drop_collinear(X, Y):
    dX = np.diff(X)
    keep_seg = dX > 0
    X, Y = np.concatenate([X[:1], X[1:][keep_seg]]), np.concatenate([Y[:1], Y[1:][keep_seg]])
    s = np.diff(Y) / np.diff(X)
    bend = np.abs(np.diff(s)) > 1e-14 * (1.0 + np.abs(s[1:]) + np.abs(s[:-1]))
    mask = np.concatenate([[True], bend, [True]])
    return X[mask], Y[mask]


def dbl_pairwise_lp(mu, nu):
    """d_BL through the LP with every pairwise Lipschitz constraint (HiGHS)."""
    diff = _difference(mu, nu)
    z, c = diff.support, diff.masses
    m = len(c)
    if m == 0:
        return 0.0
    if m > PAIRWISE_WARN:
        warnings.warn(f"pairwise d_BL LP with {m} support points has {m * (m - 1)} constraints",
                      RuntimeWarning, stacklevel=2)
    if m == 1:
        return float(abs(c[0]))
    i, j = np.triu_indices(m, k=1)
    dist = np.sqrt(np.sum((z[i] - z[j]) ** 2, axis=1))
    npair = len(i)
    rows = np.concatenate([np.arange(npair), np.arange(npair), npair + np.arange(npair), npair + np.arange(npair)])
    cols = np.concatenate([i, j, i, j])
    vals = np.concatenate([np.ones(npair), -np.ones(npair), -np.ones(npair), np.ones(npair)])
    A = coo_matrix((vals, (rows, cols)), shape=(2 * npair, m)).tocsr()
    bnd = np.concatenate([dist, dist])
    res = linprog(-c, A_ub=A, b_ub=bnd, bounds=[(-1.0, 1.0)] * m, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if not res.success:
        raise RuntimeError(f"d_BL LP failed: {res.message}")
    return float(-res.fun)


def dbl_adjacent_lp(mu, nu):
    """1D d_BL through the chain LP with only neighbour constraints (HiGHS)."""
    diff = _difference(mu, nu)
    if diff.d != 1:
        raise ValueError("the adjacent-constraint LP is one-dimensional")
    z, c = diff.support[:, 0], diff.masses
    m = len(c)
    if m <= 1:
        return float(abs(c[0])) if m else 0.0
    g = np.diff(z)
    k = np.arange(m - 1)
    rows = np.concatenate([k, k, m - 1 + k, m - 1 + k])
    cols = np.concatenate([k + 1, k, k + 1, k])
    vals = np.concatenate([np.ones(m - 1), -np.ones(m - 1), -np.ones(m - 1), np.ones(m - 1)])
    A = coo_matrix((vals, (rows, cols)), shape=(2 * (m - 1), m)).tocsr()
    res = linprog(-c, A_ub=A, b_ub=np.concatenate([g, g]), bounds=[(-1.0, 1.0)] * m, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if not res.success:
        raise RuntimeError(f"d_BL LP failed: {res.message}")
    return float(-res.fun)


def dbl(mu, nu):
    """Bounded-Lipschitz distance between two finitely supported (possibly signed) measures."""
    diff = _difference(mu, nu)
    if len(diff.masses) == 0:
        return 0.0
    if diff.d == 1:
        return float(_kernels.dbl_chain(np.ascontiguousarray(diff.support[:, 0]), diff.masses))
    return dbl_pairwise_lp(mu, nu)


def w1_1d(mu, nu):
    """Wasserstein-1 distance of 1D measures with equal mass: integral of |F_mu - F_nu|."""
    if mu.d != 1 or nu.d != 1:
        raise ValueError("w1_1d needs one-dimensional measures")
    if abs(mu.total - nu.total) > 1e-12:
        raise MassMismatch(f"total masses differ: {mu.total!r} vs {nu.total!r}")
    diff = _difference(mu, nu)
    z, c = diff.support[:, 0], diff.masses
    if len(z) < 2:
        return 0.0
    return float(np.sum(np.abs(np.cumsum(c)[:-1]) * np.diff(z)))


@dataclass
class ModulatedEnergyReport:
    kinetic: float
    potential: float
    dbl: float
    w1: float = None

    def __post_init__(self):
        if self.kinetic < 0 or self.dbl < 0:
            raise ValueError("kinetic energy and d_BL are nonnegative")


def particle_measure(particles):
    return DiscreteMeasure.empirical(particles.x)


def reference_measure(reference):
    return DiscreteMeasure(reference.nodes, reference.weights)


def modulated_kinetic_energy(particles, reference):
    """(1/2N) sum_i |u(x_i) - v_i|^2 with u interpolated from the reference."""
    u = eval_velocity(reference, particles.x)
    return 0.5 * float(np.mean(np.sum((u - particles.v) ** 2, axis=1)))


def _pair_energy(x, m, y, n, spec):
    wcode, c, a = spec.kernel_params()
    val, _ = _kernels.cross_energy(np.ascontiguousarray(x), np.ascontiguousarray(m, dtype=float),
                                   np.ascontiguousarray(y), np.ascontiguousarray(n, dtype=float),
                                   wcode, c, a, True)
    return val


def modulated_potential_energy(particles, reference, spec):
    """Half the W-energy of rho^N - rho with the diagonal excluded.

    Every pair at zero separation is left out of all three sums (particle
    self-interaction, particle-node cross term and node self-interaction),
    so identical configurations give exactly zero. ``reference=None`` drops
    the continuum terms.
    """
    if spec.interaction == "none":
        return 0.0
    x = particles.x
    mN = np.full(x.shape[0], 1.0 / x.shape[0])
    if min_distance_zero(x, spec):
        raise SingularEvaluation("coincident particles under a singular interaction")
    e_pp = _pair_energy(x, mN, x, mN, spec)
    if reference is None:
        return 0.5 * e_pp
    y, w = reference.nodes, reference.weights
    e_pr = _pair_energy(x, mN, y, w, spec)
    e_rr = _pair_energy(y, w, y, w, spec)
    return 0.5 * (e_pp - 2.0 * e_pr + e_rr)


def min_distance_zero(x, spec):
    if spec.kernel_params()[0] < 3 or x.shape[0] < 2:
        return False
    if x.shape[1] == 1:
        return bool(np.any(np.diff(np.sort(x[:, 0])) ** 2 < np.finfo(float).tiny))
    return _kernels.min_pair_distance(np.ascontiguousarray(x)) ** 2 < np.finfo(float).tiny


def local_moment_errors(particles, reference):
    """d_BL gaps of the momentum and energy moment measures (1D, max over components).

    Compares (1/N) sum v_i delta_{x_i} with sum w_k u_k delta_{node_k}, and
    likewise for v_i (x) v_i.
    """
    if particles.d != 1 or reference.d != 1:
        raise ValueError("moment errors are computed for 1D runs")
    N = particles.N
    x, v = particles.x, particles.v
    y, u, w = reference.nodes, reference.velocities, reference.weights
    gaps = []
    for power in (1, 2):
        mu = DiscreteMeasure(x, v[:, 0] ** power / N)
        nu = DiscreteMeasure(y, w * u[:, 0] ** power)
        gaps.append(dbl(mu, nu))
    return gaps[0], gaps[1]


def report(particles, reference, spec=None):
    """Bundle E^N, F^N (singular interactions only), d_BL and, in 1D, W1."""
    mu, nu = particle_measure(particles), reference_measure(reference)
    potential = 0.0
    if spec is not None and spec.singular:
        potential = modulated_potential_energy(particles, reference, spec)
    w1 = w1_1d(mu, nu) if mu.d == 1 else None
    return ModulatedEnergyReport(modulated_kinetic_energy(particles, reference), potential, dbl(mu, nu), w1)
