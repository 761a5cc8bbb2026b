"""Compiled O(n^2) pair loops shared by the particle and continuum solvers.

Each pair is visited once and its contribution is scattered to both ends.
Since the interaction gradient is odd and psi is even, this halves the
work and keeps the weighted sums exactly antisymmetric. The row-parallel
variants visit all ordered pairs instead, so their results do not depend
on the thread count. They are selected with :func:`set_threads`.
"""

from math import exp, log, sqrt

import numba
import numpy as np
from numba import njit, prange

_STATE = {"parallel": False}
# squared separations below the smallest normal double count as coincident
_TINY = 2.2250738585072014e-308


def set_threads(k):
    """Use ``k`` numba threads for the pair sums (k = 1 selects the serial loops)."""
    k = int(k)
    if k < 1:
        raise ValueError("thread count must be >= 1")
    k = min(k, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(k)
    _STATE["parallel"] = k > 1


def parallel_enabled():
    return _STATE["parallel"]


@njit(cache=True, inline="always")
def _grad_factor(code, c, a, r2):
    if code == 1:
        return -(c / (a * a)) * exp(-0.5 * r2 / (a * a))
    if code == 2:
        if r2 > 0.0:
            return -c / sqrt(r2)
        return 0.0
    if code == 3:
        return -c / r2
    if code == 4:
        return -a * c * r2 ** (-0.5 * a - 1.0)
    return 0.0


@njit(cache=True, inline="always")
def _energy(code, c, a, r2):
    if code == 1:
        return c * exp(-0.5 * r2 / (a * a))
    if code == 2:
        return -c * sqrt(r2)
    if code == 3:
        return -0.5 * c * log(r2)
    if code == 4:
        return c * r2 ** (-0.5 * a)
    return 0.0


@njit(cache=True)
def _pair_terms_1d(x, v, w, wcode, c, a, pcode, R2, kappa, force, align, rowsum):
    n = x.shape[0]
    for k in range(n):
        xk = x[k, 0]
        vk = v[k, 0]
        wk = w[k]
        fk = 0.0
        ak = 0.0
        sk = 0.0
        for j in range(k + 1, n):
            dx = xk - x[j, 0]
            r2 = dx * dx
            if wcode != 0:
                if r2 < _TINY and wcode >= 3:
                    return k
                f = _grad_factor(wcode, c, a, r2) * dx
                fk += w[j] * f
                force[j, 0] -= wk * f
            if pcode != 0 and r2 < R2:
                s = 1.0 - r2 / R2
                p = kappa * s * s
                sk += w[j] * p
                rowsum[j] += wk * p
                dv = v[j, 0] - vk
                ak += w[j] * p * dv
                align[j, 0] -= wk * p * dv
        force[k, 0] += fk
        align[k, 0] += ak
        rowsum[k] += sk
    return -1


@njit(cache=True)
def pair_terms(x, v, w, wcode, c, a, pcode, R, kappa, force, align, rowsum):
    """Fill force_k = sum_j w_j gradW(x_k - x_j), align_k = sum_j w_j psi_kj (v_j - v_k)
    and rowsum_k = sum_j w_j psi_kj. Returns -1, or k when x_k coincides with
    another point under a singular kernel."""
    n, d = x.shape
    force[:] = 0.0
    align[:] = 0.0
    rowsum[:] = 0.0
    R2 = R * R
    if d == 1:
        return _pair_terms_1d(x, v, w, wcode, c, a, pcode, R2, kappa, force, align, rowsum)
    for k in range(n):
        for j in range(k + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[k, q] - x[j, q]
                r2 += dx * dx
            if wcode != 0:
                if r2 < _TINY and wcode >= 3:
                    return k
                g = _grad_factor(wcode, c, a, r2)
                for q in range(d):
                    f = g * (x[k, q] - x[j, q])
                    force[k, q] += w[j] * f
                    force[j, q] -= w[k] * f
            if pcode != 0 and r2 < R2:
                s = 1.0 - r2 / R2
                p = kappa * s * s
                rowsum[k] += w[j] * p
                rowsum[j] += w[k] * p
                for q in range(d):
                    dv = v[j, q] - v[k, q]
                    align[k, q] += w[j] * p * dv
                    align[j, q] -= w[k] * p * dv
    return -1


@njit(cache=True, parallel=True)
def pair_terms_rows(x, v, w, wcode, c, a, pcode, R, kappa, force, align, rowsum):
    n, d = x.shape
    R2 = R * R
    bad = np.full(n, -1, dtype=np.int64)
    for k in prange(n):
        for q in range(d):
            force[k, q] = 0.0
            align[k, q] = 0.0
        rowsum[k] = 0.0
        for j in range(n):
            if j == k:
                continue
            r2 = 0.0
            for q in range(d):
                dx = x[k, q] - x[j, q]
                r2 += dx * dx
            if wcode != 0:
                if r2 < _TINY and wcode >= 3:
                    bad[k] = k
                    break
                g = _grad_factor(wcode, c, a, r2)
                for q in range(d):
                    force[k, q] += w[j] * (g * (x[k, q] - x[j, q]))
            if pcode != 0 and r2 < R2:
                s = 1.0 - r2 / R2
                p = kappa * s * s
                rowsum[k] += w[j] * p
                for q in range(d):
                    align[k, q] += w[j] * p * (v[j, q] - v[k, q])
    for k in range(n):
        if bad[k] >= 0:
            return k
    return -1


@njit(cache=True)
def alignment_apply(x, w, u, R, kappa, sorted1d, out):
    """out_k = sum_j w_j psi(x_k - x_j) (u_j - u_k).

    With ``sorted1d`` the nodes are 1D and increasing, so the inner loop
    stops at the edge of the support of psi.
    """
    n, d = x.shape
    out[:] = 0.0
    R2 = R * R
    if d == 1:
        for k in range(n):
            xk = x[k, 0]
            uk = u[k, 0]
            wk = w[k]
            acc = 0.0
            for j in range(k + 1, n):
                dx = xk - x[j, 0]
                r2 = dx * dx
                if r2 >= R2:
                    if sorted1d:
                        break
                    continue
                s = 1.0 - r2 / R2
                p = kappa * s * s
                du = u[j, 0] - uk
                acc += w[j] * p * du
                out[j, 0] -= wk * p * du
            out[k, 0] += acc
        return
    for k in range(n):
        for j in range(k + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[k, q] - x[j, q]
                r2 += dx * dx
            if r2 >= R2:
                if sorted1d:
                    break
                continue
            s = 1.0 - r2 / R2
            p = kappa * s * s
            for q in range(d):
                du = u[j, q] - u[k, q]
                out[k, q] += w[j] * p * du
                out[j, q] -= w[k] * p * du


@njit(cache=True)
def psi_rowsum(x, w, R, kappa, sorted1d, out):
    n, d = x.shape
    out[:] = 0.0
    R2 = R * R
    for k in range(n):
        for j in range(k + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[k, q] - x[j, q]
                r2 += dx * dx
            if r2 >= R2:
                if sorted1d:
                    break
                continue
            s = 1.0 - r2 / R2
            p = kappa * s * s
            out[k] += w[j] * p
            out[j] += w[k] * p


@njit(cache=True)
def interaction_sum(x, w, wcode, c, a, out):
    """out_k = sum_j w_j gradW(x_k - x_j); returns -1 or a singular index."""
    n, d = x.shape
    out[:] = 0.0
    if d == 1:
        for k in range(n):
            xk = x[k, 0]
            wk = w[k]
            acc = 0.0
            for j in range(k + 1, n):
                dx = xk - x[j, 0]
                r2 = dx * dx
                if r2 < _TINY and wcode >= 3:
                    return k
                f = _grad_factor(wcode, c, a, r2) * dx
                acc += w[j] * f
                out[j, 0] -= wk * f
            out[k, 0] += acc
        return -1
    for k in range(n):
        for j in range(k + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[k, q] - x[j, q]
                r2 += dx * dx
            if r2 < _TINY and wcode >= 3:
                return k
            g = _grad_factor(wcode, c, a, r2)
            for q in range(d):
                f = g * (x[k, q] - x[j, q])
                out[k, q] += w[j] * f
                out[j, q] -= w[k] * f
    return -1


@njit(cache=True)
def cross_energy(x, m, y, nu, wcode, c, a, skip_coincident):
    """sum_{a,b} m_a nu_b W(x_a - y_b) over pairs at nonzero separation.

    Coincident pairs are skipped when ``skip_coincident`` is set, otherwise
    a singular coincidence makes the function return (nan, 1).
    """
    n, d = x.shape
    mm = y.shape[0]
    total = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(mm):
            r2 = 0.0
            for q in range(d):
                dx = x[i, q] - y[j, q]
                r2 += dx * dx
            if r2 < _TINY:
                if skip_coincident or wcode < 3:
                    continue
                return np.nan, 1
            acc += nu[j] * _energy(wcode, c, a, r2)
        total += m[i] * acc
    return total, 0


@njit(cache=True)
def self_energy(x, wcode, c, a):
    """sum_{i != j} W(x_i - x_j); returns (value, status) with status 1 on a singular coincidence."""
    n, d = x.shape
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[i, q] - x[j, q]
                r2 += dx * dx
            if r2 < _TINY and wcode >= 3:
                return np.nan, 1
            total += 2.0 * _energy(wcode, c, a, r2)
    return total, 0


@njit(cache=True)
def alignment_dissipation(x, v, R, kappa):
    """sum_{i,j} psi(x_i - x_j) |v_j - v_i|^2."""
    n, d = x.shape
    R2 = R * R
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[i, q] - x[j, q]
                r2 += dx * dx
            if r2 >= R2:
                continue
            s = 1.0 - r2 / R2
            dv2 = 0.0
            for q in range(d):
                dv = v[j, q] - v[i, q]
                dv2 += dv * dv
            total += 2.0 * kappa * s * s * dv2
    return total


@njit(cache=True)
def min_pair_distance(x):
    n, d = x.shape
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[i, q] - x[j, q]
                r2 += dx * dx
            if r2 < best:
                best = r2
    return sqrt(best)



@njit(cache=True, inline="always")
def _interp_sorted(TX, TY, t, v):
    j = 0
    while TX[j] < v:
        j += 1
    if TX[j] == v or j == 0:
        return TY[j]
    return TY[j - 1] + (TY[j] - TY[j - 1]) * (v - TX[j - 1]) / (TX[j] - TX[j - 1])


@njit(cache=True)
def dbl_chain(z, c):
    """Exact max of sum c_i phi_i over |phi_i| <= 1, |phi_{i+1} - phi_i| <= z_{i+1} - z_i.

    The concave piecewise-linear value function is held by its breakpoints
    (X, Y) on [-1, 1]; see metrics._dbl_chain for the recursion. Each step
    adds at most one breakpoint, so the cost is O(m k) with k breakpoints.
    """
    m = c.shape[0]
    cap = m + 4
    X = np.empty(cap)
    Y = np.empty(cap)
    TX = np.empty(cap)
    TY = np.empty(cap)
    X[0], X[1] = -1.0, 1.0
    Y[0], Y[1] = -c[0], c[0]
    k = 2
    for i in range(1, m):
        g = z[i] - z[i - 1]
        p = 0
        for j in range(1, k):
            if Y[j] > Y[p]:
                p = j
        t = 0
        for j in range(p + 1):
            TX[t] = X[j] - g
            TY[t] = Y[j]
            t += 1
        for j in range(p, k):
            TX[t] = X[j] + g
            TY[t] = Y[j]
            t += 1
        lo = _interp_sorted(TX, TY, t, -1.0)
        hi = _interp_sorted(TX, TY, t, 1.0)
        ci = c[i]
        X[0] = -1.0
        Y[0] = lo - ci
        n = 1
        for j in range(t):
            if -1.0 < TX[j] < 1.0:
                X[n] = TX[j]
                Y[n] = TY[j] + ci * TX[j]
                n += 1
        X[n] = 1.0
        Y[n] = hi + ci
        k = n + 1
    best = Y[0]
    for j in range(1, k):
        if Y[j] > best:
            best = Y[j]
    return best


@njit(cache=True)
def alignment_dissipation_rate(x, v, acc, R, kappa):
    """Time derivative of sum_{i,j} psi(x_i - x_j) |v_j - v_i|^2 given accelerations ``acc``."""
    n, d = x.shape
    R2 = R * R
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for q in range(d):
                dx = x[i, q] - x[j, q]
                r2 += dx * dx
            if r2 >= R2:
                continue
            s = 1.0 - r2 / R2
            dv2 = 0.0
            dvda = 0.0
            rdv = 0.0
            for q in range(d):
                dv = v[j, q] - v[i, q]
                dv2 += dv * dv
                dvda += dv * (acc[j, q] - acc[i, q])
                rdv += (x[i, q] - x[j, q]) * (v[i, q] - v[j, q])
            grad_dot = -4.0 * kappa / R2 * s * rdv
            total += 2.0 * (grad_dot * dv2 + 2.0 * kappa * s * s * dvda)
    return total
