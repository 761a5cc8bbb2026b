"""
Experiment drivers: particle runs against continuum references, slope fits.

Every driver returns a :class:`ScanResult` whose rows are plain dicts, so
they can be written to CSV, checked against thresholds, or inspected in a
notebook.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from ..continuum import ContinuumState, eval_velocity, evolve, init_from_density
from ..errors import CharacteristicCrossing, ConfigError, NoConvergence, NonPositiveValue
from ..metrics import (
    dbl,
    local_moment_errors,
    modulated_kinetic_energy,
    modulated_potential_energy,
    particle_measure,
    reference_measure,
    w1_1d,
)
from ..particle import ParticleState, dissipation_residual, free_energy, simulate
from ..sampling import alternating_signs, sample_particles, sample_positions


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    residual: float


@dataclass
class ScanResult:
    """Rows of a scan plus log-log slope fits of selected columns against ``axis``."""

    experiment: str
    axis: str
    columns: list
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    partial: bool = False
    error: str = None

    def column(self, name):
        return np.array([row[name] for row in self.rows], dtype=float)


def fit_slope(points):
    """Least-squares line through (log axis, log value).

    Returns a SlopeFit whose residual is the RMS of the log-space residuals.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an array of (axis, value) pairs")
    if len(pts) < 4:
        raise ValueError(f"a slope fit needs at least 4 points, got {len(pts)}")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise NonPositiveValue("log-log fit needs positive finite axis values and data")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return SlopeFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def _fit_columns(result, names):
    axis = result.column(result.axis)
    for name in names:
        values = result.column(name)
        try:
            result.slopes[name] = fit_slope(np.column_stack([axis, values]))
        except (ValueError, NonPositiveValue) as exc:
            result.meta.setdefault("fit_errors", {})[name] = str(exc)


def _reference_state(cfg, M, velocity=None):
    a, b = cfg.domain
    return init_from_density(cfg.density_fn(), a, b, M, velocity)


def euler_alignment_reference(cfg, M=None):
    """Euler-alignment run at resolution M sampled every ``reference_dt``."""
    state = _reference_state(cfg, M or cfg.M, cfg.velocity_fn())
    return evolve(state, cfg.spec(), "euler_alignment", cfg.reference_dt, cfg.T, cfg.gamma,
                  epsilon=cfg.epsilon, method=cfg.reference_method or "rk4")


def aggregation_reference(cfg, M=None, nodes=None):
    """Aggregation run from the configured density (or from given nodes with equal weights)."""
    if nodes is None:
        state = _reference_state(cfg, M or cfg.M)
    else:
        n = len(nodes)
        state = ContinuumState(nodes, np.full(n, 1.0 / n), np.zeros_like(nodes))
    return evolve(state, cfg.spec(), "aggregation", cfg.reference_dt, cfg.T, cfg.gamma,
                  method=cfg.reference_method or "rk4")


def reference_discrepancy(fine, coarse):
    """Velocity and d_BL gaps between two reference runs at their final time."""
    f, c = fine.state(len(fine) - 1), coarse.state(len(coarse) - 1)
    du = float(np.max(np.abs(eval_velocity(f, c.nodes) - c.velocities)))
    return du, dbl(reference_measure(f), reference_measure(c))


def _kinetic_series(traj, reference):
    return np.array([
        modulated_kinetic_energy(traj.state(k), reference.state_at(float(t)))
        for k, t in enumerate(traj.times)
    ])


def _point_row(cfg, spec, traj, reference, singular):
    """Metrics of one particle run against the reference at t = 0 and t = T."""
    p0, pT = traj.state(0), traj.state(len(traj) - 1)
    r0, rT = reference.state(0), reference.state(len(reference) - 1)
    E = _kinetic_series(traj, reference)
    h = float(traj.times[1] - traj.times[0]) if len(traj) > 1 else 0.0
    mu0, muT = particle_measure(p0), particle_measure(pT)
    nu0, nuT = reference_measure(r0), reference_measure(rT)
    row = {
        "experiment": cfg.name,
        "t": float(traj.times[-1]),
        "M": reference.nodes.shape[1],
        "kinetic_0": E[0],
        "kinetic_T": E[-1],
        "kinetic_sup": float(E.max()),
        "kinetic_int": float(trapezoid(E, dx=h)) if len(E) > 1 else 0.0,
        "dbl_0": dbl(mu0, nu0),
        "dbl_T": dbl(muT, nuT),
        "w1_T": w1_1d(muT, nuT),
    }
    row["momentum_gap_T"], row["energy_gap_T"] = local_moment_errors(pT, rT)
    if singular:
        row["potential_0"] = modulated_potential_energy(p0, r0, spec)
        row["potential_T"] = modulated_potential_energy(pT, rT, spec)
    else:
        row["potential_0"] = row["potential_T"] = 0.0
    row["error_0"] = row["kinetic_0"] + row["dbl_0"] ** 2 + row["potential_0"]
    row["error_T"] = row["kinetic_T"] + row["dbl_T"] ** 2 + row["potential_T"]
    row["error_ratio"] = row["error_T"] / row["error_0"] if row["error_0"] > 0 else float("nan")
    seps = traj.min_separation
    row["min_separation"] = float(np.min(seps)) if seps is not None else float("nan")
    return row


MEAN_FIELD_COLUMNS = [
    "experiment", "N", "epsilon", "M", "t",
    "kinetic_0", "kinetic_T", "kinetic_sup", "kinetic_int",
    "dbl_0", "dbl_T", "w1_T", "potential_0", "potential_T",
    "error_0", "error_T", "error_ratio",
    "momentum_gap_T", "energy_gap_T", "min_separation",
]


def run_mean_field_scan(cfg, log=None):
    """Particle runs for each N against one Euler-alignment reference at resolution M."""
    log = log or (lambda msg: None)
    spec = cfg.spec()
    result = ScanResult("mean_field_scan", "N", MEAN_FIELD_COLUMNS)
    if len(cfg.N_list) < 2:
        raise ConfigError("a mean-field scan needs at least two values of N")
    start = time.perf_counter()
    data = cfg.initial_data()
    method = cfg.method or "rk4"
    try:
        reference = euler_alignment_reference(cfg)
        log(f"reference M={cfg.M} done")
        if cfg.self_convergence:
            coarse = euler_alignment_reference(cfg, cfg.M // 2)
            du, dd = reference_discrepancy(reference, coarse)
            result.meta.update(reference_velocity_gap=du, reference_dbl_gap=dd)
        for N in sorted(cfg.N_list):
            p0 = sample_particles(data, N, cfg.epsilon, cfg.gamma)
            traj = simulate(p0, spec, cfg.dt, cfg.T, method=method, every=cfg.sample_every,
                            monitor_separation=spec.singular)
            row = _point_row(cfg, spec, traj, reference, spec.singular)
            row.update(N=N, epsilon=cfg.epsilon)
            result.rows.append(row)
            log(f"N={N}: E(T)={row['kinetic_T']:.3e} dBL(T)={row['dbl_T']:.3e}")
    except (CharacteristicCrossing, NoConvergence) as exc:
        result.partial, result.error = True, f"{type(exc).__name__}: {exc}"
    ratios = [r["error_ratio"] for r in result.rows if np.isfinite(r["error_ratio"])]
    result.meta["error_constant"] = float(max(ratios)) if ratios else float("nan")
    result.meta["runtime"] = time.perf_counter() - start
    _fit_columns(result, ["dbl_T", "kinetic_T", "error_T", "w1_T"])
    return result


INERTIA_COLUMNS = [
    "experiment", "epsilon", "N", "M", "t",
    "kinetic_0", "kinetic_T", "kinetic_sup", "kinetic_int",
    "dbl_0", "dbl_T", "w1_T", "dbl_T_same_nodes",
    "momentum_gap_T", "energy_gap_T",
]


def run_inertia_scan(cfg, log=None):
    """Small-inertia particle runs for each epsilon against one aggregation reference.

    Particles start at the sampled positions with v_i = u(x_i) + delta xi_i,
    where u is the aggregation velocity at t = 0 and delta follows the
    ``perturbation`` setting (``"sqrt_epsilon"`` gives delta = sqrt(eps)).
    ``dbl_T_same_nodes`` compares with an aggregation run started from the
    particle positions themselves, which isolates the inertia error from
    the sampling error.
    """
    log = log or (lambda msg: None)
    spec = cfg.spec()
    result = ScanResult("inertia_scan", "epsilon", INERTIA_COLUMNS)
    if len(cfg.epsilon_list) < 2:
        raise ConfigError("an inertia scan needs at least two values of epsilon")
    start = time.perf_counter()
    data = cfg.initial_data(velocity=lambda x: np.zeros(np.shape(x)))
    x0 = sample_positions(data, cfg.N)[:, None]
    method = cfg.method or "semi_implicit"
    try:
        reference = aggregation_reference(cfg)
        log(f"aggregation reference M={cfg.M} done")
        same = aggregation_reference(cfg, nodes=x0)
        result.meta["max_solver_residual"] = float(max(np.max(reference.solver_residuals),
                                                       np.max(same.solver_residuals)))
        result.meta["material_acceleration_sup"] = float(np.max(np.abs(reference.material_acceleration())))
        u0 = eval_velocity(reference.state(0), x0)
        for eps in sorted(cfg.epsilon_list, reverse=True):
            v0 = u0 + cfg.delta(eps) * alternating_signs(cfg.N)[:, None]
            p0 = ParticleState(x0, v0, gamma=cfg.gamma, epsilon=eps)
            traj = simulate(p0, spec, cfg.dt, cfg.T, method=method, every=1)
            row = _point_row(cfg, spec, traj, reference, False)
            row.update(N=cfg.N, epsilon=eps)
            row["dbl_T_same_nodes"] = dbl(particle_measure(traj.state(len(traj) - 1)),
                                          reference_measure(same.state(len(same) - 1)))
            result.rows.append(row)
            log(f"eps={eps:g}: supE={row['kinetic_sup']:.3e} intE={row['kinetic_int']:.3e} "
                f"dBL(T)={row['dbl_T']:.3e}")
    except (CharacteristicCrossing, NoConvergence) as exc:
        result.partial, result.error = True, f"{type(exc).__name__}: {exc}"
    result.meta["runtime"] = time.perf_counter() - start
    _fit_columns(result, ["kinetic_sup", "kinetic_int", "dbl_T", "kinetic_T", "dbl_T_same_nodes"])
    return result


DISSIPATION_COLUMNS = ["experiment", "case", "N", "dt", "gamma", "residual", "residual_corrected",
                       "energy_drift"]


def run_dissipation_check(cfg, log=None):
    """Free-energy identity residual at dt and dt/2, and energy drift without dissipation."""
    log = log or (lambda msg: None)
    spec = cfg.spec()
    result = ScanResult("dissipation_check", "dt", DISSIPATION_COLUMNS)
    start = time.perf_counter()
    p0 = sample_particles(cfg.initial_data(), cfg.N, cfg.epsilon, cfg.gamma)
    method = cfg.method or "rk4"
    for dt in (cfg.dt, 0.5 * cfg.dt):
        traj = simulate(p0, spec, dt, cfg.T, method=method)
        res = dissipation_residual(traj, spec)
        corrected = dissipation_residual(traj, spec, quadrature="corrected")
        result.rows.append({"experiment": cfg.name, "case": "dissipative", "N": cfg.N, "dt": dt,
                            "gamma": cfg.gamma, "residual": res, "residual_corrected": corrected,
                            "energy_drift": float("nan")})
        log(f"dt={dt:g}: residual {res:.3e} (endpoint-corrected {corrected:.3e})")
    conservative = ParticleState(p0.x, p0.v, gamma=0.0, epsilon=cfg.epsilon)
    cspec = spec.__class__(**{**spec.__dict__, "communication": "none"})
    traj = simulate(conservative, cspec, cfg.dt, cfg.T, method=method, every=n_samples(cfg))
    F0 = free_energy(traj.state(0), cspec).total
    FT = free_energy(traj.state(len(traj) - 1), cspec).total
    result.rows.append({"experiment": cfg.name, "case": "conservative", "N": cfg.N, "dt": cfg.dt,
                        "gamma": 0.0, "residual": float("nan"), "residual_corrected": float("nan"),
                        "energy_drift": abs(FT - F0)})
    r1, r2 = result.rows[0]["residual"], result.rows[1]["residual"]
    p1, p2 = result.rows[0]["residual_corrected"], result.rows[1]["residual_corrected"]
    result.meta.update(halving_ratio=r1 / r2 if r2 > 0 else float("inf"),
                       halving_ratio_corrected=p1 / p2 if p2 > 0 else float("inf"),
                       runtime=time.perf_counter() - start)
    return result


def n_samples(cfg):
    """Stride that records only the endpoints of a run."""
    return int(round(cfg.T / cfg.dt))


SINGLE_COLUMNS = ["experiment", "t", "kinetic", "dbl", "w1", "potential", "free_energy", "min_separation"]


def run_single(cfg, log=None):
    """One particle run with its reference; rows are a diagnostic time series."""
    log = log or (lambda msg: None)
    spec = cfg.spec()
    start = time.perf_counter()
    model = cfg.reference_model or "euler_alignment"
    if model == "aggregation":
        reference = aggregation_reference(cfg)
        data = cfg.initial_data(velocity=lambda x: np.zeros(np.shape(x)))
        x0 = sample_positions(data, cfg.N)[:, None]
        v0 = eval_velocity(reference.state(0), x0) + data.perturbation * alternating_signs(cfg.N)[:, None]
        p0 = ParticleState(x0, v0, gamma=cfg.gamma, epsilon=cfg.epsilon)
    else:
        reference = euler_alignment_reference(cfg)
        p0 = sample_particles(cfg.initial_data(), cfg.N, cfg.epsilon, cfg.gamma)
    # RK4 unless the damping scale gamma/epsilon makes it stiff at this dt
    stiff = cfg.gamma > 0 and cfg.dt > cfg.epsilon / (2.0 * cfg.gamma)
    method = cfg.method or ("semi_implicit" if stiff else "rk4")
    traj = simulate(p0, spec, cfg.dt, cfg.T, method=method, every=cfg.sample_every,
                    monitor_separation=spec.singular)
    result = ScanResult("single_run", "t", SINGLE_COLUMNS)
    stride = cfg.sample_every
    for k, t in enumerate(traj.times):
        p, r = traj.state(k), reference.state_at(float(t))
        mu, nu = particle_measure(p), reference_measure(r)
        result.rows.append({
            "experiment": cfg.name,
            "t": float(t),
            "kinetic": modulated_kinetic_energy(p, r),
            "dbl": dbl(mu, nu),
            "w1": w1_1d(mu, nu),
            "potential": modulated_potential_energy(p, r, spec) if spec.singular else 0.0,
            "free_energy": free_energy(p, spec).total,
            "min_separation": float(np.min(traj.min_separation[: k * stride + 1]))
            if traj.min_separation is not None else float("nan"),
        })
    result.meta.update(runtime=time.perf_counter() - start, method=method, reference_model=model)
    if reference.solver_residuals is not None:
        result.meta["max_solver_residual"] = float(np.max(reference.solver_residuals))
    result.meta["trajectory"] = traj
    result.meta["reference"] = reference
    return result


DRIVERS = {
    "mean_field_scan": run_mean_field_scan,
    "inertia_scan": run_inertia_scan,
    "dissipation_check": run_dissipation_check,
    "single_run": run_single,
}


def run_experiment(cfg, log=None):
    return DRIVERS[cfg.experiment](cfg, log)
