"""
CSV tables, gnuplot data files and binary checkpoints.

Floats are written with ``%.17g`` so a CSV round-trips every double exactly
and identical runs give byte-identical files.

Checkpoint layout (little-endian): a header ``<qqddd`` holding
(count, d, gamma, epsilon, t), then positions (count*d doubles), then
velocities (count*d doubles). Continuum checkpoints append the weights
(count doubles); the reader tells the two apart by the file length.
"""

import csv
import struct
from pathlib import Path

import numpy as np

from .continuum import ContinuumState
from .particle import ParticleState

HEADER = struct.Struct("<qqddd")


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path, columns, rows):
    """``rows`` is a list of dicts keyed by ``columns``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_dat(path, columns, rows):
    """Whitespace-separated table with a ``#`` header line, for gnuplot."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in rows:
            fh.write(" ".join(fmt(row.get(c)) or "nan" for c in columns) + "\n")
    return path


def particle_rows(trajectory):
    """Long-format rows (t, i, x_0.., v_0..) of a particle trajectory."""
    K, N, d = trajectory.x.shape
    for k in range(K):
        t = float(trajectory.times[k])
        for i in range(N):
            row = {"t": t, "i": i}
            for q in range(d):
                row[f"x{q}"] = trajectory.x[k, i, q]
                row[f"v{q}"] = trajectory.v[k, i, q]
            yield row


def particle_columns(d):
    return ["t", "i"] + [f"x{q}" for q in range(d)] + [f"v{q}" for q in range(d)]


def continuum_rows(trajectory):
    """Long-format rows (t, k, node_0.., weight, u_0..) of a continuum trajectory."""
    K, M, d = trajectory.nodes.shape
    for k in range(K):
        t = float(trajectory.times[k])
        for j in range(M):
            row = {"t": t, "k": j, "weight": trajectory.weights[j]}
            for q in range(d):
                row[f"node{q}"] = trajectory.nodes[k, j, q]
                row[f"u{q}"] = trajectory.velocities[k, j, q]
            yield row


def continuum_columns(d):
    return ["t", "k"] + [f"node{q}" for q in range(d)] + ["weight"] + [f"u{q}" for q in range(d)]


def write_checkpoint(path, state, gamma=0.0, epsilon=1.0):
    """Write a ParticleState or ContinuumState (gamma/epsilon are taken from a ParticleState)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(state, ParticleState):
        pos, vel, extra = state.x, state.v, None
        gamma, epsilon = state.gamma, state.epsilon
    else:
        pos, vel, extra = state.nodes, state.velocities, state.weights
    n, d = pos.shape
    with path.open("wb") as fh:
        fh.write(HEADER.pack(n, d, float(gamma), float(epsilon), float(state.t)))
        fh.write(np.ascontiguousarray(pos, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(vel, dtype="<f8").tobytes())
        if extra is not None:
            fh.write(np.ascontiguousarray(extra, dtype="<f8").tobytes())
    return path


def read_checkpoint(path):
    """Inverse of :func:`write_checkpoint`; returns (state, gamma, epsilon)."""
    raw = Path(path).read_bytes()
    n, d, gamma, epsilon, t = HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
    if body.size not in (2 * n * d, 2 * n * d + n):
        raise ValueError(f"{path}: {body.size} doubles do not match a header with n={n}, d={d}")
    pos = body[: n * d].reshape(n, d).copy()
    vel = body[n * d : 2 * n * d].reshape(n, d).copy()
    if body.size == 2 * n * d:
        return ParticleState(pos, vel, gamma=gamma, epsilon=epsilon, t=t), gamma, epsilon
    return ContinuumState(pos, body[2 * n * d :].copy(), vel, t=t), gamma, epsilon
