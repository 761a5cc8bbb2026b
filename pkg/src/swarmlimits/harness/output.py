"""Writes a finished experiment to its output directory."""

import json
from pathlib import Path

import numpy as np

from ..io import (
    continuum_columns,
    continuum_rows,
    particle_columns,
    particle_rows,
    write_checkpoint,
    write_csv,
    write_dat,
)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items() if _jsonable(v) is not None}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value) if np.isfinite(value) else str(value)
    if isinstance(value, (np.integer, int, str, bool)) or value is None:
        return value.item() if hasattr(value, "item") else value
    return None


def write_result(cfg, result, checks):
    """Tables go to ``<output_dir>/<name>/``; returns that folder."""
    folder = Path(cfg.output_dir) / cfg.name
    folder.mkdir(parents=True, exist_ok=True)
    write_csv(folder / f"{result.experiment}.csv", result.columns, result.rows)
    numeric = [c for c in result.columns if c != "experiment"]
    write_dat(folder / f"{result.experiment}.dat", numeric, result.rows)
    slope_rows = [{"column": name, "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual}
                  for name, fit in sorted(result.slopes.items())]
    write_csv(folder / "slopes.csv", ["column", "slope", "intercept", "residual"], slope_rows)
    write_csv(folder / "checks.csv", ["name", "passed", "value", "target"],
              [{"name": c.name, "passed": c.passed, "value": c.value, "target": c.target} for c in checks])
    marker = folder / "PARTIAL"
    if result.partial:
        marker.write_text(result.error + "\n")
    elif marker.exists():
        marker.unlink()
    meta = {k: v for k, v in result.meta.items() if k not in ("trajectory", "reference")}
    summary = {"config": cfg.to_dict(), "meta": meta, "partial": result.partial, "error": result.error}
    (folder / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")

    traj = result.meta.get("trajectory")
    if traj is not None:
        d = traj.x.shape[2]
        write_csv(folder / "particles.csv", particle_columns(d), particle_rows(traj))
        write_checkpoint(folder / "particles_final.bin", traj.state(len(traj) - 1))
    ref = result.meta.get("reference")
    if ref is not None:
        d = ref.nodes.shape[2]
        write_csv(folder / "reference.csv", continuum_columns(d), continuum_rows(ref))
        eps = ref.epsilon if ref.epsilon is not None else float("nan")
        write_checkpoint(folder / "reference_final.bin", ref.state(len(ref) - 1), ref.gamma, eps)
    return folder
