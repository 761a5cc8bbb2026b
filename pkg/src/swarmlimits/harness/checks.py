"""Pass/fail evaluation of the thresholds listed under ``checks`` in a config."""

from dataclasses import dataclass

import numpy as np


@dataclass
class Check:
    name: str
    passed: bool
    value: object
    target: str

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value} (want {self.target})"


def _fmt(x):
    return f"{x:.4g}" if isinstance(x, (float, np.floating)) else str(x)


def _slope_check(result, column, bounds, label):
    lo, hi = bounds
    fit = result.slopes.get(column)
    if fit is None:
        reason = result.meta.get("fit_errors", {}).get(column, "no fit")
        return Check(label, False, reason, f"[{lo}, {hi}]")
    return Check(label, lo <= fit.slope <= hi, _fmt(fit.slope), f"[{lo}, {hi}]")


def evaluate_checks(cfg, result):
    out = []
    c = cfg.checks
    if result.partial:
        out.append(Check("complete", False, result.error, "all scan points"))
    if c.get("error_decreasing"):
        err = result.column("error_T")
        ok = len(err) > 1 and bool(np.all(np.diff(err) < 0))
        out.append(Check("error_decreasing", ok, " > ".join(_fmt(e) for e in err), "strictly decreasing in N"))
    if "dbl_slope" in c:
        out.append(_slope_check(result, "dbl_T", c["dbl_slope"], "dbl_slope"))
    if "sup_kinetic_slope" in c:
        out.append(_slope_check(result, "kinetic_sup", c["sup_kinetic_slope"], "sup_kinetic_slope"))
    if "integrated_kinetic_slope" in c:
        out.append(_slope_check(result, "kinetic_int", c["integrated_kinetic_slope"], "integrated_kinetic_slope"))
    if c.get("min_separation_positive"):
        seps = result.column("min_separation") if result.rows else np.array([np.nan])
        out.append(Check("min_separation_positive", bool(np.all(seps > 0)), _fmt(float(np.min(seps))), "> 0"))
    if "max_dissipation_residual" in c:
        res = result.rows[0]["residual"]
        out.append(Check("dissipation_residual", res <= c["max_dissipation_residual"], _fmt(res),
                         f"<= {c['max_dissipation_residual']}"))
    if "min_halving_ratio" in c:
        ratio = result.meta["halving_ratio"]
        out.append(Check("halving_ratio", ratio >= c["min_halving_ratio"], _fmt(ratio),
                         f">= {c['min_halving_ratio']}"))
    if "max_energy_drift" in c:
        drift = result.rows[-1]["energy_drift"]
        out.append(Check("energy_drift", drift <= c["max_energy_drift"], _fmt(drift),
                         f"<= {c['max_energy_drift']}"))
    if "max_solver_residual" in c:
        res = result.meta.get("max_solver_residual", float("nan"))
        out.append(Check("solver_residual", res <= c["max_solver_residual"], _fmt(res),
                         f"<= {c['max_solver_residual']}"))
    if "max_runtime" in c:
        rt = result.meta["runtime"]
        out.append(Check("runtime", rt <= c["max_runtime"], f"{rt:.1f}s", f"<= {c['max_runtime']}s"))
    return out
