"""Experiment drivers, configuration and the command-line interface."""

from .config import ExperimentConfig, from_dict, load_config
from .scans import (
    ScanResult,
    SlopeFit,
    fit_slope,
    run_dissipation_check,
    run_experiment,
    run_inertia_scan,
    run_mean_field_scan,
    run_single,
)
