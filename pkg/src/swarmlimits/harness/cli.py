"""Command-line entry point: ``swarm-limits run`` and ``swarm-limits verify``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from .. import _kernels
from ..errors import SwarmLimitsError
from .checks import evaluate_checks
from .config import load_config
from .output import write_result

log = logging.getLogger("swarmlimits")


def _run_one(path, out_dir, write):
    from .scans import run_experiment

    cfg = load_config(path)
    if out_dir is not None:
        cfg.output_dir = str(out_dir)
    log.info("%s: %s", cfg.name, cfg.experiment)
    result = run_experiment(cfg, log=log.info)
    checks = evaluate_checks(cfg, result)
    if write:
        folder = write_result(cfg, result, checks)
        log.info("wrote %s", folder)
    if result.partial:
        print(f"PARTIAL {cfg.name}: {result.error}")
    for check in checks:
        print(check.line())
    return not result.partial and all(c.passed for c in checks)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="swarm-limits", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write its tables")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    run.add_argument("--threads", type=int, default=1, help="threads for the pair sums")
    verify = sub.add_parser("verify", help="run experiments and report their configured checks")
    verify.add_argument("configs", nargs="+")
    verify.add_argument("--threads", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _kernels.set_threads(args.threads)
        if args.command == "run":
            ok = _run_one(args.config, args.out, write=True)
        else:
            ok = all([_run_one(p, None, write=False) for p in args.configs])
    except (SwarmLimitsError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
