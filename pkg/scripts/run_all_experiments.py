#!/usr/bin/env python3
"""Run every shipped experiment config and print the report locations."""
import pathlib
import sys

from etrlab.config import load_config
from etrlab.errors import SuiteFailure
from etrlab.harness import run_experiment

CONFIGS = ["phase.cfg", "mismatch.cfg", "uncertainty.cfg", "perturbation.cfg", "regime.cfg"]


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent / "configs"
    failed = False
    for name in CONFIGS:
        cfg = load_config(root / name)
        print(f"== {name} ({cfg.experiment}) ==")
        try:
            bundle = run_experiment(cfg)
        except SuiteFailure as exc:
            print(f"  SUITE VIOLATIONS: {exc}")
            failed = True
            continue
        print(f"  records: {bundle.records_csv}")
        print(f"  summary: {bundle.summary_md}")
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
