#!/usr/bin/env python3
"""Run the toy config twice and verify byte-identical CSV output."""
import pathlib
import sys
import tempfile

from etrlab.config import load_config
from etrlab.harness import run_experiment


def main() -> int:
    cfg_path = pathlib.Path(__file__).resolve().parent.parent / "configs" / "toy.cfg"
    digests = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = load_config(cfg_path)
            cfg.output_dir = tmp
            bundle = run_experiment(cfg)
            digests.append(open(bundle.records_csv, "rb").read())
    if digests[0] != digests[1]:
        print("NOT deterministic")
        return 1
    print(f"deterministic: {len(digests[0])} identical bytes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
