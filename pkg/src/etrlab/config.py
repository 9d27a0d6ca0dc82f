"""Experiment configuration: dataclass plus a strict key-value file loader.

Config files use INI sections, one section named after the experiment
(`phase`, `mismatch`, `uncertainty-principle`, `perturbation`,
`regime-map`) plus an optional `[thresholds]` section. Unknown sections
or keys are errors; silent typos are worse than loud ones.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .etr import RegimeThresholds

EXPERIMENTS = ("phase", "mismatch", "uncertainty-principle", "perturbation", "regime-map")


@dataclass
class ExperimentConfig:
    experiment: str = "phase"
    d: int = 64
    n: int = 0                      # 0: defaults to d
    k: int = 3
    k_sweep: tuple = ()
    m_sweep: tuple = ()
    m: int = 0                      # mismatch recovery budget; 0: d // 2
    d_sweep: tuple = ()             # uncertainty-principle dimensions
    epsilon: float = 0.0
    trials_per_cell: int = 50
    recovery_trials: int = 100      # mismatch recovery sub-experiment
    master_seed: int = 42
    basis: str = "identity"
    sensing: str = "gaussian"
    solvers: tuple = ("basis-pursuit",)
    max_iterations: int = 4000
    convergence_tol: float = 1e-8
    output_dir: str = "out"
    workers: int = 0                # 0: ETRLAB_WORKERS or 1
    formats: tuple = ("csv", "md")
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.n == 0:
            self.n = self.d
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        for name, sweep in (("k_sweep", self.k_sweep), ("m_sweep", self.m_sweep),
                            ("d_sweep", self.d_sweep)):
            if sweep and not all(isinstance(v, int) and v >= 1 for v in sweep):
                raise ConfigError(f"{name} must hold positive integers")

    @property
    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        return int(os.environ.get("ETRLAB_WORKERS", "1"))


def _parse_sweep(text: str) -> tuple:
    """`a:b:step` inclusive range, or a comma list of ints."""
    text = text.strip()
    if ":" in text:
        parts = [int(t) for t in text.split(":")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise ConfigError(f"bad sweep {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(t) for t in text.split(",") if t.strip())


_PARSERS = {
    "experiment": str,
    "basis": str,
    "sensing": str,
    "output_dir": str,
    "epsilon": float,
    "convergence_tol": float,
    "k_sweep": _parse_sweep,
    "m_sweep": _parse_sweep,
    "d_sweep": _parse_sweep,
    "solvers": lambda s: tuple(t.strip() for t in s.split(",") if t.strip()),
    "formats": lambda s: tuple(t.strip() for t in s.split(",") if t.strip()),
}

_THRESHOLD_FIELDS = {f.name: f.type for f in dataclasses.fields(RegimeThresholds)}


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    sections = parser.sections()
    experiment_sections = [s for s in sections if s in EXPERIMENTS]
    if len(experiment_sections) != 1:
        raise ConfigError(f"expected exactly one experiment section, found {sections}")
    extra = [s for s in sections if s not in EXPERIMENTS and s != "thresholds"]
    if extra:
        raise ConfigError(f"unknown sections {extra}")

    name = experiment_sections[0]
    kwargs = {"experiment": name}
    valid = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"experiment", "thresholds"}
    for key, raw in parser.items(name):
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        parse = _PARSERS.get(key, int)
        try:
            kwargs[key] = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc

    if parser.has_section("thresholds"):
        tkw = {}
        for key, raw in parser.items("thresholds"):
            if key not in _THRESHOLD_FIELDS:
                raise ConfigError(f"unknown key {key!r} in section [thresholds]")
            caster = int if key == "trials" else float
            try:
                tkw[key] = caster(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        kwargs["thresholds"] = RegimeThresholds(**tkw)

    return ExperimentConfig(**kwargs)
