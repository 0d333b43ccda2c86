"""Configuration, case execution, sweeps and the command line."""

from .config import ConfigError, RunManifest, case_configs, load_manifest, load_params
from .core import H2Sweep, RunOutcome, run, sweep_h2, validate
from .cli import main

__all__ = ["ConfigError", "RunManifest", "case_configs", "load_manifest", "load_params",
           "H2Sweep", "RunOutcome", "run", "sweep_h2", "validate", "main"]
