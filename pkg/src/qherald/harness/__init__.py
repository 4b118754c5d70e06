"""Run orchestration: configuration, presets, CLI, file outputs."""

from .config import RunConfig, load_config
from .runs import run_ensemble, run_sweep, run_trajectory

__all__ = ["RunConfig", "load_config", "run_trajectory", "run_ensemble", "run_sweep"]
