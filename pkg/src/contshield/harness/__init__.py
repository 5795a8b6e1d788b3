"""Configuration, CLI and batch experiment harness."""

from .config import Config, ConfigError, load_config
from .experiment import (
    ExperimentConfig,
    MatrixCell,
    MetricsReport,
    episode_stream,
    render_unsat_matrix,
    run_experiment,
    run_unsat_matrix,
)

__all__ = [
    "Config", "ConfigError", "load_config", "ExperimentConfig",
    "MetricsReport", "MatrixCell", "episode_stream", "render_unsat_matrix",
    "run_experiment", "run_unsat_matrix",
]
