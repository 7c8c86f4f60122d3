"""Config-driven experiments, reports and the ``smlab`` command line."""

from .config import EXPERIMENT_IDS, ExperimentConfig, load_config, parse_config
from .report import Report, Row, read_rows

__all__ = ["EXPERIMENT_IDS", "ExperimentConfig", "Report", "Row", "load_config", "parse_config", "read_rows"]
