"""Flat key-value experiment configuration (TOML syntax, no tables)."""

from dataclasses import dataclass, field
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError

EXPERIMENT_IDS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict = field(default_factory=dict)
    out: str = None

    def __post_init__(self):
        exp = str(self.experiment).upper()
        if exp not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment id {self.experiment!r}; expected one of {', '.join(EXPERIMENT_IDS)}")
        object.__setattr__(self, "experiment", exp)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2^64)")

    def to_dict(self):
        return {"experiment": self.experiment, "seed": self.seed, **self.params}


def parse_config(text, experiment=None, out=None):
    """Build an :class:`ExperimentConfig` from flat TOML text.

    ``experiment`` (from the command line) overrides the file; the two must
    agree when both are given.  ``seed`` is mandatory.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; [{key}] is a table")
    exp = data.pop("experiment", None)
    if experiment is not None:
        if exp is not None and str(exp).upper() != str(experiment).upper():
            raise ConfigError(f"config is for {exp}, not {experiment}")
        exp = experiment
    if exp is None:
        raise ConfigError("no experiment id given")
    if "seed" not in data:
        raise ConfigError("seed is mandatory")
    seed = data.pop("seed")
    out = data.pop("out", None) if out is None else out
    data.pop("out", None)
    return ExperimentConfig(exp, seed, data, out)


def load_config(path, experiment=None, out=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, experiment, out)
