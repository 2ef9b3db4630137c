"""Run configuration: a flat YAML mapping whose keys are the RunConfig fields."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError


def default_tau_grid() -> tuple:
    return tuple(float(t) for t in np.logspace(-2, 1, 60))


@dataclass(frozen=True)
class RunConfig:
    delta_khz: float = 2.0
    theta0: float = math.pi / 3
    gamma_per_ms: float = 2.5
    tau_grid: tuple = field(default_factory=default_tau_grid)
    steps: int = 4000
    ensemble_size: int = 0
    seed: int = 0
    output_path: str = "sweep.csv"
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.tau_grid, (list, np.ndarray)):
            object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        self.validate()

    @property
    def delta(self) -> float:
        """Detuning in rad/ms."""
        return 2.0 * math.pi * self.delta_khz

    def validate(self):
        def finite(name):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ConfigError(name, f"expected a finite number, got {value!r}")

        for name in ("delta_khz", "theta0", "gamma_per_ms"):
            finite(name)
        if self.delta_khz <= 0:
            raise ConfigError("delta_khz", "must be positive")
        if not 0 < self.theta0 < math.pi / 2:
            raise ConfigError("theta0", "must lie in (0, pi/2)")
        if self.gamma_per_ms < 0:
            raise ConfigError("gamma_per_ms", "must be non-negative")
        grid = self.tau_grid
        if len(grid) == 0:
            raise ConfigError("tau_grid", "must not be empty")
        if any(not math.isfinite(t) or t <= 0 for t in grid):
            raise ConfigError("tau_grid", "entries must be positive and finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("tau_grid", "must be strictly increasing")
        for name, low in (("steps", 100), ("ensemble_size", 0), ("threads", 1)):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < low:
                raise ConfigError(name, f"must be an integer >= {low}, got {value!r}")
        if 0 < self.ensemble_size < 100:
            raise ConfigError("ensemble_size", "must be 0 (disabled) or at least 100")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed", "must be a non-negative integer")
        if not isinstance(self.output_path, str) or not self.output_path:
            raise ConfigError("output_path", "must be a non-empty string")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tau_grid"] = list(self.tau_grid)
        return d

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def config_hash(self) -> str:
        """Digest of everything that affects computed values (not paths or threads)."""
        d = self.to_dict()
        del d["output_path"], d["threads"]
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _coerce_grid(value):
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "num"}
        if unknown or len(value) != 3:
            raise ConfigError("tau_grid", "log-spaced form needs exactly start, stop, num")
        try:
            start, stop, num = float(value["start"]), float(value["stop"]), int(value["num"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("tau_grid", str(exc)) from None
        if start <= 0 or stop <= 0 or num < 1:
            raise ConfigError("tau_grid", "start and stop must be positive and num >= 1")
        return tuple(float(t) for t in np.logspace(math.log10(start), math.log10(stop), num))
    if isinstance(value, (list, tuple)):
        try:
            return tuple(float(t) for t in value)
        except (TypeError, ValueError):
            raise ConfigError("tau_grid", "entries must be numbers") from None
    raise ConfigError("tau_grid", "expected a list of times or {start, stop, num}")


def from_mapping(data) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a flat key-value mapping")
    unknown = sorted(set(data) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(unknown[0], "unknown config key")
    values = dict(data)
    if "tau_grid" in values:
        values["tau_grid"] = _coerce_grid(values["tau_grid"])
    for name in ("delta_khz", "theta0", "gamma_per_ms"):
        if isinstance(values.get(name), int) and not isinstance(values[name], bool):
            values[name] = float(values[name])
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return from_mapping(data)


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
