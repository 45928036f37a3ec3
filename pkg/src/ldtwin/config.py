"""Campaign configuration: a single JSON document with strict keys."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .detectors import LDDM_DENOMINATORS, LddmState, ThresholdConfig, WindowConfig
from .errors import ConfigError
from .gp import GpConfig
from .hybrid import RESIDUAL_INPUTS
from .rotor_sim import RotorParams, ScheduleConfig, SignalConfig

__all__ = ["ModelConfig", "DetectorConfig", "CampaignConfig", "load_config"]

MODEL_KINDS = ("linear", "hybrid")
DETECTOR_KINDS = ("window", "threshold", "lddm")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "hybrid"
    order: int = 3
    residual_input: str = "y"
    gp_cap: int = 2000
    gp_seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model.kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.order < 1:
            raise ConfigError("model.order must be >= 1")
        if self.residual_input not in RESIDUAL_INPUTS:
            raise ConfigError(f"model.residual_input must be one of {RESIDUAL_INPUTS}")
        if self.gp_cap < 2:
            raise ConfigError("model.gp_cap must be >= 2")

    def gp_config(self):
        return GpConfig(cap=self.gp_cap, seed=self.gp_seed)


@dataclass(frozen=True)
class DetectorConfig:
    """Detector choice.  ``theta_w`` defaults to ``theta_c / 2`` and
    ``theta_d`` to ``theta_c``."""

    kind: str = "lddm"
    window: int = 5
    theta_c: float = 8.0
    theta_w: float | None = None
    theta_d: float | None = None
    lddm_denominator: str = "since-reset"
    s_floor: float | None = None

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ConfigError(f"detector.kind must be one of {DETECTOR_KINDS}, got {self.kind!r}")
        if self.lddm_denominator not in LDDM_DENOMINATORS:
            raise ConfigError(f"detector.lddm_denominator must be one of {LDDM_DENOMINATORS}")
        # Validate eagerly so bad values surface at load time.
        self.window_config()
        self.threshold_config()
        self.lddm_state()

    def window_config(self):
        return WindowConfig(self.window)

    def threshold_config(self):
        theta_w = self.theta_c / 2 if self.theta_w is None else self.theta_w
        return ThresholdConfig(self.theta_c, theta_w)

    def lddm_state(self):
        theta_d = self.theta_c if self.theta_d is None else self.theta_d
        return LddmState(theta_d, s_floor=self.s_floor, denominator=self.lddm_denominator)

    def at_threshold(self, theta_c):
        """Sweep variant: ``theta_w = theta_c / 2`` and ``theta_d = theta_c``."""
        return dataclasses.replace(self, theta_c=float(theta_c), theta_w=None, theta_d=None)


@dataclass(frozen=True)
class CampaignConfig:
    rotor: RotorParams = field(default_factory=RotorParams)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    model: ModelConfig | None = field(default_factory=ModelConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    seed: int = 42
    out: str = "results"

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data, "")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "rotor": RotorParams,
    "schedule": ScheduleConfig,
    "signal": SignalConfig,
    "model": ModelConfig,
    "detector": DetectorConfig,
}

_INT_FIELDS = {"length", "n_experiments", "segment_min", "segment_max", "order", "gp_cap",
               "gp_seed", "window", "seed"}


def _coerce(name, value, where):
    if value is None:
        return None
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number or string, got {value!r}")
    return value


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {prefix or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        where = f"{prefix}.{name}" if prefix else name
        if cls is CampaignConfig and name in _SECTIONS:
            kwargs[name] = None if value is None else _build(_SECTIONS[name], value, where)
        else:
            kwargs[name] = _coerce(name, value, where)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{prefix or 'config'}: {exc}") from None


def load_config(path):
    """Read a campaign config; JSON syntax errors report line and column."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return CampaignConfig.from_dict(data)
