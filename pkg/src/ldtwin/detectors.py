"""Drift detectors comparing a model's predictions with one experiment's measurements.

All detectors return a :class:`Signal`: ``DRIFT`` (+1) triggers adaptation,
``WARNING`` (0) buffers the experiment for the next adaptation, ``OK`` (-1)
does nothing.

* :func:`threshold_detect` compares the maximum absolute error with two
  thresholds.
* :func:`lddm_update` tracks the rate of per-sample errors since the last
  drift, DDM style, with ``p_min``/``s_min`` registers.
* :func:`window_detect` fires periodically regardless of the data.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "Signal",
    "ThresholdConfig",
    "WindowConfig",
    "LddmState",
    "max_error",
    "threshold_detect",
    "lddm_update",
    "window_detect",
]


class Signal(enum.IntEnum):
    DRIFT = 1
    WARNING = 0
    OK = -1


@dataclass(frozen=True)
class ThresholdConfig:
    theta_c: float
    theta_w: float

    def __post_init__(self):
        if not 0 < self.theta_w <= self.theta_c:
            raise ConfigError(f"need 0 < theta_w <= theta_c, got {self.theta_w}, {self.theta_c}")


@dataclass(frozen=True)
class WindowConfig:
    W: int

    def __post_init__(self):
        if self.W < 1:
            raise ConfigError("window length W must be >= 1")


LDDM_DENOMINATORS = ("since-reset", "global")


@dataclass(frozen=True)
class LddmState:
    """Immutable LDDM detector state; :func:`lddm_update` returns a new one.

    ``s_floor`` lower-bounds ``s_min`` in the comparisons so that a perfect
    first experiment (``s_min = 0``) does not make any later error fire a
    drift.  ``None`` means ``1 / L``.
    """

    theta_d: float
    error_count: int = 0
    sample_count: int = 0
    p_min: float = math.inf
    s_min: float = math.inf
    length: int | None = None
    s_floor: float | None = None
    denominator: str = "since-reset"
    experiments_seen: int = 0

    def __post_init__(self):
        if not self.theta_d > 0:
            raise ConfigError("theta_d must be > 0")
        if not 0 <= self.error_count <= self.sample_count:
            raise ConfigError("need 0 <= error_count <= sample_count")
        if self.denominator not in LDDM_DENOMINATORS:
            raise ConfigError(f"denominator must be one of {LDDM_DENOMINATORS}")

    def reset(self):
        """Fresh counts and registers; configuration and global counter kept."""
        return dataclasses.replace(
            self, error_count=0, sample_count=0, p_min=math.inf, s_min=math.inf
        )


def max_error(S_p, S_m):
    """``max_k |S_m[k] - S_p[k]|``."""
    S_p = np.asarray(S_p, dtype=float)
    S_m = np.asarray(S_m, dtype=float)
    if S_p.shape != S_m.shape:
        raise ValueError(f"length mismatch: {S_p.shape} vs {S_m.shape}")
    if S_p.size == 0:
        raise ValueError("empty series")
    return float(np.max(np.abs(S_m - S_p)))


def threshold_detect(S_p, S_m, cfg):
    err = max_error(S_p, S_m)
    if err > cfg.theta_c:
        return Signal.DRIFT
    if err > cfg.theta_w:
        return Signal.WARNING
    return Signal.OK


def lddm_update(state, S_p, S_m, L=None):
    """Feed one experiment to LDDM.

    Parameters
    ----------
    state : LddmState
    S_p, S_m : array_like
        Predicted and measured series of length ``L``.
    L : int, optional
        Experiment length; defaults to ``len(S_m)``.  Must not change
        between calls.

    Returns
    -------
    (Signal, LddmState)
        On ``DRIFT`` the returned state is already reset.
    """
    S_p = np.asarray(S_p, dtype=float)
    S_m = np.asarray(S_m, dtype=float)
    if L is None:
        L = len(S_m)
    if len(S_p) != L or len(S_m) != L:
        raise ValueError(f"series length must equal L={L}")
    if state.length is not None and state.length != L:
        raise ValueError(f"experiment length changed from {state.length} to {L}")

    errors = int(np.count_nonzero(np.abs(S_m - S_p) > state.theta_d))
    error_count = state.error_count + errors
    sample_count = state.sample_count + L
    seen = state.experiments_seen + 1
    p = error_count / sample_count
    n = sample_count if state.denominator == "since-reset" else seen * L
    s = math.sqrt(p * (1.0 - p) / n)

    p_min, s_min = state.p_min, state.s_min
    if p + s < p_min + s_min:
        p_min, s_min = p, s

    floor = 1.0 / L if state.s_floor is None else state.s_floor
    s_ref = max(s_min, floor)
    if p + s >= p_min + 3.0 * s_ref:
        signal = Signal.DRIFT
    elif p + s >= p_min + 2.0 * s_ref:
        signal = Signal.WARNING
    else:
        signal = Signal.OK

    new = dataclasses.replace(
        state,
        error_count=error_count,
        sample_count=sample_count,
        p_min=p_min,
        s_min=s_min,
        length=L,
        experiments_seen=seen,
    )
    if signal is Signal.DRIFT:
        new = new.reset()
    return signal, new


def window_detect(i, cfg):
    if i < 1:
        raise ValueError("experiment index must be >= 1")
    return Signal.DRIFT if i % cfg.W == 0 else Signal.OK
