"""Hybrid digital model: frozen physics increment plus a learned GP residual.

One prediction step is ``yhat[k+1] = yhat[k] + f_p(u[k], yhat[k]) + f_d(yhat[k])``
where ``f_p`` is one RK4 step of the ideal (e = 0) motor and ``f_d`` is a GP
trained on the one-step residuals of measured data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, RolloutDiverged
from .gp import GpConfig, GpModel, gp_fit, gp_predict
from .rotor_sim import RotorParams

__all__ = [
    "PhysicalModel",
    "HybridModel",
    "physical_increment",
    "rollout_hybrid",
    "make_residual_dataset",
    "retrain_hybrid",
]

RESIDUAL_INPUTS = ("y", "uy")


@dataclass(frozen=True)
class PhysicalModel:
    """Ideal DC motor ``J domega/dt = kt/Ra (V - ke omega) - b omega`` sampled at ``dt``."""

    J: float
    kt: float
    ke: float
    Ra: float
    b: float
    dt: float

    @classmethod
    def from_params(cls, params, dt):
        return cls(params.J, params.kt, params.ke, params.Ra, params.b, dt)

    def _accel(self, omega, voltage):
        return ((self.kt / self.Ra) * (voltage - self.ke * omega) - self.b * omega) / self.J

    def increment(self, u_k, y_k):
        """One RK4 step from ``omega = y_k`` under voltage ``u_k``, as a speed change.

        Works elementwise on arrays.
        """
        dt = self.dt
        k1 = self._accel(y_k, u_k)
        k2 = self._accel(y_k + 0.5 * dt * k1, u_k)
        k3 = self._accel(y_k + 0.5 * dt * k2, u_k)
        k4 = self._accel(y_k + dt * k3, u_k)
        return (y_k + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)) - y_k

    def to_dict(self):
        return {"J": self.J, "kt": self.kt, "ke": self.ke, "Ra": self.Ra, "b": self.b, "dt": self.dt}


def physical_increment(physical, u_k, y_k):
    return physical.increment(u_k, y_k)


@dataclass(frozen=True)
class HybridModel:
    physical: PhysicalModel
    data: GpModel | None = field(default=None, repr=False)
    residual_input: str = "y"

    def __post_init__(self):
        if self.residual_input not in RESIDUAL_INPUTS:
            raise ConfigError(f"residual_input must be one of {RESIDUAL_INPUTS}")

    @classmethod
    def original(cls, params=None, dt=5e-3, residual_input="y"):
        """The never-adapted model: ideal motor physics, no data model."""
        return cls(PhysicalModel.from_params(params or RotorParams(), dt), None, residual_input)

    @property
    def dt(self):
        return self.physical.dt

    def residual(self, u_k, y_k):
        if self.data is None:
            return 0.0
        x = y_k if self.residual_input == "y" else np.array([[u_k, y_k]])
        r = gp_predict(self.data, x)
        return float(np.ravel(r)[0])

    def with_data_model(self, data):
        return HybridModel(self.physical, data, self.residual_input)

    def to_dict(self):
        return {
            "physical": self.physical.to_dict(),
            "residual_input": self.residual_input,
            "data": None if self.data is None else self.data.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        gp = None if data["data"] is None else GpModel.from_dict(data["data"])
        return cls(PhysicalModel(**data["physical"]), gp, data["residual_input"])

    def to_json(self):
        return json.dumps(self.to_dict())


def _residual_fn(model):
    """Fast scalar closure for ``f_d``; avoids per-call array plumbing."""
    gp = model.data
    if gp is None:
        return lambda u, y: 0.0
    if model.residual_input == "uy":
        return model.residual
    X = gp.inputs[:, 0]
    xm = float(gp.x_mean[0])
    xs = float(gp.x_scale[0])
    c = 1.0 / (2.0 * gp.length_scale**2)
    w = gp.signal_var * gp.t_scale * gp.alpha
    tm = gp.t_mean

    def f(u, y):
        d = (y - xm) / xs - X
        return tm + float(np.exp(-c * d * d) @ w)

    return f


def rollout_hybrid(model, u, y0):
    """Closed-loop prediction: only ``y0`` comes from measurements."""
    u = np.asarray(u, dtype=float)
    f_d = _residual_fn(model)
    inc = model.physical.increment
    out = np.empty(len(u))
    y = float(y0)
    out[0] = y
    for k in range(len(u) - 1):
        uk = float(u[k])
        y = y + inc(uk, y) + f_d(uk, y)
        out[k + 1] = y
    if not np.all(np.isfinite(out)):
        raise RolloutDiverged("hybrid rollout produced non-finite output")
    return out


def make_residual_dataset(experiments, model):
    """Teacher-forced residual targets ``(y[k+1] - y[k]) - f_p(u[k], y[k])``.

    Returns inputs ``y[k]`` (or rows ``(u[k], y[k])`` for ``residual_input="uy"``)
    and targets, concatenated over all experiments.
    """
    if len(experiments) == 0:
        raise ValueError("need at least one experiment")
    xs, ts = [], []
    for exp in experiments:
        u = np.asarray(exp.u[:-1], dtype=float)
        y = np.asarray(exp.y, dtype=float)
        yk = y[:-1]
        ts.append(np.diff(y) - model.physical.increment(u, yk))
        xs.append(yk if model.residual_input == "y" else np.column_stack([u, yk]))
    x = np.concatenate(xs) if model.residual_input == "y" else np.vstack(xs)
    return x, np.concatenate(ts)


def retrain_hybrid(model, experiments, gp_config=None):
    """New model whose data part is refitted on ``experiments``; physics untouched."""
    x, t = make_residual_dataset(experiments, model)
    return model.with_data_model(gp_fit(x, t, gp_config or GpConfig()))
