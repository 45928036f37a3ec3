"""Discrete-time linear state-space model identified by ARX least squares.

The ARX(n, n) structure with one sample of input delay::

    y[k] + a1 y[k-1] + ... + an y[k-n] = b1 u[k-1] + ... + bn u[k-n]

is fitted jointly over all records and realized in observer-canonical form,
so ``D`` is zero for identified models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, IdentificationError, RolloutDiverged

__all__ = [
    "LinearModel",
    "arx_regression",
    "fit_arx",
    "arx_to_state_space",
    "identify_linear",
    "rollout_linear",
]


@dataclass(frozen=True)
class LinearModel:
    """``x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, -1)
        C = np.asarray(self.C, dtype=float).reshape(-1, n)
        D = np.asarray(self.D, dtype=float).reshape(C.shape[0], B.shape[1])
        if A.shape != (n, n):
            raise ConfigError(f"A must be square, got {A.shape}")
        for name, arr in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"{name} has non-finite entries")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    @property
    def is_stable(self):
        return self.spectral_radius < 1.0

    def to_dict(self):
        return {
            "order": self.order,
            "dt": self.dt,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(data["A"], data["B"], data["C"], data["D"], float(data["dt"]))
        if model.order != data["order"]:
            raise ConfigError("order does not match A")
        return model

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def arx_regression(u, y, order):
    """Regressor matrix ``[-y[k-1..k-n], u[k-1..k-n]]`` and targets ``y[k]``."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    n = order
    N = len(y)
    cols = [-y[n - j : N - j] for j in range(1, n + 1)]
    cols += [u[n - j : N - j] for j in range(1, n + 1)]
    return np.column_stack(cols), y[n:]


def fit_arx(dataset, order):
    """Least-squares ARX coefficients ``(a, b)`` over all records jointly.

    The minimum-norm solution is returned when the output regressors are
    collinear (e.g. a first-order plant fitted at higher order).  Only a
    rank-deficient input block, i.e. an input that is not persistently
    exciting, is treated as an error.
    """
    if order < 1:
        raise ConfigError("model order must be >= 1")
    if len(dataset) == 0:
        raise IdentificationError("empty dataset")
    blocks, targets = [], []
    for u, y in dataset:
        if len(u) != len(y):
            raise IdentificationError("u and y lengths differ")
        if len(y) < 10 * order:
            raise IdentificationError(f"record of length {len(y)} is shorter than 10*order")
        phi, t = arx_regression(u, y, order)
        blocks.append(phi)
        targets.append(t)
    phi = np.vstack(blocks)
    t = np.concatenate(targets)
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(t))):
        raise IdentificationError("non-finite data")
    if np.linalg.matrix_rank(phi[:, order:]) < order:
        raise IdentificationError("input is not persistently exciting for the requested order")
    theta, *_ = np.linalg.lstsq(phi, t, rcond=None)
    return theta[:order], theta[order:]


def arx_to_state_space(a, b, dt=1.0):
    """Observer-canonical realization of an ARX polynomial pair."""
    n = len(a)
    A = np.zeros((n, n))
    A[:, 0] = -np.asarray(a)
    A[: n - 1, 1:] = np.eye(n - 1)
    B = np.asarray(b, dtype=float).reshape(n, 1)
    C = np.zeros((1, n))
    C[0, 0] = 1.0
    return LinearModel(A, B, C, np.zeros((1, 1)), dt)


def identify_linear(dataset, order=3, dt=1.0):
    """Identify a state-space model from ``[(u, y), ...]`` records."""
    a, b = fit_arx(dataset, order)
    return arx_to_state_space(a, b, dt)


def rollout_linear(model, u, y0):
    """Free-run simulation from an initial state consistent with ``y0``.

    The initial state is the least-norm solution of ``C x0 = y0``; feedthrough
    is ignored at ``k = 0`` so ``yhat[0] = C x0``.
    """
    u = np.asarray(u, dtype=float).reshape(len(u), -1)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    x = np.linalg.lstsq(model.C, y0, rcond=None)[0]
    A, B, C, D = model.A, model.B, model.C, model.D
    out = np.empty((len(u), C.shape[0]))
    out[0] = C @ x
    for k in range(1, len(u)):
        x = A @ x + B @ u[k - 1]
        out[k] = C @ x + D @ u[k]
    if not np.all(np.isfinite(out)):
        raise RolloutDiverged("linear rollout produced non-finite output")
    return out[:, 0] if out.shape[1] == 1 else out
