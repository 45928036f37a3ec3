"""Exact Gaussian-process regression with a squared-exponential kernel.

Hyperparameters are chosen by maximizing the log marginal likelihood over a
fixed logarithmic grid, on standardized inputs and targets.  Only the
posterior mean is exposed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from .errors import FitError

__all__ = ["GpConfig", "GpModel", "se_kernel", "log_marginal_likelihood", "gp_fit", "gp_predict"]

JITTER = 1e-10  # relative to the signal variance


@dataclass(frozen=True)
class GpConfig:
    """Hyperparameter grid (multipliers, in standardized units) and subsample cap."""

    signal_scales: tuple = (0.1, 1.0, 10.0)
    length_scales: tuple = (0.05, 0.1, 0.25, 0.5, 1.0, 2.0)
    noise_scales: tuple = (1e-6, 1e-4, 1e-2)
    cap: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class GpModel:
    inputs: np.ndarray = field(repr=False)  # standardized, shape (n, d)
    targets: np.ndarray = field(repr=False)  # standardized, shape (n,)
    signal_var: float
    length_scale: float
    noise_var: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    t_mean: float
    t_scale: float
    chol: np.ndarray = field(repr=False, compare=False)
    alpha: np.ndarray = field(repr=False, compare=False)
    log_likelihood: float = float("nan")

    @property
    def n_train(self):
        return len(self.targets)

    def predict(self, x):
        return gp_predict(self, x)

    def to_dict(self):
        return {
            "signal_var": self.signal_var,
            "length_scale": self.length_scale,
            "noise_var": self.noise_var,
            "x_mean": self.x_mean.tolist(),
            "x_scale": self.x_scale.tolist(),
            "t_mean": self.t_mean,
            "t_scale": self.t_scale,
            "inputs": self.inputs.tolist(),
            "targets": self.targets.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        """Rebuild a model from its training set and hyperparameters."""
        x_mean = np.asarray(data["x_mean"], dtype=float)
        x_scale = np.asarray(data["x_scale"], dtype=float)
        inputs = np.asarray(data["inputs"], dtype=float)
        targets = np.asarray(data["targets"], dtype=float)
        chol, alpha, lml = _factorize(
            inputs, targets, data["signal_var"], data["length_scale"], data["noise_var"]
        )
        return cls(
            inputs, targets, data["signal_var"], data["length_scale"], data["noise_var"],
            x_mean, x_scale, data["t_mean"], data["t_scale"], chol, alpha, lml,
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _sqdist(a, b):
    return np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)


def se_kernel(a, b, signal_var, length_scale):
    """``signal_var * exp(-|a - b|^2 / (2 length_scale^2))`` for row-sample matrices."""
    a = np.atleast_2d(np.asarray(a, dtype=float).T).T
    b = np.atleast_2d(np.asarray(b, dtype=float).T).T
    return signal_var * np.exp(-_sqdist(a, b) / (2.0 * length_scale**2))


def log_marginal_likelihood(chol, alpha, targets):
    n = len(targets)
    return float(
        -0.5 * targets @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * n * math.log(2 * math.pi)
    )


def _factorize(inputs, targets, signal_var, length_scale, noise_var, corr=None):
    """Cholesky factor, weights and log marginal likelihood for one setting.

    ``corr`` is the unit-variance kernel matrix, reused across settings that
    share a length scale.
    """
    if corr is None:
        corr = np.exp(-_sqdist(inputs, inputs) / (2.0 * length_scale**2))
    K = signal_var * corr
    K[np.diag_indices_from(K)] += noise_var + JITTER * signal_var
    chol, info = scipy.linalg.lapack.dpotrf(K, lower=1, clean=1, overwrite_a=1)
    if info != 0:
        raise np.linalg.LinAlgError("kernel matrix is not positive definite")
    alpha = scipy.linalg.cho_solve((chol, True), targets, check_finite=False)
    return chol, alpha, log_marginal_likelihood(chol, alpha, targets)


def _as_rows(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 1) if x.ndim <= 1 else x


def gp_fit(x, t, config=None, hyperparameters=None):
    """Fit a GP to samples ``x`` (vector or row matrix) and targets ``t``.

    Parameters
    ----------
    x, t : array_like
        Training inputs and targets.  Beyond ``config.cap`` samples a seeded
        uniform subsample is used.
    config : GpConfig, optional
    hyperparameters : tuple, optional
        ``(signal_var, length_scale, noise_var)`` in standardized units; skips
        the grid search.

    Returns
    -------
    GpModel
    """
    config = config or GpConfig()
    x = _as_rows(x)
    t = np.asarray(t, dtype=float).ravel()
    if len(x) != len(t):
        raise FitError("x and t lengths differ")
    if len(t) < 2:
        raise FitError("need at least 2 training points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise FitError("non-finite training data")
    if len(t) > config.cap:
        rng = np.random.default_rng(config.seed)
        keep = np.sort(rng.choice(len(t), size=config.cap, replace=False))
        x, t = x[keep], t[keep]

    x_mean = x.mean(axis=0)
    x_scale = x.std(axis=0)
    x_scale[x_scale == 0] = 1.0
    t_mean = float(t.mean())
    t_scale = float(t.std()) or 1.0
    xs = (x - x_mean) / x_scale
    ts = (t - t_mean) / t_scale
    n = len(ts)

    if hyperparameters is not None:
        sf2, ell, sn2 = hyperparameters
        grid = {ell: [(sf2, sn2)]}
    else:
        span = float(np.max(np.ptp(xs, axis=0))) or 1.0
        var = float(ts.var()) or 1.0
        pairs = [(a * var, b * var) for a in config.signal_scales for b in config.noise_scales]
        grid = {s * span: pairs for s in config.length_scales}
    sqdist = _sqdist(xs, xs)
    best = None
    for ell, pairs in grid.items():
        corr = np.exp(-sqdist / (2.0 * ell**2))
        # K = sf2 (C + rho I): one factorization per noise-to-signal ratio
        ratios = {}
        for sf2, sn2 in pairs:
            ratios.setdefault(float(f"{sn2 / sf2:.12g}"), []).append(sf2)
        for rho, scales in ratios.items():
            try:
                chol, alpha, _ = _factorize(xs, ts, 1.0, ell, rho, corr)
            except np.linalg.LinAlgError:
                continue
            quad = float(ts @ alpha)
            logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
            for sf2 in scales:
                lml = -0.5 * quad / sf2 - 0.5 * (logdet + n * math.log(sf2)) - 0.5 * n * math.log(2 * math.pi)
                if math.isfinite(lml) and (best is None or lml > best[0]):
                    best = (lml, sf2, ell, rho * sf2)
    if best is None:
        raise FitError("no hyperparameter setting gave a positive definite kernel matrix")
    _, sf2, ell, sn2 = best
    # refactorize the winner the same way a deserialized model is rebuilt
    chol, alpha, lml = _factorize(xs, ts, sf2, ell, sn2, np.exp(-sqdist / (2.0 * ell**2)))
    return GpModel(xs, ts, sf2, ell, sn2, x_mean, x_scale, t_mean, t_scale, chol, alpha, lml)


def gp_predict(model, x):
    """Posterior mean at ``x``; scalar in, scalar out."""
    scalar = np.ndim(x) == 0
    xq = _as_rows(x) if not scalar else np.array([[float(x)]])
    if xq.shape[1] != model.inputs.shape[1]:
        xq = xq.reshape(-1, model.inputs.shape[1])
    if not np.all(np.isfinite(xq)):
        raise ValueError("non-finite query")
    xs = (xq - model.x_mean) / model.x_scale
    ks = model.signal_var * np.exp(-_sqdist(xs, model.inputs) / (2.0 * model.length_scale**2))
    mean = model.t_mean + model.t_scale * (ks @ model.alpha)
    return float(mean[0]) if scalar else mean
