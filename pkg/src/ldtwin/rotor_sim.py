"""Physical twin: a DC motor driving an eccentric rotor on an anisotropic foundation.

The motor frame (total mass ``M``) sits on a foundation with horizontal and
vertical springs/dampers.  An unbalance ``m`` at radius ``e`` couples rotor
speed to foundation vibration.  With a limited-power motor, energy pumped into
the foundation near resonance caps the reachable speed (Sommerfeld effect).

Equations of motion, state ``(x, y_f, vx, vy, phi, omega)``::

    M ax + Rx vx + Kx x = m e (omega**2 cos(phi) + alpha sin(phi))
    M ay + Ry vy + Ky y = m e (omega**2 sin(phi) - alpha cos(phi))
    (J + m e**2) alpha = G(omega, V) + m e (ax sin(phi) - ay cos(phi))

with motor torque ``G = kt/Ra (V - ke omega) - b omega``.  The three
accelerations are coupled; the linear system is eliminated in closed form,
which is always solvable because ``m < M``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, SimulationDiverged

__all__ = [
    "RotorParams",
    "RotorState",
    "SignalConfig",
    "ScheduleConfig",
    "Experiment",
    "DegradationSchedule",
    "motor_torque",
    "rotor_derivative",
    "integrate_step",
    "mechanical_energy",
    "motor_steady_speed",
    "generate_input",
    "run_experiment",
    "simulate",
    "build_schedule",
    "experiment_seed",
    "stream_schedule",
    "stream_experiment",
    "generate_stream",
    "write_experiment_csv",
]


@dataclass(frozen=True)
class RotorParams:
    """Physical parameters of the rotor rig (SI units).

    The defaults place the foundation resonances ``sqrt(Kx/M)`` ~ 55 rad/s and
    ``sqrt(Ky/M)`` ~ 67 rad/s inside the motor's 0-12 V speed range
    (~0-100 rad/s), so the speed plateau is observable once ``e`` grows.
    """

    M: float = 1.0
    m: float = 0.1
    e: float = 0.0
    J: float = 5e-3
    Kx: float = 3000.0
    Ky: float = 4500.0
    Rx: float = 2.0
    Ry: float = 2.0
    kt: float = 0.1
    ke: float = 0.1
    Ra: float = 2.0
    b: float = 1e-3

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ConfigError(f"rotor.{f.name} must be finite, got {value}")
            if f.name == "e":
                if value < 0:
                    raise ConfigError(f"rotor.e must be >= 0, got {value}")
            elif value <= 0:
                raise ConfigError(f"rotor.{f.name} must be > 0, got {value}")
        if self.Kx == self.Ky:
            raise ConfigError("foundation must be anisotropic (Kx != Ky)")
        if self.m >= self.M:
            raise ConfigError("unbalance mass m must be smaller than M")

    def with_eccentricity(self, e):
        return dataclasses.replace(self, e=float(e))


class RotorState(NamedTuple):
    x: float = 0.0
    y_f: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    phi: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class SignalConfig:
    """Sampling and random-input settings shared by every experiment."""

    length: int = 2000
    dt: float = 5e-3
    v_min: float = 0.0
    v_max: float = 12.0
    dwell_min: float = 0.5
    dwell_max: float = 2.0
    noise_std: float = 0.0

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError("signal.length must be >= 1")
        if not self.dt > 0:
            raise ConfigError("signal.dt must be > 0")
        if self.v_min > self.v_max:
            raise ConfigError("signal.v_min must not exceed signal.v_max")
        if not 0 < self.dwell_min <= self.dwell_max:
            raise ConfigError("signal dwell range must satisfy 0 < dwell_min <= dwell_max")
        if self.noise_std < 0:
            raise ConfigError("signal.noise_std must be >= 0")


@dataclass(frozen=True)
class ScheduleConfig:
    n_experiments: int = 200
    e_start: float = 0.0
    e_end: float = 0.05
    segment_min: int = 5
    segment_max: int = 15

    def __post_init__(self):
        if self.n_experiments < 1:
            raise ConfigError("schedule.n_experiments must be >= 1")
        if not 0 <= self.e_start <= self.e_end:
            raise ConfigError("schedule requires 0 <= e_start <= e_end")
        if not 1 <= self.segment_min <= self.segment_max:
            raise ConfigError("schedule segment range is empty")


@dataclass(frozen=True)
class Experiment:
    """One fixed-length input/output record from the physical twin.

    ``e_true`` and ``drift_onset`` are ground truth for evaluation; the
    learning loop never reads them.
    """

    index: int
    dt: float
    u: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    e_true: float = 0.0
    drift_onset: bool = False

    def __post_init__(self):
        if len(self.u) != len(self.y):
            raise ValueError("u and y must have equal length")
        for arr in (self.u, self.y):
            arr.flags.writeable = False

    @property
    def length(self):
        return len(self.u)


@dataclass(frozen=True)
class DegradationSchedule:
    e_values: np.ndarray
    boundaries: tuple  # 1-based experiment indices where e steps up

    @property
    def n_experiments(self):
        return len(self.e_values)

    def drift_onsets(self):
        onsets = np.zeros(len(self.e_values), dtype=bool)
        for i in self.boundaries:
            onsets[i - 1] = True
        return onsets


def motor_torque(omega, voltage, params):
    return (params.kt / params.Ra) * (voltage - params.ke * omega) - params.b * omega


def rotor_derivative(state, voltage, params):
    """Time derivative of the six-dimensional rotor state.

    Parameters
    ----------
    state : RotorState
    voltage : float
        Supply voltage, held constant over the evaluation.
    params : RotorParams

    Returns
    -------
    RotorState
        ``(vx, vy, ax, ay, omega, alpha)`` packed in the state layout.
    """
    x, yf, vx, vy, phi, omega = state
    M, m, e = params.M, params.m, params.e
    me = m * e
    sn = math.sin(phi)
    cs = math.cos(phi)
    gamma = (params.kt / params.Ra) * (voltage - params.ke * omega) - params.b * omega
    # Foundation forces excluding the alpha-dependent inertial coupling.
    fx = me * omega * omega * cs - params.Rx * vx - params.Kx * x
    fy = me * omega * omega * sn - params.Ry * vy - params.Ky * yf
    inertia = params.J + m * e * e - me * me / M
    if not inertia > 0:
        raise SimulationDiverged("singular coupling matrix")
    alpha = (gamma + me * sn * fx / M - me * cs * fy / M) / inertia
    ax = (fx + me * sn * alpha) / M
    ay = (fy - me * cs * alpha) / M
    return RotorState(vx, vy, ax, ay, omega, alpha)


def integrate_step(state, voltage, dt, params):
    """Advance the rotor by one classical RK4 step with zero-order-hold input."""
    if not dt > 0:
        raise ConfigError("dt must be > 0")
    h2 = 0.5 * dt
    k1 = rotor_derivative(state, voltage, params)
    k2 = rotor_derivative(RotorState(*[s + h2 * k for s, k in zip(state, k1)]), voltage, params)
    k3 = rotor_derivative(RotorState(*[s + h2 * k for s, k in zip(state, k2)]), voltage, params)
    k4 = rotor_derivative(RotorState(*[s + dt * k for s, k in zip(state, k3)]), voltage, params)
    h6 = dt / 6.0
    new = RotorState(
        *[s + h6 * (a + 2.0 * b + 2.0 * c + d) for s, a, b, c, d in zip(state, k1, k2, k3, k4)]
    )
    if not all(math.isfinite(v) for v in new):
        raise SimulationDiverged("non-finite rotor state")
    return new


def mechanical_energy(state, params):
    """Kinetic plus elastic energy of frame, rotor and unbalance."""
    _, _, vx, vy, phi, omega = state
    me = params.m * params.e
    kinetic = (
        0.5 * params.M * (vx * vx + vy * vy)
        + 0.5 * (params.J + params.m * params.e**2) * omega * omega
        - me * omega * (vx * math.sin(phi) - vy * math.cos(phi))
    )
    elastic = 0.5 * params.Kx * state[0] ** 2 + 0.5 * params.Ky * state[1] ** 2
    return kinetic + elastic


def motor_steady_speed(voltage, params):
    """Speed at which motor torque balances viscous friction (e = 0)."""
    return voltage / params.ke / (1.0 + params.b * params.Ra / (params.kt * params.ke))


def generate_input(length, dt, seed, v_min=0.0, v_max=12.0, dwell_min=0.5, dwell_max=2.0):
    """Random piecewise-constant supply voltage.

    Each level is drawn uniformly from ``[v_min, v_max]`` and held for a
    dwell drawn uniformly from ``[dwell_min, dwell_max]`` seconds.
    """
    if length < 1:
        raise ConfigError("length must be >= 1")
    rng = np.random.default_rng(seed)
    u = np.empty(length)
    k = 0
    while k < length:
        level = rng.uniform(v_min, v_max)
        n = max(1, int(round(rng.uniform(dwell_min, dwell_max) / dt)))
        u[k : k + n] = level
        k += n
    return u


def simulate(u, dt, params, state=None, index=None):
    """Integrate from ``state`` (default rest) and return the speed at every sample.

    ``omega[k]`` is the speed at ``t = k*dt``; ``u[k]`` acts on ``[k*dt, (k+1)*dt)``.
    """
    state = RotorState() if state is None else RotorState(*state)
    omega = np.empty(len(u))
    try:
        for k, v in enumerate(u):
            omega[k] = state.omega
            state = integrate_step(state, float(v), dt, params)
    except SimulationDiverged as exc:
        raise SimulationDiverged(f"{exc} at sample {k}", index=index) from None
    return omega


def experiment_seed(master_seed, index):
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def run_experiment(index, e, seed, params=None, signal=None, drift_onset=False):
    """Simulate one experiment from rest with eccentricity ``e``."""
    if e < 0:
        raise ConfigError("eccentricity must be >= 0")
    params = (params or RotorParams()).with_eccentricity(e)
    signal = signal or SignalConfig()
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    input_seq, noise_seq = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key).spawn(2)
    u = generate_input(
        signal.length, signal.dt, input_seq,
        signal.v_min, signal.v_max, signal.dwell_min, signal.dwell_max,
    )
    y = simulate(u, signal.dt, params, index=index)
    if signal.noise_std > 0:
        y = y + np.random.default_rng(noise_seq).normal(0.0, signal.noise_std, len(y))
    return Experiment(index, signal.dt, u, y, float(e), bool(drift_onset))


def build_schedule(n, e_start, e_end, segment_range=(5, 15), seed=0):
    """Monotone staircase of eccentricities with random plateau lengths.

    Plateau ``s`` of ``S`` takes ``e_start + (e_end - e_start) * s / (S - 1)``.
    """
    lo, hi = segment_range
    if n < 1:
        raise ConfigError("n must be >= 1")
    if not 1 <= lo <= hi:
        raise ConfigError(f"empty segment-length range {segment_range}")
    if e_start > e_end:
        raise ConfigError("e_start must not exceed e_end")
    rng = np.random.default_rng(seed)
    lengths = []
    while sum(lengths) < n:
        lengths.append(int(rng.integers(lo, hi + 1)))
    lengths[-1] -= sum(lengths) - n
    levels = np.linspace(e_start, e_end, len(lengths)) if len(lengths) > 1 else [e_start]
    e_values = np.repeat(levels, lengths).astype(float)
    boundaries = tuple(
        i + 1 for i in range(1, n) if e_values[i] != e_values[i - 1]
    )
    return DegradationSchedule(e_values, boundaries)


def stream_schedule(schedule, seed):
    """The hidden eccentricity staircase of the stream with master ``seed``."""
    return build_schedule(
        schedule.n_experiments, schedule.e_start, schedule.e_end,
        (schedule.segment_min, schedule.segment_max),
        experiment_seed(seed, 0),
    )


def stream_experiment(index, params=None, schedule=None, signal=None, seed=0):
    """Experiment ``index`` of the stream, without simulating the others."""
    schedule = schedule or ScheduleConfig()
    sched = stream_schedule(schedule, seed)
    if not 1 <= index <= sched.n_experiments:
        raise ConfigError(f"index must be in [1, {sched.n_experiments}], got {index}")
    return run_experiment(
        index, sched.e_values[index - 1], experiment_seed(seed, index),
        params or RotorParams(), signal, sched.drift_onsets()[index - 1],
    )


def generate_stream(params=None, schedule=None, signal=None, seed=0):
    """Full degradation stream as a list of experiments ``1..N``.

    The stream is a pure function of its arguments.
    """
    params = params or RotorParams()
    sched = stream_schedule(schedule or ScheduleConfig(), seed)
    onsets = sched.drift_onsets()
    return [
        run_experiment(i, sched.e_values[i - 1], experiment_seed(seed, i), params, signal, onsets[i - 1])
        for i in range(1, sched.n_experiments + 1)
    ]


def write_experiment_csv(path, experiment, yhat=None):
    """Dump ``k, t, u, y`` (plus ``yhat`` if given) with ``%.9g`` formatting."""
    header = ["k", "t", "u", "y"] + (["yhat"] if yhat is not None else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(experiment.length):
            row = [str(k), "%.9g" % (k * experiment.dt), "%.9g" % experiment.u[k], "%.9g" % experiment.y[k]]
            if yhat is not None:
                row.append("%.9g" % yhat[k])
            writer.writerow(row)
