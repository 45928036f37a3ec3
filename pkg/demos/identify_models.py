"""
Linear and hybrid models of one experiment
==========================================

Both digital models are fitted on one experiment and judged on another by a
closed-loop rollout: only the first measured speed is given, the rest is
predicted from the voltage alone.
"""

import numpy as np

from ldtwin import GpConfig, HybridModel, RotorParams, identify_linear, rollout_hybrid, rollout_linear
from ldtwin.hybrid import retrain_hybrid
from ldtwin.rotor_sim import run_experiment

params = RotorParams()
e = 0.04
train = run_experiment(1, e, seed=1, params=params.with_eccentricity(e))
test = run_experiment(2, e, seed=2, params=params.with_eccentricity(e))

###############################################################################
# Third-order ARX, realized as a state-space model.

linear = identify_linear([(train.u, train.y)], order=3, dt=train.dt)
print("linear poles:", np.round(np.linalg.eigvals(linear.A), 4))

###############################################################################
# Physics of the balanced motor, plus a GP that learns what it misses.

original = HybridModel.original(params, train.dt)
hybrid = retrain_hybrid(original, [train], GpConfig(cap=1000))

for name, yhat in [
    ("original", rollout_hybrid(original, test.u, test.y[0])),
    ("linear", rollout_linear(linear, test.u, test.y[0])),
    ("hybrid", rollout_hybrid(hybrid, test.u, test.y[0])),
]:
    print("%-8s max |error| = %6.2f rad/s" % (name, np.max(np.abs(test.y - yhat))))
