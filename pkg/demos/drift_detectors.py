"""
Three drift detectors side by side
==================================

Each detector sees the prediction and the measurement of one experiment and
answers ``OK``, ``WARNING`` or ``DRIFT``.  The LDDM detector tracks how often
the error exceeds a band and signals when that rate climbs well above the
best rate seen so far.
"""

import numpy as np

from ldtwin import LddmState, Signal, ThresholdConfig, WindowConfig, lddm_update, threshold_detect, window_detect

rng = np.random.default_rng(0)
L = 100
measured = np.zeros(L)

threshold = ThresholdConfig(theta_c=2.0, theta_w=1.0)
window = WindowConfig(W=4)
lddm = LddmState(theta_d=1.0)

print(" i  errors  threshold  window  lddm")
for i, n_bad in enumerate([0, 1, 0, 2, 5, 20, 60, 0], start=1):
    predicted = rng.uniform(-0.5, 0.5, L)
    predicted[:n_bad] = 1.5  # above theta_d, below theta_c
    sig_l, lddm = lddm_update(lddm, predicted, measured)
    print("%2d  %5d   %-9s  %-6s  %s" % (
        i, n_bad,
        Signal(threshold_detect(predicted, measured, threshold)).name,
        Signal(window_detect(i, window)).name,
        sig_l.name,
    ))
