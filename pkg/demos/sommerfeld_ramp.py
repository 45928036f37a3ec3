"""
Speed capture near the foundation resonance
===========================================

A limited-power motor drives an unbalanced rotor on a flexible foundation.
Ramping the voltage slowly, the balanced rotor speeds up in proportion to
the voltage, while the unbalanced one gets stuck just below the natural
frequency of the foundation: extra power goes into shaking, not spinning.
"""

import math

import numpy as np

from ldtwin import RotorParams, simulate

dt = 5e-3
voltage = np.linspace(0.0, 12.0, int(60.0 / dt))  # 0 -> 12 V in one minute

balanced = RotorParams()
unbalanced = balanced.with_eccentricity(0.05)

w_balanced = simulate(voltage, dt, balanced)
w_unbalanced = simulate(voltage, dt, unbalanced)

###############################################################################
# Tabulate speed against voltage, one row per volt.

print("resonance sqrt(Kx/M) = %.1f rad/s" % math.sqrt(balanced.Kx / balanced.M))
print(" V    e=0     e=0.05")
for v in range(1, 13):
    k = min(np.searchsorted(voltage, v), len(voltage) - 1)
    print("%2d  %6.1f  %6.1f" % (v, w_balanced[k], w_unbalanced[k]))
