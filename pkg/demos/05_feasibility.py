#!/usr/bin/env python3
"""Trapped-ion feasibility: oscillation frequency vs spin dephasing.

Distinguishing the phases requires resolving oscillations of the slow
degree of freedom (frequency delta for eta << 1, Omega for eta >> 1)
before single-particle elastic dephasing at rate Gamma_el washes them
out.  At the ground-state critical coupling both ratios reduce to
2 g sqrt(eta) / Gamma_el and 2 g / (sqrt(eta) Gamma_el).
"""

import math

from dicke.analysis import feasibility_ratios

# two accessible drive strengths with their correlated dephasing rates
CONFIGS = [(1880.0, 350.0), (3700.0, 550.0)]  # (2g/(2pi) in Hz, Gamma_el in 1/s)

for two_g_hz, gamma_el in CONFIGS:
    g = math.pi * two_g_hz
    print(f"2g/(2pi) = {two_g_hz / 1e3:.2f} kHz, Gamma_el = {gamma_el:.0f} 1/s:")
    print("    eta    delta/Gamma_el   Omega/Gamma_el")
    for eta in (0.1, 0.5, 1.0, 2.0, 10.0):
        d_ratio, o_ratio = feasibility_ratios(g, gamma_el, eta)
        print(f"  {eta:5.1f}   {d_ratio:12.1f}   {o_ratio:12.1f}")
    print()

print("both ratios >> 1 across eta in [0.1, 10]: the full diagram is in reach")
