#!/usr/bin/env python3
"""The particle-in-a-potential picture of the dynamical transition.

In the integrable limits the slow coordinate (s_z when eta >> 1, Re beta
when eta << 1) rolls in a 1D potential, starting at zero mechanical
energy.  The transition happens exactly when the interior barrier
touches zero.  This demo tabulates the potentials around their critical
couplings and cross-checks the closed forms against the numeric
barrier-crossing oracle.
"""

import math
from pathlib import Path

import numpy as np

from dicke.model import InitialCondition
from dicke.potential import (
    Regime,
    boson_potential,
    critical_coupling_boson,
    critical_coupling_spin,
    numeric_critical_coupling,
    potential_curve,
    spin_potential,
)

out = Path(__file__).parent / "out" / "potential"
out.mkdir(parents=True, exist_ok=True)

print("spin-dominated barrier V(s_z = 0) around g_tilde = sqrt(2):")
for g_tilde in (1.2, math.sqrt(2), 1.6):
    barrier = spin_potential(0.0, g_tilde, theta0=0.0)
    state = "flat" if abs(barrier) < 1e-12 else ("above" if barrier > 0 else "below")
    print(f"  g_tilde={g_tilde:.4f}: V(0) = {barrier:+.4f}  ({state} initial energy)")

print("\nboson-dominated barrier V(beta_R = 0) around g_tilde = 3^(1/4):")
for g_tilde in (1.2, 3 ** 0.25, 1.45):
    barrier = boson_potential(0.0, g_tilde, beta0=1.0)
    state = "flat" if abs(barrier) < 1e-12 else ("above" if barrier > 0 else "below")
    print(f"  g_tilde={g_tilde:.4f}: V(0) = {barrier:+.4f}  ({state} initial energy)")

print("\nclosed form vs numeric barrier oracle:")
for theta0 in (-0.6, 0.0, 0.6):
    ic = InitialCondition(theta0=theta0, beta0=1.0)
    closed = critical_coupling_spin(theta0)
    numeric = numeric_critical_coupling(Regime.SPIN_DOMINATED, ic)
    print(f"  spin  theta0={theta0:+.2f}: {closed:.8f} vs {numeric:.8f}")
for beta0 in (0.5, 1.0, 1.5):
    ic = InitialCondition(theta0=0.0, beta0=beta0)
    closed = critical_coupling_boson(beta0)
    numeric = numeric_critical_coupling(Regime.BOSON_DOMINATED, ic)
    print(f"  boson beta0={beta0:.1f}:  {closed:.8f} vs {numeric:.8f}")

# tabulate curves for plotting (three couplings per regime)
for tag, regime, couplings in (
    ("spin", Regime.SPIN_DOMINATED, (1.2, math.sqrt(2), 1.6)),
    ("boson", Regime.BOSON_DOMINATED, (1.2, 3 ** 0.25, 1.45)),
):
    ic = InitialCondition(theta0=0.0, beta0=1.0)
    for g_tilde in couplings:
        curve = potential_curve(regime, ic, g_tilde=g_tilde)
        path = out / f"{tag}_g{g_tilde:.3f}.csv"
        curve.to_csv(path)
print(f"\ncurves written under {out}")
print("render any of them with: cd frontend && node dist/cli.js potential "
      f"--input {out / 'spin_g1.414.csv'} --out potential.svg")
