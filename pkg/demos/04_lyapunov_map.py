#!/usr/bin/env python3
"""Chaos diagnostics: Lyapunov exponents across the phase diagram.

Computes the Benettin exponent at a few marker points and then a coarse
map.  The resonant strip (eta ~ 1, g_tilde >~ 1) is chaotic; the
integrable spin- and boson-dominated limits are regular.
"""

from pathlib import Path

from dicke.classical import lyapunov_exponent
from dicke.model import DimensionlessView, InitialCondition, build_initial_classical
from dicke.sweep import SweepPlan, run_sweep

out = Path(__file__).parent / "out" / "lyapunov"
x0 = build_initial_classical(InitialCondition(theta0=0.0, beta0=1.0))

print("marker points (t_total = 2000):")
for eta, g_tilde, tag in ((1.0, 1.3, "resonant, near transition"),
                          (10.0, 1.0, "spin-dominated, untrapped"),
                          (0.1, 2.0, "boson-dominated, trapped"),
                          (1.0, 2.0, "resonant, trapped")):
    r = lyapunov_exponent(x0, DimensionlessView(g_tilde, eta), seed=0)
    verdict = "chaotic" if r.lam > 0.01 else "regular"
    print(f"  (eta={eta:5.1f}, g~={g_tilde:3.1f}) {tag:32s} "
          f"lambda = {r.lam:7.4f}  [{verdict}]")

plan = SweepPlan(
    g_tilde_axis=(0.5, 2.5, 17),
    eta_axis=(0.1, 10.0, 9, "log"),
    task="lyapunov-map",
    output_dir=str(out),
    settings={"t_total": 1000.0},
    seed=0,
)
result = run_sweep(plan, workers=2)
print(f"\ncoarse 17x9 map in {result.wall_time:.0f}s; chaotic fraction "
      f"{sum(r.payload['lambda'] > 0.01 for r in result.records) / len(result.records):.0%}")
print(f"records: {out / 'records.csv'}")
print("render with:")
print(f"  cd frontend && node dist/cli.js heatmap --records {out / 'records.csv'} "
      "--field lambda --out lyapunov.svg")
