"""Dual-engine comparison: agent ensemble versus macroscopic solver on the
same coverage task.

A small sweep point (N = 10 robots, alpha = 1.5, 10 replicates, 400 s) is
run through both engines.  The agent side reports the ensemble mean and
standard deviation of discrete cell coverage; the PDE side reports the
thresholded-density coverage.  The script prints both curves side by side
and the fraction of record times at which the PDE curve stays inside the
+-1 std ensemble band.

For the full report (CSVs, hitting-time table, figure data) use the CLI:

    levyswarm compare --config sweep.json --out results/

Run:  python3 demos/compare_engines.py
"""
import numpy as np

from levyswarm.core import ExperimentConfig
from levyswarm.harness import run_agents, run_pde

config = ExperimentConfig(
    n_robots=10,
    alpha=1.5,
    duration=400.0,
    record_interval=10.0,
    seed=7,
    mode="point",
    replicates=10,
)

agents = run_agents(config)
pde = run_pde(config)

mean, std = agents.mean(), agents.std()
inside = (pde.coverage >= mean - std) & (pde.coverage <= mean + std)

print(f"{'time_s':>7} {'agents_mean':>12} {'agents_std':>11} {'pde':>7}  in-band")
for k in range(0, len(agents.times), 4):
    print(
        f"{agents.times[k]:7.0f} {mean[k]:12.3f} {std[k]:11.3f} "
        f"{pde.coverage[k]:7.3f}  {'yes' if inside[k] else 'no'}"
    )

print(f"\nband containment: {inside.mean():.2f}")
print("The continuum curve is concave from t = 0 while the agent mean is")
print("nearly linear during the early ballistic sweep, so the band is")
print("typically left early on and rejoined once spreading saturates.")
