"""Macroscopic view: evolve the fractional-diffusion density and read off
the continuum coverage for several Levy exponents.

Instead of tracking individual robots, the swarm is described by a position
density u(x, t) obeying a fractional diffusion equation whose order alpha
matches the run-length exponent of the walkers.  The solver expands u in a
cosine basis (reflecting walls) and advances every mode exactly, so a
20-minute horizon costs a couple of seconds regardless of swarm size.

Run:  python3 demos/pde_coverage.py
"""
from levyswarm.core import ExperimentConfig
from levyswarm.harness import pde_coefficients
from levyswarm.metrics import coverage_instantaneous
from levyswarm.pde import build_initial_condition, evolve

N = 20
DURATION = 1200.0

print(f"{'alpha':>6} {'cov@300s':>9} {'cov@600s':>9} {'cov@1200s':>10}")
for alpha in (1.3, 1.5, 1.7, 1.9):
    config = ExperimentConfig(n_robots=N, alpha=alpha, duration=DURATION)
    coeffs = pde_coefficients(config)
    field = build_initial_condition(N)
    snaps = evolve(field, coeffs, DURATION, record_interval=10.0, dt=10.0)
    by_time = {s.time: coverage_instantaneous(s) for s in snaps}
    print(
        f"{alpha:6.1f} {by_time[300.0]:9.3f} {by_time[600.0]:9.3f} "
        f"{by_time[1200.0]:10.3f}"
    )

print("\nSmaller alpha means longer straight runs and faster spreading, so")
print("coverage at a fixed time drops as alpha grows over the mid range.")
print("Near the Brownian limit the trend can flatten or reverse: the")
print("calibrated diffusion coefficient keeps shrinking with alpha, but the")
print("operator order rises, and on this arena the mode rates D*lam^alpha")
print("for the fastest-decaying modes grow again as alpha -> 2.")
