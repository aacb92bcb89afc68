"""First-passage check: when does a target tile first accumulate a fixed
amount of density mass, and how well does the closed-form estimate do?

Five robots start on a small ring at the arena center.  For each Levy
exponent the macroscopic density is evolved until two 10 cm target tiles
have each accumulated mass delta = 0.01, and the threshold times are
compared against the explicit small-time formula
t0 ~ delta * pi / (2^alpha * C_hat_alpha * vol(T) * sum_i |x0 - x_i|^(-alpha-2)).

Run:  python3 demos/hitting_times.py
"""
from levyswarm.harness import run_hitting_table

rows = run_hitting_table(alphas=(1.3, 1.5, 1.7), n_robots=5)

print(f"{'tile':>14} {'alpha':>6} {'t0_pde_s':>9} {'t0_formula_s':>13} {'rel_err':>8}")
for r in rows:
    tile = f"({r['tile_x']:+.2f},{r['tile_y']:+.2f})"
    rel = abs(r["t0_pde_s"] - r["t0_analytic_s"]) / r["t0_analytic_s"]
    print(
        f"{tile:>14} {r['alpha']:6.1f} {r['t0_pde_s']:9.3f} "
        f"{r['t0_analytic_s']:13.3f} {rel:8.1%}"
    )

print("\nBoth columns grow with alpha: stronger tails (small alpha) reach")
print("distant tiles sooner.  The formula is a small-time expansion, so a")
print("10-20% discrepancy at these thresholds is expected.")
