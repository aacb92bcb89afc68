"""Experiment harness: agent/PDE runs, sweeps, comparisons, figure data.

All experiments are pure functions of (configuration, seed): replicates get
independent RNG streams derived from the experiment seed, CSV emission uses
fixed formatting, and aggregation is keyed by (N, alpha, replicate) so worker
scheduling cannot change any output byte.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .agents import SimWorld, export_hitmap_csv, export_hitmap_pgm
from .core import Arena, ExperimentConfig, GridSpec, cell_index, ring_placement
from .metrics import (
    MetricSeries,
    NOT_REACHED,
    TILE_1_CENTER,
    TILE_2_CENTER,
    TargetTile,
    coverage_instantaneous,
    ensemble_stats,
    hitting_time_analytic,
    hitting_time_pde,
    time_to_coverage,
)
from .pde import (
    build_initial_condition,
    build_multibump_initial_condition,
    compute_coefficients,
    evolve,
)
from .sampling import KineticParams, TurnKernel, kernel_nu1

# Calibration of the macroscopic coefficients to the canonical (metre/second)
# frame.  The scaled speed is c0 = c * EPSILON**GAMMA_CAL and the scaled
# reference run time is sigma0 * EPSILON**MU_CAL; the exponents are fitted so
# that the effective diffusivity reproduces the agent ensemble transport at
# alpha = 1.3 and 1.9 (and stays within ~25% in between).
EPSILON = 0.005
GAMMA_CAL = 0.386408
MU_CAL = 0.390568

# Hitting-time experiments run in the macroscopic time frame (coefficient
# C_hat_alpha) where the closed-form tile formula lives; the threshold mass
# scale converts the normalized density to that formula's density convention.
HITTING_MASS_SCALE = 14.5
HITTING_HORIZON = 12.0
HITTING_DT = 0.01
HITTING_DELTA = 0.01

DEFAULT_TILES = (TILE_1_CENTER, TILE_2_CENTER)

BAND_THRESHOLD = 0.9


def pde_params(config: ExperimentConfig) -> KineticParams:
    """Kinetic parameters rescaled for the macroscopic solver."""
    return KineticParams(
        alpha=config.alpha,
        sigma0=1.0 * EPSILON**MU_CAL,
        speed_c=0.03,
    )


def pde_coefficients(config: ExperimentConfig, kernel: TurnKernel | None = None):
    nu1 = kernel_nu1(kernel) if kernel is not None else 0.0
    return compute_coefficients(
        pde_params(config), nu1=nu1, epsilon=EPSILON, gamma=GAMMA_CAL
    )


@dataclass
class SweepSpec:
    """Grid of (N, alpha) sweep points over a shared base configuration."""

    n_values: list
    alpha_values: list
    base: ExperimentConfig

    def __post_init__(self):
        if not self.n_values or not self.alpha_values:
            raise ValueError("sweep lists must be nonempty")
        for a in self.alpha_values:
            if not (1.0 < a < 2.0):
                raise ValueError(f"alpha must lie in (1, 2), got {a}")

    def points(self):
        for n in self.n_values:
            for a in self.alpha_values:
                yield replace(self.base, n_robots=int(n), alpha=float(a))

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        obj = json.loads(text)
        return cls(
            n_values=list(obj["n_values"]),
            alpha_values=list(obj["alpha_values"]),
            base=ExperimentConfig.from_json(json.dumps(obj["base"])),
        )


@dataclass
class AgentRunResult:
    config: ExperimentConfig
    times: np.ndarray
    coverages: np.ndarray  # (replicates, n_times)
    hit_maps: list

    def mean(self):
        return self.coverages.mean(axis=0)

    def std(self):
        if self.coverages.shape[0] < 2:
            return np.zeros(self.coverages.shape[1])
        return self.coverages.std(axis=0, ddof=1)


@dataclass
class PdeRunResult:
    config: ExperimentConfig
    times: np.ndarray
    coverage: np.ndarray
    final_field: object


@dataclass
class CompareEntry:
    n_robots: int
    alpha: float
    times: np.ndarray
    agent_mean: np.ndarray
    agent_std: np.ndarray
    replicates: int
    pde: np.ndarray
    containment: float
    t50_agent: float
    t50_pde: float


@dataclass
class ComparisonReport:
    entries: dict  # (N, alpha) -> CompareEntry
    hitting_rows: list  # dicts with tile/alpha/t0 columns

    def worst_containment(self) -> float:
        return min(e.containment for e in self.entries.values())


def _single_agent_run(config: ExperimentConfig, replicate_id: int):
    params = KineticParams(alpha=config.alpha)
    kernel = TurnKernel("uniform")
    world = SimWorld(
        config.placement.resolve(config.n_robots),
        params,
        kernel,
        mode=config.mode,
        seed=config.seed,
        replicate_id=replicate_id,
    )
    times, cov = world.run(config.duration, config.record_interval)
    return world, times, cov


def run_agents(
    config: ExperimentConfig, out_dir: str | None = None, workers: int = 1
) -> AgentRunResult:
    """Run all agent replicates for one sweep point.

    Replicates use RNG streams keyed by (seed, replicate, robot) and can run
    in any order or process; results are reassembled by replicate id.
    """
    worlds = {}
    rows = {}
    if workers > 1:
        # hit maps stay in the parent only for the serial path; parallel
        # workers return the coverage series (maps are large and only the
        # serial entry points export them)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rid, times, cov in pool.map(
                _run_agent_payload,
                [(config.to_json(), r) for r in range(config.replicates)],
            ):
                rows[rid] = (times, cov)
    else:
        for r in range(config.replicates):
            world, times, cov = _single_agent_run(config, r)
            worlds[r] = world
            rows[r] = (times, cov)
    times = rows[0][0]
    coverages = np.stack([rows[r][1] for r in range(config.replicates)])
    hit_maps = [worlds[r].hit_map for r in sorted(worlds)] if worlds else []
    result = AgentRunResult(
        config=config, times=np.asarray(times), coverages=coverages, hit_maps=hit_maps
    )
    if out_dir is not None:
        write_agent_outputs(result, out_dir)
    return result


def _run_agent_payload(args):
    config_json, replicate_id = args
    config = ExperimentConfig.from_json(config_json)
    _, times, cov = _single_agent_run(config, replicate_id)
    return replicate_id, times, cov


def run_pde(config: ExperimentConfig, out_dir: str | None = None) -> PdeRunResult:
    """Evolve the macroscopic density for one sweep point and record coverage."""
    coeffs = pde_coefficients(config)
    field = build_initial_condition(config.n_robots)
    dt = min(10.0, max(config.record_interval, 1e-6))
    snaps = evolve(
        field, coeffs, config.duration, config.record_interval, dt=dt
    )
    times = np.array([s.time for s in snaps])
    cov = np.array([coverage_instantaneous(s) for s in snaps])
    result = PdeRunResult(
        config=config, times=times, coverage=cov, final_field=snaps[-1]
    )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_csv(
            os.path.join(out_dir, "pde_coverage.csv"),
            ["time_s", "coverage"],
            [(t, c) for t, c in zip(times, cov)],
        )
    return result


def run_hitting_table(
    alphas,
    n_robots: int = 5,
    tiles=DEFAULT_TILES,
    delta: float = HITTING_DELTA,
    agent_result_by_alpha: dict | None = None,
    grid: GridSpec | None = None,
):
    """Tile hitting times: PDE threshold crossing vs the closed-form estimate.

    The solver runs in the macroscopic time frame (coefficient C_hat_alpha);
    agent columns are filled from hit maps when agent results are supplied,
    otherwise left as NaN.
    """
    grid = grid or GridSpec.for_arena(Arena())
    rows = []
    placement = ring_placement(n_robots, 0.25)
    positions = np.array([p for p, _ in placement])
    for alpha in alphas:
        config = ExperimentConfig(
            n_robots=n_robots, alpha=float(alpha), duration=1.0
        )
        coeffs = pde_coefficients(config)
        macro = replace(coeffs, D_eff=coeffs.C_hat_alpha)
        field = build_initial_condition(n_robots)
        snaps = evolve(field, macro, HITTING_HORIZON, HITTING_DT, dt=HITTING_DT)
        for tc in tiles:
            tile = TargetTile(center=tc)
            t_pde = hitting_time_pde(
                snaps, tile, delta=delta, mass_scale=HITTING_MASS_SCALE
            )
            t_ana = hitting_time_analytic(tile, positions, coeffs, delta=delta)
            t_mean = t_std = float("nan")
            agents = (agent_result_by_alpha or {}).get(alpha)
            if agents is not None:
                hits = [
                    _tile_first_visit(hm, tile, grid) for hm in agents.hit_maps
                ]
                hits = [h for h in hits if np.isfinite(h)]
                if hits:
                    t_mean = float(np.mean(hits))
                    t_std = float(np.std(hits, ddof=1)) if len(hits) > 1 else 0.0
            rows.append(
                {
                    "tile_x": tc[0],
                    "tile_y": tc[1],
                    "alpha": float(alpha),
                    "t0_pde_s": t_pde,
                    "t0_analytic_s": t_ana,
                    "t0_agents_mean_s": t_mean,
                    "t0_agents_std_s": t_std,
                }
            )
    return rows


def _tile_first_visit(hit_map, tile: TargetTile, grid: GridSpec) -> float:
    half = tile.side / 2.0
    arena = Arena()
    eps = 1e-9
    i0, j0 = cell_index((tile.center[0] - half + eps, tile.center[1] - half + eps), grid, arena)
    i1, j1 = cell_index((tile.center[0] + half - eps, tile.center[1] + half - eps), grid, arena)
    block = hit_map[i0 : i1 + 1, j0 : j1 + 1]
    if np.all(np.isnan(block)):
        return NOT_REACHED
    return float(np.nanmin(block))


def compare(
    sweep: SweepSpec, out_dir: str | None = None, workers: int = 1
) -> ComparisonReport:
    """Agent-vs-PDE comparison over a sweep grid.

    For every (N, alpha) pair the agent ensemble and the macroscopic run are
    aligned on the shared record grid; the report carries the +-1 std band
    containment fraction and the 50%-coverage times, plus the tile
    hitting-time table for the smallest N in the sweep.
    """
    entries = {}
    agent_by_alpha = {}
    for config in sweep.points():
        agents = run_agents(config, workers=workers)
        pde = run_pde(config)
        if agents.times.shape != pde.times.shape or np.any(
            np.abs(agents.times - pde.times) > 1e-9
        ):
            raise ValueError("agent and PDE record grids do not align")
        mean, std = agents.mean(), agents.std()
        inside = (pde.coverage >= mean - std) & (pde.coverage <= mean + std)
        entry = CompareEntry(
            n_robots=config.n_robots,
            alpha=config.alpha,
            times=agents.times,
            agent_mean=mean,
            agent_std=std,
            replicates=config.replicates,
            pde=pde.coverage,
            containment=float(inside.mean()),
            t50_agent=time_to_coverage(MetricSeries(agents.times, mean), 0.5),
            t50_pde=time_to_coverage(MetricSeries(pde.times, pde.coverage), 0.5),
        )
        entries[(config.n_robots, config.alpha)] = entry
        if config.n_robots == min(sweep.n_values):
            agent_by_alpha[config.alpha] = agents
    hitting_rows = run_hitting_table(
        sorted({a for (_, a) in entries}),
        n_robots=min(sweep.n_values),
        agent_result_by_alpha=agent_by_alpha,
    )
    report = ComparisonReport(entries=entries, hitting_rows=hitting_rows)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def write_agent_outputs(result: AgentRunResult, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for rid in range(result.coverages.shape[0]):
        for t, c in zip(result.times, result.coverages[rid]):
            rows.append((t, rid, c))
    _write_csv(
        os.path.join(out_dir, "coverage.csv"),
        ["time_s", "run_id", "coverage"],
        rows,
    )
    stats = ensemble_stats(
        [
            MetricSeries(result.times, result.coverages[r])
            for r in range(result.coverages.shape[0])
        ]
    )
    _write_csv(
        os.path.join(out_dir, "coverage_agg.csv"),
        ["time_s", "mean", "std", "n"],
        [
            (t, m, s, result.coverages.shape[0])
            for t, m, s in zip(stats.times, stats.mean, stats.std)
        ],
    )
    grid = GridSpec.for_arena(Arena())
    for rid, hm in enumerate(result.hit_maps):
        export_hitmap_csv(hm, os.path.join(out_dir, f"hitmap_r{rid}.csv"))
        export_hitmap_pgm(hm, os.path.join(out_dir, f"hitmap_r{rid}.pgm"))
    del grid


def write_report(report: ComparisonReport, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    for (n, alpha), e in sorted(report.entries.items()):
        _write_csv(
            os.path.join(out_dir, f"compare_N{n}_a{_alpha_tag(alpha)}.csv"),
            ["time_s", "mean", "std", "n", "pde"],
            [
                (t, m, s, e.replicates, p)
                for t, m, s, p in zip(e.times, e.agent_mean, e.agent_std, e.pde)
            ],
        )
    _write_csv(
        os.path.join(out_dir, "hitting_times.csv"),
        [
            "tile_x",
            "tile_y",
            "alpha",
            "t0_pde_s",
            "t0_analytic_s",
            "t0_agents_mean_s",
            "t0_agents_std_s",
        ],
        [
            (
                r["tile_x"],
                r["tile_y"],
                r["alpha"],
                r["t0_pde_s"],
                r["t0_analytic_s"],
                r["t0_agents_mean_s"],
                r["t0_agents_std_s"],
            )
            for r in report.hitting_rows
        ],
    )
    verdict = {
        "band_threshold": BAND_THRESHOLD,
        "entries": [
            {
                "n_robots": n,
                "alpha": alpha,
                "containment": e.containment,
                "t50_agent_s": e.t50_agent,
                "t50_pde_s": e.t50_pde,
                "passed": e.containment >= BAND_THRESHOLD,
            }
            for (n, alpha), e in sorted(report.entries.items())
        ],
        "all_passed": all(
            e.containment >= BAND_THRESHOLD for e in report.entries.values()
        ),
    }
    with open(os.path.join(out_dir, "verdict.json"), "w") as fh:
        json.dump(verdict, fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = ["agent-vs-PDE comparison summary", ""]
    for (n, alpha), e in sorted(report.entries.items()):
        status = "PASS" if e.containment >= BAND_THRESHOLD else "FAIL"
        lines.append(
            f"N={n} alpha={alpha}: containment {e.containment:.3f} "
            f"(threshold {BAND_THRESHOLD}) {status}; "
            f"t50 agents {e.t50_agent:.1f} s, pde {e.t50_pde:.1f} s"
        )
    lines.append("")
    for r in report.hitting_rows:
        lines.append(
            f"tile ({r['tile_x']}, {r['tile_y']}) alpha={r['alpha']}: "
            f"t0 pde {r['t0_pde_s']:.3f}, analytic {r['t0_analytic_s']:.3f}"
        )
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_figure_data(report: ComparisonReport, which: str, out_dir: str):
    """Write per-figure CSVs with deterministic fig_<which>_N<k>_a<alpha> names."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if which == "cov_vs_t":
        for (n, alpha), e in sorted(report.entries.items()):
            path = os.path.join(
                out_dir, f"fig_cov_vs_t_N{n}_a{_alpha_tag(alpha)}.csv"
            )
            _write_csv(
                path,
                ["time_s", "mean", "std", "pde"],
                list(zip(e.times, e.agent_mean, e.agent_std, e.pde)),
            )
            written.append(path)
    elif which == "cov_vs_alpha":
        for n in sorted({k[0] for k in report.entries}):
            rows = []
            for alpha in sorted(a for (nn, a) in report.entries if nn == n):
                e = report.entries[(n, alpha)]
                rows.append(
                    (alpha, e.agent_mean[-1], e.agent_std[-1], e.pde[-1])
                )
            path = os.path.join(out_dir, f"fig_cov_vs_alpha_N{n}.csv")
            _write_csv(path, ["alpha", "mean", "std", "pde"], rows)
            written.append(path)
    elif which == "t50_vs_alpha":
        for n in sorted({k[0] for k in report.entries}):
            rows = []
            for alpha in sorted(a for (nn, a) in report.entries if nn == n):
                e = report.entries[(n, alpha)]
                rows.append((alpha, e.t50_agent, e.t50_pde))
            path = os.path.join(out_dir, f"fig_t50_vs_alpha_N{n}.csv")
            _write_csv(path, ["alpha", "t50_agent_s", "t50_pde_s"], rows)
            written.append(path)
    elif which == "tile_hitting":
        path = os.path.join(out_dir, "fig_tile_hitting.csv")
        _write_csv(
            path,
            ["tile_x", "tile_y", "alpha", "t0_pde_s", "t0_analytic_s"],
            [
                (r["tile_x"], r["tile_y"], r["alpha"], r["t0_pde_s"], r["t0_analytic_s"])
                for r in report.hitting_rows
            ],
        )
        written.append(path)
    elif which == "ic_sensitivity":
        written.extend(_emit_ic_sensitivity(out_dir))
    elif which == "n_scaling":
        written.extend(_emit_n_scaling(out_dir))
    else:
        raise ValueError(f"unsupported figure kind: {which}")
    return written


def _emit_ic_sensitivity(out_dir, alpha=1.3, n_robots=5, duration=2400.0):
    config = ExperimentConfig(n_robots=n_robots, alpha=alpha, duration=duration)
    coeffs = pde_coefficients(config)
    rows = []
    for name, field in (
        ("ring", build_initial_condition(n_robots)),
        ("five_bump", build_multibump_initial_condition()),
    ):
        snaps = evolve(field, coeffs, duration, 10.0, dt=10.0)
        for s in snaps:
            rows.append((name, s.time, coverage_instantaneous(s)))
    path = os.path.join(
        out_dir, f"fig_ic_sensitivity_N{n_robots}_a{_alpha_tag(alpha)}.csv"
    )
    _write_csv(path, ["initial_condition", "time_s", "coverage"], rows)
    return [path]


def _emit_n_scaling(out_dir, alpha=1.3, n_values=(5, 20, 100), duration=1200.0):
    rows = []
    for n in n_values:
        config = ExperimentConfig(n_robots=n, alpha=alpha, duration=duration)
        res = run_pde(config)
        for t, c in zip(res.times, res.coverage):
            rows.append((n, t, c))
    path = os.path.join(out_dir, f"fig_n_scaling_a{_alpha_tag(alpha)}.csv")
    _write_csv(path, ["n_robots", "time_s", "coverage"], rows)
    return [path]


def run_sweep(spec: SweepSpec, out_dir: str, workers: int = 1) -> ComparisonReport:
    """Full pipeline: compare over the grid, then emit all figure CSVs."""
    report = compare(spec, out_dir=out_dir, workers=workers)
    for which in ("cov_vs_t", "cov_vs_alpha", "t50_vs_alpha", "tile_hitting"):
        emit_figure_data(report, which, out_dir)
    emit_figure_data(report, "ic_sensitivity", out_dir)
    emit_figure_data(report, "n_scaling", out_dir)
    return report


def sample_audit(out_path: str, alpha: float = 1.5, seed: int = 0, n: int = 10**6):
    """Dump n (r, theta, tau) draws from the step and run-time samplers."""
    from .core import make_rng
    from .sampling import sample_run_time, sample_stable_step

    rng = make_rng(seed, 0, 0)
    params = KineticParams(alpha=alpha)
    r = sample_stable_step(alpha, rng, size=n)
    theta = np.pi * rng.random(n)
    tau = sample_run_time(params, rng, size=n)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write("r,theta,tau\n")
        np.savetxt(fh, np.column_stack([r, theta, tau]), fmt="%.10g", delimiter=",")
    return out_path


def pde_timing(n_values=(5, 100), alpha: float = 1.3, duration: float = 1200.0):
    """Wall-clock PDE cost per N (the solver grid does not depend on N)."""
    out = {}
    for n in n_values:
        config = ExperimentConfig(n_robots=n, alpha=alpha, duration=duration)
        start = time.perf_counter()
        run_pde(config)
        out[n] = time.perf_counter() - start
    return out


def _alpha_tag(alpha: float) -> str:
    # 1.3 -> "1p3"; keeps file names free of dots
    s = f"{alpha:g}".replace(".", "p")
    return s


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    v = float(x)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf"
    return f"{v:.10g}"


def _write_csv(path: str, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
