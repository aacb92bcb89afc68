"""Dual-engine toolkit for Levy-strategy swarm coverage: an individual-robot
simulator and a macroscopic fractional-diffusion solver, with shared coverage
and hitting-time metrics for comparing the two."""

from .core import (
    Arena,
    CANONICAL_ARENA,
    ExperimentConfig,
    GridSpec,
    Placement,
    cell_index,
    make_rng,
    ring_placement,
)
from .sampling import (
    KineticParams,
    TurnKernel,
    apply_turn_operator,
    kernel_nu1,
    sample_run_time,
    sample_stable_step,
    sample_step_vector,
    sample_turn,
    stopping_rate,
)
from .agents import SimWorld, elastic_collision, reflect_wall
from .pde import (
    DensityField,
    PdeCoefficients,
    build_initial_condition,
    build_multibump_initial_condition,
    compute_coefficients,
    evolve,
    evolve_nonlinear,
    step_density,
)
from .metrics import (
    EnsembleStats,
    MetricSeries,
    NOT_REACHED,
    TargetTile,
    coverage_continuous,
    coverage_discrete,
    coverage_instantaneous,
    ensemble_stats,
    hitmap_empirical,
    hitting_time_analytic,
    hitting_time_pde,
    time_to_coverage,
)

__version__ = "0.1.0"
