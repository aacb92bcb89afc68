"""Coverage and hitting-time metrics for both engines, plus replicate statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Arena
from .pde import DensityField, PdeCoefficients

__all__ = [
    "TargetTile",
    "MetricSeries",
    "EnsembleStats",
    "NOT_REACHED",
    "coverage_discrete",
    "coverage_continuous",
    "coverage_instantaneous",
    "hitting_time_pde",
    "hitting_time_analytic",
    "hitmap_empirical",
    "ensemble_stats",
    "time_to_coverage",
]

NOT_REACHED = float("inf")

# Fixed 10x10 cm target tiles used in the hitting-time experiments.
TILE_1_CENTER = (-0.55, 0.55)
TILE_2_CENTER = (0.55, 0.45)


@dataclass(frozen=True)
class TargetTile:
    """Square target region inside the arena."""

    center: tuple
    side: float = 0.1

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("tile side must be positive")

    @property
    def vol(self) -> float:
        return self.side**2

    def check_inside(self, arena: Arena):
        h = self.side / 2
        cx, cy = self.center
        if not (
            arena.x_min <= cx - h
            and cx + h <= arena.x_max
            and arena.y_min <= cy - h
            and cy + h <= arena.y_max
        ):
            raise ValueError("tile not fully inside arena")


@dataclass(frozen=True)
class MetricSeries:
    """Time-indexed metric values."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")


@dataclass(frozen=True)
class EnsembleStats:
    """Pointwise replicate mean and sample standard deviation."""

    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    count: int


def coverage_discrete(hit_map: np.ndarray, t: float) -> float:
    """Fraction of grid cells first visited at or before time t.

    hit_map holds per-cell first-visit times, NaN for unvisited cells.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    with np.errstate(invalid="ignore"):
        return float(np.count_nonzero(hit_map <= t)) / hit_map.size


def coverage_instantaneous(field: DensityField) -> float:
    """Thresholded density integral: int min(u, rho_bar) dx with rho_bar = 1/|Omega|."""
    rho_bar = 1.0 / field.arena.area()
    return float(np.minimum(field.values, rho_bar).sum() * field.cell_area)


def coverage_continuous(density_history, t: float) -> float:
    """Time-averaged coverage (1/t) int_0^t int min(u, rho_bar) dx ds.

    Spatial integral by midpoint rule on the grid, time integral by trapezoid
    over the recorded snapshots.
    """
    if t <= 0:
        raise ValueError("time average undefined at t = 0")
    times = np.array([f.time for f in density_history])
    if times[0] > 0 or times[-1] < t:
        raise ValueError("history does not cover [0, t]")
    keep = times <= t + 1e-12
    times = times[keep]
    inst = np.array([coverage_instantaneous(f) for f, k in zip(density_history, keep) if k])
    return float(np.trapezoid(inst, times) / t)


def tile_mass(field: DensityField, tile: TargetTile) -> float:
    """Density mass inside the tile, midpoint rule with cellwise clipping at
    the tile boundary."""
    nx, ny = field.values.shape
    arena = field.arena
    hx = arena.width / nx
    hy = arena.height / ny
    h = tile.side / 2
    cx, cy = tile.center
    xe = arena.x_min + np.arange(nx + 1) * hx
    ye = arena.y_min + np.arange(ny + 1) * hy
    wx = np.clip(np.minimum(xe[1:], cx + h) - np.maximum(xe[:-1], cx - h), 0.0, hx)
    wy = np.clip(np.minimum(ye[1:], cy + h) - np.maximum(ye[:-1], cy - h), 0.0, hy)
    return float((wx[:, None] * wy[None, :] * field.values).sum())


def hitting_time_pde(
    density_history, tile: TargetTile, delta: float, mass_scale: float = 1.0
) -> float:
    """First time the tile mass reaches delta, linearly interpolated between
    snapshots; NOT_REACHED if the threshold is never attained.

    mass_scale rescales the unit-mass density to physical robot counts when
    the threshold is meant in robots rather than probability.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    tile.check_inside(density_history[0].arena)
    prev_t = None
    prev_m = None
    for f in density_history:
        m = mass_scale * tile_mass(f, tile)
        if m >= delta:
            if prev_t is None or m == prev_m:
                return f.time
            frac = (delta - prev_m) / (m - prev_m)
            return float(prev_t + frac * (f.time - prev_t))
        prev_t, prev_m = f.time, m
    return NOT_REACHED


def hitting_time_analytic(
    tile: TargetTile, initial_positions, coeffs: PdeCoefficients, delta: float
) -> float:
    """Closed-form small-threshold hitting time

        t0 = delta * pi / (2^alpha * C_hat * vol(T) * sum_i |x0 - x_i|^(-alpha-2)).
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    x0 = np.asarray(tile.center, dtype=float)
    pos = np.asarray(initial_positions, dtype=float).reshape(-1, 2)
    dist = np.hypot(*(pos - x0).T)
    if np.any(dist <= 0):
        raise ValueError("a robot sits at the tile center; formula is singular")
    alpha = coeffs.alpha
    s = float(np.sum(dist ** (-alpha - 2.0)))
    return delta * np.pi / (2.0**alpha * coeffs.C_hat_alpha * tile.vol * s)


def hitmap_empirical(hit_maps):
    """Per-cell mean first-visit time over replicates, with unreached counts.

    Returns (mean_map, unreached_count); cells unvisited in every replicate
    have NaN mean and unreached_count equal to the number of replicates.
    """
    maps = np.stack(list(hit_maps))
    if maps.ndim != 3 or maps.shape[0] < 1:
        raise ValueError("need at least one replicate hit map")
    with np.errstate(invalid="ignore"):
        mean_map = np.nanmean(maps, axis=0)
    unreached = np.isnan(maps).sum(axis=0)
    return mean_map, unreached


def ensemble_stats(series_list) -> EnsembleStats:
    """Pointwise mean and sample std (n-1 denominator) over replicate series."""
    series_list = list(series_list)
    if not series_list:
        raise ValueError("need at least one series")
    times = np.asarray(series_list[0].times, dtype=float)
    for s in series_list[1:]:
        if len(s.times) != len(times) or not np.array_equal(np.asarray(s.times), times):
            raise ValueError("series time axes do not match")
    values = np.stack([np.asarray(s.values, dtype=float) for s in series_list])
    n = len(series_list)
    std = values.std(axis=0, ddof=1) if n > 1 else np.zeros_like(times)
    return EnsembleStats(times=times, mean=values.mean(axis=0), std=std, count=n)


def time_to_coverage(series: MetricSeries, level: float) -> float:
    """First time a nondecreasing coverage series crosses the level, linearly
    interpolated; NOT_REACHED if it never does."""
    if not (0.0 < level <= 1.0):
        raise ValueError("level must lie in (0, 1]")
    t = np.asarray(series.times, dtype=float)
    v = np.asarray(series.values, dtype=float)
    idx = np.nonzero(v >= level)[0]
    if len(idx) == 0:
        return NOT_REACHED
    k = idx[0]
    if k == 0 or v[k] == v[k - 1]:
        return float(t[k])
    frac = (level - v[k - 1]) / (v[k] - v[k - 1])
    return float(t[k - 1] + frac * (t[k] - t[k - 1]))
