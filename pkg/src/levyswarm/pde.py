"""Continuum solver: fractional diffusion of the robot density on the arena
with reflecting walls, realized spectrally in the cosine eigenbasis of the
Neumann Laplacian.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sp_fft
from scipy.special import gamma as gamma_fn

from .core import Arena, GridSpec
from .sampling import KineticParams

__all__ = [
    "PdeCoefficients",
    "DensityField",
    "compute_coefficients",
    "build_initial_condition",
    "build_multibump_initial_condition",
    "spectral_operator",
    "step_density",
    "evolve",
    "evolve_nonlinear",
]

S_ABS_2D = 2.0 * np.pi  # circumference of the unit circle


@dataclass(frozen=True)
class PdeCoefficients:
    """All coefficients of the macroscopic fractional diffusion equation."""

    alpha: float
    sigma0: float
    c0: float
    nu1: float
    S_abs: float
    C_alpha: float
    Xi_alpha: float
    C_hat_alpha: float
    D_eff: float


def compute_coefficients(
    params: KineticParams,
    nu1: float = 0.0,
    epsilon: float = 0.005,
    gamma: float = 0.5,
) -> PdeCoefficients:
    """Diffusion coefficients from the kinetic constants.

    The scaled speed is c0 = speed_c * epsilon**gamma.  The effective
    diffusivity combines the kinetic diffusion coefficient with the
    normalization linking the directional-average operator to the fractional
    Laplacian; the evolution is implemented dissipatively with D_eff > 0.
    """
    alpha = params.alpha
    if not (1.0 < alpha < 2.0):
        raise ValueError("alpha must lie strictly in (1, 2)")
    if not (0.0 <= nu1 < np.pi / 2):
        raise ValueError("nu1 must lie in [0, pi/2)")
    s0 = params.sigma0
    c0 = params.speed_c * epsilon**gamma
    s_abs = S_ABS_2D
    c_alpha = (
        -(s0 ** (alpha - 2.0))
        * (c0 ** (alpha - 1.0))
        * (alpha - 1.0) ** 2
        * np.pi
        / (np.sin(np.pi * alpha) * gamma_fn(alpha))
        * (s_abs - 4.0 * nu1)
        / s_abs**2
    )
    xi_alpha = (
        -2.0
        * np.sqrt(np.pi)
        * np.cos(np.pi * alpha / 2.0)
        * gamma_fn((alpha + 1.0) / 2.0)
        / gamma_fn((alpha + 2.0) / 2.0)
    )
    c_hat = xi_alpha * c_alpha
    return PdeCoefficients(
        alpha=alpha,
        sigma0=s0,
        c0=c0,
        nu1=nu1,
        S_abs=s_abs,
        C_alpha=c_alpha,
        Xi_alpha=xi_alpha,
        C_hat_alpha=c_hat,
        D_eff=c0 * c_hat,
    )


@dataclass(frozen=True)
class DensityField:
    """Nonnegative density on the coverage grid, unit total mass."""

    values: np.ndarray  # shape (nx, ny), axis 0 along x
    arena: Arena
    time: float = 0.0
    clip_mass: float = 0.0  # negative mass removed in the step producing this field

    @property
    def cell_area(self) -> float:
        nx, ny = self.values.shape
        return (self.arena.width / nx) * (self.arena.height / ny)

    def mass(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def to_csv(self, path):
        nx, ny = self.values.shape
        with open(path, "w") as fh:
            fh.write("i,j,u\n")
            for i in range(nx):
                for j in range(ny):
                    fh.write(f"{i},{j},{self.values[i, j]:.17g}\n")

    def to_binary(self, path):
        """Flat binary: 16-byte header (magic 'UFLD', nx, ny, 4 pad bytes),
        then row-major float64 values."""
        nx, ny = self.values.shape
        with open(path, "wb") as fh:
            fh.write(b"UFLD")
            fh.write(struct.pack("<ii", nx, ny))
            fh.write(b"\x00" * 4)
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path, arena: Arena | None = None) -> "DensityField":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != b"UFLD":
                raise ValueError("bad magic in density file")
            nx, ny = struct.unpack("<ii", fh.read(8))
            fh.read(4)
            values = np.frombuffer(fh.read(nx * ny * 8), dtype="<f8").reshape(nx, ny)
        return cls(values=values.copy(), arena=arena or Arena())


DEFAULT_PDE_GRID = (128, 156)


def _bump(xx, yy, center, n_eff):
    """Truncated Gaussian bump of the calibrated initial profile."""
    r2 = (xx - center[0]) ** 2 + (yy - center[1]) ** 2
    return np.maximum(0.0, 1.2 * np.exp(-4.0 * n_eff * r2 / 0.075) - 0.2)


def _normalize(values, arena):
    nx, ny = values.shape
    cell = (arena.width / nx) * (arena.height / ny)
    total = values.sum() * cell
    if total <= 0:
        raise ValueError("initial condition has no mass")
    return values / total


def build_initial_condition(
    n_robots: int, arena: Arena | None = None, grid=None
) -> DensityField:
    """Central bump approximating a tight ring of N robots, normalized to unit mass."""
    if n_robots < 1:
        raise ValueError("n_robots must be >= 1")
    arena = arena or Arena()
    nx, ny = grid if grid is not None else DEFAULT_PDE_GRID
    xs = arena.x_min + (np.arange(nx) + 0.5) * (arena.width / nx)
    ys = arena.y_min + (np.arange(ny) + 0.5) * (arena.height / ny)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    values = _bump(xx, yy, (0.0, 0.0), n_robots)
    return DensityField(values=_normalize(values, arena), arena=arena, time=0.0)


FIVE_BUMP_CENTERS = ((0.0, 0.0), (0.9, 0.7), (0.9, -0.7), (-0.9, 0.7), (-0.9, -0.7))


def build_multibump_initial_condition(
    centers=FIVE_BUMP_CENTERS, arena: Arena | None = None, grid=None
) -> DensityField:
    """Sum of per-robot bumps at explicit centers, normalized to unit mass."""
    arena = arena or Arena()
    nx, ny = grid if grid is not None else DEFAULT_PDE_GRID
    xs = arena.x_min + (np.arange(nx) + 0.5) * (arena.width / nx)
    ys = arena.y_min + (np.arange(ny) + 0.5) * (arena.height / ny)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    values = np.zeros_like(xx)
    for c in centers:
        values += _bump(xx, yy, c, 5)
    return DensityField(values=_normalize(values, arena), arena=arena, time=0.0)


def spectral_operator(field_shape, arena: Arena, coeffs: PdeCoefficients, d_eff=None):
    """Per-mode decay rates mu_k = D_eff * (lx^2 + ly^2)^(alpha/2) in the
    cosine eigenbasis of the reflecting-boundary Laplacian.

    The zero mode has mu = 0, which makes mass conservation exact.
    """
    nx, ny = field_shape
    d = coeffs.D_eff if d_eff is None else d_eff
    lx = np.pi * np.arange(nx) / arena.width
    ly = np.pi * np.arange(ny) / arena.height
    lam2 = lx[:, None] ** 2 + ly[None, :] ** 2
    return d * lam2 ** (coeffs.alpha / 2.0)


def _dct2(values):
    return sp_fft.dctn(values, type=2, norm="ortho")


def _idct2(values):
    return sp_fft.idctn(values, type=2, norm="ortho")


def step_density(
    field: DensityField,
    coeffs: PdeCoefficients,
    dt: float,
    scheme: str = "exact_exp",
    mu=None,
) -> DensityField:
    """Advance the density one step of length dt.

    exact_exp multiplies mode k by exp(-mu_k dt); implicit_euler by
    1/(1 + mu_k dt).  Negative undershoots from the transform are clipped and
    the mass renormalized; the clipped mass is reported on the result.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if mu is None:
        mu = spectral_operator(field.values.shape, field.arena, coeffs)
    coef = _dct2(field.values)
    if scheme == "exact_exp":
        coef *= np.exp(-mu * dt)
    elif scheme == "implicit_euler":
        coef /= 1.0 + mu * dt
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    values = _idct2(coef)
    mass_before = field.mass()
    clipped = values < 0
    clip_mass = float(-values[clipped].sum() * field.cell_area)
    values[clipped] = 0.0
    total = values.sum() * field.cell_area
    values *= mass_before / total
    return DensityField(
        values=values, arena=field.arena, time=field.time + dt, clip_mass=clip_mass
    )


def evolve(
    field: DensityField,
    coeffs: PdeCoefficients,
    t_end: float,
    record_interval: float,
    dt: float = 0.1,
    scheme: str = "exact_exp",
):
    """Evolve to t_end with fixed dt, returning snapshots every record_interval.

    The first snapshot is the initial field.  For exact_exp the update is the
    exact semigroup, so dt only controls how often clipping is applied.
    """
    if t_end < field.time:
        raise ValueError("t_end must not precede the field time")
    snapshots = [field]
    if t_end == field.time:
        return snapshots
    mu = spectral_operator(field.values.shape, field.arena, coeffs)
    n_records = int(round((t_end - field.time) / record_interval))
    steps_per_record = max(1, int(round(record_interval / dt)))
    sub_dt = record_interval / steps_per_record
    current = field
    for _ in range(n_records):
        for _ in range(steps_per_record):
            current = step_density(current, coeffs, sub_dt, scheme=scheme, mu=mu)
        snapshots.append(current)
    return snapshots


def interaction_factor(field: DensityField, coeffs: PdeCoefficients):
    """Cellwise F(u)/F(0) for the lagged-coefficient nonlinear mode."""
    f0 = (coeffs.alpha - 1.0) * (1.0 - coeffs.nu1) / (coeffs.sigma0 * coeffs.S_abs)
    fu = f0 + 32.0 * coeffs.c0**3 * field.values / (3.0 * coeffs.S_abs**2)
    if np.any(fu <= 0):
        raise ValueError("interaction term F(u) must stay positive")
    return fu / f0


def evolve_nonlinear(
    field: DensityField,
    coeffs: PdeCoefficients,
    t_end: float,
    record_interval: float,
    dt: float = 0.5,
    interaction_c0: float | None = None,
):
    """Lagged-coefficient nonlinear evolution (optional mode, unvalidated).

    Each step freezes the cellwise slowdown factor F(u^n)/F(0) and advances a
    conservative flux-form step: the fractional potential is computed
    spectrally, the divergence of (1/F) grad potential by centered
    differences with zero-flux walls.  With the u-dependent interaction
    switched off this delegates to the linear evolve.
    """
    ic0 = coeffs.c0 if interaction_c0 is None else interaction_c0
    if ic0 == 0.0:
        return evolve(field, coeffs, t_end, record_interval, dt=dt)
    coeffs = replace(coeffs, c0=ic0)
    nx, ny = field.values.shape
    arena = field.arena
    hx = arena.width / nx
    hy = arena.height / ny
    lx = np.pi * np.arange(nx) / arena.width
    ly = np.pi * np.arange(ny) / arena.height
    lam2 = lx[:, None] ** 2 + ly[None, :] ** 2
    # potential multiplier: phi = D_eff * (-Lap)^(alpha/2 - 1) u, so that
    # div grad phi reproduces the linear right-hand side when F is constant
    pot = np.zeros_like(lam2)
    nz = lam2 > 0
    pot[nz] = coeffs.D_eff * lam2[nz] ** (coeffs.alpha / 2.0 - 1.0)

    snapshots = [field]
    n_records = int(round((t_end - field.time) / record_interval))
    steps_per_record = max(1, int(round(record_interval / dt)))
    sub_dt = record_interval / steps_per_record
    current = field
    for _ in range(n_records):
        for _ in range(steps_per_record):
            u = current.values
            phi = _idct2(_dct2(u) * pot)
            slow = interaction_factor(current, coeffs)
            # face-centered fluxes, zero at the walls
            fx = np.zeros((nx + 1, ny))
            fy = np.zeros((nx, ny + 1))
            inv_fx = 2.0 / (slow[1:, :] + slow[:-1, :])
            inv_fy = 2.0 / (slow[:, 1:] + slow[:, :-1])
            fx[1:-1, :] = inv_fx * (phi[1:, :] - phi[:-1, :]) / hx
            fy[:, 1:-1] = inv_fy * (phi[:, 1:] - phi[:, :-1]) / hy
            div = (fx[1:, :] - fx[:-1, :]) / hx + (fy[:, 1:] - fy[:, :-1]) / hy
            values = u + sub_dt * div
            clipped = values < 0
            clip_mass = float(-values[clipped].sum() * current.cell_area)
            values[clipped] = 0.0
            total = values.sum() * current.cell_area
            values *= current.mass() / total
            current = DensityField(
                values=values,
                arena=arena,
                time=current.time + sub_dt,
                clip_mass=clip_mass,
            )
        snapshots.append(current)
    return snapshots
