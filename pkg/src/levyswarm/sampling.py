"""Stochastic movement primitives: stable step lengths, power-law run times,
turn-angle kernels and the reorientation operator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "KineticParams",
    "TurnKernel",
    "sample_stable_step",
    "sample_step_vector",
    "sample_run_time",
    "stopping_rate",
    "sample_turn",
    "kernel_nu1",
    "apply_turn_operator",
]


@dataclass(frozen=True)
class KineticParams:
    """Constants of the velocity-jump movement model.

    alpha:        tail exponent of the run-time law, in (1, 2)
    sigma0:       run-time scale (s)
    speed_c:      run speed (m/s)
    rho_diam:     robot diameter (m)
    sensor_range: obstacle detection radius (m)
    """

    alpha: float
    sigma0: float = 1.0
    speed_c: float = 0.03
    rho_diam: float = 0.075
    sensor_range: float = 0.06

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (1, 2)")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.speed_c <= 0:
            raise ValueError("speed_c must be positive")
        if self.rho_diam <= 0:
            raise ValueError("rho_diam must be positive")
        if self.sensor_range < self.rho_diam / 2:
            raise ValueError("sensor_range must be at least the robot radius")


@dataclass(frozen=True)
class TurnKernel:
    """Symmetric turn-angle distribution over [-pi, pi).

    kind is one of "uniform", "von_mises" (with concentration kappa), or
    "deterministic_persist" (no turning, a point mass at zero angle).
    """

    kind: str = "uniform"
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "von_mises", "deterministic_persist"):
            raise ValueError(f"unknown turn kernel kind {self.kind!r}")
        if self.kind == "von_mises" and self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def density(self, phi):
        """Kernel density evaluated at turn angle(s) phi (not defined for the
        deterministic kernel, which is a point mass)."""
        phi = np.asarray(phi, dtype=float)
        if self.kind == "uniform":
            return np.full_like(phi, 1.0 / (2.0 * np.pi))
        if self.kind == "von_mises":
            from scipy.special import i0
            return np.exp(self.kappa * np.cos(phi)) / (2.0 * np.pi * i0(self.kappa))
        raise ValueError("deterministic_persist kernel has no density")


def sample_stable_step(alpha: float, rng: np.random.Generator, size=None):
    """Signed symmetric-stable run length via the two-uniform transform.

    r = sin(a*V) / cos(V)^(1/a) * (cos((1-a)*V) / W)^((1-a)/a)
    with V uniform on (-pi/2, pi/2) and W unit exponential.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("alpha must lie in (1, 2)")
    x1 = rng.random(size)
    x2 = rng.random(size)
    v = np.pi * (x1 - 0.5)
    w = -np.log1p(-x2)  # -ln(U) with U in (0, 1]
    r = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)) * (
        np.cos((1.0 - alpha) * v) / np.where(w > 0, w, np.inf)
    ) ** ((1.0 - alpha) / alpha)
    return r


def sample_step_vector(alpha: float, rng: np.random.Generator, step_scale: float = 0.05, size=None):
    """Planar displacement (dx, dy) in meters for one target draw.

    The direction variable theta = pi * X3 covers only the upper half circle;
    combined with the signed stable length r all directions are reachable.
    """
    r = sample_stable_step(alpha, rng, size=size)
    theta = np.pi * rng.random(size)
    return step_scale * r * np.cos(theta), step_scale * r * np.sin(theta)


def sample_run_time(params: KineticParams, rng: np.random.Generator, size=None):
    """Run duration with survival P(tau > t) = (s0 / (s0 + t))^alpha, by inverse CDF."""
    u = 1.0 - rng.random(size)  # uniform on (0, 1]
    return params.sigma0 * (u ** (-1.0 / params.alpha) - 1.0)


def stopping_rate(params: KineticParams, tau):
    """Hazard rate alpha / (s0 + tau) at which a run of age tau terminates."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be nonnegative")
    return params.alpha / (params.sigma0 + tau)


def sample_turn(kernel: TurnKernel, theta, rng: np.random.Generator, size=None):
    """New heading after a reorientation drawn from the turn kernel."""
    if kernel.kind == "uniform":
        phi = rng.uniform(-np.pi, np.pi, size)
    elif kernel.kind == "von_mises":
        phi = rng.vonmises(0.0, kernel.kappa, size)
    else:
        phi = 0.0 if size is None else np.zeros(size)
    return wrap_angle(theta + phi)


def wrap_angle(theta):
    """Normalize angle(s) to [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


def kernel_nu1(kernel: TurnKernel) -> float:
    """First cosine moment of the turn kernel, nu1 = int k(phi) cos(phi) dphi.

    Evaluated by adaptive quadrature to absolute tolerance 1e-10 for kernels
    with a density; the uniform and deterministic cases are exact.
    """
    if kernel.kind == "uniform":
        return 0.0
    if kernel.kind == "deterministic_persist":
        return 1.0
    val, _ = integrate.quad(
        lambda phi: kernel.density(phi) * np.cos(phi), -np.pi, np.pi, epsabs=1e-10, limit=200
    )
    return val


def apply_turn_operator(kernel: TurnKernel, density: np.ndarray) -> np.ndarray:
    """Apply the reorientation operator to a density sampled on a uniform
    angular grid of M >= 8 points: circular convolution with the turn kernel.

    Preserves total mass (conservation of the number of robots) and is linear
    and positivity-preserving.
    """
    density = np.asarray(density, dtype=float)
    m = density.shape[-1]
    if m < 8:
        raise ValueError("angular grid must have at least 8 points")
    if np.any(density < 0):
        raise ValueError("density must be nonnegative")
    if kernel.kind == "deterministic_persist":
        return density.copy()
    dphi = 2.0 * np.pi / m
    phi = wrap_angle(np.arange(m) * dphi)
    weights = kernel.density(phi)
    weights = weights / (weights.sum() * dphi)  # exact discrete normalization
    out = np.fft.irfft(np.fft.rfft(density) * np.fft.rfft(weights), n=m) * dphi
    return out
