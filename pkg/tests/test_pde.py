import dataclasses
import math

import mpmath
import numpy as np
import pytest

import levyswarm.pde as pde
from levyswarm.core import Arena
from levyswarm.sampling import KineticParams


def reference_coefficients(alpha, sigma0, c0, nu1=0.0, dps=40):
    """High-precision evaluation of the closed-form coefficients."""
    mpmath.mp.dps = dps
    a = mpmath.mpf(repr(alpha))
    s0 = mpmath.mpf(repr(sigma0))
    c = mpmath.mpf(repr(c0))
    S = 2 * mpmath.pi
    C = (
        -(s0 ** (a - 2))
        * c ** (a - 1)
        * (a - 1) ** 2
        * mpmath.pi
        / (mpmath.sin(mpmath.pi * a) * mpmath.gamma(a))
        * (S - 4 * nu1)
        / S**2
    )
    Xi = (
        -2
        * mpmath.sqrt(mpmath.pi)
        * mpmath.cos(mpmath.pi * a / 2)
        * mpmath.gamma((a + 1) / 2)
        / mpmath.gamma((a + 2) / 2)
    )
    return float(C), float(Xi)


def test_coefficients_against_high_precision():
    params = KineticParams(alpha=1.5, sigma0=1.0, speed_c=0.03)
    co = pde.compute_coefficients(params, nu1=0.0, epsilon=0.005, gamma=0.5)
    C_ref, Xi_ref = reference_coefficients(1.5, 1.0, co.c0)
    assert co.C_alpha == pytest.approx(C_ref, rel=1e-12)
    assert co.Xi_alpha == pytest.approx(Xi_ref, rel=1e-12)
    assert co.C_hat_alpha == pytest.approx(Xi_ref * C_ref, rel=1e-12)
    assert co.D_eff == pytest.approx(co.c0 * co.C_hat_alpha, rel=1e-12)


def test_coefficients_positive_across_range():
    for alpha in np.linspace(1.05, 1.95, 19):
        co = pde.compute_coefficients(KineticParams(alpha=float(alpha)), nu1=0.0)
        assert co.C_alpha > 0
        assert co.Xi_alpha > 0
        assert co.D_eff > 0
        assert math.isfinite(co.D_eff)


def test_initial_condition_profile():
    f = pde.build_initial_condition(20)
    assert f.mass() == pytest.approx(1.0, rel=1e-12)
    # pre-normalization peak is 1.2 - 0.2 = 1 at the center; support radius
    # r^2 = ln(6) * 0.075 / (4 N)
    r2_support = math.log(6.0) * 0.075 / 80.0
    nx, ny = f.values.shape
    a = f.arena
    xs = a.x_min + (np.arange(nx) + 0.5) * (a.width / nx)
    ys = a.y_min + (np.arange(ny) + 0.5) * (a.height / ny)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    outside = xx**2 + yy**2 > r2_support * 1.05
    assert np.all(f.values[outside] == 0.0)
    assert f.values.max() > 0


def test_multibump_centers():
    f = pde.build_multibump_initial_condition()
    assert f.mass() == pytest.approx(1.0, rel=1e-12)
    nx, ny = f.values.shape
    a = f.arena
    # mass present near each of the five bumps
    for cx, cy in pde.FIVE_BUMP_CENTERS:
        i = min(nx - 1, max(0, int((cx - a.x_min) / (a.width / nx))))
        j = min(ny - 1, max(0, int((cy - a.y_min) / (a.height / ny))))
        assert f.values[i, j] > 0


def test_binary_round_trip(tmp_path):
    f = pde.build_initial_condition(5)
    path = tmp_path / "field.bin"
    f.to_binary(path)
    g = pde.DensityField.from_binary(path)
    assert np.array_equal(f.values, g.values)
    assert g.values.shape == f.values.shape


def test_csv_export(tmp_path):
    f = pde.build_initial_condition(5, grid=(32, 40))
    path = tmp_path / "field.csv"
    f.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,j,u"
    assert len(lines) == 1 + 32 * 40


def test_mass_conservation_long_run():
    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.5), nu1=0.0), D_eff=3e-4
    )
    f = pde.build_initial_condition(20)
    mu = pde.spectral_operator(f.values.shape, f.arena, co)
    m0 = f.mass()
    for _ in range(500):
        f = pde.step_density(f, co, 0.5, "exact_exp", mu=mu)
    assert abs(f.mass() - m0) < 1e-12


def test_cosine_mode_decay_rate():
    # a single even cosine mode decays exactly at exp(-mu_k t)
    a = Arena()
    nx, ny = 64, 80
    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.4), nu1=0.0), D_eff=2e-3
    )
    xs = a.x_min + (np.arange(nx) + 0.5) * (a.width / nx)
    kx = 3
    lam = np.pi * kx / a.width
    mode = np.cos(lam * (xs - a.x_min))
    values = np.ones((nx, ny)) / a.area() + 0.01 * mode[:, None]
    f = pde.DensityField(values=values, arena=a, time=0.0)
    t = 40.0
    out = pde.evolve(f, co, t, t, dt=t)[-1]
    mu_k = co.D_eff * lam ** co.alpha
    amp_in = 0.01
    amp_out = 2 * np.mean(out.values[:, 0] * mode) / np.mean(mode * mode) / 2
    # project onto the mode to recover the decayed amplitude
    proj = (out.values * mode[:, None]).sum() / (mode**2).sum() / ny
    assert proj == pytest.approx(amp_in * np.exp(-mu_k * t), rel=1e-10)
    del amp_out


def test_implicit_euler_is_first_order():
    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.5), nu1=0.0), D_eff=3e-4
    )
    f0 = pde.build_initial_condition(20)
    exact = pde.evolve(f0, co, 50, 50, dt=1.0)[-1].values
    e = []
    for dt in (1.0, 0.5):
        approx = pde.evolve(f0, co, 50, 50, dt=dt, scheme="implicit_euler")[-1].values
        e.append(np.abs(approx - exact).max())
    assert e[0] / e[1] == pytest.approx(2.0, abs=0.2)


def test_evolve_records_initial_snapshot():
    co = pde.compute_coefficients(KineticParams(alpha=1.5), nu1=0.0)
    f0 = pde.build_initial_condition(5)
    snaps = pde.evolve(f0, co, 10.0, 5.0, dt=5.0)
    times = [s.time for s in snaps]
    assert times == [0.0, 5.0, 10.0]


def test_nonlinear_reduces_to_linear():
    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.3), nu1=0.0), D_eff=3e-4
    )
    f0 = pde.build_initial_condition(20)
    lin = pde.evolve(f0, co, 2.0, 2.0, dt=0.1)[-1].values
    non = pde.evolve_nonlinear(f0, co, 2.0, 2.0, dt=0.1, interaction_c0=0.0)[-1].values
    assert np.array_equal(lin, non)


def test_nonlinear_interaction_slows_coverage():
    from levyswarm.metrics import coverage_instantaneous

    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.3), nu1=0.0), D_eff=3e-4
    )
    f0 = pde.build_initial_condition(20)
    lin = pde.evolve_nonlinear(f0, co, 100.0, 100.0, dt=0.5, interaction_c0=1e-9)[-1]
    non = pde.evolve_nonlinear(f0, co, 100.0, 100.0, dt=0.5, interaction_c0=0.3)[-1]
    assert coverage_instantaneous(non) < coverage_instantaneous(lin)
    assert non.mass() == pytest.approx(1.0, rel=1e-9)


def test_interaction_factor_positive_requirement():
    co = pde.compute_coefficients(KineticParams(alpha=1.3), nu1=0.0)
    f = pde.build_initial_condition(5)
    fac = pde.interaction_factor(f, co)
    assert np.all(fac >= 1.0)


def test_refined_grid_agreement():
    # coarse run against a refined-grid rerun of the same problem
    from levyswarm.metrics import coverage_instantaneous

    co = dataclasses.replace(
        pde.compute_coefficients(KineticParams(alpha=1.5), nu1=0.0), D_eff=3e-4
    )
    t = 200.0
    cov = {}
    for grid in ((128, 156), (256, 312)):
        f0 = pde.build_initial_condition(20, grid=grid)
        out = pde.evolve(f0, co, t, t, dt=5.0)[-1]
        cov[grid] = coverage_instantaneous(out)
    assert cov[(128, 156)] == pytest.approx(cov[(256, 312)], rel=0.01)
