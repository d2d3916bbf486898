import math

import numpy as np
import pytest

from qsync.errors import DomainError, GridMismatchError, VanishingMassError
from qsync.grid import (
    GridSpec,
    HarmonicPotential,
    TabulatedPotential,
    WaveField,
    ZeroPotential,
    boundary_amplitude,
    center_of_mass,
    gaussian,
    inner_product,
    kinetic_phase,
    norm,
    potential_phase,
)

from conftest import random_field


def test_gridspec_spacing_and_axis():
    g = GridSpec(1, 256, 20.0)
    assert g.spacing == 40.0 / 256
    assert g.axis[0] == -20.0
    assert g.axis.size == 256
    assert g.axis[-1] == pytest.approx(20.0 - g.spacing)


@pytest.mark.parametrize(
    "kwargs", [dict(points_per_dim=100), dict(points_per_dim=8), dict(half_width=0.0), dict(dim=3)]
)
def test_gridspec_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        GridSpec(**kwargs)


def test_wavenumbers_follow_pi_m_over_l():
    g = GridSpec(1, 16, 4.0)
    m = np.fft.fftfreq(16, d=1.0 / 16)
    np.testing.assert_allclose(g.wavenumbers, np.pi * m / 4.0, rtol=0, atol=1e-14)


def test_wavefield_validates_length_and_finiteness(grid):
    with pytest.raises(GridMismatchError):
        WaveField(grid, np.zeros(10))
    bad = np.zeros(grid.shape, dtype=complex)
    bad[3] = np.nan
    with pytest.raises(DomainError):
        WaveField(grid, bad)


def test_inner_product_of_normalized_gaussian_is_one(grid):
    f = gaussian(grid, 0.3, 0.2, 1.1)
    assert abs(inner_product(f, f) - 1.0) < 1e-10


def test_inner_product_even_odd_has_zero_real_part(grid):
    x = grid.axis
    even = WaveField(grid, np.exp(-(x**2)))
    odd = WaveField(grid, x * np.exp(-(x**2)))
    # the grid is not symmetric about 0 (x = -L is sampled, +L is not); the
    # edge sample is negligible here
    assert abs(inner_product(even, odd).real) < 1e-12


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (-1.0, 1.5), (2.0, -0.5)])
def test_gaussian_overlap_matches_closed_form(grid, a, b):
    x = grid.axis
    f = WaveField(grid, np.exp(-((x - a) ** 2) / 2))
    g = WaveField(grid, np.exp(-((x - b) ** 2) / 2))
    exact = math.sqrt(math.pi) * math.exp(-((a - b) ** 2) / 4)
    assert abs(inner_product(f, g) - exact) < 1e-12


def test_inner_product_conjugate_symmetric(grid):
    rng = np.random.default_rng(1)
    f, g = random_field(grid, rng), random_field(grid, rng)
    assert abs(inner_product(f, g) - np.conj(inner_product(g, f))) < 1e-14


def test_inner_product_grid_mismatch(grid):
    f = gaussian(grid)
    g = gaussian(GridSpec(1, 128, 20.0))
    with pytest.raises(GridMismatchError):
        inner_product(f, g)


def test_norm_zero_and_homogeneity(grid):
    assert norm(WaveField(grid, np.zeros(grid.shape))) == 0.0
    f = random_field(grid, np.random.default_rng(2))
    assert norm(f * -2.5) == pytest.approx(2.5 * norm(f), rel=1e-14)


def test_norm_matches_double_loop_oracle(grid):
    f = random_field(grid, np.random.default_rng(3))
    total = 0.0
    for v in f.values:
        total += v.real * v.real + v.imag * v.imag
    assert abs(norm(f) - math.sqrt(total * grid.spacing)) < 1e-12


def test_norm_2d_double_loop_oracle():
    g = GridSpec(2, 32, 8.0)
    f = random_field(g, np.random.default_rng(4))
    total = 0.0
    for i in range(32):
        for j in range(32):
            total += abs(f.values[i, j]) ** 2
    assert abs(norm(f) - math.sqrt(total * g.spacing**2)) < 1e-12


def test_center_of_mass_symmetric_density(grid):
    x = grid.axis
    f = WaveField(grid, np.exp(-(x**2) / 2) * (1 + 0.5j * x))
    # |f|^2 = e^{-x^2}(1 + x^2/4) is even
    assert abs(center_of_mass(f)[0]) < 1e-10


def test_center_of_mass_translated_gaussian(grid):
    f = gaussian(grid, 1.5, 0.7, 1.0)
    assert abs(center_of_mass(f)[0] - 1.5) < 1e-6


def test_center_of_mass_double_loop_oracle(grid):
    f = random_field(grid, np.random.default_rng(5))
    num = den = 0.0
    for xi, v in zip(grid.axis, f.values):
        d = abs(v) ** 2
        num += xi * d
        den += d
    assert abs(center_of_mass(f)[0] - num / den) < 1e-12


def test_center_of_mass_2d():
    g = GridSpec(2, 64, 10.0)
    f = gaussian(g, [1.0, -0.5], [0.2, 0.1], 1.0)
    np.testing.assert_allclose(center_of_mass(f), [1.0, -0.5], atol=1e-6)


def test_center_of_mass_vanishing_mass(grid):
    with pytest.raises(VanishingMassError):
        center_of_mass(WaveField(grid, np.zeros(grid.shape)))


def test_kinetic_phase_zero_dt_is_identity(grid):
    f = random_field(grid, np.random.default_rng(6))
    np.testing.assert_array_equal(kinetic_phase(f, 0.0).values, f.values)


def test_kinetic_phase_plane_wave(grid):
    xi0 = np.pi * 5 / grid.half_width
    f = WaveField(grid, np.exp(1j * xi0 * grid.axis))
    dt = 0.37
    out = kinetic_phase(f, dt)
    np.testing.assert_allclose(out.values, f.values * np.exp(-0.5j * xi0**2 * dt), atol=1e-13)


def test_kinetic_phase_preserves_norm(grid):
    f = random_field(grid, np.random.default_rng(7))
    assert abs(norm(kinetic_phase(f, 0.1)) - norm(f)) < 1e-13


def test_potential_phase_identity_and_modulus(grid):
    f = random_field(grid, np.random.default_rng(8))
    np.testing.assert_array_equal(potential_phase(f, ZeroPotential(), 0.0, 0.5).values, f.values)
    out = potential_phase(f, HarmonicPotential(1.3), 0.7, 0.5)
    np.testing.assert_allclose(np.abs(out.values), np.abs(f.values), rtol=0, atol=1e-14)


def test_harmonic_ground_state_is_stationary(grid):
    # Strang steps of the kinetic and potential flows over unit time
    x = grid.axis
    ground = WaveField(grid, np.exp(-(x**2) / 2) / np.pi**0.25)
    dens0 = np.abs(ground.values) ** 2
    pot = HarmonicPotential(1.0)
    dt = 1e-3
    f = ground
    for _ in range(1000):
        f = potential_phase(f, pot, 0.0, dt / 2)
        f = kinetic_phase(f, dt)
        f = potential_phase(f, pot, 0.0, dt / 2)
    assert np.max(np.abs(np.abs(f.values) ** 2 - dens0)) < 1e-6
    # global phase e^{-i t/2} for the ground energy 1/2
    assert abs(inner_product(ground, f) - np.exp(-0.5j)) < 1e-6


def test_tabulated_potential_matches_grid(grid):
    pot = TabulatedPotential(0.5 * grid.axis**2)
    np.testing.assert_array_equal(pot.sample(grid), HarmonicPotential(1.0).sample(grid))
    with pytest.raises(GridMismatchError):
        TabulatedPotential(np.zeros(10)).sample(grid)
    with pytest.raises(DomainError):
        TabulatedPotential(np.array([np.inf]))


def test_gaussian_amplitude_sets_norm(grid):
    assert norm(gaussian(grid, 0.0, 1.0, 0.8, 0.7)) == pytest.approx(0.7, rel=1e-14)


def test_boundary_amplitude(grid):
    assert boundary_amplitude(gaussian(grid).values, grid) < 1e-40
    vals = np.zeros(grid.shape, dtype=complex)
    vals[-1] = 0.25j
    assert boundary_amplitude(vals, grid) == 0.25
