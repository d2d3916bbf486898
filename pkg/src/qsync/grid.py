"""Uniform periodic grid on [-L, L)^d with rectangle-rule quadrature and
exact spectral / pointwise phase flows.

The box is a stand-in for R^d: fields are assumed to have decayed to
negligible amplitude at the edges, which :func:`boundary_amplitude` lets a
caller verify.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, GridMismatchError, VanishingMassError

MASS_FLOOR = 1e-8


def fft_workers() -> int:
    """Worker count for FFTs, capped by the ``QSYNC_THREADS`` variable."""
    try:
        return max(1, int(os.environ.get("QSYNC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    dim: int = 1
    points_per_dim: int = 256
    half_width: float = 20.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_dim
        if n < 16 or n & (n - 1):
            raise DomainError(f"points_per_dim must be a power of two >= 16, got {n}")
        if not self.half_width > 0:
            raise DomainError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        n = self.points_per_dim
        return -self.half_width + self.spacing * np.arange(n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays, one per dimension, each of ``shape``."""
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # xi = pi m / L, m in [-n/2, n/2), in FFT ordering
        return 2.0 * np.pi * sfft.fftfreq(self.points_per_dim, d=self.spacing)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi|^2 on the full spectral grid."""
        ks = np.meshgrid(*([self.wavenumbers] * self.dim), indexing="ij")
        return sum(k**2 for k in ks)

    @cached_property
    def radius_squared(self) -> np.ndarray:
        return sum(c**2 for c in self.coords)


@dataclass(frozen=True, eq=False)
class WaveField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.points_per_dim**self.grid.dim:
            raise GridMismatchError(
                f"field has {vals.size} samples, grid expects "
                f"{self.grid.points_per_dim ** self.grid.dim}"
            )
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise DomainError("field contains non-finite samples")
        object.__setattr__(self, "values", vals)

    def __mul__(self, s):
        return WaveField(self.grid, self.values * s)

    __rmul__ = __mul__

    def __add__(self, other: WaveField):
        _check_same_grid(self, other)
        return WaveField(self.grid, self.values + other.values)

    def __sub__(self, other: WaveField):
        _check_same_grid(self, other)
        return WaveField(self.grid, self.values - other.values)


@dataclass(frozen=True)
class ZeroPotential:
    def sample(self, grid: GridSpec) -> np.ndarray:
        return np.zeros(grid.shape)


@dataclass(frozen=True)
class HarmonicPotential:
    """V(x) = omega^2 |x|^2 / 2."""

    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("harmonic frequency must be positive")

    def sample(self, grid: GridSpec) -> np.ndarray:
        return 0.5 * self.omega**2 * grid.radius_squared


@dataclass(frozen=True, eq=False)
class TabulatedPotential:
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not np.all(np.isfinite(s)):
            raise DomainError("tabulated potential has non-finite samples")
        object.__setattr__(self, "samples", s)

    def sample(self, grid: GridSpec) -> np.ndarray:
        if self.samples.size != grid.points_per_dim**grid.dim:
            raise GridMismatchError("tabulated potential does not match grid")
        return self.samples.reshape(grid.shape)


PotentialSpec = ZeroPotential | HarmonicPotential | TabulatedPotential


def _check_same_grid(f: WaveField, g: WaveField):
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def inner_product(f: WaveField, g: WaveField) -> complex:
    """<f, g> = sum conj(f) g dx^d, conjugate-linear in the first slot."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.cell_volume)


def norm(f: WaveField) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.0)))


def center_of_mass(f: WaveField) -> np.ndarray:
    lam = norm(f)
    if not lam > MASS_FLOOR:
        raise VanishingMassError(f"norm {lam:.3e} below mass floor {MASS_FLOOR:g}")
    dens = np.abs(f.values) ** 2
    total = dens.sum()
    return np.array([float((c * dens).sum() / total) for c in f.grid.coords])


def boundary_amplitude(values: np.ndarray, grid: GridSpec) -> float:
    """Largest |psi| on the outermost grid layer (any leading batch axes)."""
    v = np.abs(values)
    edge = 0.0
    for ax in range(-grid.dim, 0):
        edge = max(edge, float(np.take(v, [0, -1], axis=ax).max()))
    return edge


def kinetic_multiplier(grid: GridSpec, dt: float) -> np.ndarray:
    return np.exp(-0.5j * grid.xi_squared * dt)


def apply_spectral(values: np.ndarray, multiplier: np.ndarray, dim: int) -> np.ndarray:
    """Multiply in Fourier space over the trailing ``dim`` axes."""
    axes = tuple(range(-dim, 0))
    w = fft_workers()
    return sfft.ifftn(multiplier * sfft.fftn(values, axes=axes, workers=w), axes=axes, workers=w)


def kinetic_phase(f: WaveField, dt: float) -> WaveField:
    """Exact flow of -Laplacian/2 over time ``dt``."""
    if dt == 0:
        return WaveField(f.grid, f.values.copy())
    out = apply_spectral(f.values, kinetic_multiplier(f.grid, dt), f.grid.dim)
    return WaveField(f.grid, out)


def potential_phase(f: WaveField, pot: PotentialSpec, omega_shift: float, dt: float) -> WaveField:
    """Exact pointwise flow of V(x) + omega_shift over time ``dt``."""
    phase = np.exp(-1j * (pot.sample(f.grid) + omega_shift) * dt)
    return WaveField(f.grid, f.values * phase)


def gaussian(
    grid: GridSpec,
    center=0.0,
    momentum=0.0,
    width: float = 1.0,
    amplitude: float = 1.0,
    phase: float = 0.0,
) -> WaveField:
    """Gaussian packet exp(-|x-a|^2/(2w^2) + i p.x + i phase), scaled so its
    grid norm equals ``amplitude``."""
    a = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    p = np.broadcast_to(np.asarray(momentum, dtype=float), (grid.dim,))
    r2 = sum((c - ai) ** 2 for c, ai in zip(grid.coords, a))
    arg = sum(c * pi for c, pi in zip(grid.coords, p))
    vals = np.exp(-r2 / (2.0 * width**2) + 1j * (arg + phase))
    nrm = np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume)
    return WaveField(grid, vals * (amplitude / nrm))
