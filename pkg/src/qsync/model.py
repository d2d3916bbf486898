"""Model parameters and the ensemble state shared by solvers and diagnostics."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .cucker_smale import HeavyTailKernel, KernelSpec
from .errors import DomainError, GridMismatchError, VanishingMassError
from .grid import MASS_FLOOR, GridSpec, HarmonicPotential, PotentialSpec, WaveField


class ModelKind(str, enum.Enum):
    STANDARD_SL = "StandardSL"
    MODEL1 = "Model1"
    MODEL2 = "Model2"


@dataclass(frozen=True, eq=False)
class ModelParams:
    kind: ModelKind = ModelKind.MODEL1
    k: float = 1.0
    mu: float = 1.0
    omegas: np.ndarray | None = None
    kernel: KernelSpec = field(default_factory=HeavyTailKernel)
    potential: PotentialSpec = field(default_factory=HarmonicPotential)
    dt: float = 1e-3
    t_final: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not self.k > 0:
            raise DomainError(f"coupling k must be positive, got {self.k}")
        if self.mu < 0:
            raise DomainError(f"mu must be nonnegative, got {self.mu}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.t_final < self.dt:
            raise DomainError("t_final must be at least dt")
        if self.omegas is not None:
            om = np.asarray(self.omegas, dtype=float).ravel()
            if not np.all(np.isfinite(om)):
                raise DomainError("natural frequencies must be finite")
            object.__setattr__(self, "omegas", om)

    def omegas_for(self, n_osc: int) -> np.ndarray:
        if self.omegas is None:
            return np.zeros(n_osc)
        if self.omegas.size != n_osc:
            raise DomainError(f"{self.omegas.size} frequencies for {n_osc} oscillators")
        return self.omegas

    def with_(self, **changes) -> ModelParams:
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class EnsembleState:
    """N wave functions stacked along axis 0, their parameters theta_j and the clock."""

    grid: GridSpec
    psi: np.ndarray
    theta: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.ndim == self.grid.dim:
            psi = psi[None]
        if psi.shape[1:] != self.grid.shape:
            raise GridMismatchError(f"fields of shape {psi.shape[1:]} on grid {self.grid.shape}")
        if psi.shape[0] < 1:
            raise DomainError("ensemble needs at least one oscillator")
        theta = np.asarray(self.theta, dtype=float).ravel()
        if theta.size != psi.shape[0]:
            raise DomainError(f"{theta.size} parameters for {psi.shape[0]} oscillators")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_fields(cls, fields, theta, time=0.0) -> EnsembleState:
        grids = {f.grid for f in fields}
        if len(grids) != 1:
            raise GridMismatchError("oscillators live on different grids")
        return cls(fields[0].grid, np.stack([f.values for f in fields]), theta, time)

    @property
    def n_osc(self) -> int:
        return self.psi.shape[0]

    def field(self, j: int) -> WaveField:
        return WaveField(self.grid, self.psi[j])

    @property
    def fields(self) -> list[WaveField]:
        return [self.field(j) for j in range(self.n_osc)]

    def masses(self) -> np.ndarray:
        """lambda_j = ||psi_j||."""
        return np.sqrt(mass_squares(self.psi, self.grid))

    def directions(self) -> np.ndarray:
        lam = self.masses()
        check_mass_floor(lam, self.time)
        return self.psi / lam.reshape((-1,) + (1,) * self.grid.dim)

    def copy(self) -> EnsembleState:
        return EnsembleState(self.grid, self.psi.copy(), self.theta.copy(), self.time)


def _flat(psi: np.ndarray) -> np.ndarray:
    return psi.reshape(psi.shape[0], -1)


def mass_squares(psi: np.ndarray, grid: GridSpec) -> np.ndarray:
    p = _flat(psi)
    return np.einsum("ij,ij->i", p.real, p.real) * grid.cell_volume + np.einsum(
        "ij,ij->i", p.imag, p.imag
    ) * grid.cell_volume


def inner_with(zeta: np.ndarray, psi: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Vector of <zeta, psi_j>."""
    return (_flat(psi) @ np.conj(zeta.ravel())) * grid.cell_volume


def gram_matrix(psi: np.ndarray, grid: GridSpec) -> np.ndarray:
    """G[j, k] = <psi_j, psi_k>."""
    p = _flat(psi)
    return (np.conj(p) @ p.T) * grid.cell_volume


def centers_of_mass(psi: np.ndarray, grid: GridSpec, mass2=None) -> np.ndarray:
    """Centers x_j as an (N, dim) array."""
    dens = np.abs(psi) ** 2
    axes = tuple(range(1, grid.dim + 1))
    total = dens.sum(axis=axes)
    return np.stack([(dens * c).sum(axis=axes) / total for c in grid.coords], axis=1)


def check_mass_floor(lam: np.ndarray, time: float | None = None):
    bad = np.flatnonzero(~(lam > MASS_FLOOR))
    if bad.size:
        j = int(bad[0])
        raise VanishingMassError(
            f"oscillator {j} norm {lam[j]:.3e} fell below {MASS_FLOOR:g}"
            + (f" at t={time:.6g}" if time is not None else ""),
            oscillator=j,
            time=time,
        )
