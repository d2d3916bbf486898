"""Cucker-Smale consensus dynamics for the intrinsic parameters theta_j.

The parameters are driven by the pairwise distances of the oscillators'
centers of mass through a radially symmetric communication kernel h(r).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ConstantKernel:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("constant kernel value must be positive")

    def __call__(self, r):
        return np.full(np.shape(r), float(self.c))

    @property
    def infimum(self) -> float:
        return float(self.c)


@dataclass(frozen=True)
class AbsoluteKernel:
    """h(r) = c_floor + amp * (1 + r^2)^(-gamma/2); inf h = c_floor > 0."""

    c_floor: float = 0.5
    amp: float = 0.5
    gamma: float = 1.0

    def __post_init__(self):
        if not self.c_floor > 0:
            raise DomainError("absolute kernel needs c_floor > 0")
        if self.amp < 0:
            raise DomainError("absolute kernel needs amp >= 0")
        if not self.gamma > 0:
            raise DomainError("absolute kernel needs gamma > 0")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.c_floor + self.amp * (1.0 + r * r) ** (-0.5 * self.gamma)

    @property
    def infimum(self) -> float:
        return float(self.c_floor)


@dataclass(frozen=True)
class HeavyTailKernel:
    """h(r) = (1 + r^2)^(-gamma/2) with gamma in (0, 1], so that the integral
    of h over [0, inf) diverges."""

    gamma: float = 1.0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise DomainError(f"heavy-tail exponent must lie in (0, 1], got {self.gamma}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return (1.0 + r * r) ** (-0.5 * self.gamma)

    @property
    def infimum(self) -> float:
        return 0.0


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """Piecewise-linear h through (radii, values), constant beyond the table."""

    radii: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 1:
            raise DomainError("tabulated kernel needs matching 1-D radii and values")
        if np.any(np.diff(r) <= 0):
            raise DomainError("tabulated kernel radii must be strictly increasing")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise DomainError("tabulated kernel values must be finite and positive")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        return np.interp(np.asarray(r, dtype=float), self.radii, self.values)

    @property
    def infimum(self) -> float:
        return float(self.values.min())


KernelSpec = ConstantKernel | AbsoluteKernel | HeavyTailKernel | TabulatedKernel


def kernel_eval(spec: KernelSpec, r: float) -> float:
    if r < 0:
        raise DomainError(f"kernel radius must be nonnegative, got {r}")
    return float(spec(r))


def pairwise_distances(centers) -> np.ndarray:
    x = np.asarray(centers, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def theta_rhs(theta, centers, spec: KernelSpec, mu: float) -> np.ndarray:
    """d theta_j/dt = (mu/N) sum_k h(|x_j - x_k|) (theta_k - theta_j)."""
    theta = np.asarray(theta, dtype=float)
    if len(np.asarray(centers)) != theta.size:
        raise DomainError(f"{theta.size} parameters but {len(centers)} centers")
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    if mu == 0:
        return np.zeros_like(theta)
    h = spec(pairwise_distances(centers))
    # pairwise differences keep consensus an exact zero and the total sum
    # antisymmetric term by term
    return (mu / theta.size) * np.sum(h * (theta[None, :] - theta[:, None]), axis=1)


def theta_spread(theta) -> float:
    theta = np.asarray(theta, dtype=float)
    return float(np.max(np.abs(theta - theta.mean())))


def pair_diameter(centers) -> float:
    if len(centers) < 2:
        return 0.0
    return float(pairwise_distances(centers).max())
