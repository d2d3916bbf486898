"""Exact reduction of the two-oscillator Model 1 system with a constant
communication kernel and natural frequencies (+omega, -omega).

The state is z = <phi_1, phi_2>, the masses lambda_1, lambda_2 and the
parameters theta_1, theta_2. The Hamiltonian drops out of the correlation
equation except for the frequency mismatch, so the system closes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExcludedInitialConditionError, NoFixedPointError, SingularityError


@dataclass(frozen=True)
class ReducedState:
    z: complex
    lambda1: float
    lambda2: float
    theta1: float
    theta2: float
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        for name in ("lambda1", "lambda2", "theta1", "theta2", "time"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.z.real, self.z.imag, self.lambda1, self.lambda2, self.theta1, self.theta2]
        )

    @classmethod
    def from_vector(cls, y, time=0.0) -> ReducedState:
        return cls(complex(y[0], y[1]), y[2], y[3], y[4], y[5], time)


@dataclass(frozen=True)
class ReducedParams:
    omega: float = 0.0
    k: float = 1.0
    mu: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError("k must be positive")
        if self.mu < 0:
            raise DomainError("mu must be nonnegative")
        if not self.c > 0:
            raise DomainError("kernel constant must be positive")


@dataclass(frozen=True)
class ReducedDerivative:
    dz: complex
    dlambda1: float
    dlambda2: float
    dtheta1: float
    dtheta2: float


def lambda_param(omega: float, k: float, lam1_bar: float, lam2_bar: float) -> float:
    """4 omega l1 l2 / (k (l1^2 + l2^2))."""
    if omega < 0:
        raise DomainError("omega must be nonnegative")
    if not (k > 0 and lam1_bar > 0 and lam2_bar > 0):
        raise DomainError("k and the limiting masses must be positive")
    return 4.0 * omega * lam1_bar * lam2_bar / (k * (lam1_bar**2 + lam2_bar**2))


def _rhs(zr, zi, l1, l2, t1, t2, p: ReducedParams):
    if not (l1 > 0 and l2 > 0):
        raise DomainError(f"masses must stay positive, got ({l1}, {l2})")
    k, om = p.k, p.omega
    sync = 0.25 * k * (t1 * l2 * l2 + t2 * l1 * l1) / (l1 * l2)
    twist = 0.25 * k * ((l2 / l1) * (t1 - 1.0) + (l1 / l2) * (t2 - 1.0))
    # dz = 2i om z + sync (1 - z^2) + i twist Im(z) z, split into real/imag parts
    dzr = -2.0 * om * zi + sync * (1.0 - zr * zr + zi * zi) - twist * zi * zi
    dzi = 2.0 * om * zr - 2.0 * sync * zr * zi + twist * zi * zr
    dl1 = 0.25 * k * (l1 + l2 * zr) * (t1 - 1.0)
    dl2 = 0.25 * k * (l1 * zr + l2) * (t2 - 1.0)
    dt1 = 0.5 * p.mu * p.c * (t2 - t1)
    return dzr, dzi, dl1, dl2, dt1, -dt1


def _rhs_vec(y, p: ReducedParams) -> np.ndarray:
    return np.array(_rhs(*(float(v) for v in y), p))


def reduced_rhs(s: ReducedState, p: ReducedParams) -> ReducedDerivative:
    d = _rhs_vec(s.as_vector(), p)
    return ReducedDerivative(complex(d[0], d[1]), d[2], d[3], d[4], d[5])


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    times: np.ndarray
    z: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray

    def state(self, i: int) -> ReducedState:
        return ReducedState(
            self.z[i], self.lambda1[i], self.lambda2[i], self.theta1[i], self.theta2[i], self.times[i]
        )

    @property
    def final(self) -> ReducedState:
        return self.state(-1)


def integrate_reduced(
    s0: ReducedState, p: ReducedParams, dt: float = 1e-4, t_final: float = 10.0, sample_every: int = 1
) -> ReducedTrajectory:
    """Classical RK4 from ``s0.time`` to ``t_final``."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if sample_every < 1:
        raise DomainError("sample_every must be a positive integer")
    n = max(0, int(round((t_final - s0.time) / dt)))
    y = tuple(float(v) for v in s0.as_vector())
    t = s0.time
    h2, h6 = 0.5 * dt, dt / 6.0
    rows, times = [y], [t]
    for i in range(1, n + 1):
        k1 = _rhs(*y, p)
        k2 = _rhs(*[a + h2 * b for a, b in zip(y, k1)], p)
        k3 = _rhs(*[a + h2 * b for a, b in zip(y, k2)], p)
        k4 = _rhs(*[a + dt * b for a, b in zip(y, k3)], p)
        y = tuple(
            a + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
        t = t + dt
        if i % sample_every == 0 or i == n:
            rows.append(y)
            times.append(t)
    a = np.array(rows)
    return ReducedTrajectory(
        np.array(times), a[:, 0] + 1j * a[:, 1], a[:, 2], a[:, 3], a[:, 4], a[:, 5]
    )


def fixed_points(lambda_cap: float) -> tuple[complex, complex]:
    """Equilibria sqrt(1 - L^2) + iL and -sqrt(1 - L^2) + iL of the
    limiting correlation equation."""
    if lambda_cap < 0:
        raise DomainError("Lambda must be nonnegative")
    if lambda_cap > 1:
        raise NoFixedPointError(f"no equilibria for Lambda = {lambda_cap} > 1")
    r = math.sqrt(1.0 - lambda_cap * lambda_cap)
    return complex(r, lambda_cap), complex(-r, lambda_cap)


def sync_rate(omega: float, lambda_cap: float) -> float:
    """Exponential rate (2 omega / L) sqrt(1 - L^2) of approach to z1."""
    if not 0 < lambda_cap <= 1:
        raise DomainError("rate defined for 0 < Lambda <= 1")
    return 2.0 * omega / lambda_cap * math.sqrt(1.0 - lambda_cap * lambda_cap)


def y_exact(t, y0: complex, omega: float, lambda_cap: float, form: str = "derived"):
    """Closed-form solution of dy/dt = 2i omega y + (omega/L)(1 - y^2).

    ``form="mixed"`` uses (y0 - z1)/(y0 + z1) in the denominator while the
    numerator uses (y0 - z1)/(y0 + conj(z1)); it does not reproduce y0 at
    t = 0. ``form="derived"`` uses the same ratio in both places and is the
    actual solution.
    """
    if form not in ("derived", "mixed"):
        raise ValueError(f"unknown form {form!r}")
    if not 0 < lambda_cap <= 1:
        raise DomainError("closed form defined for 0 < Lambda <= 1")
    if omega <= 0:
        raise DomainError("closed form needs omega > 0")
    t_arr = np.asarray(t, dtype=float)
    y0 = complex(y0)
    if lambda_cap == 1.0:
        if y0 == 1j:
            return _as_out(np.full(t_arr.shape, 1j), t)
        den = omega * t_arr + 1.0 / (y0 - 1j)
        if np.any(np.abs(den) < 1e-12):
            raise SingularityError("closed form is singular on the requested times")
        return _as_out(1j + 1.0 / den, t)
    z1, z2 = fixed_points(lambda_cap)
    if abs(y0 - z2) < 1e-14:
        raise ExcludedInitialConditionError("initial value sits on the unstable equilibrium")
    decay = np.exp(-sync_rate(omega, lambda_cap) * t_arr)
    c_num = (y0 - z1) / (y0 + z1.conjugate())
    c_den = c_num if form == "derived" else (y0 - z1) / (y0 + z1)
    den = 1.0 - c_den * decay
    if np.any(np.abs(den) < 1e-12):
        raise SingularityError("closed form is singular on the requested times")
    return _as_out((z1 + z1.conjugate() * c_num * decay) / den, t)


def _as_out(values, t):
    return complex(values) if np.ndim(t) == 0 else values


@dataclass(frozen=True)
class RegimeDescriptor:
    regime: int
    label: str
    limits: tuple[complex, ...]
    rate_type: str
    rate: float | None = None


def classify(lambda_cap: float, omega: float | None = None) -> RegimeDescriptor:
    """Expected long-time behaviour of the correlation for a given Lambda.

    Regime 1 (L < 1): exponential approach to z1 (z2 is an unstable
    equilibrium). Regime 2 (L = 1): algebraic approach to i. Regime 3
    (L > 1): periodic motion.
    """
    if lambda_cap < 0:
        raise DomainError("Lambda must be nonnegative")
    if lambda_cap < 1:
        z1, z2 = fixed_points(lambda_cap)
        rate = sync_rate(omega, lambda_cap) if omega and lambda_cap > 0 else None
        return RegimeDescriptor(1, "exponential", (z1, z2), "exponential", rate)
    if lambda_cap == 1:
        return RegimeDescriptor(2, "critical", (1j,), "algebraic")
    return RegimeDescriptor(3, "periodic", (), "periodic")


def classify_numeric(lambda_cap: float, omega: float | None = None, tol: float = 1e-2):
    """classify() with Lambda values within ``tol`` of 1 treated as critical,
    for Lambda estimated from a numerical run."""
    if abs(lambda_cap - 1.0) <= tol:
        return classify(1.0, omega)
    return classify(lambda_cap, omega)


def trajectory_frames(traj: ReducedTrajectory):
    """Express a reduced trajectory as two-oscillator observable frames.

    Centers and the diameter are not part of the reduced state and are
    stored as NaN.
    """
    from .observables import make_frame

    frames = []
    for i in range(traj.times.size):
        l1, l2, z = traj.lambda1[i], traj.lambda2[i], traj.z[i]
        corr = np.array([[1.0, z], [np.conj(z), 1.0]])
        # ||zeta||^2 = (l1^2 + l2^2 + 2 l1 l2 Re z) / 4
        zn = 0.5 * math.sqrt(max(l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * z.real, 0.0))
        frames.append(
            make_frame(
                traj.times[i],
                [l1, l2],
                [traj.theta1[i], traj.theta2[i]],
                np.full((2, 1), np.nan),
                corr,
                zn,
            )
        )
    return frames
