"""Time stepping for the coupled wave-function / Cucker-Smale systems.

The production integrator is a Strang splitting: an exact half-step of the
linear Hamiltonian flow, one classical RK4 step of the joint coupling and
theta dynamics, and a second Hamiltonian half-step. A method-of-lines RK4
integrator without splitting is kept as an independent check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .cucker_smale import theta_rhs
from .errors import DomainError, NumericalInstabilityError, SolverError
from .grid import (
    MASS_FLOOR,
    WaveField,
    apply_spectral,
    boundary_amplitude,
    kinetic_multiplier,
)
from .model import (
    EnsembleState,
    ModelKind,
    ModelParams,
    centers_of_mass,
    check_mass_floor,
    gram_matrix,
    inner_with,
    mass_squares,
)
from .observables import ObservableFrame, frame, zeta_derivative_identity

log = logging.getLogger(__name__)


def _effective_theta(theta: np.ndarray, kind: ModelKind) -> np.ndarray:
    return np.ones_like(theta) if kind is ModelKind.STANDARD_SL else theta


def _coupling(psi, theta, params: ModelParams, grid, time=None) -> np.ndarray:
    """(k/2)(theta_j zeta - <zeta, psi_j> psi_j / ||psi_j||^2) for Model 1,
    the same without the division for Model 2."""
    zeta = psi.mean(axis=0)
    proj = inner_with(zeta, psi, grid)
    if params.kind is ModelKind.MODEL2:
        coef = proj
    else:
        m2 = mass_squares(psi, grid)
        check_mass_floor(np.sqrt(m2), time)
        coef = proj / m2
    theta = _effective_theta(theta, params.kind)
    shape = (-1,) + (1,) * grid.dim
    return 0.5 * params.k * (theta.reshape(shape) * zeta[None] - coef.reshape(shape) * psi)


def coupling_rhs(state: EnsembleState, params: ModelParams) -> list[WaveField]:
    inc = _coupling(state.psi, state.theta, params, state.grid, state.time)
    return [WaveField(state.grid, v) for v in inc]


def mass_rhs_check(state: EnsembleState, params: ModelParams) -> np.ndarray:
    """Analytic d/dt ||psi_j||^2: k Re<zeta, psi_j>(theta_j - 1) for Model 1,
    k Re<zeta, psi_j>(theta_j - ||psi_j||^2) for Model 2."""
    zeta = state.psi.mean(axis=0)
    proj = inner_with(zeta, state.psi, state.grid).real
    theta = _effective_theta(state.theta, params.kind)
    if params.kind is ModelKind.MODEL2:
        return params.k * proj * (theta - mass_squares(state.psi, state.grid))
    return params.k * proj * (theta - 1.0)


def _check_finite(psi, theta, time):
    for j in range(psi.shape[0]):
        if not (np.all(np.isfinite(psi[j])) and np.isfinite(theta[j])):
            raise NumericalInstabilityError(
                f"non-finite values in oscillator {j} at t={time:.6g}", oscillator=j, time=time
            )


class Solver:
    """Stepper bound to one grid, parameter set and ensemble size."""

    def __init__(self, grid, params: ModelParams, n_osc: int):
        self.grid = grid
        self.params = params
        self.n_osc = n_osc
        self.omegas = params.omegas_for(n_osc)
        self.potential = params.potential.sample(grid)
        dt = params.dt
        shape = (-1,) + (1,) * grid.dim
        # pointwise phase of V + Omega_j over a quarter step, per oscillator
        self._quarter_phase = np.exp(
            -1j * (self.potential[None] + self.omegas.reshape(shape)) * (0.25 * dt)
        )
        self._half_kinetic = kinetic_multiplier(grid, 0.5 * dt)
        self._hamiltonian_diag = self.potential[None] + self.omegas.reshape(shape)

    def _check(self, state: EnsembleState):
        if state.grid != self.grid:
            raise DomainError("state lives on a different grid than the solver")
        if state.n_osc != self.n_osc:
            raise DomainError(f"solver built for {self.n_osc} oscillators, got {state.n_osc}")

    def _joint_rhs(self, psi, theta, time):
        dpsi = _coupling(psi, theta, self.params, self.grid, time)
        p = self.params
        if p.mu == 0 or p.kind is ModelKind.STANDARD_SL:
            dtheta = np.zeros_like(theta)
        else:
            dtheta = theta_rhs(theta, centers_of_mass(psi, self.grid), p.kernel, p.mu)
        return dpsi, dtheta

    def _rk4(self, rhs, psi, theta, dt, time):
        k1p, k1t = rhs(psi, theta, time)
        k2p, k2t = rhs(psi + 0.5 * dt * k1p, theta + 0.5 * dt * k1t, time)
        k3p, k3t = rhs(psi + 0.5 * dt * k2p, theta + 0.5 * dt * k2t, time)
        k4p, k4t = rhs(psi + dt * k3p, theta + dt * k3t, time)
        psi_new = psi + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        theta_new = theta + (dt / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
        return psi_new, theta_new

    def _half_hamiltonian(self, psi):
        psi = psi * self._quarter_phase
        psi = apply_spectral(psi, self._half_kinetic, self.grid.dim)
        return psi * self._quarter_phase

    def step(self, state: EnsembleState) -> EnsembleState:
        self._check(state)
        dt = self.params.dt
        t_new = state.time + dt
        psi = self._half_hamiltonian(state.psi)
        psi, theta = self._rk4(self._joint_rhs, psi, state.theta, dt, state.time)
        psi = self._half_hamiltonian(psi)
        _check_finite(psi, theta, t_new)
        check_mass_floor(np.sqrt(mass_squares(psi, self.grid)), t_new)
        return EnsembleState(self.grid, psi, theta, t_new)

    def _mol_rhs(self, psi, theta, time):
        dpsi, dtheta = self._joint_rhs(psi, theta, time)
        lap = apply_spectral(psi, 0.5 * self.grid.xi_squared, self.grid.dim)
        return dpsi - 1j * (lap + self._hamiltonian_diag * psi), dtheta

    def oracle_step(self, state: EnsembleState) -> EnsembleState:
        self._check(state)
        dt = self.params.dt
        t_new = state.time + dt
        psi, theta = self._rk4(self._mol_rhs, state.psi, state.theta, dt, state.time)
        _check_finite(psi, theta, t_new)
        check_mass_floor(np.sqrt(mass_squares(psi, self.grid)), t_new)
        return EnsembleState(self.grid, psi, theta, t_new)


def step(state: EnsembleState, params: ModelParams) -> EnsembleState:
    return Solver(state.grid, params, state.n_osc).step(state)


def oracle_step(state: EnsembleState, params: ModelParams) -> EnsembleState:
    return Solver(state.grid, params, state.n_osc).oracle_step(state)


# ---------------------------------------------------------------- preflight

PASS, WARN, NA = "pass", "warn", "n/a"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    value: float | None = None
    message: str = ""


@dataclass(frozen=True)
class PreflightReport:
    checks: tuple[Check, ...]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def warnings(self) -> list[Check]:
        return [c for c in self.checks if c.status == WARN]

    @property
    def ok(self) -> bool:
        return not self.warnings


def lower_bound_value(lam_minus, lam_plus, theta_plus, k, c) -> float:
    """lambda_-(0) - (k/2)(lambda_+(0)/c)(theta_+ - 1) exp((k/2c)(theta_+ - 1))."""
    excess = theta_plus - 1.0
    if excess == 0:
        return float(lam_minus)
    if not c > 0:
        return float("-inf")
    a = 0.5 * k * excess / c
    return float(lam_minus - lam_plus * a * math.exp(a))


def preflight(state: EnsembleState, params: ModelParams) -> PreflightReport:
    """Evaluate the sufficient conditions for global existence.

    Violations are reported as warnings; only nonpositive theta (and a
    standard-model run with theta != 1) are hard errors.
    """
    theta = state.theta
    if np.any(~(theta > 0)):
        j = int(np.flatnonzero(~(theta > 0))[0])
        raise DomainError(f"theta_{j + 1} = {theta[j]} must be positive")
    if params.kind is ModelKind.STANDARD_SL and np.any(theta != 1.0):
        raise DomainError("the standard model requires theta_j = 1 for every oscillator")
    params.omegas_for(state.n_osc)
    checks = []

    mean_dev = abs(float(theta.mean()) - 1.0)
    checks.append(
        Check("theta_mean", PASS if mean_dev <= 1e-12 else WARN, mean_dev, "|mean(theta) - 1|")
    )
    lam = state.masses()
    checks.append(
        Check(
            "mass_floor",
            PASS if lam.min() > MASS_FLOOR else WARN,
            float(lam.min()),
            "smallest initial norm",
        )
    )
    edge = boundary_amplitude(state.psi, state.grid)
    checks.append(Check("boundary", PASS if edge < 1e-8 else WARN, edge, "max |psi| on box edge"))

    if params.kind is ModelKind.MODEL1:
        c = params.kernel.infimum
        theta_plus = float(theta.max())
        if theta_plus != 1.0 and not c > 0:
            checks.append(
                Check(
                    "lower_bound",
                    NA,
                    None,
                    "kernel infimum is zero; the lower-bound condition does not apply",
                )
            )
        else:
            v = lower_bound_value(lam.min(), lam.max(), theta_plus, params.k, c)
            checks.append(
                Check("lower_bound", PASS if v > 0 else WARN, v, "initial mass lower bound")
            )
    elif params.kind is ModelKind.MODEL2:
        g = gram_matrix(state.psi, state.grid)
        corr = (g / np.outer(lam, lam)).real
        wedge = float(corr.min())
        excess = float(np.max(lam**2 - theta))
        wedge_ok = wedge >= 0
        cap_ok = excess <= 0
        checks.append(Check("wedge", PASS if wedge_ok else WARN, wedge, "min Re<phi_j, phi_k>"))
        checks.append(
            Check("mass_cap", PASS if cap_ok else WARN, excess, "max(lambda_j^2 - theta_j)")
        )
        checks.append(
            Check(
                "global_existence",
                PASS if (wedge_ok or cap_ok) else WARN,
                None,
                "wedge or mass cap",
            )
        )
    return PreflightReport(tuple(checks))


# ---------------------------------------------------------------- runs


@dataclass
class RunResult:
    frames: list[ObservableFrame]
    final_state: EnsembleState
    preflight: PreflightReport | None
    error: SolverError | None = None
    boundary_max: float = 0.0
    steps_taken: int = 0

    @property
    def ok(self) -> bool:
        return self.error is None

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(f, name) for f in self.frames])

    @property
    def times(self) -> np.ndarray:
        return self.series("time")


class IdentityMonitor:
    """Records the quantities needed to compare the mass and order-parameter
    identities with centered finite differences along a run."""

    def __init__(self, params: ModelParams, zeta_form: str = "derived"):
        self.params = params
        self.zeta_form = zeta_form
        self.times: list[float] = []
        self.mass2: list[np.ndarray] = []
        self.mass_rhs: list[np.ndarray] = []
        self.zeta2: list[float] = []
        self.zeta_rhs: list[float] = []

    def __call__(self, state: EnsembleState):
        self.times.append(state.time)
        self.mass2.append(mass_squares(state.psi, state.grid))
        self.mass_rhs.append(mass_rhs_check(state, self.params))
        zeta = state.psi.mean(axis=0)
        self.zeta2.append(float(np.vdot(zeta, zeta).real * state.grid.cell_volume))
        try:
            self.zeta_rhs.append(zeta_derivative_identity(state, self.params, self.zeta_form))
        except DomainError:
            self.zeta_rhs.append(float("nan"))

    @staticmethod
    def _centered(t, y):
        t = np.asarray(t)
        y = np.asarray(y)
        return (y[2:] - y[:-2]) / (t[2:] - t[:-2])[(...,) + (None,) * (y.ndim - 1)]

    def mass_discrepancy(self) -> float:
        fd = self._centered(self.times, np.array(self.mass2))
        return float(np.max(np.abs(fd - np.array(self.mass_rhs)[1:-1])))

    def zeta_discrepancy(self) -> float:
        rhs = np.array(self.zeta_rhs)[1:-1]
        if np.any(np.isnan(rhs)):
            return float("nan")
        fd = self._centered(self.times, np.array(self.zeta2))
        return float(np.max(np.abs(fd - rhs)))


def n_steps_for(t_start: float, params: ModelParams) -> int:
    return max(0, int(round((params.t_final - t_start) / params.dt)))


def run(
    initial: EnsembleState,
    params: ModelParams,
    sample_every: int = 1,
    monitor=None,
    check_preflight: bool = True,
    stepper: str = "split",
) -> RunResult:
    """Step from ``initial.time`` to ``params.t_final``.

    A frame is recorded at the start, every ``sample_every`` steps and at the
    end. Solver errors stop the run; the frames gathered so far are kept and
    the error is stored on the result.
    """
    if sample_every < 1:
        raise DomainError("sample_every must be a positive integer")
    report = preflight(initial, params) if check_preflight else None
    if report is not None:
        for c in report.warnings:
            log.warning("preflight %s: %s (value %s)", c.name, c.message, c.value)
    solver = Solver(initial.grid, params, initial.n_osc)
    advance = solver.step if stepper == "split" else solver.oracle_step
    n_steps = n_steps_for(initial.time, params)
    state = initial
    frames = [frame(state)]
    edge = boundary_amplitude(state.psi, state.grid)
    if monitor is not None:
        monitor(state)
    error = None
    taken = 0
    try:
        for i in range(1, n_steps + 1):
            state = advance(state)
            taken = i
            if monitor is not None:
                monitor(state)
            if i % sample_every == 0 or i == n_steps:
                frames.append(frame(state))
                edge = max(edge, boundary_amplitude(state.psi, state.grid))
    except SolverError as exc:
        log.error("run stopped: %s", exc)
        error = exc
    return RunResult(frames, state, report, error, edge, taken)
