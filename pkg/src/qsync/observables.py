"""Diagnostics of an ensemble state, exponential rate fits and regime detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cucker_smale import pair_diameter, theta_spread
from .errors import DomainError
from .grid import WaveField
from .model import (
    EnsembleState,
    ModelKind,
    ModelParams,
    centers_of_mass,
    check_mass_floor,
    gram_matrix,
    inner_with,
)


@dataclass(frozen=True, eq=False)
class ObservableFrame:
    time: float
    masses: np.ndarray
    thetas: np.ndarray
    centers: np.ndarray
    corr_re: np.ndarray
    corr_im: np.ndarray
    zeta_norm: float
    min_corr: float
    theta_spread: float
    diameter: float

    @property
    def n_osc(self) -> int:
        return self.masses.size

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def corr(self) -> np.ndarray:
        return self.corr_re + 1j * self.corr_im

    def min_pair(self) -> tuple[int, int]:
        """Lowest-index pair (j, k), j < k, attaining min_corr."""
        n = self.n_osc
        best, pair = np.inf, (0, 0)
        for j in range(n):
            for k in range(j + 1, n):
                if self.corr_re[j, k] < best:
                    best, pair = self.corr_re[j, k], (j, k)
        return pair


def order_parameter(state: EnsembleState) -> WaveField:
    return WaveField(state.grid, state.psi.mean(axis=0))


def correlation_from_upper(n: int, upper: np.ndarray) -> np.ndarray:
    """Hermitian correlation matrix with unit diagonal from its j<k entries
    in row-major order."""
    c = np.eye(n, dtype=complex)
    iu = np.triu_indices(n, 1)
    c[iu] = upper
    c[(iu[1], iu[0])] = np.conj(upper)
    return c


def make_frame(time, masses, thetas, centers, corr, zeta_norm) -> ObservableFrame:
    """Assemble a frame from raw quantities, deriving the summary fields.

    Only the strict upper triangle of ``corr`` is used, so the stored
    matrices are exactly symmetric / antisymmetric with unit diagonal.
    """
    masses = np.asarray(masses, dtype=float)
    n = masses.size
    iu = np.triu_indices(n, 1)
    c = correlation_from_upper(n, np.asarray(corr)[iu])
    centers = np.asarray(centers, dtype=float).reshape(n, -1)
    min_corr = float(c.real[iu].min()) if n > 1 else 1.0
    thetas = np.asarray(thetas, dtype=float)
    if np.all(np.isfinite(centers)):
        diam = pair_diameter(centers)
    else:
        diam = float("nan")
    return ObservableFrame(
        time=float(time),
        masses=masses,
        thetas=thetas,
        centers=centers,
        corr_re=c.real.copy(),
        corr_im=c.imag.copy(),
        zeta_norm=float(zeta_norm),
        min_corr=min_corr,
        theta_spread=theta_spread(thetas),
        diameter=diam,
    )


def frame(state: EnsembleState) -> ObservableFrame:
    g = gram_matrix(state.psi, state.grid)
    lam = np.sqrt(np.maximum(np.diag(g).real, 0.0))
    check_mass_floor(lam, state.time)
    corr = g / np.outer(lam, lam)
    zeta = state.psi.mean(axis=0)
    znorm = np.sqrt(np.vdot(zeta, zeta).real * state.grid.cell_volume)
    return make_frame(
        state.time, lam, state.theta, centers_of_mass(state.psi, state.grid), corr, znorm
    )


def zeta_derivative_identity(
    state: EnsembleState, params: ModelParams, form: str = "derived"
) -> float:
    """Analytic d/dt ||zeta||^2 for equal natural frequencies.

    Model 1 (and the standard model with theta = 1):
        k (mean(theta) ||zeta||^2 - (1/N) sum_j Re[<phi_j, zeta>^2]).
    Model 2, ``form="derived"``:
        k (mean(theta) ||zeta||^2 - (1/N) sum_l lambda_l^2 Re[<phi_l, zeta>^2]).
    Model 2, ``form="real_squared"`` replaces Re[w^2] by (Re w)^2; the two agree
    only when every <phi_l, zeta> is real.
    """
    if form not in ("derived", "real_squared"):
        raise ValueError(f"unknown form {form!r}")
    om = params.omegas_for(state.n_osc)
    if np.ptp(om) != 0:
        raise DomainError("the order-parameter identity needs equal natural frequencies")
    lam = state.masses()
    check_mass_floor(lam, state.time)
    zeta = state.psi.mean(axis=0)
    z2 = np.vdot(zeta, zeta).real * state.grid.cell_volume
    # <phi_j, zeta> = conj(<zeta, psi_j>) / lambda_j
    w = np.conj(inner_with(zeta, state.psi, state.grid)) / lam
    theta = np.ones(state.n_osc) if params.kind is ModelKind.STANDARD_SL else state.theta
    if params.kind is ModelKind.MODEL2:
        sq = (w.real**2) if form == "real_squared" else (w * w).real
        loss = np.mean(lam**2 * sq)
    else:
        loss = np.mean((w * w).real)
    return float(params.k * (theta.mean() * z2 - loss))


@dataclass(frozen=True)
class RateFit:
    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def fit_exponential_rate(times, values, window=None) -> RateFit:
    """Least-squares line through (t, ln y); ``rate`` is minus the slope."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ValueError("times and values differ in length")
    if window is not None:
        t0, t1 = window
        sel = (t >= t0) & (t <= t1)
        t, y = t[sel], y[sel]
    if t.size < 3:
        raise ValueError(f"need at least 3 samples in the fit window, got {t.size}")
    if np.any(~(y > 0)):
        raise ValueError("nonpositive samples in the fit window")
    ly = np.log(y)
    if np.ptp(ly) <= 4.0 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(ly)))):
        # flat series: no decay, and r^2 is reported as 0 by convention
        return RateFit(0.0, float(ly.mean()), 0.0, (float(t[0]), float(t[-1])))
    slope, intercept = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(float(-slope), float(intercept), float(r2), (float(t[0]), float(t[-1])))


def fit_window(times, values, transient: float = 0.2, floor: float = 1e-12):
    """Default window: drop the first ``transient`` fraction of the run and
    stop before the series first comes within 10x of ``floor``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    start = t[0] + transient * (t[-1] - t[0])
    low = np.flatnonzero((t >= start) & ~(y > 10.0 * floor))
    end = t[low[0] - 1] if low.size else t[-1]
    return float(start), float(end)


@dataclass(frozen=True)
class Converged:
    limit: complex


@dataclass(frozen=True)
class Periodic:
    period_estimate: float


@dataclass(frozen=True)
class Undetermined:
    pass


Regime = Converged | Periodic | Undetermined

CONVERGED_TOL = 1e-4
RECURRENCE_FRACTION = 0.05
SPACING_TOL = 0.10


def detect_regime(times, z, tail_fraction: float = 0.5) -> Regime:
    """Classify the tail of a complex series as converged, periodic or neither."""
    t = np.asarray(times, dtype=float)
    z = np.asarray(z, dtype=complex)
    if t.size != z.size:
        raise ValueError("times and values differ in length")
    if t.size < 100:
        raise ValueError(f"need at least 100 samples, got {t.size}")
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    start = int(np.floor((1.0 - tail_fraction) * t.size))
    tt, zt = t[start:], z[start:]
    mean = zt.mean()
    if np.max(np.abs(zt - mean)) < CONVERGED_TOL:
        return Converged(complex(mean))

    d = np.abs(zt - zt[0])
    scale = d.max()
    thresh = RECURRENCE_FRACTION * scale
    # interior local minima of the distance to the first tail value
    idx = np.flatnonzero((d[1:-1] <= d[:-2]) & (d[1:-1] < d[2:]) & (d[1:-1] < thresh)) + 1
    if idx.size < 3:
        return Undetermined()
    hits = np.concatenate(([tt[0]], tt[idx]))
    gaps = np.diff(hits)
    period = gaps.mean()
    if np.all(np.abs(gaps - period) <= SPACING_TOL * period):
        return Periodic(float(period))
    return Undetermined()
