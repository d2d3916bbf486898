"""A-priori mass bounds for Model 1 runs, evaluated from initial data."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def two_oscillator_mass_bounds(lam0, theta0, k: float, mu: float, m: float):
    """Pointwise bounds on the two masses of a Model 1 pair.

    ``m`` is a lower bound of h(|x_1 - x_2|) over the run. Label the heavier
    oscillator (lowest index on ties) "b" and the other "s" and let
    a = k (theta_b - 1)(0) / (2 mu m).

    If theta_b(0) >= 1 both masses lie in [C1, C2] with
        C2 = lambda_b(0) e^a,
        C1 = lambda_s(0) - (k/2)(lambda_b(0)/(mu m))(theta_b - 1)(0) e^a.
    Otherwise lambda_b lies in [lambda_b(0) e^a, lambda_b(0)] and lambda_s
    is bounded above by lambda_s(0) + (k/2)(lambda_b(0)/(mu m))(1 - theta_b)(0) e^a
    (no lower bound is available; 0 is reported).

    Returns (lower, upper) arrays indexed like the input.
    """
    lam0 = np.asarray(lam0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    if lam0.shape != (2,) or theta0.shape != (2,):
        raise DomainError("two-oscillator bounds need exactly two masses and parameters")
    if not (mu > 0 and m > 0 and k > 0):
        raise DomainError("bounds need k, mu and the kernel floor m to be positive")
    b = 0 if lam0[0] >= lam0[1] else 1
    s = 1 - b
    a = k * (theta0[b] - 1.0) / (2.0 * mu * m)
    lo, hi = np.empty(2), np.empty(2)
    if theta0[b] >= 1.0:
        c2 = lam0[b] * math.exp(a)
        c1 = lam0[s] - 0.5 * k * lam0[b] / (mu * m) * (theta0[b] - 1.0) * math.exp(a)
        lo[:] = c1
        hi[:] = c2
    else:
        lo[b], hi[b] = lam0[b] * math.exp(a), lam0[b]
        lo[s] = 0.0
        hi[s] = lam0[s] + 0.5 * k * lam0[b] / (mu * m) * (1.0 - theta0[b]) * math.exp(a)
    return lo, hi


def max_mass_bound(lam0, theta0, k: float, mu: float, c: float) -> float:
    """Upper bound lambda_+(0) exp(k max_j |theta_j(0) - 1| / (2 c mu)) on
    every mass when the kernel is bounded below by ``c``."""
    lam0 = np.asarray(lam0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    if not (mu > 0 and c > 0 and k > 0):
        raise DomainError("the bound needs k, mu and the kernel floor c to be positive")
    dev = float(np.max(np.abs(theta0 - 1.0)))
    return float(lam0.max() * math.exp(k * dev / (2.0 * c * mu)))
