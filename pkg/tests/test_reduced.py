import cmath
import math

import numpy as np
import pytest

from qsync.errors import DomainError, ExcludedInitialConditionError, NoFixedPointError, SingularityError
from qsync.reduced import (
    ReducedParams,
    ReducedState,
    classify,
    classify_numeric,
    fixed_points,
    integrate_reduced,
    lambda_param,
    reduced_rhs,
    sync_rate,
    trajectory_frames,
    y_exact,
)


def retyped_rhs(z, l1, l2, t1, t2, om, k, mu, c):
    """The correlation, mass and parameter equations written out in complex
    arithmetic, independently of the packaged real/imaginary split."""
    dz = (
        2j * om * z
        + (k / 4) * ((t1 * l2**2 + t2 * l1**2) / (l1 * l2)) * (1 - z * z)
        + 1j * (k / 4) * ((l2 / l1) * (t1 - 1) + (l1 / l2) * (t2 - 1)) * z.imag * z
    )
    # lambda_j' = (k/2) Re<zeta, phi_j>(theta_j - 1), <zeta, phi_1> = (l1 + l2 conj z)/2
    zp1 = 0.5 * (l1 + l2 * z.conjugate())
    zp2 = 0.5 * (l1 * z + l2)
    dl1 = 0.5 * k * zp1.real * (t1 - 1)
    dl2 = 0.5 * k * zp2.real * (t2 - 1)
    dt1 = 0.5 * mu * c * (t2 - t1)
    return dz, dl1, dl2, dt1, -dt1


def rk4_scalar(f, y0, dt, n):
    y = y0
    out = [y]
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y)
    return np.array(out)


# ---------------------------------------------------------------- Lambda


def test_lambda_param_values():
    assert lambda_param(0.0, 1.0, 1.3, 0.7) == 0.0
    assert lambda_param(1.0, 2.0, 0.9, 0.9) == pytest.approx(1.0, rel=1e-15)
    assert lambda_param(1.0, 1.0, 2.0, 1.0) == pytest.approx(8 / 5, rel=1e-15)


def test_lambda_param_bounded_by_two_omega_over_k():
    rng = np.random.default_rng(51)
    for _ in range(50):
        om, k, a, b = rng.uniform(0.1, 3, 4)
        assert lambda_param(om, k, a, b) <= 2 * om / k * (1 + 1e-15)


@pytest.mark.parametrize("args", [(-1, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, -2)])
def test_lambda_param_domain(args):
    with pytest.raises(DomainError):
        lambda_param(*args)


# ---------------------------------------------------------------- vector field


def test_rhs_synchronized_fixed_point():
    d = reduced_rhs(ReducedState(1.0, 1.0, 1.0, 1.0, 1.0), ReducedParams(0.0, 1.0, 1.0, 1.0))
    assert d.dz == 0 and d.dlambda1 == 0 and d.dlambda2 == 0 and d.dtheta1 == 0 and d.dtheta2 == 0


def test_rhs_middle_term_only():
    d = reduced_rhs(ReducedState(0.0, 1.0, 1.0, 1.0, 1.0), ReducedParams(0.0, 2.0, 1.0, 1.0))
    assert d.dz == 1.0
    assert (d.dlambda1, d.dlambda2, d.dtheta1, d.dtheta2) == (0.0, 0.0, 0.0, 0.0)


def test_rhs_matches_retyped_formula():
    rng = np.random.default_rng(52)
    for _ in range(200):
        z = cmath.rect(rng.uniform(0, 1), rng.uniform(0, 2 * np.pi))
        l1, l2 = rng.uniform(0.3, 2.0, 2)
        t1, t2 = rng.uniform(0.3, 2.0, 2)
        om, k, mu, c = rng.uniform(0, 2), rng.uniform(0.1, 4), rng.uniform(0, 2), rng.uniform(0.1, 2)
        d = reduced_rhs(ReducedState(z, l1, l2, t1, t2), ReducedParams(om, k, mu, c))
        ref = retyped_rhs(z, l1, l2, t1, t2, om, k, mu, c)
        got = (d.dz, d.dlambda1, d.dlambda2, d.dtheta1, d.dtheta2)
        for a, b in zip(got, ref):
            assert abs(a - b) <= 1e-13 * max(1.0, abs(b))


def test_rhs_rejects_nonpositive_mass():
    with pytest.raises(DomainError):
        reduced_rhs(ReducedState(0.5, 0.0, 1.0, 1.0, 1.0), ReducedParams())


def test_params_validation():
    with pytest.raises(DomainError):
        ReducedParams(1.0, 0.0)
    with pytest.raises(DomainError):
        ReducedParams(1.0, 1.0, -1.0)


# ---------------------------------------------------------------- integration


def test_equal_frequencies_monotone_sync():
    traj = integrate_reduced(ReducedState(0.5, 1, 1, 1, 1), ReducedParams(0.0, 1.0, 1.0, 1.0), 1e-3, 20.0)
    assert np.all(np.diff(traj.z.real) >= 0)
    assert abs(traj.z[-1] - 1) < 1e-6


def test_sub_critical_limit_and_closed_form():
    # Omega = 1, k = 4, equal unit masses and theta = 1: Lambda = 1/2
    p = ReducedParams(1.0, 4.0, 1.0, 1.0)
    traj = integrate_reduced(ReducedState(0.0, 1, 1, 1, 1), p, 1e-3, 50.0, sample_every=100)
    z1, _ = fixed_points(0.5)
    assert abs(traj.z[-1] - z1) < 1e-6
    # the correlation equation reduces to y' = 2i y + 2(1 - y^2) here
    ref = y_exact(traj.times, 0.0, 1.0, 0.5)
    assert np.max(np.abs(traj.z - ref)) < 1e-9


def test_conjugation_symmetry():
    s0 = ReducedState(0.3 + 0.4j, 1.1, 0.8, 1.3, 0.7)
    a = integrate_reduced(s0, ReducedParams(0.7, 1.5, 0.5, 1.0), 1e-3, 5.0, 50)
    b = integrate_reduced(
        ReducedState(np.conj(s0.z), 1.1, 0.8, 1.3, 0.7), ReducedParams(-0.7, 1.5, 0.5, 1.0), 1e-3, 5.0, 50
    )
    np.testing.assert_allclose(b.z, np.conj(a.z), rtol=0, atol=1e-13)
    np.testing.assert_allclose(b.lambda1, a.lambda1, rtol=0, atol=1e-13)
    np.testing.assert_allclose(b.theta2, a.theta2, rtol=0, atol=1e-13)


def test_unit_disk_and_theta_sum():
    rng = np.random.default_rng(53)
    for _ in range(3):
        s0 = ReducedState(cmath.rect(rng.uniform(0, 0.95), rng.uniform(0, 6)), *rng.uniform(0.7, 1.3, 4))
        p = ReducedParams(rng.uniform(0, 2), rng.uniform(0.5, 3), rng.uniform(0, 2), 1.0)
        traj = integrate_reduced(s0, p, 1e-3, 10.0, 10)
        assert np.max(np.abs(traj.z)) <= 1 + 1e-8
        s = traj.theta1 + traj.theta2
        assert np.max(np.abs(s - s[0])) < 1e-10


def test_integrate_validation():
    with pytest.raises(DomainError):
        integrate_reduced(ReducedState(0, 1, 1, 1, 1), ReducedParams(), dt=0.0)
    with pytest.raises(DomainError):
        integrate_reduced(ReducedState(0, 1, 1, 1, 1), ReducedParams(), sample_every=0)


def test_integrate_samples_and_final():
    traj = integrate_reduced(ReducedState(0, 1, 1, 1, 1), ReducedParams(), 0.1, 1.0, sample_every=3)
    np.testing.assert_allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)
    assert traj.final.time == traj.times[-1]


# ---------------------------------------------------------------- fixed points and closed forms


def test_fixed_points_values():
    assert fixed_points(0.0) == (1 + 0j, -1 + 0j)
    z1, z2 = fixed_points(0.6)
    assert abs(z1 - (0.8 + 0.6j)) < 1e-15 and abs(z2 - (-0.8 + 0.6j)) < 1e-15
    assert fixed_points(1.0) == (1j, 1j)


def test_fixed_points_on_unit_circle():
    for lam in np.linspace(0, 1, 11):
        for z in fixed_points(lam):
            assert abs(abs(z) - 1) < 1e-15
            assert z.imag == pytest.approx(lam)


def test_fixed_points_errors():
    with pytest.raises(NoFixedPointError):
        fixed_points(1.2)
    with pytest.raises(DomainError):
        fixed_points(-0.1)


def test_sync_rate():
    assert sync_rate(1.0, 0.5) == pytest.approx(4 * math.sqrt(0.75))
    assert sync_rate(1.0, 1.0) == 0.0


def _y_ode(omega, lam):
    return lambda y: 2j * omega * y + (omega / lam) * (1 - y * y)


def test_y_exact_at_zero_and_fixed_point():
    assert abs(y_exact(0.0, 0.3 - 0.2j, 1.0, 0.5) - (0.3 - 0.2j)) < 1e-15
    z1, _ = fixed_points(0.5)
    np.testing.assert_allclose(y_exact(np.linspace(0, 10, 11), z1, 1.0, 0.5), z1, atol=1e-15)


def test_y_exact_derived_matches_rk4_oracle():
    dt = 1e-3
    ys = rk4_scalar(_y_ode(1.0, 0.5), 0j, dt, 10000)
    t = dt * np.arange(ys.size)
    assert np.max(np.abs(y_exact(t, 0.0, 1.0, 0.5) - ys)) < 1e-6


def test_y_exact_mixed_form_fails_rk4_oracle():
    # the mixed closed form uses y0 + z1 in the denominator
    dt = 1e-3
    ys = rk4_scalar(_y_ode(1.0, 0.5), 0j, dt, 10000)
    t = dt * np.arange(ys.size)
    mixed = y_exact(t, 0.0, 1.0, 0.5, form="mixed")
    assert np.max(np.abs(mixed - ys)) > 1e-2
    # away from y0 = 0 it does not even return y0 at t = 0
    y0 = 0.3 - 0.2j
    assert abs(y_exact(0.0, y0, 1.0, 0.5, form="mixed") - y0) > 1e-2


def test_y_exact_critical_branch_matches_rk4():
    dt = 1e-3
    y0 = 0.2 + 0.1j
    ys = rk4_scalar(_y_ode(1.0, 1.0), y0, dt, 10000)
    t = dt * np.arange(ys.size)
    assert np.max(np.abs(y_exact(t, y0, 1.0, 1.0) - ys)) < 1e-9


def test_y_exact_errors():
    _, z2 = fixed_points(0.5)
    with pytest.raises(ExcludedInitialConditionError):
        y_exact(1.0, z2, 1.0, 0.5)
    with pytest.raises(SingularityError):
        y_exact(np.array([0.5, 1.0, 1.5]), -1 + 1j, 1.0, 1.0)
    with pytest.raises(DomainError):
        y_exact(1.0, 0.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        y_exact(1.0, 0.0, 1.0, 0.5, form="other")


# ---------------------------------------------------------------- classification


def test_classify_regimes():
    r = classify(0.5, omega=1.0)
    assert r.regime == 1 and r.rate_type == "exponential"
    assert r.limits == fixed_points(0.5)
    assert r.rate == pytest.approx(sync_rate(1.0, 0.5))
    r = classify(1.0)
    assert r.regime == 2 and r.limits == (1j,) and r.rate_type == "algebraic"
    r = classify(1.5)
    assert r.regime == 3 and r.limits == () and r.rate_type == "periodic"
    with pytest.raises(DomainError):
        classify(-0.5)


def test_classify_numeric_snaps_near_one():
    assert classify_numeric(0.995).regime == 2
    assert classify_numeric(0.9).regime == 1
    assert classify_numeric(1.05).regime == 3


def test_trajectory_frames_zeta_norm():
    traj = integrate_reduced(ReducedState(0.2 + 0.5j, 1.2, 0.8, 1.1, 0.9), ReducedParams(0.5, 1.0), 1e-2, 1.0)
    frames = trajectory_frames(traj)
    assert len(frames) == traj.times.size
    for f, z, l1, l2 in zip(frames, traj.z, traj.lambda1, traj.lambda2):
        assert f.corr[0, 1] == pytest.approx(z)
        # ||(l1 phi_1 + l2 phi_2)/2||^2 expanded
        zeta2 = 0.25 * (l1 * l1 + l2 * l2 + 2 * (l1 * l2 * z).real)
        assert f.zeta_norm**2 == pytest.approx(zeta2, rel=1e-12)
        assert math.isnan(f.diameter)
