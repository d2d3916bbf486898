import math

import numpy as np
import pytest

from qsync.bounds import max_mass_bound, two_oscillator_mass_bounds
from qsync.cucker_smale import ConstantKernel
from qsync.dynamics import run
from qsync.errors import DomainError
from qsync.grid import gaussian
from qsync.model import EnsembleState, ModelParams


def test_heavier_above_one_closed_form():
    lo, hi = two_oscillator_mass_bounds([1.2, 0.8], [1.1, 0.9], k=2.0, mu=0.5, m=1.0)
    a = 2.0 * 0.1 / (2 * 0.5 * 1.0)
    c2 = 1.2 * math.exp(a)
    c1 = 0.8 - 0.5 * 2.0 * 1.2 / 0.5 * 0.1 * math.exp(a)
    np.testing.assert_allclose(hi, [c2, c2], rtol=1e-15)
    np.testing.assert_allclose(lo, [c1, c1], rtol=1e-15)


def test_heavier_below_one_closed_form():
    # second oscillator is heavier, with theta below one
    lo, hi = two_oscillator_mass_bounds([0.8, 1.2], [1.1, 0.9], k=2.0, mu=0.5, m=1.0)
    a = 2.0 * (0.9 - 1.0) / (2 * 0.5 * 1.0)
    assert hi[1] == 1.2
    assert lo[1] == pytest.approx(1.2 * math.exp(a), rel=1e-15)
    assert lo[0] == 0.0
    assert hi[0] == pytest.approx(0.8 + 0.5 * 2.0 * 1.2 / 0.5 * 0.1 * math.exp(a), rel=1e-15)


def test_ties_use_lowest_index():
    lo, hi = two_oscillator_mass_bounds([1.0, 1.0], [0.9, 1.1], k=1.0, mu=1.0, m=1.0)
    # oscillator 0 is "b" with theta below one
    assert hi[0] == 1.0
    assert lo[1] == 0.0


def test_equal_theta_one_gives_exact_bounds():
    lo, hi = two_oscillator_mass_bounds([1.3, 0.7], [1.0, 1.0], k=1.0, mu=1.0, m=0.5)
    np.testing.assert_array_equal(hi, [1.3, 1.3])
    np.testing.assert_array_equal(lo, [0.7, 0.7])


@pytest.mark.parametrize(
    "args",
    [
        ([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.0, 1.0, 1.0),
        ([1.0, 1.0], [1.0, 1.0], 1.0, 0.0, 1.0),
        ([1.0, 1.0], [1.0, 1.0], 1.0, 1.0, 0.0),
    ],
)
def test_two_oscillator_validation(args):
    with pytest.raises(DomainError):
        two_oscillator_mass_bounds(*args)


def test_max_mass_bound_value():
    b = max_mass_bound([0.9, 1.1, 1.0], [1.2, 0.7, 1.1], k=2.0, mu=0.5, c=0.8)
    assert b == pytest.approx(1.1 * math.exp(2.0 * 0.3 / (2 * 0.8 * 0.5)), rel=1e-15)
    with pytest.raises(DomainError):
        max_mass_bound([1.0], [1.0], k=1.0, mu=1.0, c=0.0)


def _model1_pair(grid, lam, theta, k, mu, c):
    fields = [gaussian(grid, -1.0, 0.3, 1.0, lam[0]), gaussian(grid, 1.0, -0.2, 1.0, lam[1], 0.8)]
    s = EnsembleState.from_fields(fields, theta)
    p = ModelParams(kind="Model1", k=k, mu=mu, kernel=ConstantKernel(c), dt=1e-3, t_final=5.0)
    return s, run(s, p, sample_every=10, check_preflight=False)


@pytest.mark.parametrize("theta", [(1.2, 0.8), (0.8, 1.2)])
def test_simulated_masses_respect_bounds(small_grid, theta):
    lam, k, mu, c = (1.1, 0.9), 1.0, 0.5, 1.0
    _, res = _model1_pair(small_grid, lam, theta, k, mu, c)
    assert res.ok
    lo, hi = two_oscillator_mass_bounds(lam, theta, k, mu, c)
    masses = res.series("masses")
    assert np.all(masses <= hi + 1e-9)
    assert np.all(masses >= lo - 1e-9)
    assert masses.max() <= max_mass_bound(lam, theta, k, mu, c) + 1e-9
