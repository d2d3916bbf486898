import re
from collections import OrderedDict

import numpy as np
import pytest

from qsync.grid import GridSpec, WaveField, gaussian
from qsync.model import EnsembleState

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: "OrderedDict[int, list[tuple[str, str]]]" = OrderedDict()

CRITERIA = {
    1: "standard model conserves every mass",
    2: "two identical oscillators: exponential sync, aggregation, mass bounds",
    3: "two frequencies: regimes of the reduced and full systems",
    4: "reduced and full two-oscillator systems agree",
    5: "absolute kernel: monotone order parameter, mass bound, sync, alignment",
    6: "heavy-tail kernel with wedge data: sync and aggregation",
    7: "Model 2: masses settle at 1 or at frozen distinct parameters",
    8: "bipolar family stays pinned at the antipode",
    9: "incoherent family: order parameter decays",
    10: "mass and order-parameter identities hold to C dt^2",
    11: "split-step and method-of-lines integrators agree",
    12: "Cucker-Smale parameter dynamics",
}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(int(m.group(1)), []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_results):
        outcomes = [o for _, o in _results[num]]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        n_ok = sum(o == "passed" for o in outcomes)
        tr.write_line(f"criterion {num:2d}: {status}  ({n_ok}/{len(outcomes)} tests)  {CRITERIA.get(num, '')}")


# ---------------------------------------------------------------- shared fixtures


@pytest.fixture
def grid():
    return GridSpec()


@pytest.fixture
def small_grid():
    return GridSpec(1, 128, 16.0)


def random_field(grid, rng, n_packets=2, amplitude=None):
    """Smooth random field: a sum of Gaussian packets, decayed at the edges."""
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(n_packets):
        vals += rng.uniform(0.3, 1.0) * gaussian(
            grid,
            rng.uniform(-2.5, 2.5, grid.dim),
            rng.uniform(-1.0, 1.0, grid.dim),
            rng.uniform(0.7, 1.3),
            1.0,
            rng.uniform(0, 2 * np.pi),
        ).values
    f = WaveField(grid, vals)
    if amplitude is not None:
        nrm = np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume)
        f = WaveField(grid, vals * (amplitude / nrm))
    return f


def random_state(grid, rng, n, lam_range=(0.8, 1.2), theta=None, theta_range=(0.8, 1.2)):
    fields = [random_field(grid, rng, amplitude=rng.uniform(*lam_range)) for _ in range(n)]
    if theta is None:
        theta = rng.uniform(*theta_range, n)
        theta = theta - theta.mean() + 1.0
    return EnsembleState.from_fields(fields, theta)
