"""Coupled Schrodinger-Lohe oscillators with Cucker-Smale driven parameters."""

from .cucker_smale import (
    AbsoluteKernel,
    ConstantKernel,
    HeavyTailKernel,
    TabulatedKernel,
    kernel_eval,
    pair_diameter,
    theta_rhs,
    theta_spread,
)
from .dynamics import (
    IdentityMonitor,
    RunResult,
    Solver,
    coupling_rhs,
    mass_rhs_check,
    oracle_step,
    preflight,
    run,
    step,
)
from .grid import (
    GridSpec,
    HarmonicPotential,
    TabulatedPotential,
    WaveField,
    ZeroPotential,
    center_of_mass,
    gaussian,
    inner_product,
    kinetic_phase,
    norm,
    potential_phase,
)
from .model import EnsembleState, ModelKind, ModelParams
from .observables import (
    ObservableFrame,
    RateFit,
    detect_regime,
    fit_exponential_rate,
    frame,
    order_parameter,
    zeta_derivative_identity,
)

__version__ = "0.1.0"
