"""JSON run configuration: schema, validation and conversion to model objects."""

from __future__ import annotations

import json
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import cucker_smale as cs
from . import grid as gr
from .errors import ConfigError, DomainError
from .model import EnsembleState, ModelKind, ModelParams

THETA_MEAN_TOL = 1e-12


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Strict):
    dim: Literal[1, 2] = 1
    points: int = Field(256, ge=16)
    half_width: float = Field(20.0, gt=0)

    @model_validator(mode="after")
    def _power_of_two(self):
        if self.points & (self.points - 1):
            raise ValueError(f"points must be a power of two, got {self.points}")
        return self

    def build(self) -> gr.GridSpec:
        return gr.GridSpec(self.dim, self.points, self.half_width)


class ConstantKernelConfig(_Strict):
    kind: Literal["Constant"]
    c: float = Field(1.0, gt=0)


class AbsoluteKernelConfig(_Strict):
    kind: Literal["Absolute"]
    c_floor: float = Field(0.5, gt=0)
    amp: float = Field(0.5, ge=0)
    gamma: float = Field(1.0, gt=0)


class HeavyTailKernelConfig(_Strict):
    kind: Literal["HeavyTail"]
    gamma: float = Field(1.0, gt=0, le=1)


class TabulatedKernelConfig(_Strict):
    kind: Literal["Tabulated"]
    radii: list[float]
    values: list[float]


KernelConfig = Annotated[
    Union[ConstantKernelConfig, AbsoluteKernelConfig, HeavyTailKernelConfig, TabulatedKernelConfig],
    Field(discriminator="kind"),
]


class ZeroPotentialConfig(_Strict):
    kind: Literal["Zero"]


class HarmonicPotentialConfig(_Strict):
    kind: Literal["Harmonic"]
    omega: float = Field(1.0, gt=0)


class TabulatedPotentialConfig(_Strict):
    kind: Literal["Tabulated"]
    samples: list[float]


PotentialConfig = Annotated[
    Union[ZeroPotentialConfig, HarmonicPotentialConfig, TabulatedPotentialConfig],
    Field(discriminator="kind"),
]


def _default_kernel():
    return HeavyTailKernelConfig(kind="HeavyTail", gamma=1.0)


def _default_potential():
    return HarmonicPotentialConfig(kind="Harmonic", omega=1.0)


class ModelConfig(_Strict):
    kind: Literal["StandardSL", "Model1", "Model2"] = "Model1"
    n_oscillators: int = Field(ge=1)
    k: float = Field(1.0, gt=0)
    mu: float = Field(1.0, ge=0)
    omegas: list[float] | None = None
    kernel: KernelConfig = Field(default_factory=_default_kernel)
    potential: PotentialConfig = Field(default_factory=_default_potential)
    dt: float = Field(1e-3, gt=0)
    t_final: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _consistent(self):
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.omegas is not None and len(self.omegas) != self.n_oscillators:
            raise ValueError(
                f"omegas has {len(self.omegas)} entries for {self.n_oscillators} oscillators"
            )
        return self


class OscillatorConfig(_Strict):
    center: float | list[float] = 0.0
    momentum: float | list[float] = 0.0
    width: float = Field(1.0, gt=0)
    amplitude: float = Field(1.0, gt=0)
    phase: float = 0.0


class InitialConfig(_Strict):
    scenario: str | None = None
    seed: int = 0
    oscillators: list[OscillatorConfig] | None = None
    thetas: list[float] | None = None
    rescale_thetas: bool = False

    @model_validator(mode="after")
    def _one_source(self):
        if (self.scenario is None) == (self.oscillators is None):
            raise ValueError("give exactly one of 'scenario' or 'oscillators'")
        if self.oscillators is not None:
            if self.thetas is None:
                raise ValueError("'thetas' is required with explicit oscillators")
            if len(self.thetas) != len(self.oscillators):
                raise ValueError("'thetas' and 'oscillators' differ in length")
            th = np.asarray(self.thetas, dtype=float)
            if np.any(th <= 0):
                raise ValueError("every theta must be positive")
            if not self.rescale_thetas and abs(th.mean() - 1.0) > THETA_MEAN_TOL:
                raise ValueError(
                    f"thetas must average to 1 (mean is {th.mean():.15g}); "
                    "set rescale_thetas to rescale them"
                )
        elif self.thetas is not None:
            raise ValueError("'thetas' only applies to explicit oscillators")
        return self


class OutputConfig(_Strict):
    directory: str = "qsync_out"
    sample_every: int = Field(10, ge=1)
    formats: list[Literal["csv", "json", "png"]] = Field(default_factory=lambda: ["csv", "json", "png"])


class RunConfig(_Strict):
    grid: GridConfig = Field(default_factory=GridConfig)
    model: ModelConfig
    initial: InitialConfig
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _sizes(self):
        n = self.model.n_oscillators
        if self.initial.oscillators is not None and len(self.initial.oscillators) != n:
            raise ValueError(
                f"model.n_oscillators is {n} but {len(self.initial.oscillators)} oscillators given"
            )
        if self.model.kind == "StandardSL" and self.initial.thetas is not None:
            if any(t != 1.0 for t in self.initial.thetas):
                raise ValueError("the standard model needs every theta equal to 1")
        return self


def _format_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        if err["type"] == "extra_forbidden":
            parts.append(f"unknown key '{loc}'")
        else:
            parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def emit_config(cfg: RunConfig) -> str:
    return cfg.model_dump_json(indent=2)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


# ---------------------------------------------------------------- conversion


def build_kernel(k) -> cs.KernelSpec:
    if k.kind == "Constant":
        return cs.ConstantKernel(k.c)
    if k.kind == "Absolute":
        return cs.AbsoluteKernel(k.c_floor, k.amp, k.gamma)
    if k.kind == "HeavyTail":
        return cs.HeavyTailKernel(k.gamma)
    return cs.TabulatedKernel(np.array(k.radii), np.array(k.values))


def build_potential(p) -> gr.PotentialSpec:
    if p.kind == "Zero":
        return gr.ZeroPotential()
    if p.kind == "Harmonic":
        return gr.HarmonicPotential(p.omega)
    return gr.TabulatedPotential(np.array(p.samples))


def build_params(cfg: RunConfig) -> ModelParams:
    m = cfg.model
    try:
        return ModelParams(
            kind=ModelKind(m.kind),
            k=m.k,
            mu=m.mu,
            omegas=None if m.omegas is None else np.array(m.omegas),
            kernel=build_kernel(m.kernel),
            potential=build_potential(m.potential),
            dt=m.dt,
            t_final=m.t_final,
        )
    except DomainError as exc:
        raise ConfigError(f"model: {exc}") from None


def build_state(cfg: RunConfig) -> EnsembleState:
    """Initial ensemble described by the config (scenario or explicit packets)."""
    grid = cfg.grid.build()
    init = cfg.initial
    if init.scenario is not None:
        from .experiments import build_initial
        from .errors import UnknownScenarioError

        try:
            state, _ = build_initial(init.scenario, init.seed, grid)
        except UnknownScenarioError as exc:
            raise ConfigError(f"initial.scenario: {exc}") from None
        if state.n_osc != cfg.model.n_oscillators:
            raise ConfigError(
                f"scenario {init.scenario!r} has {state.n_osc} oscillators, "
                f"model.n_oscillators is {cfg.model.n_oscillators}"
            )
        return state
    theta = np.asarray(init.thetas, dtype=float)
    if init.rescale_thetas:
        theta = theta / theta.mean()
    fields = []
    for j, o in enumerate(init.oscillators):
        try:
            fields.append(gr.gaussian(grid, o.center, o.momentum, o.width, o.amplitude, o.phase))
        except ValueError as exc:
            raise ConfigError(f"initial.oscillators.{j}: {exc}") from None
    return EnsembleState.from_fields(fields, theta)


# ---------------------------------------------------------------- reduced runs


class ReducedOutputConfig(_Strict):
    directory: str = "qsync_reduced"
    formats: list[Literal["csv", "json", "png"]] = Field(default_factory=lambda: ["csv", "json", "png"])


class ReducedConfig(_Strict):
    """Parameters of a run of the two-oscillator correlation system."""

    omega: float = Field(1.0, ge=0)
    k: float = Field(1.0, gt=0)
    mu: float = Field(1.0, ge=0)
    c: float = Field(1.0, gt=0)
    z0: tuple[float, float] = (0.0, 0.0)
    masses: tuple[float, float] = (1.0, 1.0)
    thetas: tuple[float, float] = (1.0, 1.0)
    dt: float = Field(1e-4, gt=0)
    t_final: float = Field(50.0, gt=0)
    sample_every: int = Field(10, ge=1)
    output: ReducedOutputConfig = Field(default_factory=ReducedOutputConfig)

    @model_validator(mode="after")
    def _ranges(self):
        if self.z0[0] ** 2 + self.z0[1] ** 2 > 1.0 + 1e-12:
            raise ValueError("z0 must lie in the closed unit disk")
        if min(self.masses) <= 0 or min(self.thetas) <= 0:
            raise ValueError("masses and thetas must be positive")
        return self


def parse_reduced_config(text: str) -> ReducedConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    try:
        return ReducedConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def load_reduced_config(path) -> ReducedConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read parameters: {exc}") from None
    return parse_reduced_config(text)
