import json

import numpy as np
import pytest

from qsync.config import (
    RunConfig,
    build_params,
    build_state,
    emit_config,
    load_config,
    parse_config,
    parse_reduced_config,
)
from qsync.cucker_smale import AbsoluteKernel, ConstantKernel, HeavyTailKernel, TabulatedKernel
from qsync.errors import ConfigError
from qsync.grid import HarmonicPotential, ZeroPotential, center_of_mass, norm
from qsync.model import ModelKind

MINIMAL = {"model": {"n_oscillators": 2}, "initial": {"scenario": "two_identical"}}


def _cfg(**over):
    d = json.loads(json.dumps(MINIMAL))
    for path, value in over.items():
        node = d
        keys = path.split("__")
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return json.dumps(d)


def test_minimal_config_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.grid.points == 256
    assert cfg.grid.half_width == 20.0
    assert cfg.grid.dim == 1
    p = build_params(cfg)
    assert p.dt == 1e-3
    assert p.k == 1.0 and p.mu == 1.0
    assert p.kind is ModelKind.MODEL1
    assert isinstance(p.kernel, HeavyTailKernel) and p.kernel.gamma == 1.0
    assert isinstance(p.potential, HarmonicPotential)
    assert cfg.output.sample_every == 10


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="unknown key 'model.dampening'"):
        parse_config(_cfg(model__dampening=0.1))


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        _cfg(grid__points=100),
        _cfg(grid__points=8),
        _cfg(model__k=0.0),
        _cfg(model__mu=-1.0),
        _cfg(model__dt=1.0, model__t_final=0.5),
        _cfg(model__omegas=[0.0]),
        _cfg(model__kind="Model3"),
        _cfg(model__kernel={"kind": "HeavyTail", "gamma": 2.0}),
        _cfg(model__kernel={"kind": "Nope"}),
        json.dumps({"model": {"n_oscillators": 2}, "initial": {}}),
        json.dumps({"model": {"n_oscillators": 2}}),
    ],
)
def test_invalid_configs_raise(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def _explicit(thetas, rescale=False, kind="Model1"):
    return json.dumps(
        {
            "grid": {"points": 128, "half_width": 16},
            "model": {"kind": kind, "n_oscillators": 2, "omegas": [0.5, -0.5]},
            "initial": {
                "oscillators": [
                    {"center": -1.0, "momentum": 0.2, "amplitude": 0.9},
                    {"center": 1.5, "width": 0.8, "phase": 1.0},
                ],
                "thetas": thetas,
                "rescale_thetas": rescale,
            },
        }
    )


def test_both_sources_rejected():
    d = json.loads(_explicit([1.0, 1.0]))
    d["initial"]["scenario"] = "two_identical"
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(json.dumps(d))


def test_theta_mean_enforced_and_rescaled():
    with pytest.raises(ConfigError, match="average to 1"):
        parse_config(_explicit([1.2, 1.0]))
    s = build_state(parse_config(_explicit([1.2, 1.0], rescale=True)))
    np.testing.assert_allclose(s.theta, [1.2 / 1.1, 1.0 / 1.1], rtol=1e-15)
    with pytest.raises(ConfigError):
        parse_config(_explicit([1.5, 0.5], kind="StandardSL"))
    with pytest.raises(ConfigError):
        parse_config(_explicit([2.0, 0.0]))


def test_explicit_packets_built():
    cfg = parse_config(_explicit([1.1, 0.9]))
    s = build_state(cfg)
    assert s.grid.points_per_dim == 128
    np.testing.assert_array_equal(s.theta, [1.1, 0.9])
    assert norm(s.field(0)) == pytest.approx(0.9, rel=1e-12)
    assert center_of_mass(s.field(1))[0] == pytest.approx(1.5, abs=1e-8)
    np.testing.assert_array_equal(build_params(cfg).omegas, [0.5, -0.5])


def test_scenario_state_and_size_check():
    s = build_state(parse_config(_cfg(grid__points=128)))
    assert s.n_osc == 2
    with pytest.raises(ConfigError, match="oscillators"):
        build_state(parse_config(_cfg(model__n_oscillators=3)))
    with pytest.raises(ConfigError, match="initial.scenario"):
        build_state(parse_config(_cfg(initial__scenario="nope")))


@pytest.mark.parametrize(
    "kernel,cls",
    [
        ({"kind": "Constant", "c": 2.0}, ConstantKernel),
        ({"kind": "Absolute", "c_floor": 0.5, "amp": 1.0, "gamma": 1.0}, AbsoluteKernel),
        ({"kind": "Tabulated", "radii": [0, 1, 2], "values": [1, 0.5, 0.4]}, TabulatedKernel),
    ],
)
def test_kernel_variants(kernel, cls):
    assert isinstance(build_params(parse_config(_cfg(model__kernel=kernel))).kernel, cls)


def test_zero_potential():
    p = build_params(parse_config(_cfg(model__potential={"kind": "Zero"})))
    assert isinstance(p.potential, ZeroPotential)


def test_bad_tabulated_kernel_is_config_error():
    text = _cfg(model__kernel={"kind": "Tabulated", "radii": [0, 1], "values": [1, -1]})
    with pytest.raises(ConfigError):
        build_params(parse_config(text))


def test_emit_parse_roundtrip():
    cfg = parse_config(_explicit([1.1, 0.9]))
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert emit_config(again) == emit_config(cfg)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json")
    (tmp_path / "c.json").write_text(json.dumps(MINIMAL))
    assert isinstance(load_config(tmp_path / "c.json"), RunConfig)


def test_reduced_config():
    cfg = parse_reduced_config("{}")
    assert cfg.omega == 1.0 and cfg.dt == 1e-4
    with pytest.raises(ConfigError):
        parse_reduced_config(json.dumps({"z0": [1.0, 0.5]}))
    with pytest.raises(ConfigError, match="unknown key 'bogus'"):
        parse_reduced_config(json.dumps({"bogus": 1}))
