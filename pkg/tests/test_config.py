"""Config parsing: schema, defaults, and path-qualified error messages."""

import copy

import pytest
import yaml

from shockfocus.config import RestartRotation, load_config, parse_config
from shockfocus.diagnostics import AnalyticPulse, PressureBall
from shockfocus.errors import ConfigError
from shockfocus.geometry import Cylinder, Sphere
from shockfocus.statecore import KIND_FLUID, KIND_SOLID

BASE = {
    "mode": "axisym",
    "grid": {
        "cells": [160, 1, 240],
        "origin": [0.0, 0.0, -0.08],
        "spacing": 5.0e-4,
    },
    "boundaries": {"z": ["outflow", "outflow"]},
    "time": {"end": 4.0e-5, "cfl": 0.85},
    "solver": {"limiter": "minmod", "transverse": "simple"},
    "materials": {
        "water": {"kind": "fluid", "rho0": 1000.0, "B": 3.0e8, "n": 7.15},
        "bone": {"kind": "solid", "rho0": 2000.0, "lam": 6.0e9, "mu": 3.0e9},
    },
    "scenario": {
        "background": "water",
        "bodies": [
            {
                "material": "bone",
                "shape": {"kind": "cylinder", "center": [0.0, 0.0, 0.01],
                          "radius": 0.008, "length": 0.02, "axis": 2},
            }
        ],
    },
    "initial": {
        "kind": "analytic_pulse",
        "center": [0.0, 0.0, 0.0],
        "front_radius": 0.05,
        "peak": 1.0e6,
        "decay_time": 1.1e-6,
    },
    "amr": {"max_levels": 2, "flag": {"pressure_jump": 2.0e5, "buffer": 3}},
    "gauges": [{"name": "focus", "position": [0.0, 0.0, 0.0]}],
    "output": {"directory": "run_out", "field_interval": 50,
               "checkpoint_interval": 100},
}


def _parse(mutate=None):
    raw = copy.deepcopy(BASE)
    if mutate is not None:
        mutate(raw)
    return parse_config(yaml.safe_dump(raw))


def _fails_with(fragment, mutate):
    with pytest.raises(ConfigError) as err:
        _parse(mutate)
    assert fragment in str(err.value), str(err.value)


def test_full_config_parses():
    cfg = _parse()
    assert cfg.mode == "axisym"
    assert cfg.active == (0, 2)
    assert cfg.axisym
    assert cfg.cells == (160, 1, 240)
    # inactive axis collapses to one cell centered on zero
    assert cfg.origin == (0.0, -0.5 * 5.0e-4, -0.08)
    assert cfg.spacing == 5.0e-4
    assert cfg.bc == {0: ("reflect", "outflow"), 2: ("outflow", "outflow")}
    assert cfg.end_time == 4.0e-5 and cfg.cfl == 0.85
    assert cfg.limiter == "minmod" and cfg.transverse == "simple"
    assert cfg.materials["water"].kind == KIND_FLUID
    assert cfg.materials["bone"].kind == KIND_SOLID
    assert cfg.background == "water"
    body = cfg.bodies[0]
    assert body.material == "bone"
    assert isinstance(body.shape, Cylinder)
    assert body.shape.center == (0.0, 0.0, 0.01)
    assert isinstance(cfg.initial, AnalyticPulse)
    assert cfg.initial.front_radius == 0.05
    assert cfg.amr.max_levels == 2
    assert cfg.amr.rule.pressure_jump == 2.0e5
    assert cfg.amr.rule.buffer == 3
    assert cfg.gauges[0].name == "focus"
    assert cfg.output.directory == "run_out"
    assert cfg.output.field_interval == 50
    assert cfg.text == yaml.safe_dump(BASE)


def test_minimal_config_defaults():
    text = """
mode: 1d
grid:
  cells: [64, 1, 1]
  origin: [0.0, 0.0, 0.0]
  spacing: 1.0e-3
time:
  end: 1.0e-5
materials:
  water: {kind: fluid, rho0: 1000.0}
scenario:
  background: water
"""
    cfg = parse_config(text)
    assert cfg.active == (0,)
    assert not cfg.axisym
    assert cfg.cells == (64, 1, 1)
    assert cfg.origin == (0.0, -5.0e-4, -5.0e-4)
    assert cfg.bc == {0: ("outflow", "outflow")}
    assert cfg.cfl == 0.9
    assert cfg.limiter == "mc" and cfg.transverse == "full"
    assert cfg.materials["water"].eos.B == 3.0e8      # Tait defaults
    assert cfg.materials["water"].eos.n == 7.15
    assert cfg.initial is None
    assert cfg.amr.max_levels == 1 and cfg.amr.rule is None
    assert cfg.gauges == [] and cfg.bodies == []
    assert cfg.output.directory == "out"


def test_axisym_radial_default_is_reflect_outflow():
    cfg = _parse(lambda raw: raw.pop("boundaries"))
    assert cfg.bc[0] == ("reflect", "outflow")


def test_pressure_ball_and_restart_kinds():
    def ball(raw):
        raw["initial"] = {"kind": "pressure_ball", "center": [0, 0, 0],
                          "radius": 0.004, "amplitude": 5.0e7}
    cfg = _parse(ball)
    assert isinstance(cfg.initial, PressureBall)
    assert cfg.initial.amplitude == 5.0e7

    def restart(raw):
        raw["mode"] = "3d"
        raw["grid"]["cells"] = [16, 16, 16]
        raw["boundaries"] = {}
        raw["initial"] = {"kind": "restart_2d_rotation", "checkpoint": "axi.npz"}
    cfg = _parse(restart)
    assert cfg.initial == RestartRotation(checkpoint="axi.npz")


def test_solid_material_from_cij_list():
    def use_cij(raw):
        raw["materials"]["bone"] = {
            "kind": "solid", "rho0": 2000.0,
            "cij": [12e9, 12e9, 12e9, 6e9, 6e9, 6e9, 6e9, 6e9, 6e9],
        }
    cfg = _parse(use_cij)
    assert cfg.materials["bone"].stiffness.as_tuple()[0] == 12e9


def test_load_config_reads_files(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(BASE))
    cfg = load_config(path)
    assert cfg.cells == (160, 1, 240)
    assert cfg.text == path.read_text()


def test_error_messages_carry_section_and_field():
    _fails_with("grid: required section",
                lambda raw: raw.pop("grid"))
    _fails_with("grids: unknown section",
                lambda raw: raw.update(grids={}))
    _fails_with("grid.cells: expected a list of three",
                lambda raw: raw["grid"].update(cells=[4, 4]))
    _fails_with("grid.spacing: must be positive",
                lambda raw: raw["grid"].update(spacing=-1.0))
    _fails_with("grid.cells: active axes need at least 4",
                lambda raw: raw["grid"].update(cells=[160, 1, 2]))
    _fails_with("time.end: required field is missing",
                lambda raw: raw["time"].pop("end"))
    _fails_with("time.cfl: must lie in (0, 1]",
                lambda raw: raw["time"].update(cfl=1.5))
    _fails_with("solver.limiter: unknown limiter",
                lambda raw: raw["solver"].update(limiter="vanleer"))
    _fails_with("solver.transverse: expected none, simple or full",
                lambda raw: raw["solver"].update(transverse="both"))


def test_boundary_validation():
    _fails_with("boundaries.y: axis is inactive",
                lambda raw: raw["boundaries"].update(y=["outflow", "outflow"]))
    _fails_with("boundaries.z: expected [low, high]",
                lambda raw: raw["boundaries"].update(z=["outflow"]))
    _fails_with("boundaries.z: expected kinds",
                lambda raw: raw["boundaries"].update(z=["outflow", "open"]))
    _fails_with("boundaries.z: periodic must pair with periodic",
                lambda raw: raw["boundaries"].update(z=["periodic", "outflow"]))


def test_material_validation():
    _fails_with("materials.water.lam: unknown field",
                lambda raw: raw["materials"]["water"].update(lam=1.0))
    _fails_with("materials.water.rho0: must be positive",
                lambda raw: raw["materials"]["water"].update(rho0=0.0))
    _fails_with("materials.water.n: must exceed 1",
                lambda raw: raw["materials"]["water"].update(n=0.5))
    _fails_with("materials.water.series: expected one of",
                lambda raw: raw["materials"]["water"].update(series="cubic"))
    _fails_with("materials.bone.lam: solid needs lam and mu",
                lambda raw: raw["materials"]["bone"].pop("mu"))
    _fails_with("materials.bone.cij: expected nine",
                lambda raw: raw["materials"]["bone"].update(cij=[1.0, 2.0]) or
                raw["materials"]["bone"].pop("lam") or
                raw["materials"]["bone"].pop("mu"))
    _fails_with("materials.gel+: invalid material name",
                lambda raw: raw["materials"].update({"gel+": {"kind": "fluid",
                                                              "rho0": 1.0}}))
    _fails_with("materials.water.kind: expected 'fluid' or 'solid'",
                lambda raw: raw["materials"]["water"].update(kind="gas"))


def test_scenario_validation():
    _fails_with("scenario.background: references undefined material",
                lambda raw: raw["scenario"].update(background="oil"))
    _fails_with("scenario.bodies[0].material: references undefined",
                lambda raw: raw["scenario"]["bodies"][0].update(material="oil"))
    _fails_with("scenario.bodies[0].shape: required field is missing",
                lambda raw: raw["scenario"]["bodies"][0].pop("shape"))
    _fails_with("scenario.bodies[0].shape.kind: expected one of",
                lambda raw: raw["scenario"]["bodies"][0]["shape"].update(kind="cube"))
    _fails_with("scenario.bodies[0].shape.half: unknown field",
                lambda raw: raw["scenario"]["bodies"][0]["shape"].update(half=1.0))
    _fails_with("scenario.bodies[0].rotation_axis: must be 0, 1 or 2",
                lambda raw: raw["scenario"]["bodies"][0].update(rotation_axis=3))
    # shape validation failures surface as ConfigError at the same path
    _fails_with("scenario.bodies[0].shape: ",
                lambda raw: raw["scenario"]["bodies"][0]["shape"].update(radius=-1.0))


def test_initial_condition_validation():
    _fails_with("initial.kind: unknown initial condition",
                lambda raw: raw["initial"].update(kind="step"))
    _fails_with("initial.direction: expected 'in' or 'out'",
                lambda raw: raw["initial"].update(direction="sideways"))
    _fails_with("initial.kind: restart_2d_rotation requires mode 3d",
                lambda raw: raw.update(initial={"kind": "restart_2d_rotation",
                                                "checkpoint": "axi.npz"}))
    _fails_with("initial.front_radius: must be positive",
                lambda raw: raw["initial"].update(front_radius=0.0))


def test_amr_validation():
    _fails_with("amr.flag: required when max_levels > 1",
                lambda raw: raw["amr"].pop("flag"))
    _fails_with("amr.max_levels: must be >= 1",
                lambda raw: raw["amr"].update(max_levels=0))
    _fails_with("amr.ratio: must be >= 2",
                lambda raw: raw["amr"].update(ratio=1))
    _fails_with("amr.flag.slope: unknown field",
                lambda raw: raw["amr"]["flag"].update(slope=1.0))

    def periodic_refined(raw):
        raw["boundaries"]["z"] = ["periodic", "periodic"]
    _fails_with("amr.max_levels: refinement does not support periodic",
                periodic_refined)


def test_gauge_validation():
    _fails_with("gauges[0].name: must match",
                lambda raw: raw["gauges"][0].update(name="bad name"))
    _fails_with("gauges[1].name: duplicate gauge name",
                lambda raw: raw["gauges"].append({"name": "focus",
                                                  "position": [0, 0, 0.01]}))
    _fails_with("gauges[0].position: required field is missing",
                lambda raw: raw["gauges"][0].pop("position"))


def test_output_validation():
    _fails_with("output: intervals must be >= 0",
                lambda raw: raw["output"].update(field_interval=-1))


def test_malformed_yaml_and_non_mapping_rejected():
    with pytest.raises(ConfigError):
        parse_config("mode: [unclosed")
    with pytest.raises(ConfigError):
        parse_config("- just\n- a\n- list\n")
