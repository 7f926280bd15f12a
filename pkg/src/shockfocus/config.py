"""Run configuration: YAML text with named sections, validated into a
RunConfig with path.field error messages.

Schema (see docs/config.md for the full reference):

    mode: axisym | 3d | 2d | 1d
    grid:       {cells, origin, spacing}
    boundaries: {x: [lo, hi], y: [...], z: [...]}
    time:       {end, cfl}
    solver:     {limiter, transverse}
    materials:  {name: {kind: fluid|solid, ...}, ...}
    scenario:   {background, bodies: [{material, shape: {kind, ...}}, ...]}
    initial:    {kind: none|pressure_ball|analytic_pulse|restart_2d_rotation, ...}
    amr:        {max_levels, ratio, flag: {...}, regrid_interval, min_box}
    gauges:     [{name, position}, ...]
    output:     {directory, field_interval, checkpoint_interval}
"""

from __future__ import annotations

import inspect
import re
from dataclasses import dataclass, field

import yaml

from . import eos as eos_mod
from .amr import FlagRule
from .diagnostics import AnalyticPulse, GaugeSpec, PressureBall
from .errors import ConfigError
from .geometry import SHAPE_KINDS, ScenarioSpec, import_voxel_mask
from .statecore import MaterialSample, fluid_material, solid_material

MODES = {
    "3d": (0, 1, 2),
    "2d": (0, 1),
    "axisym": (0, 2),
    "1d": (0,),
}

SERIES_NAMES = {
    "full": eos_mod.SERIES_FULL,
    "linear": eos_mod.SERIES_LINEAR,
    "quadratic": eos_mod.SERIES_QUADRATIC,
}

BC_KINDS = ("outflow", "reflect", "periodic")

_NAME_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


@dataclass(frozen=True)
class RestartRotation:
    """Initial condition: revolve an axisymmetric checkpoint into 3D."""

    checkpoint: str


@dataclass(frozen=True)
class BodySpec:
    material: str
    shape: object
    rotation_deg: float = 0.0
    rotation_axis: int = 1
    pivot: tuple = (0.0, 0.0, 0.0)


@dataclass
class AmrConfig:
    max_levels: int = 1
    ratio: int = 2
    rule: FlagRule | None = None
    regrid_interval: int = 4
    min_box: int = 4
    fill_ratio: float = 0.7
    reflux: bool = True


@dataclass
class OutputConfig:
    directory: str = "out"
    field_interval: int = 0
    checkpoint_interval: int = 0


@dataclass
class RunConfig:
    mode: str
    active: tuple
    axisym: bool
    cells: tuple
    origin: tuple
    spacing: float
    bc: dict
    end_time: float
    cfl: float
    limiter: str
    transverse: str
    materials: dict
    background: str
    bodies: list
    initial: object | None
    amr: AmrConfig
    gauges: list
    output: OutputConfig
    text: str = field(repr=False, default="")


_MISSING = object()


class _Ctx:
    """Tracks the section path for error messages."""

    def __init__(self, path):
        self.path = path

    def fail(self, fieldname, msg):
        raise ConfigError("%s.%s: %s" % (self.path, fieldname, msg))

    def get(self, mapping, fieldname, default=_MISSING):
        if fieldname in mapping:
            return mapping[fieldname]
        if default is _MISSING:
            self.fail(fieldname, "required field is missing")
        return default


def _section(raw, name, required=False):
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError("%s: required section is missing" % name)
        return {}
    if not isinstance(sec, dict):
        raise ConfigError("%s: expected a mapping" % name)
    return dict(sec)


def _reject_unknown(path, mapping, known):
    for key in mapping:
        if key not in known:
            raise ConfigError("%s.%s: unknown field" % (path, key))


def _triple(ctx, fieldname, value, kind=float):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        ctx.fail(fieldname, "expected a list of three values")
    try:
        return tuple(kind(v) for v in value)
    except (TypeError, ValueError):
        ctx.fail(fieldname, "entries must be numbers")


def _positive(ctx, fieldname, value):
    v = float(value)
    if v <= 0.0:
        ctx.fail(fieldname, "must be positive")
    return v


def parse_material(name, entry):
    ctx = _Ctx("materials.%s" % name)
    if not isinstance(entry, dict):
        ctx.fail("", "expected a mapping")
    kind = ctx.get(entry, "kind")
    rho0 = _positive(ctx, "rho0", ctx.get(entry, "rho0"))
    if kind == "fluid":
        _reject_unknown("materials.%s" % name, entry,
                        ("kind", "rho0", "B", "n", "series"))
        B = _positive(ctx, "B", entry.get("B", 3.0e8))
        n = float(entry.get("n", 7.15))
        if n <= 1.0:
            ctx.fail("n", "must exceed 1")
        series = entry.get("series", "full")
        if series not in SERIES_NAMES:
            ctx.fail("series", "expected one of %s" % (sorted(SERIES_NAMES),))
        return fluid_material(rho0, eos_mod.TaitParams(B=B, n=n),
                              series=SERIES_NAMES[series])
    if kind == "solid":
        _reject_unknown("materials.%s" % name, entry,
                        ("kind", "rho0", "lam", "mu", "cij"))
        if "cij" in entry:
            cij = entry["cij"]
            if not isinstance(cij, (list, tuple)) or len(cij) != 9:
                ctx.fail("cij", "expected nine stiffness coefficients")
            from .elasticity import Stiffness
            return solid_material(rho0, Stiffness(*(float(c) for c in cij)))
        if "lam" not in entry or "mu" not in entry:
            ctx.fail("lam", "solid needs lam and mu (or a cij list)")
        return solid_material(rho0, lam=float(entry["lam"]), mu=float(entry["mu"]))
    ctx.fail("kind", "expected 'fluid' or 'solid'")


def parse_shape(path, entry):
    if not isinstance(entry, dict):
        raise ConfigError("%s: expected a mapping" % path)
    entry = dict(entry)
    kind = entry.pop("kind", None)
    if kind == "voxel_mask":
        if set(entry) != {"path"}:
            raise ConfigError("%s: voxel_mask takes exactly one field, path" % path)
        return import_voxel_mask(entry["path"])
    cls = SHAPE_KINDS.get(kind)
    if cls is None:
        raise ConfigError(
            "%s.kind: expected one of %s"
            % (path, sorted(SHAPE_KINDS) + ["voxel_mask"])
        )
    sig = inspect.signature(cls)
    kwargs = {}
    for key, value in entry.items():
        if key not in sig.parameters:
            raise ConfigError("%s.%s: unknown field for %s" % (path, key, kind))
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except Exception as exc:
        raise ConfigError("%s: %s" % (path, exc)) from exc


def parse_config(text):
    """Validate config text and build a RunConfig.

    Raises ConfigError with a section.field path on any problem.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config is not valid YAML: %s" % exc) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of sections")
    known_sections = (
        "mode", "grid", "boundaries", "time", "solver", "materials",
        "scenario", "initial", "amr", "gauges", "output",
    )
    for key in raw:
        if key not in known_sections:
            raise ConfigError("%s: unknown section" % key)

    mode = raw.get("mode", "axisym")
    if mode not in MODES:
        raise ConfigError("mode: expected one of %s" % (sorted(MODES),))
    active = MODES[mode]
    axisym = mode == "axisym"

    grid = _section(raw, "grid", required=True)
    _reject_unknown("grid", grid, ("cells", "origin", "spacing"))
    gctx = _Ctx("grid")
    cells_in = _triple(gctx, "cells", gctx.get(grid, "cells"), int)
    origin_in = _triple(gctx, "origin", gctx.get(grid, "origin"))
    spacing = _positive(gctx, "spacing", gctx.get(grid, "spacing"))
    cells = tuple(cells_in[a] if a in active else 1 for a in range(3))
    for a in active:
        if cells[a] < 4:
            gctx.fail("cells", "active axes need at least 4 cells")
    # Inactive axes hold one cell centered on coordinate zero.
    origin = tuple(
        origin_in[a] if a in active else -0.5 * spacing for a in range(3)
    )

    bsec = _section(raw, "boundaries")
    _reject_unknown("boundaries", bsec, ("x", "y", "z"))
    bc = {}
    for a, axname in enumerate("xyz"):
        if a not in active:
            if axname in bsec:
                raise ConfigError(
                    "boundaries.%s: axis is inactive in mode %s" % (axname, mode)
                )
            continue
        default = ("reflect", "outflow") if (axisym and a == 0) else ("outflow", "outflow")
        pair = bsec.get(axname, list(default))
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError("boundaries.%s: expected [low, high]" % axname)
        lo, hi = pair
        for side in (lo, hi):
            if side not in BC_KINDS:
                raise ConfigError(
                    "boundaries.%s: expected kinds from %s" % (axname, BC_KINDS)
                )
        if ("periodic" in pair) and lo != hi:
            raise ConfigError("boundaries.%s: periodic must pair with periodic" % axname)
        bc[a] = (lo, hi)

    tsec = _section(raw, "time", required=True)
    _reject_unknown("time", tsec, ("end", "cfl"))
    tctx = _Ctx("time")
    end_time = float(tctx.get(tsec, "end"))
    if end_time < 0.0:
        tctx.fail("end", "must be >= 0")
    cfl = float(tsec.get("cfl", 0.9))
    if not 0.0 < cfl <= 1.0:
        tctx.fail("cfl", "must lie in (0, 1]")

    ssec = _section(raw, "solver")
    _reject_unknown("solver", ssec, ("limiter", "transverse"))
    limiter = ssec.get("limiter", "mc")
    if limiter not in ("mc", "minmod", "superbee", "none"):
        raise ConfigError("solver.limiter: unknown limiter %r" % limiter)
    transverse = ssec.get("transverse", "full")
    if transverse not in ("none", "simple", "full"):
        raise ConfigError("solver.transverse: expected none, simple or full")

    msec = _section(raw, "materials", required=True)
    materials = {}
    for name, entry in msec.items():
        if not _NAME_RE.match(str(name)):
            raise ConfigError("materials.%s: invalid material name" % name)
        materials[name] = parse_material(name, entry)

    csec = _section(raw, "scenario", required=True)
    _reject_unknown("scenario", csec, ("background", "bodies"))
    cctx = _Ctx("scenario")
    background = cctx.get(csec, "background")
    if background not in materials:
        cctx.fail("background", "references undefined material %r" % background)
    bodies = []
    for i, body in enumerate(csec.get("bodies") or []):
        path = "scenario.bodies[%d]" % i
        if not isinstance(body, dict):
            raise ConfigError("%s: expected a mapping" % path)
        _reject_unknown(path, body,
                        ("material", "shape", "rotation_deg", "rotation_axis", "pivot"))
        mname = body.get("material")
        if mname not in materials:
            raise ConfigError("%s.material: references undefined material %r"
                              % (path, mname))
        if "shape" not in body:
            raise ConfigError("%s.shape: required field is missing" % path)
        shape = parse_shape(path + ".shape", body["shape"])
        rot_axis = int(body.get("rotation_axis", 1))
        if rot_axis not in (0, 1, 2):
            raise ConfigError("%s.rotation_axis: must be 0, 1 or 2" % path)
        pivot = body.get("pivot", (0.0, 0.0, 0.0))
        if isinstance(pivot, list):
            pivot = tuple(float(v) for v in pivot)
        bodies.append(BodySpec(
            material=mname, shape=shape,
            rotation_deg=float(body.get("rotation_deg", 0.0)),
            rotation_axis=rot_axis, pivot=pivot,
        ))

    isec = _section(raw, "initial")
    ikind = isec.get("kind", "none")
    ictx = _Ctx("initial")
    if ikind == "none":
        _reject_unknown("initial", isec, ("kind",))
        initial = None
    elif ikind == "pressure_ball":
        _reject_unknown("initial", isec, ("kind", "center", "radius", "amplitude"))
        initial = PressureBall(
            center=_triple(ictx, "center", ictx.get(isec, "center")),
            radius=_positive(ictx, "radius", ictx.get(isec, "radius")),
            amplitude=float(ictx.get(isec, "amplitude")),
        )
    elif ikind == "analytic_pulse":
        _reject_unknown("initial", isec,
                        ("kind", "center", "front_radius", "peak", "decay_time",
                         "direction", "support"))
        direction = isec.get("direction", "in")
        if direction not in ("in", "out"):
            ictx.fail("direction", "expected 'in' or 'out'")
        initial = AnalyticPulse(
            center=_triple(ictx, "center", ictx.get(isec, "center")),
            front_radius=_positive(ictx, "front_radius",
                                   ictx.get(isec, "front_radius")),
            peak=float(ictx.get(isec, "peak")),
            decay_time=_positive(ictx, "decay_time", ictx.get(isec, "decay_time")),
            direction=direction,
            support=float(isec.get("support", 6.0)),
        )
    elif ikind == "restart_2d_rotation":
        _reject_unknown("initial", isec, ("kind", "checkpoint"))
        if mode != "3d":
            ictx.fail("kind", "restart_2d_rotation requires mode 3d")
        initial = RestartRotation(checkpoint=str(ictx.get(isec, "checkpoint")))
    else:
        ictx.fail("kind", "unknown initial condition kind %r" % ikind)

    asec = _section(raw, "amr")
    _reject_unknown("amr", asec,
                    ("max_levels", "ratio", "flag", "regrid_interval",
                     "min_box", "fill_ratio", "reflux"))
    actx = _Ctx("amr")
    amr = AmrConfig()
    amr.max_levels = int(asec.get("max_levels", 1))
    if amr.max_levels < 1:
        actx.fail("max_levels", "must be >= 1")
    amr.ratio = int(asec.get("ratio", 2))
    if amr.ratio < 2:
        actx.fail("ratio", "must be >= 2")
    amr.regrid_interval = int(asec.get("regrid_interval", 4))
    if amr.regrid_interval < 1:
        actx.fail("regrid_interval", "must be >= 1")
    amr.min_box = int(asec.get("min_box", 4))
    amr.fill_ratio = float(asec.get("fill_ratio", 0.7))
    amr.reflux = bool(asec.get("reflux", True))
    fsec = asec.get("flag")
    if fsec is not None:
        if not isinstance(fsec, dict):
            actx.fail("flag", "expected a mapping")
        _reject_unknown("amr.flag", fsec, ("pressure_jump", "density_jump", "buffer"))
        amr.rule = FlagRule(
            pressure_jump=float(fsec.get("pressure_jump", float("inf"))),
            density_jump=float(fsec.get("density_jump", float("inf"))),
            buffer=int(fsec.get("buffer", 4)),
        )
    elif amr.max_levels > 1:
        actx.fail("flag", "required when max_levels > 1")
    if amr.max_levels > 1 and any(k == ("periodic", "periodic") for k in bc.values()):
        actx.fail("max_levels", "refinement does not support periodic boundaries")

    gauges = []
    seen = set()
    for i, g in enumerate(raw.get("gauges") or []):
        path = "gauges[%d]" % i
        if not isinstance(g, dict):
            raise ConfigError("%s: expected a mapping" % path)
        _reject_unknown(path, g, ("name", "position"))
        name = str(g.get("name", ""))
        if not _NAME_RE.match(name):
            raise ConfigError("%s.name: must match [A-Za-z0-9_-]+" % path)
        if name in seen:
            raise ConfigError("%s.name: duplicate gauge name %r" % (path, name))
        seen.add(name)
        gctx2 = _Ctx(path)
        pos = _triple(gctx2, "position", gctx2.get(g, "position"))
        gauges.append(GaugeSpec(name=name, position=pos))

    osec = _section(raw, "output")
    _reject_unknown("output", osec,
                    ("directory", "field_interval", "checkpoint_interval"))
    out = OutputConfig()
    out.directory = str(osec.get("directory", "out"))
    out.field_interval = int(osec.get("field_interval", 0))
    out.checkpoint_interval = int(osec.get("checkpoint_interval", 0))
    if out.field_interval < 0 or out.checkpoint_interval < 0:
        raise ConfigError("output: intervals must be >= 0")

    return RunConfig(
        mode=mode, active=active, axisym=axisym, cells=cells, origin=origin,
        spacing=spacing, bc=bc, end_time=end_time, cfl=cfl, limiter=limiter,
        transverse=transverse, materials=materials, background=background,
        bodies=bodies, initial=initial, amr=amr, gauges=gauges, output=out,
        text=text,
    )


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    return parse_config(text)
