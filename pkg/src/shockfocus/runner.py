"""Scenario orchestration: build the hierarchy from a RunConfig, advance it
to the end time, and emit gauges, dumps, checkpoints, and a run log."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import simio
from .amr import AmrHierarchy
from .config import RestartRotation, RunConfig, parse_config
from .diagnostics import (GaugeRecorder, MaxStressMaps,
                          apply_initial_condition)
from .geometry import ScenarioSpec, build_material_field
from .statecore import PatchGrid


@dataclass
class RunResult:
    hierarchy: AmrHierarchy
    gauges: GaugeRecorder
    maps: MaxStressMaps
    out_dir: str
    root_steps: int


def material_builder_for(cfg: RunConfig):
    """Painter used for the root and for every regridded child patch."""
    background = cfg.materials[cfg.background]

    def build(patch: PatchGrid):
        if not cfg.bodies:
            patch.mat.fill(background)
            return
        for i, body in enumerate(cfg.bodies):
            scenario = ScenarioSpec(
                inside=cfg.materials[body.material], outside=background,
                shape=body.shape, rotation_deg=body.rotation_deg,
                rotation_axis=body.rotation_axis, pivot=body.pivot,
            )
            build_material_field(scenario, patch, reset=(i == 0))

    return build


def _apply_initial(cfg: RunConfig, patch: PatchGrid, chk=None):
    if cfg.initial is None:
        return
    if isinstance(cfg.initial, RestartRotation):
        simio.apply_axisym_rotation(chk, patch)
    else:
        apply_initial_condition(cfg.initial, patch)


def build_hierarchy(cfg: RunConfig, max_level=None) -> AmrHierarchy:
    """Root patch, materials, initial condition, and the initial regrid.

    After each new level is created its state is cleared and the initial
    condition re-applied analytically, so fine patches do not start from
    an interpolated version of it.
    """
    levels = cfg.amr.max_levels if max_level is None \
        else max(1, min(cfg.amr.max_levels, max_level + 1))
    dx = (cfg.spacing,) * 3
    root = PatchGrid(
        level=0, anchor=(0, 0, 0), cells=cfg.cells, dx=dx, origin=cfg.origin,
        active=cfg.active, axisym=cfg.axisym,
    )
    builder = material_builder_for(cfg)
    builder(root)
    hier = AmrHierarchy(
        root, cfg.bc, max_levels=levels, ratio=cfg.amr.ratio,
        rule=cfg.amr.rule, material_builder=builder,
        transverse=cfg.transverse, limiter=cfg.limiter,
        regrid_interval=cfg.amr.regrid_interval, reflux=cfg.amr.reflux,
        min_box=cfg.amr.min_box, fill_ratio=cfg.amr.fill_ratio,
    )
    chk = None
    if isinstance(cfg.initial, RestartRotation):
        chk = simio.load_checkpoint(cfg.initial.checkpoint)
    _apply_initial(cfg, root, chk)
    if hier.rule is not None:
        for L in range(levels - 1):
            hier.regrid(L)
            for p in hier.levels[L + 1]:
                p.q[:] = 0.0
                _apply_initial(cfg, p, chk)
    return hier


def _write_outputs(cfg, hier, rec, maps, out_dir, tag):
    for name, text in rec.texts().items():
        with open(os.path.join(out_dir, "gauge_%s.csv" % name), "w") as fh:
            fh.write(text)
    simio.dump_hierarchy(os.path.join(out_dir, "fields_%s.txt" % tag), hier)
    root = hier.levels[0][0]
    d = maps.arrays()
    simio.write_field_dump(
        os.path.join(out_dir, "maxstress.txt"),
        tuple(d), [d[k] for k in d], root.origin, root.dx, root.time,
    )


def drive(cfg: RunConfig, hier: AmrHierarchy, rec: GaugeRecorder,
          maps: MaxStressMaps, out_dir: str, threads: int = 1, echo=None):
    """Advance to cfg.end_time, emitting outputs on cadence.

    A crash mid-run still leaves a usable checkpoint_abort.npz behind.
    """
    os.makedirs(out_dir, exist_ok=True)
    root = hier.levels[0][0]
    end = cfg.end_time
    eps = 1e-12 * max(end, 1e-30)

    def observe(h, level):
        rec.observe(h, level)
        finest = max(l for l, ps in enumerate(h.levels) if ps)
        if level == finest:
            maps.update(h)

    hier.observers.append(observe)
    pool = None
    if threads > 1:
        pool = ThreadPoolExecutor(max_workers=threads)
        hier.pool = pool
    log_path = os.path.join(out_dir, "run.log")
    try:
        with open(log_path, "a") as log:
            while root.time < end - eps:
                dt = hier.stable_root_dt(cfg.cfl)
                dt = min(dt, end - root.time)
                hier.advance(dt)
                steps = hier.steps[0]
                counts = "+".join(str(len(ps)) for ps in hier.levels)
                line = "step %d t %s dt %s patches %s" % (
                    steps, repr(root.time), repr(dt), counts)
                log.write(line + "\n")
                if echo:
                    echo(line)
                out = cfg.output
                if out.field_interval and steps % out.field_interval == 0:
                    simio.dump_hierarchy(
                        os.path.join(out_dir, "fields_%06d.txt" % steps), hier)
                if out.checkpoint_interval and steps % out.checkpoint_interval == 0:
                    simio.save_checkpoint(
                        os.path.join(out_dir, "checkpoint_%06d.npz" % steps),
                        hier, config_text=cfg.text, gauge_texts=rec.texts(),
                        maps=maps)
    except Exception:
        simio.save_checkpoint(
            os.path.join(out_dir, "checkpoint_abort.npz"), hier,
            config_text=cfg.text, gauge_texts=rec.texts(), maps=maps)
        raise
    finally:
        hier.pool = None
        if pool is not None:
            pool.shutdown()
    _write_outputs(cfg, hier, rec, maps, out_dir, "final")
    simio.save_checkpoint(
        os.path.join(out_dir, "checkpoint_final.npz"), hier,
        config_text=cfg.text, gauge_texts=rec.texts(), maps=maps)
    return RunResult(hierarchy=hier, gauges=rec, maps=maps, out_dir=out_dir,
                     root_steps=hier.steps[0])


def run_scenario(cfg: RunConfig, out_dir=None, threads: int = 1,
                 max_level=None, echo=None) -> RunResult:
    """Fresh run: build, initialize, advance, write outputs."""
    hier = build_hierarchy(cfg, max_level=max_level)
    rec = GaugeRecorder(hier, cfg.gauges)
    maps = MaxStressMaps(hier)
    rec.record_initial(hier)
    maps.update(hier)
    target = out_dir if out_dir is not None else cfg.output.directory
    return drive(cfg, hier, rec, maps, target, threads=threads, echo=echo)


def resume_run(checkpoint_path, out_dir=None, threads: int = 1,
               max_level=None, echo=None) -> RunResult:
    """Continue a checkpointed run to its configured end time.

    The hierarchy, step counters, gauge buffers, and peak maps all come
    from the checkpoint, so the finished outputs match an uninterrupted
    run byte for byte.
    """
    chk = simio.load_checkpoint(checkpoint_path)
    cfg = parse_config(chk.config_text)
    root = chk.levels[0][0]
    levels = cfg.amr.max_levels if max_level is None \
        else max(1, min(cfg.amr.max_levels, max_level + 1))
    hier = AmrHierarchy(
        root, cfg.bc, max_levels=levels, ratio=cfg.amr.ratio,
        rule=cfg.amr.rule, material_builder=material_builder_for(cfg),
        transverse=cfg.transverse, limiter=cfg.limiter,
        regrid_interval=cfg.amr.regrid_interval, reflux=cfg.amr.reflux,
        min_box=cfg.amr.min_box, fill_ratio=cfg.amr.fill_ratio,
    )
    for lev in range(1, levels):
        hier.levels[lev] = chk.levels[lev] if lev < len(chk.levels) else []
    hier.steps = list(chk.meta["steps"])[:levels] + [0] * max(0, levels - len(chk.meta["steps"]))
    rec = GaugeRecorder(hier, cfg.gauges, preamble=chk.gauge_texts)
    maps = MaxStressMaps(hier)
    if chk.maps_arrays is not None:
        maps = MaxStressMaps.from_arrays(hier, chk.maps_arrays)
    target = out_dir if out_dir is not None else cfg.output.directory
    return drive(cfg, hier, rec, maps, target, threads=threads, echo=echo)
