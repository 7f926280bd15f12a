"""File formats: plain-text field dumps, npz checkpoints, and the
axisym-to-3D rotation restart."""

from __future__ import annotations

import io
import json

import numpy as np

from .errors import DimensionMismatch, ParseError
from .statecore import MaterialField, PatchGrid
from .wavesolver import stress_field

FIELD_MAGIC = "fielddump v1"
CHECKPOINT_VERSION = 1

FIELD_COMPONENTS = ("p", "s11", "s22", "s33", "s12", "s23", "s13", "u", "v", "w")


# ---------------------------------------------------------------------------
# field dumps
# ---------------------------------------------------------------------------

def write_field_dump(path, names, arrays, origin, spacing, time):
    """Write named cell arrays to a self-describing text file.

    All arrays share one (nx, ny, nz) shape; values are written x-fastest
    with repr so a read-back is bit-exact.
    """
    arrays = [np.asarray(a) for a in arrays]
    dims = arrays[0].shape
    for a in arrays:
        if a.shape != dims:
            raise DimensionMismatch("field dump arrays disagree on shape")
    buf = io.StringIO()
    buf.write(FIELD_MAGIC + "\n")
    buf.write("time: %s\n" % repr(float(time)))
    buf.write("dims: %d %d %d\n" % tuple(dims))
    buf.write("origin: %s %s %s\n" % tuple(repr(float(v)) for v in origin))
    buf.write("spacing: %s %s %s\n" % tuple(repr(float(v)) for v in spacing))
    buf.write("components: %s\n" % " ".join(names))
    for a in arrays:
        flat = a.ravel(order="F")
        for start in range(0, flat.size, dims[0]):
            row = flat[start:start + dims[0]]
            buf.write(" ".join(repr(float(v)) for v in row))
            buf.write("\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_field_dump(path):
    """Read a field dump; returns dict with time/dims/origin/spacing/fields."""
    with open(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != FIELD_MAGIC:
        raise ParseError("%s: not a field dump" % path)
    header = {}
    i = 1
    while i < len(lines) and ":" in lines[i]:
        key, _, rest = lines[i].partition(":")
        header[key.strip()] = rest.strip()
        i += 1
        if key.strip() == "components":
            break
    for need in ("time", "dims", "origin", "spacing", "components"):
        if need not in header:
            raise ParseError("%s: missing %r header line" % (path, need))
    dims = tuple(int(v) for v in header["dims"].split())
    names = header["components"].split()
    values = np.array(" ".join(lines[i:]).split(), dtype=float)
    per = dims[0] * dims[1] * dims[2]
    if values.size != per * len(names):
        raise DimensionMismatch(
            "%s: expected %d values, found %d" % (path, per * len(names), values.size)
        )
    fields = {}
    for k, name in enumerate(names):
        fields[name] = values[k * per:(k + 1) * per].reshape(dims, order="F")
    return {
        "time": float(header["time"]),
        "dims": dims,
        "origin": tuple(float(v) for v in header["origin"].split()),
        "spacing": tuple(float(v) for v in header["spacing"].split()),
        "fields": fields,
    }


def composite_root_fields(hier):
    """(names, arrays) for a dump: p, stress, velocity at root resolution,
    finest-available data block-averaged down."""
    root = hier.levels[0][0]
    shape = tuple(root.cells)
    out = np.zeros((10,) + shape)
    for level, patches in enumerate(hier.levels):
        r = hier.ratio**level
        for p in patches:
            sig = stress_field(p.q, p.mat)
            prs = -(sig[0] + sig[1] + sig[2]) / 3.0
            vel = p.q[6:9] / p.mat.rho0
            stack = np.concatenate([prs[None], sig, vel])
            stack = stack[(slice(None),) + p.interior()]
            if level > 0:
                shp = [stack.shape[0]]
                for a in range(3):
                    f = r if a in p.active else 1
                    shp.extend([stack.shape[1 + a] // f, f])
                stack = stack.reshape(shp).mean(axis=(2, 4, 6))
            sl = tuple(
                slice(p.anchor[a] // r, (p.anchor[a] + p.cells[a]) // r)
                if a in p.active else slice(None)
                for a in range(3)
            )
            out[(slice(None),) + sl] = stack
    return FIELD_COMPONENTS, [out[k] for k in range(10)]


def dump_hierarchy(path, hier):
    names, arrays = composite_root_fields(hier)
    root = hier.levels[0][0]
    write_field_dump(path, names, arrays, root.origin, root.dx,
                     root.time)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _text_to_u8(s):
    return np.frombuffer(s.encode("utf-8"), dtype=np.uint8)


def _u8_to_text(a):
    return bytes(np.asarray(a, dtype=np.uint8)).decode("utf-8")


def save_checkpoint(path, hier, config_text="", gauge_texts=None, maps=None):
    """Write the full hierarchy state for a bit-exact restart.

    Stores every patch's conserved and material arrays, per-level step
    counters, the original config text verbatim, accumulated gauge CSV
    text, and the running peak-stress maps.
    """
    meta = {
        "format": "shockfocus-checkpoint",
        "version": CHECKPOINT_VERSION,
        "time": hier.levels[0][0].time,
        "ratio": hier.ratio,
        "max_levels": hier.max_levels,
        "steps": list(hier.steps),
        "config_text": config_text,
        "levels": [
            [
                {
                    "anchor": list(p.anchor), "cells": list(p.cells),
                    "dx": list(p.dx), "origin": list(p.origin),
                    "active": list(p.active), "time": p.time,
                    "axisym": p.axisym,
                }
                for p in patches
            ]
            for patches in hier.levels
        ],
        "gauges": sorted(gauge_texts) if gauge_texts else [],
        "has_maps": maps is not None,
    }
    payload = {"meta": _text_to_u8(json.dumps(meta))}
    for lev, patches in enumerate(hier.levels):
        for i, p in enumerate(patches):
            payload["q_%d_%d" % (lev, i)] = p.q
            for slot, arr in p.mat.arrays_dict().items():
                payload["mat_%s_%d_%d" % (slot, lev, i)] = arr
    if gauge_texts:
        for name, text in gauge_texts.items():
            payload["gauge_%s" % name] = _text_to_u8(text)
    if maps is not None:
        for name, arr in maps.arrays().items():
            payload["maps_%s" % name] = arr
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


class CheckpointData:
    """Parsed checkpoint: metadata, rebuilt patches, gauge text, maps."""

    def __init__(self, meta, levels, gauge_texts, maps_arrays):
        self.meta = meta
        self.levels = levels
        self.gauge_texts = gauge_texts
        self.maps_arrays = maps_arrays

    @property
    def time(self):
        return self.meta["time"]

    @property
    def config_text(self):
        return self.meta["config_text"]


def load_checkpoint(path):
    with np.load(path) as data:
        meta = json.loads(_u8_to_text(data["meta"]))
        if meta.get("format") != "shockfocus-checkpoint":
            raise ParseError("%s: not a checkpoint" % path)
        levels = []
        for lev, plist in enumerate(meta["levels"]):
            patches = []
            for i, pm in enumerate(plist):
                mat = MaterialField.from_arrays({
                    slot: data["mat_%s_%d_%d" % (slot, lev, i)]
                    for slot in ("kind", "rho0", "theta", "B", "n", "series", "cij")
                })
                patch = PatchGrid(
                    level=lev, anchor=tuple(pm["anchor"]),
                    cells=tuple(pm["cells"]), dx=tuple(pm["dx"]),
                    origin=tuple(pm["origin"]), active=tuple(pm["active"]),
                    time=pm["time"], axisym=pm["axisym"],
                    q=np.array(data["q_%d_%d" % (lev, i)]), mat=mat,
                )
                patches.append(patch)
            levels.append(patches)
        gauge_texts = {
            name: _u8_to_text(data["gauge_%s" % name]) for name in meta["gauges"]
        }
        maps_arrays = None
        if meta.get("has_maps"):
            maps_arrays = {
                name: np.array(data["maps_%s" % name])
                for name in ("tension", "compression", "shear")
            }
    return CheckpointData(meta, levels, gauge_texts, maps_arrays)


# ---------------------------------------------------------------------------
# axisym -> 3D rotation restart
# ---------------------------------------------------------------------------

def _composite_axisym_q(chk: CheckpointData):
    """Root-resolution axisym state with fine levels block-averaged in."""
    root = chk.levels[0][0]
    q = root.interior_q().copy()
    ratio = chk.meta["ratio"]
    for lev in range(1, len(chk.levels)):
        r = ratio**lev
        for p in chk.levels[lev]:
            sub = p.interior_q()
            shp = [sub.shape[0]]
            for a in range(3):
                f = r if a in p.active else 1
                shp.extend([sub.shape[1 + a] // f, f])
            coarse = sub.reshape(shp).mean(axis=(2, 4, 6))
            sl = tuple(
                slice(p.anchor[a] // r, (p.anchor[a] + p.cells[a]) // r)
                if a in p.active else slice(None)
                for a in range(3)
            )
            q[(slice(None),) + sl] = coarse
    return root, q


def apply_axisym_rotation(chk: CheckpointData, patch: PatchGrid):
    """Initialize a 3D patch by revolving an axisym checkpoint about z.

    The axisym state (radius along x, axis along z) is sampled at each
    cell's (r, z) and its strain tensor and momentum rotated into the
    cartesian frame.  Materials are not touched; the caller builds them
    from the scenario as usual.
    """
    src, qsrc = _composite_axisym_q(chk)
    if src.active != (0, 2):
        raise DimensionMismatch("rotation restart needs an axisym checkpoint")
    x = patch.padded_centers(0)[:, None, None]
    y = patch.padded_centers(1)[None, :, None]
    z = patch.padded_centers(2)[None, None, :]
    r = np.sqrt(x**2 + y**2) + 0.0 * z
    zz = z + 0.0 * r

    def interp(comp):
        nr, nz = qsrc.shape[1], qsrc.shape[3]
        fi = np.clip((r - src.origin[0]) / src.dx[0] - 0.5, 0.0, nr - 1.0)
        fk = np.clip((zz - src.origin[2]) / src.dx[2] - 0.5, 0.0, nz - 1.0)
        i0 = np.minimum(np.floor(fi).astype(int), nr - 2)
        k0 = np.minimum(np.floor(fk).astype(int), nz - 2)
        wi = fi - i0
        wk = fk - k0
        f = qsrc[comp][:, 0, :]
        return ((1 - wi) * (1 - wk) * f[i0, k0] + wi * (1 - wk) * f[i0 + 1, k0]
                + (1 - wi) * wk * f[i0, k0 + 1] + wi * wk * f[i0 + 1, k0 + 1])

    off_axis = r > 0.0
    rsafe = np.where(off_axis, r, 1.0)
    c = np.where(off_axis, x / rsafe, 1.0)
    s = np.where(off_axis, y / rsafe, 0.0)
    e_rr = interp(0)
    e_tt = interp(1)
    e_zz = interp(2)
    e_rz = interp(5)   # meridional shear strain, slot e13
    m_r = interp(6)
    m_z = interp(8)
    patch.q[0] = c**2 * e_rr + s**2 * e_tt
    patch.q[1] = s**2 * e_rr + c**2 * e_tt
    patch.q[2] = e_zz
    patch.q[3] = c * s * (e_rr - e_tt)
    patch.q[4] = s * e_rz
    patch.q[5] = c * e_rz
    patch.q[6] = c * m_r
    patch.q[7] = s * m_r
    patch.q[8] = m_z
