"""Scenario geometry: solid shapes, voxel masks, and material field assembly.

A scenario places one solid shape (or an imported voxel mask) inside a
background fluid.  Cells cut by the interface get volume-fraction blended
material properties, sampled on a fixed subcell lattice so the result is
independent of patch decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import eos as eos_mod
from .elasticity import fluid_proxy_stiffness
from .errors import BadGeometry, DimensionMismatch, ParseError
from .statecore import KIND_BLEND, MaterialSample, PatchGrid, blend_material

# Subcell sampling resolution per active axis: 8x8 in two dimensions,
# 4x4x4 in three.  Both give 64 samples per cell.
SUBCELLS_2D = 8
SUBCELLS_3D = 4


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(3)
    return a


@dataclass(frozen=True)
class Sphere:
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.01

    def __post_init__(self):
        if self.radius <= 0.0:
            raise BadGeometry("sphere radius must be positive")

    def contains(self, x, y, z):
        c = _as_point(self.center)
        return (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2 <= self.radius**2


@dataclass(frozen=True)
class Cylinder:
    """Solid cylinder aligned with a coordinate axis.

    ``gap`` optionally removes an axial band (center, width) from the solid,
    leaving two coaxial stubs.
    """

    center: tuple = (0.0, 0.0, 0.0)
    axis: int = 2
    radius: float = 0.01
    length: float = 0.02
    gap: tuple | None = None

    def __post_init__(self):
        if self.radius <= 0.0 or self.length <= 0.0:
            raise BadGeometry("cylinder radius and length must be positive")
        if self.axis not in (0, 1, 2):
            raise BadGeometry("cylinder axis must be 0, 1 or 2")
        if self.gap is not None and self.gap[1] <= 0.0:
            raise BadGeometry("cylinder gap width must be positive")

    def contains(self, x, y, z):
        c = _as_point(self.center)
        coords = (x - c[0], y - c[1], z - c[2])
        ax = coords[self.axis]
        t1, t2 = (coords[i] for i in range(3) if i != self.axis)
        inside = (t1**2 + t2**2 <= self.radius**2) & (np.abs(ax) <= 0.5 * self.length)
        if self.gap is not None:
            gc, gw = self.gap
            inside &= ~(np.abs(ax - gc) < 0.5 * gw)
        return inside


@dataclass(frozen=True)
class HollowCylinder:
    center: tuple = (0.0, 0.0, 0.0)
    axis: int = 2
    inner_radius: float = 0.005
    outer_radius: float = 0.01
    length: float = 0.02

    def __post_init__(self):
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise BadGeometry("hollow cylinder needs 0 < inner < outer radius")
        if self.length <= 0.0:
            raise BadGeometry("hollow cylinder length must be positive")
        if self.axis not in (0, 1, 2):
            raise BadGeometry("hollow cylinder axis must be 0, 1 or 2")

    def contains(self, x, y, z):
        c = _as_point(self.center)
        coords = (x - c[0], y - c[1], z - c[2])
        ax = coords[self.axis]
        t1, t2 = (coords[i] for i in range(3) if i != self.axis)
        r2 = t1**2 + t2**2
        return (
            (r2 >= self.inner_radius**2)
            & (r2 <= self.outer_radius**2)
            & (np.abs(ax) <= 0.5 * self.length)
        )


@dataclass(frozen=True)
class Crescent:
    """Spherical-shell sector: a curved cap standing off a central ball.

    The solid is the radial band [standoff, standoff + thickness] measured
    from ``center``, restricted to directions within ``half_angle`` degrees
    of ``direction``.  Used for rib-like shields between a source and a
    target ball.
    """

    center: tuple = (0.0, 0.0, 0.0)
    standoff: float = 0.01
    thickness: float = 0.003
    half_angle_deg: float = 60.0
    direction: tuple = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if self.standoff <= 0.0 or self.thickness <= 0.0:
            raise BadGeometry("crescent standoff and thickness must be positive")
        if not 0.0 < self.half_angle_deg <= 180.0:
            raise BadGeometry("crescent half angle must be in (0, 180] degrees")
        d = _as_point(self.direction)
        if np.linalg.norm(d) == 0.0:
            raise BadGeometry("crescent direction must be a nonzero vector")

    def contains(self, x, y, z):
        c = _as_point(self.center)
        d = _as_point(self.direction)
        d = d / np.linalg.norm(d)
        dx, dy, dz = x - c[0], y - c[1], z - c[2]
        r = np.sqrt(dx**2 + dy**2 + dz**2)
        lo, hi = self.standoff, self.standoff + self.thickness
        band = (r >= lo) & (r <= hi)
        # cos(angle to direction) >= cos(half_angle); guard r=0
        proj = dx * d[0] + dy * d[1] + dz * d[2]
        cosang = np.where(r > 0.0, proj / np.maximum(r, 1e-300), -1.0)
        return band & (cosang >= math.cos(math.radians(self.half_angle_deg)))


@dataclass(frozen=True)
class EllipsoidalReflector:
    """Truncated ellipsoidal bowl, the classic electrohydraulic reflector.

    The solid occupies the region outside the prolate ellipsoid surface
    (semi-axes ``semi_major`` along the z axis, ``semi_minor`` transverse)
    on the source side of the truncation plane ``z <= center_z + cut``.
    Waves emitted at the near focus (z = center_z - focal_half_distance)
    reconverge at the far focus (z = center_z + focal_half_distance) with
    focal_half_distance = sqrt(semi_major^2 - semi_minor^2).

    ``declared_focus`` cross-checks the axes against an independently known
    half-distance; a mismatch above 1% raises BadGeometry.
    """

    semi_major: float = 0.140
    semi_minor: float = 0.0798
    cut: float = -0.010
    center_z: float = 0.0
    declared_focus: float | None = None

    def __post_init__(self):
        if not 0.0 < self.semi_minor < self.semi_major:
            raise BadGeometry("reflector needs 0 < semi_minor < semi_major")
        if self.declared_focus is not None:
            c = self.focal_half_distance
            if abs(c - self.declared_focus) > 0.01 * abs(self.declared_focus):
                raise BadGeometry(
                    "reflector axes give focal half-distance %.6g, declared %.6g"
                    % (c, self.declared_focus)
                )

    @property
    def focal_half_distance(self) -> float:
        return math.sqrt(self.semi_major**2 - self.semi_minor**2)

    def focus(self, which: str) -> tuple:
        c = self.focal_half_distance
        if which == "near":
            return (0.0, 0.0, self.center_z - c)
        if which == "far":
            return (0.0, 0.0, self.center_z + c)
        raise BadGeometry("focus must be 'near' or 'far'")

    def contains(self, x, y, z):
        zz = z - self.center_z
        rho2 = x**2 + y**2
        outside = zz**2 / self.semi_major**2 + rho2 / self.semi_minor**2 >= 1.0
        return outside & (zz <= self.cut)


@dataclass(frozen=True)
class VoxelMask:
    """Rasterized solid region on a regular lattice.

    ``data`` is a boolean array indexed [ix, iy, iz]; a query point maps to
    the voxel containing it, points outside the lattice are fluid.
    """

    origin: tuple
    spacing: tuple
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 3:
            raise DimensionMismatch("voxel mask data must be 3-dimensional")
        if any(s <= 0.0 for s in self.spacing):
            raise BadGeometry("voxel spacing must be positive")
        object.__setattr__(self, "data", d.astype(bool))

    def contains(self, x, y, z):
        o = _as_point(self.origin)
        sp = _as_point(self.spacing)
        ix = np.floor((x - o[0]) / sp[0]).astype(int)
        iy = np.floor((y - o[1]) / sp[1]).astype(int)
        iz = np.floor((z - o[2]) / sp[2]).astype(int)
        nx, ny, nz = self.data.shape
        ok = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny) & (iz >= 0) & (iz < nz)
        out = np.zeros(np.broadcast(ix, iy, iz).shape, dtype=bool)
        if np.any(ok):
            out[ok] = self.data[ix[ok], iy[ok], iz[ok]]
        return out


SHAPE_KINDS = {
    "sphere": Sphere,
    "cylinder": Cylinder,
    "hollow_cylinder": HollowCylinder,
    "crescent": Crescent,
    "reflector": EllipsoidalReflector,
}


def rotation_matrix(axis: int, angle_deg: float) -> np.ndarray:
    """Right-handed rotation about a coordinate axis."""
    th = math.radians(angle_deg)
    c, s = math.cos(th), math.sin(th)
    m = np.eye(3)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m[i, i] = c
    m[j, j] = c
    m[i, j] = -s
    m[j, i] = s
    return m


@dataclass(frozen=True)
class ScenarioSpec:
    """One solid shape embedded in a background material.

    ``rotation_deg`` spins the shape about ``rotation_axis`` through
    ``pivot`` (shape rotation is implemented by inverse-rotating the query
    points, so every shape supports it).
    """

    inside: MaterialSample
    outside: MaterialSample
    shape: object | None = None
    rotation_deg: float = 0.0
    rotation_axis: int = 1
    pivot: tuple = (0.0, 0.0, 0.0)

    def contains(self, x, y, z):
        if self.shape is None:
            return np.zeros(np.broadcast(x, y, z).shape, dtype=bool)
        if self.rotation_deg != 0.0:
            rinv = rotation_matrix(self.rotation_axis, -self.rotation_deg)
            p = _as_point(self.pivot)
            dx, dy, dz = x - p[0], y - p[1], z - p[2]
            x = rinv[0, 0] * dx + rinv[0, 1] * dy + rinv[0, 2] * dz + p[0]
            y = rinv[1, 0] * dx + rinv[1, 1] * dy + rinv[1, 2] * dz + p[1]
            z = rinv[2, 0] * dx + rinv[2, 1] * dy + rinv[2, 2] * dz + p[2]
        return self.shape.contains(x, y, z)


def solid_fraction(scenario: ScenarioSpec, patch: PatchGrid) -> np.ndarray:
    """Volume fraction of the shape in every padded cell of ``patch``.

    Subcell sampling on a fixed lattice (8 points per active axis in 2D,
    4 in 3D); inactive axes are sampled at the cell midplane.  Axisymmetric
    patches interpret (x, z) as (radius, axial) with y = 0.
    """
    if scenario.shape is None:
        shape = tuple(patch.q.shape[1:])
        return np.zeros(shape, dtype=float)
    ndim = len(patch.active)
    m = SUBCELLS_2D if ndim <= 2 else SUBCELLS_3D
    subs = []
    for ax in range(3):
        if ax in patch.active:
            frac = (np.arange(m) + 0.5) / m  # cell-relative sample offsets
            lo = patch.padded_centers(ax) - 0.5 * patch.dx[ax]
            subs.append((lo, frac * patch.dx[ax]))
        else:
            subs.append((np.array([0.0]), np.array([0.0])))
    count = np.zeros(tuple(len(s[0]) for s in subs), dtype=np.int64)
    offs = [s[1] for s in subs]
    for ox in offs[0]:
        for oy in offs[1]:
            for oz in offs[2]:
                x = (subs[0][0] + ox)[:, None, None]
                y = (subs[1][0] + oy)[None, :, None]
                z = (subs[2][0] + oz)[None, None, :]
                count += scenario.contains(x, y, z)
    total = len(offs[0]) * len(offs[1]) * len(offs[2])
    return count / float(total)


def build_material_field(scenario: ScenarioSpec, patch: PatchGrid,
                         reset: bool = True) -> None:
    """Fill ``patch.mat`` from the scenario, blending cut cells.

    Pure cells get the exact endpoint samples.  Cut cells are blended by
    volume fraction when the endpoints are one solid and one fluid;
    otherwise the majority endpoint wins (blending two like materials has
    no defined mixture rule here).  With ``reset=False`` the background
    fill is skipped so one more body can be painted onto a field already
    holding earlier bodies (cells the shape misses keep their value).
    """
    theta = solid_fraction(scenario, patch)
    mat = patch.mat
    if reset:
        mat.fill(scenario.outside)
    full = theta >= 1.0
    if np.any(full):
        mat.fill(scenario.inside, where=full)
    cut = (theta > 0.0) & ~full
    if not np.any(cut):
        return
    inside, outside = scenario.inside, scenario.outside
    if inside.is_solid == outside.is_solid:
        # No mixture rule for like endpoints; the majority one wins.
        majority = cut & (theta >= 0.5)
        if np.any(majority):
            mat.fill(inside, where=majority)
        return
    if inside.is_solid:
        solid, fluid, frac = inside, outside, theta
    else:
        solid, fluid, frac = outside, inside, 1.0 - theta
    _fill_blend(mat, cut, frac, solid, fluid)


def mixed_cell_average(theta: float, solid: MaterialSample, fluid: MaterialSample) -> MaterialSample:
    """Volume-fraction mixture of a solid and a fluid endpoint."""
    return blend_material(theta, solid, fluid)


def _fill_blend(mat, mask, frac, solid: MaterialSample, fluid: MaterialSample) -> None:
    """Vectorized counterpart of blend_material over the masked cells."""
    th = frac[mask]
    mat.kind[mask] = KIND_BLEND
    mat.rho0[mask] = th * solid.rho0 + (1.0 - th) * fluid.rho0
    mat.theta[mask] = th
    mat.B[mask] = fluid.eos.B
    mat.n[mask] = fluid.eos.n
    mat.series[mask] = eos_mod.SERIES_FULL
    proxy = fluid_proxy_stiffness(fluid.eos.n * fluid.eos.B).as_tuple()
    for k, cs in enumerate(solid.stiffness.as_tuple()):
        mat.cij[k][mask] = th * cs + (1.0 - th) * proxy[k]


# voxel mask file format ("voxmask v1"):
#   voxmask v1
#   dims: nx ny nz
#   spacing: sx sy sz
#   origin: ox oy oz
#   <nx*ny*nz 0/1 tokens, x varying fastest, then y, then z>


def export_voxel_mask(path: str, mask: VoxelMask) -> None:
    nx, ny, nz = mask.data.shape
    with open(path, "w") as fh:
        fh.write("voxmask v1\n")
        fh.write("dims: %d %d %d\n" % (nx, ny, nz))
        fh.write("spacing: %r %r %r\n" % tuple(float(s) for s in mask.spacing))
        fh.write("origin: %r %r %r\n" % tuple(float(o) for o in mask.origin))
        flat = mask.data.transpose(2, 1, 0).reshape(nz * ny, nx)
        for row in flat:
            fh.write(" ".join("1" if v else "0" for v in row))
            fh.write("\n")


def import_voxel_mask(path: str) -> VoxelMask:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "voxmask v1":
            raise ParseError("%s: expected 'voxmask v1' header, got %r" % (path, header))
        fields = {}
        for key in ("dims", "spacing", "origin"):
            line = fh.readline()
            if not line.startswith(key + ":"):
                raise ParseError("%s: expected '%s:' line" % (path, key))
            fields[key] = line.split(":", 1)[1].split()
        try:
            dims = tuple(int(v) for v in fields["dims"])
            spacing = tuple(float(v) for v in fields["spacing"])
            origin = tuple(float(v) for v in fields["origin"])
        except ValueError as exc:
            raise ParseError("%s: bad header number: %s" % (path, exc))
        if len(dims) != 3 or len(spacing) != 3 or len(origin) != 3:
            raise DimensionMismatch("%s: dims, spacing, origin must have 3 entries" % path)
        if any(d <= 0 for d in dims):
            raise DimensionMismatch("%s: dims must be positive" % path)
        tokens = fh.read().split()
    want = dims[0] * dims[1] * dims[2]
    if len(tokens) != want:
        raise DimensionMismatch(
            "%s: expected %d voxel values, found %d" % (path, want, len(tokens))
        )
    bad = set(tokens) - {"0", "1"}
    if bad:
        raise ParseError("%s: voxel values must be 0 or 1, found %r" % (path, sorted(bad)[0]))
    arr = np.array(tokens, dtype=np.uint8).reshape(dims[2], dims[1], dims[0])
    return VoxelMask(origin=origin, spacing=spacing, data=arr.transpose(2, 1, 0))
