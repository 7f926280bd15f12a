"""Scenario shapes, cut-cell blending, and voxel mask round trips."""

import math

import numpy as np
import pytest

from shockfocus import geometry as ge
from shockfocus.eos import TaitParams
from shockfocus.errors import BadGeometry, DimensionMismatch, ParseError
from shockfocus.statecore import (
    KIND_BLEND, KIND_FLUID, KIND_SOLID, PatchGrid,
    fluid_material, solid_material,
)

WATER = fluid_material(1000.0, TaitParams(300.0e6, 7.15))
STEEL = solid_material(7800.0, lam=1.1e11, mu=8.0e10)


def _patch(cells=(8, 8, 8), dx=1e-3, active=(0, 1, 2), axisym=False):
    origin = tuple(0.0 if a in active else -0.5 * dx for a in range(3))
    return PatchGrid(level=0, anchor=(0, 0, 0), cells=cells, dx=(dx,) * 3,
                     origin=origin, active=active, axisym=axisym)


# --- primitive shapes ---------------------------------------------------------

def test_sphere_membership():
    s = ge.Sphere(center=(1.0, 2.0, 3.0), radius=0.5)
    assert s.contains(1.0, 2.0, 3.4)
    assert s.contains(1.5, 2.0, 3.0)   # boundary counts as inside
    assert not s.contains(1.0, 2.0, 3.6)
    with pytest.raises(BadGeometry):
        ge.Sphere(radius=0.0)


def test_cylinder_with_gap():
    c = ge.Cylinder(center=(0.0, 0.0, 0.0), axis=2, radius=1.0, length=4.0,
                    gap=(0.0, 1.0))
    assert c.contains(0.5, 0.0, 1.5)
    assert not c.contains(0.5, 0.0, 0.2)     # inside the gap band
    assert not c.contains(1.5, 0.0, 1.0)     # outside radially
    assert not c.contains(0.0, 0.0, 2.5)     # beyond the cap
    with pytest.raises(BadGeometry):
        ge.Cylinder(axis=3)
    with pytest.raises(BadGeometry):
        ge.Cylinder(gap=(0.0, -1.0))


def test_hollow_cylinder_annulus():
    h = ge.HollowCylinder(axis=0, inner_radius=0.5, outer_radius=1.0, length=2.0)
    assert h.contains(0.0, 0.7, 0.0)
    assert not h.contains(0.0, 0.2, 0.0)
    assert not h.contains(0.0, 1.2, 0.0)
    with pytest.raises(BadGeometry):
        ge.HollowCylinder(inner_radius=1.0, outer_radius=0.5)


def test_crescent_band_and_aperture():
    cr = ge.Crescent(center=(0.0, 0.0, 0.0), standoff=1.0, thickness=0.5,
                     half_angle_deg=45.0, direction=(0.0, 0.0, 1.0))
    assert cr.contains(0.0, 0.0, 1.2)
    assert not cr.contains(0.0, 0.0, 0.8)        # inside the standoff
    assert not cr.contains(0.0, 0.0, 1.7)        # beyond the shell
    assert not cr.contains(1.2, 0.0, 0.0)        # 90 degrees off axis
    on_edge = 1.2 / math.sqrt(2.0)
    assert cr.contains(on_edge - 1e-9, 0.0, on_edge + 1e-9)
    with pytest.raises(BadGeometry):
        ge.Crescent(direction=(0.0, 0.0, 0.0))


def test_reflector_focus_geometry():
    r = ge.EllipsoidalReflector(semi_major=0.14, semi_minor=0.0798,
                                cut=-0.01, center_z=0.0)
    c = math.sqrt(0.14**2 - 0.0798**2)
    assert r.focal_half_distance == pytest.approx(c, rel=1e-15)
    assert r.focus("near") == (0.0, 0.0, -c)
    assert r.focus("far") == (0.0, 0.0, c)
    # bowl wall: on-axis behind the ellipsoid apex, source side only
    assert r.contains(0.0, 0.0, -0.141)
    assert not r.contains(0.0, 0.0, 0.141)       # beyond the cut plane
    assert not r.contains(0.0, 0.0, -0.1)        # inside the ellipsoid
    with pytest.raises(BadGeometry):
        r.focus("middle")


def test_reflector_declared_focus_cross_check():
    c = math.sqrt(0.14**2 - 0.0798**2)
    ge.EllipsoidalReflector(declared_focus=c * 1.005)   # inside 1%
    with pytest.raises(BadGeometry):
        ge.EllipsoidalReflector(declared_focus=c * 1.02)


def test_rotation_matrix_basics():
    m = ge.rotation_matrix(2, 90.0)
    assert np.allclose(m @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-15)
    for axis in range(3):
        m = ge.rotation_matrix(axis, 37.0)
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-15)
        assert np.linalg.det(m) == pytest.approx(1.0)


def test_scenario_rotation_moves_shape():
    shape = ge.Cylinder(center=(0.02, 0.0, 0.0), axis=0, radius=0.004,
                        length=0.02)
    spec = ge.ScenarioSpec(inside=STEEL, outside=WATER, shape=shape,
                           rotation_deg=90.0, rotation_axis=2,
                           pivot=(0.0, 0.0, 0.0))
    # the cylinder rotates from +x onto +y
    assert spec.contains(np.array(0.0), np.array(0.02), np.array(0.0))
    assert not spec.contains(np.array(0.02), np.array(0.0), np.array(0.0))


# --- cut-cell fractions and field building ------------------------------------

def test_solid_fraction_pure_and_cut_cells():
    p = _patch(cells=(8, 8, 1), active=(0, 1), dx=1e-3)
    shape = ge.Sphere(center=(4e-3, 4e-3, 0.0), radius=2.5e-3)
    spec = ge.ScenarioSpec(inside=STEEL, outside=WATER, shape=shape)
    theta = ge.solid_fraction(spec, p)
    assert theta.shape == tuple(p.q.shape[1:])
    g = 2
    assert theta[g + 4, g + 4, 0] == 1.0          # cell inside the sphere
    assert theta[g, g, 0] == 0.0                  # far corner
    edge = theta[g + 4, g + 6, 0]                 # straddles the boundary
    assert 0.0 < edge < 1.0


def test_solid_fraction_area_estimate():
    p = _patch(cells=(20, 20, 1), active=(0, 1), dx=1e-3)
    shape = ge.Sphere(center=(10e-3, 10e-3, 0.0), radius=6e-3)
    spec = ge.ScenarioSpec(inside=STEEL, outside=WATER, shape=shape)
    theta = ge.solid_fraction(spec, p)
    area = theta[p.interior()].sum() * 1e-6
    # midplane slice of the sphere is a disc of radius 6 mm
    assert area == pytest.approx(math.pi * 36e-6, rel=5e-3)


def test_build_material_field_blends_cut_cells():
    p = _patch(cells=(8, 8, 1), active=(0, 1), dx=1e-3)
    shape = ge.Sphere(center=(4e-3, 4e-3, 0.0), radius=2.5e-3)
    spec = ge.ScenarioSpec(inside=STEEL, outside=WATER, shape=shape)
    ge.build_material_field(spec, p)
    g = 2
    assert p.mat.kind[g + 4, g + 4, 0] == KIND_SOLID
    assert p.mat.kind[g, g, 0] == KIND_FLUID
    cut = p.mat.kind == KIND_BLEND
    assert np.any(cut)
    th = p.mat.theta[cut]
    assert np.all((th > 0.0) & (th < 1.0))
    rho = p.mat.rho0[cut]
    assert np.all((rho > 1000.0) & (rho < 7800.0))
    assert np.allclose(rho, th * 7800.0 + (1.0 - th) * 1000.0)


def test_build_material_field_fluid_inside_solid_background():
    p = _patch(cells=(8, 8, 1), active=(0, 1), dx=1e-3)
    shape = ge.Sphere(center=(4e-3, 4e-3, 0.0), radius=2.5e-3)
    spec = ge.ScenarioSpec(inside=WATER, outside=STEEL, shape=shape)
    ge.build_material_field(spec, p)
    g = 2
    assert p.mat.kind[g + 4, g + 4, 0] == KIND_FLUID
    assert p.mat.kind[g, g, 0] == KIND_SOLID
    cut = p.mat.kind == KIND_BLEND
    # blend theta is the SOLID fraction regardless of which side is inside
    th = p.mat.theta[cut]
    rho = p.mat.rho0[cut]
    assert np.allclose(rho, th * 7800.0 + (1.0 - th) * 1000.0)


def test_build_material_field_like_endpoints_majority():
    brine = fluid_material(1100.0, TaitParams(310.0e6, 7.0))
    p = _patch(cells=(8, 8, 1), active=(0, 1), dx=1e-3)
    shape = ge.Sphere(center=(4e-3, 4e-3, 0.0), radius=2.5e-3)
    spec = ge.ScenarioSpec(inside=brine, outside=WATER, shape=shape)
    ge.build_material_field(spec, p)
    assert not np.any(p.mat.kind == KIND_BLEND)
    assert set(np.unique(p.mat.rho0)) == {1000.0, 1100.0}


def test_paint_second_body_without_reset():
    p = _patch(cells=(12, 12, 1), active=(0, 1), dx=1e-3)
    ball = ge.ScenarioSpec(
        inside=STEEL, outside=WATER,
        shape=ge.Sphere(center=(3e-3, 6e-3, 0.0), radius=2e-3))
    ge.build_material_field(ball, p, reset=True)
    kinds_after_first = p.mat.kind.copy()
    second = ge.ScenarioSpec(
        inside=STEEL, outside=WATER,
        shape=ge.Sphere(center=(9e-3, 6e-3, 0.0), radius=2e-3))
    ge.build_material_field(second, p, reset=False)
    # first body untouched, second body painted
    g = 2
    assert p.mat.kind[g + 3, g + 6, 0] == KIND_SOLID
    assert p.mat.kind[g + 9, g + 6, 0] == KIND_SOLID
    first_region = kinds_after_first != KIND_FLUID
    assert np.array_equal(p.mat.kind[first_region], kinds_after_first[first_region])


def test_mixed_cell_average_is_blend():
    m = ge.mixed_cell_average(0.25, STEEL, WATER)
    assert m.kind == KIND_BLEND
    assert m.rho0 == pytest.approx(0.25 * 7800.0 + 0.75 * 1000.0)


# --- voxel masks ---------------------------------------------------------------

def test_voxel_mask_membership_and_bounds():
    data = np.zeros((3, 2, 2), dtype=bool)
    data[1, 0, 1] = True
    m = ge.VoxelMask(origin=(0.0, 0.0, 0.0), spacing=(1.0, 1.0, 1.0), data=data)
    assert m.contains(np.array(1.5), np.array(0.5), np.array(1.5))
    assert not m.contains(np.array(0.5), np.array(0.5), np.array(1.5))
    assert not m.contains(np.array(-1.0), np.array(0.5), np.array(0.5))
    assert not m.contains(np.array(10.0), np.array(0.5), np.array(0.5))


def test_voxel_mask_validation():
    with pytest.raises(DimensionMismatch):
        ge.VoxelMask(origin=(0, 0, 0), spacing=(1, 1, 1), data=np.zeros((2, 2)))
    with pytest.raises(BadGeometry):
        ge.VoxelMask(origin=(0, 0, 0), spacing=(1, 0, 1),
                     data=np.zeros((2, 2, 2)))


def test_voxel_mask_file_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    data = rng.random((4, 3, 5)) > 0.5
    m = ge.VoxelMask(origin=(0.1, -0.2, 0.3), spacing=(0.01, 0.02, 0.03),
                     data=data)
    path = str(tmp_path / "mask.txt")
    ge.export_voxel_mask(path, m)
    back = ge.import_voxel_mask(path)
    assert np.array_equal(back.data, m.data)
    assert back.origin == m.origin
    assert back.spacing == m.spacing


def test_voxel_mask_parse_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a mask\n")
    with pytest.raises(ParseError):
        ge.import_voxel_mask(str(bad))

    short = tmp_path / "short.txt"
    short.write_text("voxmask v1\ndims: 2 2 2\nspacing: 1 1 1\norigin: 0 0 0\n"
                     "1 0 1\n")
    with pytest.raises(DimensionMismatch):
        ge.import_voxel_mask(str(short))

    junk = tmp_path / "junk.txt"
    junk.write_text("voxmask v1\ndims: 1 1 2\nspacing: 1 1 1\norigin: 0 0 0\n"
                    "1 x\n")
    with pytest.raises(ParseError):
        ge.import_voxel_mask(str(junk))


def test_axisym_patch_samples_meridian_plane():
    # axisymmetric patches query shapes at y=0: a sphere centered on the
    # axis shows up as its meridian disc in (r, z)
    p = _patch(cells=(10, 1, 10), active=(0, 2), dx=1e-3, axisym=True)
    shape = ge.Sphere(center=(0.0, 0.0, 5e-3), radius=3e-3)
    spec = ge.ScenarioSpec(inside=STEEL, outside=WATER, shape=shape)
    theta = ge.solid_fraction(spec, p)
    g = 2
    assert theta[g + 1, 0, g + 5] == 1.0
    assert theta[g + 8, 0, g + 5] == 0.0
