"""Field dumps, checkpoints, and the axisym-to-3D rotation restart."""

import numpy as np
import pytest

from shockfocus.amr import AmrHierarchy, FlagRule
from shockfocus.diagnostics import MaxStressMaps
from shockfocus.eos import TaitParams
from shockfocus.errors import DimensionMismatch, ParseError
from shockfocus.simio import (
    FIELD_COMPONENTS,
    FIELD_MAGIC,
    apply_axisym_rotation,
    composite_root_fields,
    dump_hierarchy,
    load_checkpoint,
    read_field_dump,
    save_checkpoint,
    write_field_dump,
)
from shockfocus.statecore import GHOST, PatchGrid, fluid_material, solid_material
from shockfocus.wavesolver import pressure_field, stress_field

WATER = fluid_material(1000.0, TaitParams(300.0e6, 7.15))
BONE = solid_material(2000.0, lam=6.0e9, mu=3.0e9)
C0 = 1464.581851587681

OUTFLOW_1D = {0: ("outflow", "outflow")}


def _patch(cells=(8, 1, 1), active=(0,), dx=1e-3, mat=WATER, **kw):
    origin = kw.pop("origin", tuple(0.0 if a in active else -0.5 * dx
                                    for a in range(3)))
    p = PatchGrid(level=0, anchor=(0, 0, 0), cells=cells, dx=(dx,) * 3,
                  origin=origin, active=active, **kw)
    p.mat.fill(mat)
    return p


def _fill_water(patch):
    patch.mat.fill(WATER)


def _pulse_hierarchy(max_levels=1):
    root = _patch(cells=(32, 1, 1))
    x = root.centers(0)
    prof = -0.002 * np.exp(-(((x - 0.016) / 3e-3) ** 2))
    inner = root.interior()
    root.q[(0,) + inner] += prof[:, None, None]
    root.q[(6,) + inner] += (-1000.0 * C0 * prof)[:, None, None]
    rule = FlagRule(pressure_jump=2e5, buffer=2) if max_levels > 1 else None
    return AmrHierarchy(root, OUTFLOW_1D, max_levels=max_levels, rule=rule,
                        material_builder=_fill_water)


# --- field dumps -------------------------------------------------------------------

def test_field_dump_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    dims = (5, 4, 3)
    a = rng.standard_normal(dims) * 1e6
    b = rng.standard_normal(dims)
    path = tmp_path / "fields.txt"
    write_field_dump(path, ["p", "u"], [a, b], origin=(0.0, -0.1, 0.25),
                     spacing=(1e-3, 2e-3, 1e-3), time=3.25e-6)
    out = read_field_dump(path)
    assert out["time"] == 3.25e-6
    assert out["dims"] == dims
    assert out["origin"] == (0.0, -0.1, 0.25)
    assert out["spacing"] == (1e-3, 2e-3, 1e-3)
    assert np.array_equal(out["fields"]["p"], a)    # repr survives exactly
    assert np.array_equal(out["fields"]["u"], b)


def test_field_dump_rows_are_x_fastest(tmp_path):
    a = np.arange(6.0).reshape(2, 3, 1)              # a[i,j,0] = 3i + j
    path = tmp_path / "layout.txt"
    write_field_dump(path, ["f"], [a], (0, 0, 0), (1, 1, 1), 0.0)
    lines = path.read_text().splitlines()
    assert lines[0] == FIELD_MAGIC
    data = lines[6:]
    assert data == ["0.0 3.0", "1.0 4.0", "2.0 5.0"]


def test_field_dump_rejects_mismatched_shapes(tmp_path):
    with pytest.raises(DimensionMismatch):
        write_field_dump(tmp_path / "bad.txt", ["a", "b"],
                         [np.zeros((2, 2, 1)), np.zeros((3, 2, 1))],
                         (0, 0, 0), (1, 1, 1), 0.0)


def test_read_field_dump_error_paths(tmp_path):
    wrong = tmp_path / "wrong.txt"
    wrong.write_text("not a dump\n1 2 3\n")
    with pytest.raises(ParseError):
        read_field_dump(wrong)

    incomplete = tmp_path / "incomplete.txt"
    incomplete.write_text(FIELD_MAGIC + "\ntime: 0.0\ndims: 2 1 1\n")
    with pytest.raises(ParseError):
        read_field_dump(incomplete)

    short = tmp_path / "short.txt"
    short.write_text(
        FIELD_MAGIC + "\ntime: 0.0\ndims: 2 2 1\norigin: 0 0 0\n"
        "spacing: 1 1 1\ncomponents: p\n1.0 2.0\n3.0\n"
    )
    with pytest.raises(DimensionMismatch):
        read_field_dump(short)


def test_composite_fields_block_average_fine_data():
    root = _patch(cells=(32, 1, 1))
    inner = root.interior()
    root.q[(0,) + inner][10:14] = -0.001
    hier = AmrHierarchy(root, OUTFLOW_1D, max_levels=2,
                        rule=FlagRule(pressure_jump=1e4, buffer=2),
                        material_builder=_fill_water)
    hier.regrid(0)
    child = hier.levels[1][0]
    ci = 2 * (12 - child.anchor[0] // 2)
    child.q[0, GHOST + ci, 0, 0] = -0.004
    child.q[0, GHOST + ci + 1, 0, 0] = -0.001
    names, arrays = composite_root_fields(hier)
    assert names == FIELD_COMPONENTS
    pf = pressure_field(child.q, child.mat)
    want = 0.5 * (pf[GHOST + ci, 0, 0] + pf[GHOST + ci + 1, 0, 0])
    assert arrays[0][12, 0, 0] == pytest.approx(want, rel=1e-15)
    root_p = pressure_field(root.q, root.mat)[root.interior()]
    assert arrays[0][2, 0, 0] == root_p[2, 0, 0]     # uncovered cell untouched


def test_dump_hierarchy_round_trip(tmp_path):
    hier = _pulse_hierarchy()
    hier.advance(hier.stable_root_dt(0.8))
    path = tmp_path / "dump.txt"
    dump_hierarchy(path, hier)
    out = read_field_dump(path)
    root = hier.levels[0][0]
    assert out["dims"] == tuple(root.cells)
    assert out["time"] == root.time
    assert out["spacing"] == tuple(root.dx)
    _, arrays = composite_root_fields(hier)
    assert np.array_equal(out["fields"]["p"], arrays[0])
    assert np.array_equal(out["fields"]["u"], arrays[7])


# --- checkpoints -------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path):
    hier = _pulse_hierarchy(max_levels=2)
    dt = hier.stable_root_dt(0.8)
    for _ in range(3):
        hier.advance(dt)
    maps = MaxStressMaps(hier)
    maps.update(hier)
    gauges = {"g0": "t,p\n0.0,1.5\n", "g1": "t,p\n"}
    path = tmp_path / "chk.npz"
    save_checkpoint(path, hier, config_text="[grid]\ncells = [32]\n",
                    gauge_texts=gauges, maps=maps)
    chk = load_checkpoint(path)
    assert chk.time == hier.levels[0][0].time
    assert chk.meta["ratio"] == hier.ratio
    assert chk.meta["max_levels"] == hier.max_levels
    assert chk.meta["steps"] == hier.steps
    assert chk.config_text == "[grid]\ncells = [32]\n"
    assert chk.gauge_texts == gauges
    for name, arr in maps.arrays().items():
        assert np.array_equal(chk.maps_arrays[name], arr)
    assert len(chk.levels) == len(hier.levels)
    for saved, live in zip(chk.levels, hier.levels):
        assert len(saved) == len(live)
        for ps, pl in zip(saved, live):
            assert ps.anchor == pl.anchor
            assert ps.cells == pl.cells
            assert ps.dx == pl.dx
            assert ps.origin == pl.origin
            assert ps.active == pl.active
            assert ps.time == pl.time
            assert ps.axisym == pl.axisym
            assert np.array_equal(ps.q, pl.q)
            for slot, arr in pl.mat.arrays_dict().items():
                assert np.array_equal(ps.mat.arrays_dict()[slot], arr)


def test_checkpoint_rejects_foreign_npz(tmp_path):
    path = tmp_path / "foreign.npz"
    meta = np.frombuffer(b'{"format": "something-else"}', dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, meta=meta)
    with pytest.raises(ParseError):
        load_checkpoint(path)


# --- axisym -> 3D rotation restart ---------------------------------------------------

def _axisym_checkpoint(tmp_path, values):
    e_rr, e_tt, e_zz, e_rz, m_r, m_z = values
    root = _patch(cells=(8, 1, 6), active=(0, 2), dx=1e-3, axisym=True)
    root.q[0] = e_rr
    root.q[1] = e_tt
    root.q[2] = e_zz
    root.q[5] = e_rz
    root.q[6] = m_r
    root.q[8] = m_z
    hier = AmrHierarchy(root, {0: ("reflect", "outflow"),
                               2: ("outflow", "outflow")}, max_levels=1)
    path = tmp_path / "axisym.npz"
    save_checkpoint(path, hier)
    return load_checkpoint(path)


def test_axisym_rotation_matches_tensor_rotation(tmp_path):
    vals = (3.0e-4, -2.0e-4, 1.0e-4, 4.0e-4, 250.0, -125.0)
    e_rr, e_tt, e_zz, e_rz, m_r, m_z = vals
    chk = _axisym_checkpoint(tmp_path, vals)
    p3 = _patch(cells=(6, 6, 4), active=(0, 1, 2), dx=1e-3,
                origin=(-3e-3, -3e-3, 1e-3), mat=BONE)
    apply_axisym_rotation(chk, p3)
    # pick an off-axis, off-diagonal cell and rotate the tensors by hand
    i, j, k = GHOST + 4, GHOST + 1, GHOST + 2
    x = p3.padded_centers(0)[i]
    y = p3.padded_centers(1)[j]
    r = np.hypot(x, y)
    c, s = x / r, y / r
    assert p3.q[0, i, j, k] == pytest.approx(c * c * e_rr + s * s * e_tt, rel=1e-12)
    assert p3.q[1, i, j, k] == pytest.approx(s * s * e_rr + c * c * e_tt, rel=1e-12)
    assert p3.q[2, i, j, k] == pytest.approx(e_zz, rel=1e-12)
    assert p3.q[3, i, j, k] == pytest.approx(c * s * (e_rr - e_tt), rel=1e-12)
    assert p3.q[4, i, j, k] == pytest.approx(s * e_rz, rel=1e-12)
    assert p3.q[5, i, j, k] == pytest.approx(c * e_rz, rel=1e-12)
    assert p3.q[6, i, j, k] == pytest.approx(c * m_r, rel=1e-12)
    assert p3.q[7, i, j, k] == pytest.approx(s * m_r, rel=1e-12)
    assert p3.q[8, i, j, k] == pytest.approx(m_z, rel=1e-12)
    # the cartesian stress must equal the rotated cylindrical stress
    lam, mu = 6.0e9, 3.0e9
    srr = (lam + 2 * mu) * e_rr + lam * (e_tt + e_zz)
    stt = (lam + 2 * mu) * e_tt + lam * (e_rr + e_zz)
    szz = (lam + 2 * mu) * e_zz + lam * (e_rr + e_tt)
    srz = 2 * mu * e_rz
    cyl = np.array([[srr, 0.0, srz], [0.0, stt, 0.0], [srz, 0.0, szz]])
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    want = rot @ cyl @ rot.T
    sig = stress_field(p3.q, p3.mat)[:, i, j, k]
    got = np.array([[sig[0], sig[3], sig[5]],
                    [sig[3], sig[1], sig[4]],
                    [sig[5], sig[4], sig[2]]])
    assert np.allclose(got, want, rtol=1e-12, atol=1.0)


def test_axisym_rotation_preserves_pressure_field(tmp_path):
    # hydrostatic axisym state: rotation must reproduce the same pressure
    vals = (2.0e-4, 2.0e-4, 2.0e-4, 0.0, 0.0, 0.0)
    chk = _axisym_checkpoint(tmp_path, vals)
    p3 = _patch(cells=(6, 6, 4), active=(0, 1, 2), dx=1e-3,
                origin=(-3e-3, -3e-3, 1e-3))
    apply_axisym_rotation(chk, p3)
    src = chk.levels[0][0]
    want = pressure_field(src.q, src.mat)[GHOST, 0, GHOST]
    got = pressure_field(p3.q, p3.mat)
    assert np.allclose(got, want, rtol=1e-12)
    assert np.all(p3.q[3] == 0.0) and np.all(p3.q[6:9] == 0.0)


def test_axisym_rotation_requires_axisym_source(tmp_path):
    root = _patch(cells=(8, 1, 1))
    hier = AmrHierarchy(root, OUTFLOW_1D, max_levels=1)
    path = tmp_path / "flat.npz"
    save_checkpoint(path, hier)
    chk = load_checkpoint(path)
    p3 = _patch(cells=(4, 4, 4), active=(0, 1, 2),
                origin=(-2e-3, -2e-3, -2e-3))
    with pytest.raises(DimensionMismatch):
        apply_axisym_rotation(chk, p3)
