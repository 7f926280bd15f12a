"""State vectors, material samples, and patch grids.

The conserved state has nine components ordered

    (e11, e22, e33, e12, e23, e13, mx, my, mz)

where e_ij are strains (shear strains stored doubled: e12 holds
du/dy + dv/dx integrated in time) and m = rho0 * velocity is momentum
relative to the reference density.  Axisymmetric runs reuse the same
layout: the x slots act as radial components and the y slots carry the
hoop (theta-theta) strain and stress, with the y axis degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import eos as eos_mod
from . import elasticity as el
from .eos import TaitParams
from .elasticity import Stiffness, ZERO_STIFFNESS, hooke_stress

NCOMP = 9
COMPONENT_NAMES = ("e11", "e22", "e33", "e12", "e23", "e13", "mx", "my", "mz")

# strain (i, j) tensor placements for the first six components
STRAIN_SLOTS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))

KIND_FLUID = 0
KIND_SOLID = 1
KIND_BLEND = 2
_KIND_NAMES = {KIND_FLUID: "fluid", KIND_SOLID: "solid", KIND_BLEND: "blend"}


class Direction:
    """Sweep direction; axis is 0, 1, or 2 in storage order."""

    __slots__ = ("axis",)

    def __init__(self, axis):
        if axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1, or 2, got %r" % (axis,))
        self.axis = axis

    def __eq__(self, other):
        return isinstance(other, Direction) and other.axis == self.axis

    def __hash__(self):
        return hash(("Direction", self.axis))

    def __repr__(self):
        return "Direction(%s)" % "xyz"[self.axis]


DIR_X = Direction(0)
DIR_Y = Direction(1)
DIR_Z = Direction(2)
# axisymmetric aliases: radial sweeps live on the x axis
DIR_R = DIR_X


@dataclass(frozen=True)
class StateVector:
    """One cell of the nine-component system."""

    e11: float = 0.0
    e22: float = 0.0
    e33: float = 0.0
    e12: float = 0.0
    e23: float = 0.0
    e13: float = 0.0
    mx: float = 0.0
    my: float = 0.0
    mz: float = 0.0

    def as_array(self):
        return np.array(
            [self.e11, self.e22, self.e33, self.e12, self.e23, self.e13,
             self.mx, self.my, self.mz]
        )

    @staticmethod
    def from_array(q):
        q = np.asarray(q, dtype=float)
        if q.shape != (NCOMP,):
            raise ValueError("state array must have shape (9,), got %r" % (q.shape,))
        return StateVector(*q.tolist())

    def trace(self):
        return self.e11 + self.e22 + self.e33


@dataclass(frozen=True)
class AxisymStateVector:
    """Meridian-plane view of a state: (e_rr, e_tt, e_zz, e_rz, m_r, m_z).

    e_tt is the hoop strain; the doubled shear e_rz sits in the e13 slot of
    the Cartesian layout and the radial momentum in mx.
    """

    e_rr: float = 0.0
    e_tt: float = 0.0
    e_zz: float = 0.0
    e_rz: float = 0.0
    m_r: float = 0.0
    m_z: float = 0.0

    def to_state(self) -> StateVector:
        return StateVector(
            e11=self.e_rr, e22=self.e_tt, e33=self.e_zz,
            e13=self.e_rz, mx=self.m_r, mz=self.m_z,
        )

    @staticmethod
    def from_state(s: StateVector):
        return AxisymStateVector(
            e_rr=s.e11, e_tt=s.e22, e_zz=s.e33,
            e_rz=s.e13, m_r=s.mx, m_z=s.mz,
        )


@dataclass(frozen=True)
class MaterialSample:
    """Per-cell material description (tagged union over kind).

    fluid: eos (Tait parameters) plus an optional truncation of the
      pressure law (series 0 = full, 1 = linear, 2 = quadratic).
    solid: stiffness coefficients.
    blend: volume-averaged fluid/solid mix; carries the solid fraction
      theta and the averaged stiffness (fluid side linearized), and keeps
      the fluid endpoint for reference.
    """

    kind: int
    rho0: float
    eos: TaitParams | None = None
    series: int = eos_mod.SERIES_FULL
    stiffness: Stiffness | None = None
    theta: float = 1.0

    @property
    def is_fluid(self):
        return self.kind == KIND_FLUID

    @property
    def is_solid(self):
        return self.kind == KIND_SOLID

    @property
    def kind_name(self):
        return _KIND_NAMES[self.kind]


def fluid_material(rho0, eos=None, series=eos_mod.SERIES_FULL) -> MaterialSample:
    if eos is None:
        eos = TaitParams()
    if rho0 <= 0.0:
        raise ValueError("rho0 must be positive, got %r" % (rho0,))
    return MaterialSample(kind=KIND_FLUID, rho0=float(rho0), eos=eos,
                          series=series, theta=0.0)


def solid_material(rho0, stiffness=None, lam=None, mu=None) -> MaterialSample:
    if rho0 <= 0.0:
        raise ValueError("rho0 must be positive, got %r" % (rho0,))
    if stiffness is None:
        stiffness = el.lame_to_cij(el.IsotropicModuli(lam=lam, mu=mu))
    return MaterialSample(kind=KIND_SOLID, rho0=float(rho0),
                          stiffness=stiffness, theta=1.0)


def blend_material(theta, solid: MaterialSample, fluid: MaterialSample) -> MaterialSample:
    """Volume-averaged mixed cell: theta is the solid fraction.

    Density averages directly; the stiffness averages the solid set against
    the fluid's rest-state linearized proxy (all normal couplings n*B, zero
    shear).  theta 0 or 1 falls back to the pure endpoint.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("solid fraction theta must lie in [0, 1], got %r" % (theta,))
    if not solid.is_solid or not fluid.is_fluid:
        raise ValueError("blend endpoints must be one solid and one fluid sample")
    if theta == 0.0:
        return fluid
    if theta == 1.0:
        return solid
    rho0 = theta * solid.rho0 + (1.0 - theta) * fluid.rho0
    proxy = el.fluid_proxy_stiffness(fluid.eos.n * fluid.eos.B)
    mixed = Stiffness(*(
        theta * cs + (1.0 - theta) * cf
        for cs, cf in zip(solid.stiffness.as_tuple(), proxy.as_tuple())
    ))
    return MaterialSample(kind=KIND_BLEND, rho0=rho0, eos=fluid.eos,
                          stiffness=mixed, theta=float(theta))


def primitive_velocity(state: StateVector, material: MaterialSample):
    """Velocity components m / rho0."""
    r = material.rho0
    return (state.mx / r, state.my / r, state.mz / r)


def stress_of_state(state: StateVector, material: MaterialSample):
    """Full 3x3 stress tensor for one cell.

    Fluid cells return -p(tr eps) * I with the cell's pressure law
    (full Tait or its truncation); elastic and blend cells apply the
    stiffness coefficients.  Raises FluidStateInvalid when a fluid cell
    has compressed past the EOS domain.
    """
    if material.is_fluid:
        tr = state.trace()
        if material.series == eos_mod.SERIES_FULL:
            p = float(eos_mod.tait_pressure(tr, material.eos))
        else:
            p = float(eos_mod.tait_series(tr, material.series, material.eos))
        return np.diag([-p, -p, -p])
    s11, s22, s33, s12, s23, s13 = hooke_stress(
        (state.e11, state.e22, state.e33, state.e12, state.e23, state.e13),
        material.stiffness,
    )
    return np.array([
        [s11, s12, s13],
        [s12, s22, s23],
        [s13, s23, s33],
    ])


def pressure_of_state(state: StateVector, material: MaterialSample):
    """Scalar pressure: the fluid EOS pressure, or -mean normal stress."""
    sig = stress_of_state(state, material)
    return -(sig[0, 0] + sig[1, 1] + sig[2, 2]) / 3.0


# ---------------------------------------------------------------------------
# Vectorized material storage
# ---------------------------------------------------------------------------

class MaterialField:
    """Struct-of-arrays material description over a grid shape.

    Arrays: kind (uint8), rho0, theta, B, n (fluid law; dummy 1.0 / 2.0 on
    non-fluid cells so vectorized powers stay finite), series (uint8), and
    the nine stiffness coefficients (zero on pure fluid cells).
    """

    __slots__ = ("kind", "rho0", "theta", "B", "n", "series", "cij")

    def __init__(self, shape):
        self.kind = np.zeros(shape, dtype=np.uint8)
        self.rho0 = np.ones(shape)
        self.theta = np.zeros(shape)
        self.B = np.ones(shape)
        self.n = np.full(shape, 2.0)
        self.series = np.zeros(shape, dtype=np.uint8)
        self.cij = np.zeros((9,) + tuple(shape))

    @property
    def shape(self):
        return self.kind.shape

    def fill(self, sample: MaterialSample, where=None):
        """Set every cell (or the masked cells) to one material sample."""
        idx = slice(None) if where is None else where
        self.kind[idx] = sample.kind
        self.rho0[idx] = sample.rho0
        self.theta[idx] = sample.theta
        if sample.eos is not None:
            self.B[idx] = sample.eos.B
            self.n[idx] = sample.eos.n
        else:
            self.B[idx] = 1.0
            self.n[idx] = 2.0
        self.series[idx] = sample.series
        stiff = sample.stiffness if sample.stiffness is not None else ZERO_STIFFNESS
        for k, c in enumerate(stiff.as_tuple()):
            self.cij[k][idx] = c

    def set_cell(self, index, sample: MaterialSample):
        self.fill(sample, where=index)

    def sample(self, index) -> MaterialSample:
        """Reconstruct the MaterialSample at one cell index."""
        kind = int(self.kind[index])
        rho0 = float(self.rho0[index])
        if kind == KIND_FLUID:
            return MaterialSample(
                kind=KIND_FLUID, rho0=rho0,
                eos=TaitParams(B=float(self.B[index]), n=float(self.n[index])),
                series=int(self.series[index]), theta=0.0,
            )
        stiff = Stiffness(*(float(self.cij[k][index]) for k in range(9)))
        eos = None
        if kind == KIND_BLEND:
            eos = TaitParams(B=float(self.B[index]), n=float(self.n[index]))
        return MaterialSample(kind=kind, rho0=rho0, stiffness=stiff, eos=eos,
                              theta=float(self.theta[index]))

    def copy_from(self, other, dst_idx, src_idx):
        self.kind[dst_idx] = other.kind[src_idx]
        self.rho0[dst_idx] = other.rho0[src_idx]
        self.theta[dst_idx] = other.theta[src_idx]
        self.B[dst_idx] = other.B[src_idx]
        self.n[dst_idx] = other.n[src_idx]
        self.series[dst_idx] = other.series[src_idx]
        self.cij[(slice(None),) + dst_idx] = other.cij[(slice(None),) + src_idx]

    def is_elastic(self):
        """Mask of cells whose stress goes through the stiffness set."""
        return self.kind != KIND_FLUID

    def arrays_dict(self):
        return {
            "kind": self.kind, "rho0": self.rho0, "theta": self.theta,
            "B": self.B, "n": self.n, "series": self.series, "cij": self.cij,
        }

    @staticmethod
    def from_arrays(d):
        f = MaterialField.__new__(MaterialField)
        f.kind = np.asarray(d["kind"], dtype=np.uint8)
        f.rho0 = np.asarray(d["rho0"], dtype=float)
        f.theta = np.asarray(d["theta"], dtype=float)
        f.B = np.asarray(d["B"], dtype=float)
        f.n = np.asarray(d["n"], dtype=float)
        f.series = np.asarray(d["series"], dtype=np.uint8)
        f.cij = np.asarray(d["cij"], dtype=float)
        return f


GHOST = 2


@dataclass
class PatchGrid:
    """One logically rectangular patch of cells.

    Storage is component-first: q has shape (9, nx + 2g, ny + 2g, nz + 2g)
    where inactive axes have extent 1 and no ghosts.  `origin` is the
    physical coordinate of the lower corner of the interior region,
    `anchor` the integer cell offset of that corner in the level-wide
    index space (used for nesting and synchronization arithmetic).
    """

    level: int
    anchor: tuple
    cells: tuple
    dx: tuple
    origin: tuple
    active: tuple
    time: float = 0.0
    axisym: bool = False
    q: np.ndarray = field(default=None, repr=False)
    mat: MaterialField = field(default=None, repr=False)

    def __post_init__(self):
        if self.q is None:
            self.q = np.zeros((NCOMP,) + self.padded_shape())
        if self.mat is None:
            self.mat = MaterialField(self.padded_shape())

    def ghosts(self, axis):
        return GHOST if axis in self.active else 0

    def padded_shape(self):
        return tuple(
            n + 2 * self.ghosts(a) for a, n in enumerate(self.cells)
        )

    def interior(self):
        """Slice tuple selecting interior cells of a (..., nx, ny, nz) array."""
        return tuple(
            slice(self.ghosts(a), self.ghosts(a) + n)
            for a, n in enumerate(self.cells)
        )

    def interior_q(self):
        return self.q[(slice(None),) + self.interior()]

    def centers(self, axis):
        """Physical coordinates of interior cell centers along one axis."""
        n = self.cells[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.dx[axis]

    def padded_centers(self, axis):
        g = self.ghosts(axis)
        n = self.cells[axis] + 2 * g
        return self.origin[axis] + (np.arange(n) - g + 0.5) * self.dx[axis]

    def upper(self, axis):
        return self.origin[axis] + self.cells[axis] * self.dx[axis]

    def copy(self):
        other = replace(self, q=self.q.copy(), mat=MaterialField.from_arrays(
            {k: np.array(v) for k, v in self.mat.arrays_dict().items()}
        ))
        return other

    def state_at(self, index) -> StateVector:
        return StateVector.from_array(self.q[(slice(None),) + tuple(index)])

    def material_at(self, index) -> MaterialSample:
        return self.mat.sample(tuple(index))
