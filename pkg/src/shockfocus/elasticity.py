"""Linear elastic constitutive relations and characteristic structure.

The solid is small-strain isotropic elastic, but the stiffness set is kept
as nine independent coefficients (C11, C22, C33, C12, C13, C23, C44, C55,
C66) so that volume-averaged mixed cells and linearized-fluid proxies fit
the same container.  Shear strains are stored doubled relative to the usual
engineering convention in the governing system, which is why the shear
stiffnesses carry the factor 2 mu and the shear wave speed picks up a
factor 1/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import tait_stiffness

CIJ_NAMES = ("C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66")


@dataclass(frozen=True)
class Stiffness:
    """Stiffness coefficients of the stress-strain map.

    sigma11 = C11 e11 + C12 e22 + C13 e33   (and cyclic for 22, 33)
    sigma12 = C44 e12,  sigma23 = C66 e23,  sigma13 = C55 e13
    """

    C11: float
    C22: float
    C33: float
    C12: float
    C13: float
    C23: float
    C44: float
    C55: float
    C66: float

    def as_tuple(self):
        return tuple(getattr(self, name) for name in CIJ_NAMES)

    def scaled(self, factor):
        return Stiffness(*(factor * c for c in self.as_tuple()))


ZERO_STIFFNESS = Stiffness(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class IsotropicModuli:
    """Lame parameters; mu >= 0 and lam + 2 mu > 0 are required."""

    lam: float
    mu: float

    def __post_init__(self):
        if self.mu < 0.0:
            raise ValueError("shear modulus mu must be nonnegative, got %r" % (self.mu,))
        if not self.lam + 2.0 * self.mu > 0.0:
            raise ValueError("lam + 2 mu must be positive, got %r" % (self.lam + 2.0 * self.mu,))


def lame_to_cij(moduli: IsotropicModuli) -> Stiffness:
    """Expand Lame parameters into the nine stiffness coefficients.

    The diagonal normal entries are lam + 2 mu, the off-diagonal couplings
    are lam, and the shear entries are 2 mu (doubled-shear-strain storage).
    """
    lam, mu = moduli.lam, moduli.mu
    diag = lam + 2.0 * mu
    shear = 2.0 * mu
    return Stiffness(diag, diag, diag, lam, lam, lam, shear, shear, shear)


def fluid_proxy_stiffness(stiffness_at_rest) -> Stiffness:
    """Linearized-fluid stiffness set used when averaging into mixed cells.

    All normal couplings equal the rest-state acoustic stiffness (n*B for a
    Tait liquid) and the shear entries vanish.
    """
    k = float(stiffness_at_rest)
    return Stiffness(k, k, k, k, k, k, 0.0, 0.0, 0.0)


def hooke_stress(strain6, c: Stiffness):
    """Stress components from strain components, both ordered
    (11, 22, 33, 12, 23, 13)."""
    e11, e22, e33, e12, e23, e13 = strain6
    s11 = c.C11 * e11 + c.C12 * e22 + c.C13 * e33
    s22 = c.C12 * e11 + c.C22 * e22 + c.C23 * e33
    s33 = c.C13 * e11 + c.C23 * e22 + c.C33 * e33
    return (s11, s22, s33, c.C44 * e12, c.C66 * e23, c.C55 * e13)


# Per-axis characteristic families.  Each entry is (strain index,
# momentum index, stiffness attribute) in the 9-component state ordering
# (e11, e22, e33, e12, e23, e13, mx, my, mz).  The first family is the
# longitudinal one; "normal" marks its direction-aligned stiffness.
AXIS_FAMILIES = (
    ((0, 6, "C11"), (3, 7, "C44"), (5, 8, "C55")),   # x sweeps
    ((1, 7, "C22"), (3, 6, "C44"), (4, 8, "C66")),   # y sweeps
    ((2, 8, "C33"), (5, 6, "C55"), (4, 7, "C66")),   # z sweeps
)

def characteristic_speeds(material, axis, trace_eps=0.0):
    """(cp, cs_a, cs_b) for sweeps along `axis` through `material`.

    cp = sqrt(K / rho0) with K the direction-aligned normal stiffness (the
    Tait tangent stiffness for a fluid, C11/C22/C33 for elastic cells);
    cs = sqrt(Cshear / (2 rho0)) for the two shear families, which for an
    isotropic solid reduces to sqrt(mu / rho0).  Fluids return zero shear
    speeds.
    """
    rho0 = material.rho0
    if material.is_fluid:
        k = tait_stiffness(trace_eps, material.eos)
        return (float(np.sqrt(k / rho0)), 0.0, 0.0)
    c = material.stiffness
    fams = AXIS_FAMILIES[axis]
    cp = np.sqrt(getattr(c, fams[0][2]) / rho0)
    cs_a = np.sqrt(getattr(c, fams[1][2]) / (2.0 * rho0))
    cs_b = np.sqrt(getattr(c, fams[2][2]) / (2.0 * rho0))
    return (float(cp), float(cs_a), float(cs_b))


def _normal_row(material, axis, trace_eps):
    """Coefficients (d sigma_nn / d e11, e22, e33) for the axis-normal stress."""
    if material.is_fluid:
        k = float(tait_stiffness(trace_eps, material.eos))
        return (k, k, k)
    c = material.stiffness
    if axis == 0:
        return (c.C11, c.C12, c.C13)
    if axis == 1:
        return (c.C12, c.C22, c.C23)
    return (c.C13, c.C23, c.C33)


def _shear_stiffnesses(material, axis):
    if material.is_fluid:
        return (0.0, 0.0)
    c = material.stiffness
    fams = AXIS_FAMILIES[axis]
    return (getattr(c, fams[1][2]), getattr(c, fams[2][2]))


def jacobian(material, axis, trace_eps=0.0):
    """Dense 9x9 flux Jacobian for sweeps along `axis`.

    The system is q_t + f(q)_x = 0 with strain rates driven by velocity
    gradients and momentum rates by stress gradients; for the full Tait
    fluid the Jacobian is evaluated at the given strain trace.
    """
    rho0 = material.rho0
    A = np.zeros((9, 9))
    fams = AXIS_FAMILIES[axis]
    # strain rows: d(strain)/dt couples to the momenta
    (sP, mP, _), (sA, mA, _), (sB, mB, _) = fams
    A[sP, mP] = -1.0 / rho0
    A[sA, mA] = -0.5 / rho0
    A[sB, mB] = -0.5 / rho0
    # momentum rows: d(momentum)/dt couples to strains through stress
    row = _normal_row(material, axis, trace_eps)
    A[mP, 0] = -row[0]
    A[mP, 1] = -row[1]
    A[mP, 2] = -row[2]
    ka, kb = _shear_stiffnesses(material, axis)
    A[mA, sA] = -ka
    A[mB, sB] = -kb
    return A


def analytic_eigenpairs(material, axis, trace_eps=0.0):
    """Closed-form (eigenvalue, eigenvector) list for the sweep Jacobian.

    Returns nine pairs: the three left/right-going families followed by the
    stationary modes.  For a fluid both shear families collapse to zero
    speed, so exactly seven of the nine eigenvalues vanish.
    """
    rho0 = material.rho0
    fams = AXIS_FAMILIES[axis]
    cp, cs_a, cs_b = characteristic_speeds(material, axis, trace_eps)
    pairs = []
    for (sidx, midx, _), c, shear in (
        (fams[0], cp, False),
        (fams[1], cs_a, True),
        (fams[2], cs_b, True),
    ):
        kappa = 2.0 * rho0 if shear else rho0
        for lam in (-c, c):
            r = np.zeros(9)
            r[sidx] = 1.0
            r[midx] = -kappa * lam
            pairs.append((lam, r))
    # stationary strain combinations annihilated by the normal-stress row
    a1, a2, a3 = _normal_row(material, axis, trace_eps)
    if axis == 0:
        nulls = [(-a2, a1, 0.0), (-a3, 0.0, a1)]
        spare = 4   # e23 never enters x sweeps
    elif axis == 1:
        nulls = [(-a2, a1, 0.0), (0.0, -a3, a2)]
        spare = 5   # e13 never enters y sweeps
    else:
        nulls = [(a3, 0.0, -a1), (0.0, a3, -a2)]
        spare = 3   # e12 never enters z sweeps
    for v in nulls:
        r = np.zeros(9)
        r[0], r[1], r[2] = v
        pairs.append((0.0, r))
    r = np.zeros(9)
    r[spare] = 1.0
    pairs.append((0.0, r))
    return pairs
