"""Interface Riemann solves in flux-difference (f-wave) form.

Every interface problem splits the flux jump into at most six moving
discontinuities, two per characteristic family (longitudinal plus two
shear families for the sweep axis).  Material data may differ across the
interface, so each wave takes its speed and impedance from the cell it
propagates into.  Flux jumps belonging to families with zero impedance on
both sides stay put at the interface: that is the correct behavior for
tangential slip at fluid boundaries, and it costs nothing because the
stationary part telescopes away in conservation sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elasticity import AXIS_FAMILIES, _normal_row, characteristic_speeds
from .eos import SERIES_FULL, tait_series_stiffness, tait_stiffness
from .errors import DegenerateImpedance
from .statecore import Direction, MaterialSample, StateVector, stress_of_state

# impedance factor per family position: longitudinal 1, shear 2 (doubled
# shear strain storage)
FAMILY_KAPPA = (1.0, 2.0)


def flux_vector(state: StateVector, material: MaterialSample, direction: Direction):
    """Flux f(q) for sweeps along `direction`, in the q_t + f_x = 0 sense.

    For each family (s, m) of the axis the flux couples the strain slot to
    minus the conjugate velocity and the momentum slot to minus the
    conjugate stress component.
    """
    q = state.as_array()
    sig = stress_of_state(state, material)
    sig6 = np.array([sig[0, 0], sig[1, 1], sig[2, 2],
                     sig[0, 1], sig[1, 2], sig[0, 2]])
    f = np.zeros(9)
    rho0 = material.rho0
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[direction.axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        f[sidx] = -q[midx] / (fac * rho0)
        f[midx] = -sig6[sidx]
    return f


@dataclass(frozen=True)
class FWave:
    """One f-wave: carries beta * r of flux jump at the given speed."""

    speed: float
    beta: float
    strain_index: int
    momentum_index: int
    r: np.ndarray

    def strength(self):
        return self.beta * self.r


@dataclass
class FWaveSet:
    waves: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.waves)

    def __len__(self):
        return len(self.waves)


@dataclass
class Fluctuations:
    """Left-going and right-going flux transfers A-dq, A+dq."""

    amdq: np.ndarray
    apdq: np.ndarray


def _family_speed(material, axis, fam, trace):
    """Speed of one family (0 = longitudinal, 1, 2 = shear) in a cell."""
    if fam == 0 and material.is_fluid and material.series != SERIES_FULL:
        k = float(tait_series_stiffness(trace, material.series, material.eos))
        return float(np.sqrt(max(k, 0.0) / material.rho0))
    return characteristic_speeds(material, axis, trace)[fam]


def _split_jump(a, b, kl_cl, kr_cr):
    """Closed-form f-wave strengths for one family.

    a, b are the strain and momentum components of the flux jump; kl_cl
    and kr_cr are impedance * speed on the two sides.  The left-going
    eigenvector is (1, +kl_cl) and the right-going one (1, -kr_cr) in the
    (strain, momentum) plane, so the 2x2 solve gives:
    """
    den = kl_cl + kr_cr
    beta_l = (a * kr_cr + b) / den
    beta_r = (a * kl_cl - b) / den
    return beta_l, beta_r


def solve_normal(ql: StateVector, qr: StateVector,
                 ml: MaterialSample, mr: MaterialSample,
                 direction: Direction):
    """F-wave Riemann solve at one interface.

    Returns (FWaveSet, Fluctuations).  A fluid-fluid interface emits
    exactly two waves (the longitudinal pair), a solid-solid one six.
    Raises DegenerateImpedance when a family must carry a flux jump but
    has no impedance on either side.
    """
    axis = direction.axis
    df = flux_vector(qr, mr, direction) - flux_vector(ql, ml, direction)
    tr_l, tr_r = ql.trace(), qr.trace()
    waves = []
    amdq = np.zeros(9)
    apdq = np.zeros(9)
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        cl = _family_speed(ml, axis, fam, tr_l)
        cr = _family_speed(mr, axis, fam, tr_r)
        kl_cl = fac * ml.rho0 * cl
        kr_cr = fac * mr.rho0 * cr
        a, b = df[sidx], df[midx]
        if kl_cl + kr_cr <= 0.0:
            if b != 0.0:
                raise DegenerateImpedance(
                    "family (%d,%d) along %r has zero impedance on both sides "
                    "but a stress jump %g to carry" % (sidx, midx, direction, b)
                )
            # strain-slot jump sits still at the interface
            continue
        beta_l, beta_r = _split_jump(a, b, kl_cl, kr_cr)
        r_l = np.zeros(9)
        r_l[sidx] = 1.0
        r_l[midx] = kl_cl
        r_r = np.zeros(9)
        r_r[sidx] = 1.0
        r_r[midx] = -kr_cr
        waves.append(FWave(-cl, beta_l, sidx, midx, r_l))
        waves.append(FWave(cr, beta_r, sidx, midx, r_r))
        if cl > 0.0:
            amdq += beta_l * r_l
        if cr > 0.0:
            apdq += beta_r * r_r
    return FWaveSet(waves), Fluctuations(amdq, apdq)


def _normal_strain_content(v, material, axis, trace):
    """Longitudinal strain content of a state-space vector.

    The stationary modes of the sweep Jacobian mix the three normal
    strains, so the longitudinal family's share of v is not just the
    family strain slot: it is the normal-stress response row applied to
    the strain part, normalized by the diagonal entry.  For a fluid this
    reduces to the trace of the strain part.
    """
    row = _normal_row(material, axis, trace)
    return (row[0] * v[0] + row[1] * v[1] + row[2] * v[2]) / row[axis]


def _split_vector(v, m_down, m_up, axis, trace_down, trace_up, weight):
    """Shared kernel for the transverse splits.

    weight False: return the plain eigen-projections (down, up).
    weight True: scale each projection by its signed speed, giving the
    flux-rate pair used for transverse corrections.
    """
    down = np.zeros(9)
    up = np.zeros(9)
    a_p = 0.5 * (_normal_strain_content(v, m_down, axis, trace_down)
                 + _normal_strain_content(v, m_up, axis, trace_up))
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        c_dn = _family_speed(m_down, axis, fam, trace_down)
        c_up = _family_speed(m_up, axis, fam, trace_up)
        k_dn = fac * m_down.rho0 * c_dn
        k_up = fac * m_up.rho0 * c_up
        den = k_dn + k_up
        if den <= 0.0:
            continue
        a = a_p if fam == 0 else v[sidx]
        b = v[midx]
        g_dn = (a * k_up + b) / den
        g_up = (a * k_dn - b) / den
        w_dn = -c_dn if weight else 1.0
        w_up = c_up if weight else 1.0
        down[sidx] += w_dn * g_dn
        down[midx] += w_dn * g_dn * k_dn
        up[sidx] += w_up * g_up
        up[midx] += w_up * g_up * (-k_up)
    return down, up


def split_transverse(fluct, m_up: MaterialSample, m_down: MaterialSample,
                     d_trans: Direction, trace_up=0.0, trace_down=0.0):
    """Split a fluctuation into down-going and up-going parts along a
    transverse direction.

    The split projects onto the transverse characteristic families, with
    the down-going speeds taken from m_down and up-going from m_up.  The
    two parts sum to the propagating content of `fluct`; components in
    families with no impedance (fluid shear) are untouched by transverse
    propagation and appear in neither part.
    """
    v = np.asarray(fluct, dtype=float)
    return _split_vector(v, m_down, m_up, d_trans.axis,
                         trace_down, trace_up, weight=False)


def split_double_transverse(part, m_a: MaterialSample, m_b: MaterialSample,
                            d_third: Direction, trace_a=0.0, trace_b=0.0):
    """Second-stage split of a transverse part along the remaining axis.

    Same decomposition as split_transverse: m_a supplies the down-going
    speeds, m_b the up-going ones.
    """
    v = np.asarray(part, dtype=float)
    return _split_vector(v, m_a, m_b, d_third.axis, trace_a, trace_b,
                         weight=False)


def transverse_flux_rates(fluct, m_down: MaterialSample, m_up: MaterialSample,
                          d_trans: Direction, trace_down=0.0, trace_up=0.0):
    """Speed-weighted split (B- v, B+ v) used by the corner corrections."""
    v = np.asarray(fluct, dtype=float)
    return _split_vector(v, m_down, m_up, d_trans.axis,
                         trace_down, trace_up, weight=True)
