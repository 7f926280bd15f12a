"""1D compressible Euler solver used for EOS comparison experiments.

Conserved variables are (rho, rho*u, E) with E the total energy density.
The flux is an HLL approximation with Davis speed bounds; first order is
enough here because the solver's only job is to run the same problem
twice under the Tait and Tammann closures and compare the downstream
profiles.  Each cell carries its own EOS so mixed runs are possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import TaitParams, TammannParams
from .errors import VacuumState

DENSITY_FLOOR = 1e-3

EOS_TAIT = 0
EOS_TAMMANN = 1


@dataclass
class EulerEosField:
    """Per-cell EOS description for the 1D solver.

    kind selects the law; (B, n, rho_ref) parameterize Tait and
    (gamma, p_inf) Tammann.  Unused entries hold harmless defaults.
    """

    kind: np.ndarray
    B: np.ndarray
    n: np.ndarray
    rho_ref: np.ndarray
    gamma: np.ndarray
    p_inf: np.ndarray

    @staticmethod
    def uniform_tait(ncells, params: TaitParams, rho_ref):
        return EulerEosField(
            kind=np.full(ncells, EOS_TAIT, dtype=np.uint8),
            B=np.full(ncells, params.B), n=np.full(ncells, params.n),
            rho_ref=np.full(ncells, float(rho_ref)),
            gamma=np.full(ncells, 2.0), p_inf=np.zeros(ncells),
        )

    @staticmethod
    def uniform_tammann(ncells, params: TammannParams, rho_ref):
        return EulerEosField(
            kind=np.full(ncells, EOS_TAMMANN, dtype=np.uint8),
            B=np.ones(ncells), n=np.full(ncells, 2.0),
            rho_ref=np.full(ncells, float(rho_ref)),
            gamma=np.full(ncells, params.gamma),
            p_inf=np.full(ncells, params.p_inf),
        )


def euler_pressure(q, eos: EulerEosField):
    """Pressure per cell.  Tait reads the density ratio; Tammann the
    internal energy."""
    rho, mom, E = q
    if np.any(rho < DENSITY_FLOOR):
        raise VacuumState("density fell below %g" % DENSITY_FLOOR)
    tait = eos.kind == EOS_TAIT
    p_tait = eos.B * ((rho / eos.rho_ref) ** eos.n - 1.0)
    e_int = E - 0.5 * mom * mom / rho
    p_tam = (eos.gamma - 1.0) * e_int - eos.gamma * eos.p_inf
    return np.where(tait, p_tait, p_tam)


def euler_sound_speed(q, eos: EulerEosField, p=None):
    rho = q[0]
    if p is None:
        p = euler_pressure(q, eos)
    tait = eos.kind == EOS_TAIT
    c2_tait = eos.n * (p + eos.B) / rho
    c2_tam = eos.gamma * (p + eos.p_inf) / rho
    c2 = np.where(tait, c2_tait, c2_tam)
    if np.any(c2 <= 0.0):
        raise VacuumState("nonpositive squared sound speed")
    return np.sqrt(c2)


def euler_energy(rho, u, p, eos: EulerEosField):
    """Total energy density from primitives.

    For Tait cells internal energy is not dynamically meaningful; the
    Tammann expression is used throughout so that E stays well defined.
    """
    e = (p + eos.gamma * eos.p_inf) / ((eos.gamma - 1.0) * rho)
    return rho * e + 0.5 * rho * u * u


def _flux(q, p):
    rho, mom, E = q
    u = mom / rho
    return np.stack([mom, mom * u + p, u * (E + p)])


def euler1d_step(q, eos: EulerEosField, dt, dx):
    """One conservative HLL update with outflow boundaries.

    q has shape (3, ncells); returns the updated array (a new one) and
    the max Courant number of the step.
    """
    q = np.asarray(q, dtype=float)
    qg = np.concatenate([q[:, :1], q, q[:, -1:]], axis=1)
    eg = EulerEosField(
        kind=np.pad(eos.kind, 1, mode="edge"),
        B=np.pad(eos.B, 1, mode="edge"), n=np.pad(eos.n, 1, mode="edge"),
        rho_ref=np.pad(eos.rho_ref, 1, mode="edge"),
        gamma=np.pad(eos.gamma, 1, mode="edge"),
        p_inf=np.pad(eos.p_inf, 1, mode="edge"),
    )
    p = euler_pressure(qg, eg)
    c = euler_sound_speed(qg, eg, p)
    u = qg[1] / qg[0]
    f = _flux(qg, p)

    ql, qr = qg[:, :-1], qg[:, 1:]
    fl, fr = f[:, :-1], f[:, 1:]
    ul, ur = u[:-1], u[1:]
    cl, cr = c[:-1], c[1:]
    sl = np.minimum(ul - cl, ur - cr)
    sr = np.maximum(ul + cl, ur + cr)

    # HLL with Davis bounds; degenerate bracket falls back to the average
    width = sr - sl
    safe = np.where(width > 0.0, width, 1.0)
    f_hll = (sr * fl - sl * fr + sl * sr * (qr - ql)) / safe
    f_face = np.where(sl >= 0.0, fl, np.where(sr <= 0.0, fr, f_hll))
    f_face = np.where(width > 0.0, f_face, 0.5 * (fl + fr))

    out = q - dt / dx * (f_face[:, 1:] - f_face[:, :-1])
    courant = float(np.max(np.abs(u) + c)) * dt / dx
    return out, courant
