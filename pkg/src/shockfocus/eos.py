"""Pressure closures for the working fluid.

The liquid is barotropic here: pressure depends only on the volume change,
i.e. on the trace of the strain tensor.  The Tait (Murnaghan) form is the
production model; truncated Taylor expansions of it support linearization
experiments, and the Tammann (stiffened gas) form is kept for the
energy-bearing 1D comparison solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FluidStateInvalid

# Smallest admissible 1 + tr(eps).  States at or below this are treated as a
# solver failure and raised, never clamped, so instabilities surface instead
# of being quietly absorbed.
TRACE_FLOOR = 1e-6

# Series selector values used in vectorized material fields.
SERIES_FULL = 0
SERIES_LINEAR = 1
SERIES_QUADRATIC = 2


@dataclass(frozen=True)
class TaitParams:
    """Tait law p = B [(1 + tr eps)^-n - 1], written in strain form.

    Defaults are the usual water fit: B = 300 MPa, n = 7.15.
    """

    B: float = 300.0e6
    n: float = 7.15

    def __post_init__(self):
        if not self.B > 0.0:
            raise ValueError("Tait B must be positive, got %r" % (self.B,))
        if not self.n > 1.0:
            raise ValueError("Tait exponent n must exceed 1, got %r" % (self.n,))


@dataclass(frozen=True)
class TammannParams:
    """Stiffened-gas law p = (gamma - 1) rho e - gamma p_inf."""

    gamma: float = 7.15
    p_inf: float = 300.0e6

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("Tammann gamma must exceed 1, got %r" % (self.gamma,))
        if self.p_inf < 0.0:
            raise ValueError("Tammann p_inf must be nonnegative, got %r" % (self.p_inf,))


def _checked_volume(trace_eps):
    vol = 1.0 + np.asarray(trace_eps, dtype=float)
    if np.any(vol <= TRACE_FLOOR):
        raise FluidStateInvalid(
            "1 + tr(eps) <= %g: fluid state left the EOS domain" % TRACE_FLOOR
        )
    return vol


def tait_pressure(trace_eps, params: TaitParams = TaitParams()):
    """Pressure from the strain trace, full Tait form."""
    vol = _checked_volume(trace_eps)
    return params.B * (vol ** (-params.n) - 1.0)


def tait_stiffness(trace_eps, params: TaitParams = TaitParams()):
    """Acoustic stiffness d sigma11 / d eps11 = B n (1 + tr eps)^-(n+1).

    Equals -dp/d(tr eps); at rest this is n*B.
    """
    vol = _checked_volume(trace_eps)
    return params.B * params.n * vol ** (-(params.n + 1.0))


def tait_sound_speed(trace_eps, rho0, params: TaitParams = TaitParams()):
    """Longitudinal speed sqrt(stiffness / rho0); rho0 is the reference density."""
    return np.sqrt(tait_stiffness(trace_eps, params) / rho0)


def tait_density(trace_eps, rho0, params: TaitParams = TaitParams()):
    """Current density rho = rho0 / (1 + tr eps)."""
    return rho0 / _checked_volume(trace_eps)


def tait_trace_of_pressure(pressure, params: TaitParams = TaitParams()):
    """Invert the Tait law: strain trace that produces the given pressure."""
    arg = 1.0 + np.asarray(pressure, dtype=float) / params.B
    if np.any(arg <= 0.0):
        raise FluidStateInvalid("pressure below the Tait vacuum limit -B")
    return arg ** (-1.0 / params.n) - 1.0


def tait_series(trace_eps, order, params: TaitParams = TaitParams()):
    """Taylor truncation of tait_pressure about the unstrained state.

    order 1: p = -n B tr;  order 2 adds + n(n+1)B/2 tr^2.
    """
    tr = np.asarray(trace_eps, dtype=float)
    nB = params.n * params.B
    if order == 1:
        return -nB * tr
    if order == 2:
        return -nB * tr + 0.5 * params.n * (params.n + 1.0) * params.B * tr * tr
    raise ValueError("series order must be 1 or 2, got %r" % (order,))


def tait_series_stiffness(trace_eps, order, params: TaitParams = TaitParams()):
    """-dp/d(tr eps) of the truncated series (constant n*B at order 1)."""
    tr = np.asarray(trace_eps, dtype=float)
    nB = params.n * params.B
    if order == 1:
        return nB * np.ones_like(tr)
    if order == 2:
        return nB * (1.0 - (params.n + 1.0) * tr)
    raise ValueError("series order must be 1 or 2, got %r" % (order,))


def tammann_pressure(rho, e, params: TammannParams = TammannParams()):
    """Pressure from density and specific internal energy."""
    return (params.gamma - 1.0) * np.asarray(rho, dtype=float) * e - params.gamma * params.p_inf


def tammann_energy(rho, pressure, params: TammannParams = TammannParams()):
    """Specific internal energy at a given pressure (inverse of tammann_pressure)."""
    return (np.asarray(pressure, dtype=float) + params.gamma * params.p_inf) / (
        (params.gamma - 1.0) * np.asarray(rho, dtype=float)
    )


def tammann_sound_speed(rho, pressure, params: TammannParams = TammannParams()):
    arg = params.gamma * (np.asarray(pressure, dtype=float) + params.p_inf) / rho
    if np.any(arg <= 0.0):
        raise FluidStateInvalid("stiffened gas state has imaginary sound speed")
    return np.sqrt(arg)


# ---------------------------------------------------------------------------
# Vectorized per-cell variants used by the solver kernels.  B, n, series are
# cell arrays; entries outside `where` may hold junk (solid cells) and are
# never trusted.  The domain guard only fires for cells inside `where`.
# ---------------------------------------------------------------------------

def fluid_pressure_field(trace, B, n, series, where):
    tr = np.asarray(trace, dtype=float)
    series = np.asarray(series)
    vol = 1.0 + tr
    full = where & (series == SERIES_FULL)
    if np.any(full & (vol <= TRACE_FLOOR)):
        raise FluidStateInvalid("fluid cell reached 1 + tr(eps) <= %g" % TRACE_FLOOR)
    safe = np.where(full, vol, 1.0)
    out = B * (safe ** (-n) - 1.0)
    if np.any(where & (series != SERIES_FULL)):
        p_lin = -n * B * tr
        p_quad = p_lin + 0.5 * n * (n + 1.0) * B * tr * tr
        out = np.where(series == SERIES_QUADRATIC, p_quad, out)
        out = np.where(series == SERIES_LINEAR, p_lin, out)
    return out


def fluid_stiffness_field(trace, B, n, series, where):
    tr = np.asarray(trace, dtype=float)
    series = np.asarray(series)
    vol = 1.0 + tr
    full = where & (series == SERIES_FULL)
    if np.any(full & (vol <= TRACE_FLOOR)):
        raise FluidStateInvalid("fluid cell reached 1 + tr(eps) <= %g" % TRACE_FLOOR)
    safe = np.where(full, vol, 1.0)
    out = B * n * safe ** (-(n + 1.0))
    if np.any(where & (series != SERIES_FULL)):
        k_quad = B * n * (1.0 - (n + 1.0) * tr)
        out = np.where(series == SERIES_QUADRATIC, k_quad, out)
        out = np.where(series == SERIES_LINEAR, B * n * np.ones_like(tr), out)
        # The quadratic truncation has a finite validity range: its tangent
        # stiffness crosses zero at tr = 1/(n+1) and the system stops being
        # hyperbolic.  Fail loudly instead of feeding a negative stiffness
        # into the wave-speed square roots.
        if np.any(where & (series == SERIES_QUADRATIC) & (k_quad <= 0.0)):
            raise FluidStateInvalid(
                "quadratic-series fluid stiffness went non-positive (tr >= 1/(n+1))"
            )
    return out
