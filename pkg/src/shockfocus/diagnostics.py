"""Measurement and initialization: principal-stress metrics, point gauges,
running peak-stress maps, and the built-in initial conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GaugeOutsideDomain
from .statecore import GHOST, KIND_FLUID, PatchGrid
from .wavesolver import pressure_field, stress_field

GAUGE_HEADER = "t,p,s11,s22,s33,s12,s23,s13,u,v,w"


def principal_stress_metrics(q, mat):
    """Per-cell scalar stress measures (compression, tension, shear), Pa.

    With ordered principal stresses s1 >= s2 >= s3:
    compression = max(-s3, 0), tension = max(s1, 0), shear = (s1 - s3) / 2,
    so all three are non-negative.  Fluid cells short-circuit through the
    hydrostatic case (s1 = s3 = -p); elastic and blend cells diagonalize
    the full stress tensor.
    """
    sig = stress_field(q, mat)
    shape = sig.shape[1:]
    s_lo = sig[0].copy()
    s_hi = sig[0].copy()
    elastic = mat.kind != KIND_FLUID
    if np.any(elastic):
        idx = np.nonzero(elastic)
        n = len(idx[0])
        t = np.empty((n, 3, 3))
        s11, s22, s33, s12, s23, s13 = (sig[k][idx] for k in range(6))
        t[:, 0, 0] = s11
        t[:, 1, 1] = s22
        t[:, 2, 2] = s33
        t[:, 0, 1] = t[:, 1, 0] = s12
        t[:, 1, 2] = t[:, 2, 1] = s23
        t[:, 0, 2] = t[:, 2, 0] = s13
        w = np.linalg.eigvalsh(t)
        s_lo[idx] = w[:, 0]
        s_hi[idx] = w[:, 2]
    compression = np.maximum(-s_lo, 0.0)
    tension = np.maximum(s_hi, 0.0)
    shear = 0.5 * (s_hi - s_lo)
    return compression, tension, shear


def composite_root_metrics(hier):
    """Instantaneous (compression, tension, shear) at root resolution,
    each root cell taking its value from the finest covering patches.

    Fine blocks reduce to the root cell by max so subcell peaks are not
    averaged away.
    """
    root = hier.levels[0][0]
    shape = tuple(root.cells)
    out = np.zeros((3,) + shape)
    for level, patches in enumerate(hier.levels):
        r = hier.ratio**level
        for p in patches:
            cp, tn, sh = principal_stress_metrics(p.q, p.mat)
            inner = p.interior()
            stack = np.stack([cp[inner], tn[inner], sh[inner]])
            if level > 0:
                factors = tuple(r if a in p.active else 1 for a in range(3))
                stack = _block_max(stack, factors)
            sl = tuple(
                slice(p.anchor[a] // r, (p.anchor[a] + p.cells[a]) // r)
                if a in p.active else slice(None)
                for a in range(3)
            )
            out[(slice(None),) + sl] = stack
    return out


def _block_max(stack, factors):
    shape = [stack.shape[0]]
    for a in range(3):
        shape.extend([stack.shape[1 + a] // factors[a], factors[a]])
    return stack.reshape(shape).max(axis=(2, 4, 6))


class MaxStressMaps:
    """Running per-cell maxima of the three stress metrics, at root
    resolution.  All entries are non-negative and non-decreasing in time."""

    def __init__(self, hier):
        root = hier.levels[0][0]
        shape = tuple(root.cells)
        self.compression = np.zeros(shape)
        self.tension = np.zeros(shape)
        self.shear = np.zeros(shape)

    def update(self, hier):
        m = composite_root_metrics(hier)
        np.maximum(self.compression, m[0], out=self.compression)
        np.maximum(self.tension, m[1], out=self.tension)
        np.maximum(self.shear, m[2], out=self.shear)

    def arrays(self):
        return {
            "compression": self.compression,
            "tension": self.tension,
            "shear": self.shear,
        }

    @staticmethod
    def from_arrays(hier, d):
        maps = MaxStressMaps(hier)
        maps.compression = np.array(d["compression"])
        maps.tension = np.array(d["tension"])
        maps.shear = np.array(d["shear"])
        return maps


# ---------------------------------------------------------------------------
# point gauges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeSpec:
    name: str
    position: tuple


class GaugeRecorder:
    """Samples gauge points every step of the finest patch covering them.

    Rows are (t, p, s11, s22, s33, s12, s23, s13, u, v, w), linearly
    interpolated between cell centers; text output uses repr of each float
    so files are bit-reproducible.
    """

    def __init__(self, hier, gauges, preamble=None):
        self.gauges = list(gauges)
        self.rows = {g.name: [] for g in self.gauges}
        # raw CSV lines carried over from a checkpoint, kept verbatim so a
        # restarted run reproduces the uninterrupted file byte for byte
        self.preamble = {g.name: [] for g in self.gauges}
        if preamble:
            for name, text in preamble.items():
                lines = text.splitlines()
                if lines and lines[0] == GAUGE_HEADER:
                    lines = lines[1:]
                self.preamble[name] = lines
        root = hier.levels[0][0]
        for gsp in self.gauges:
            for a in root.active:
                if not (root.origin[a] <= gsp.position[a] <= root.upper(a)):
                    raise GaugeOutsideDomain(
                        "gauge %r at %r lies outside the domain"
                        % (gsp.name, gsp.position)
                    )

    def record_initial(self, hier):
        """One row per gauge from the state as built (fresh runs only)."""
        for gsp in self.gauges:
            found = hier.finest_patch_at(gsp.position)
            if found is not None:
                self.rows[gsp.name].append(sample_patch(found[1], gsp.position))

    def observe(self, hier, level):
        for gsp in self.gauges:
            found = hier.finest_patch_at(gsp.position)
            if found is None:
                continue
            owner_level, patch = found
            if owner_level != level:
                continue
            self.rows[gsp.name].append(sample_patch(patch, gsp.position))

    def csv_text(self, name):
        lines = [GAUGE_HEADER]
        lines.extend(self.preamble[name])
        for row in self.rows[name]:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def texts(self):
        return {g.name: self.csv_text(g.name) for g in self.gauges}


def sample_patch(patch: PatchGrid, position):
    """One gauge row from a patch at its current time."""
    sig = stress_field(patch.q, patch.mat)
    p = -(sig[0] + sig[1] + sig[2]) / 3.0
    vel = patch.q[6:9] / patch.mat.rho0
    fields = np.concatenate([p[None], sig, vel])
    vals = _interp_point(fields, patch, position)
    return (patch.time,) + tuple(float(v) for v in vals)


def _interp_point(fields, patch: PatchGrid, position):
    """Linear interpolation of (ncomp, padded...) data at one point."""
    out = fields
    for a in range(3):
        n = out.shape[1 + a]
        if a not in patch.active or n == 1:
            out = np.take(out, [0], axis=1 + a)
            continue
        fi = (position[a] - patch.origin[a]) / patch.dx[a] - 0.5 + GHOST
        fi = min(max(fi, 0.0), n - 1.0)
        i0 = int(min(math.floor(fi), n - 2))
        w = fi - i0
        sl = np.take(out, [i0], axis=1 + a) * (1.0 - w) \
            + np.take(out, [i0 + 1], axis=1 + a) * w
        out = sl
    return out.reshape(fields.shape[0])


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PressureBall:
    """Smooth compact overpressure: p = amplitude * cos(pi r / 2R)^2 inside
    radius R, zero velocity."""

    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.005
    amplitude: float = 1.0e6


@dataclass(frozen=True)
class AnalyticPulse:
    """Converging or diverging spherical pressure pulse.

    The front sits at ``front_radius`` from ``center``; material the front
    has already passed (lag time tau >= 0) carries

        p(tau) = peak * 2 exp(-tau/td) cos(0.575 tau/td + pi/3)

    which rises to ``peak`` at the front and swings through a rarefaction
    trough.  Velocity follows the plane-impedance relation u = p/(rho c)
    toward the center for 'in', outward for 'out'.
    """

    center: tuple = (0.0, 0.0, 0.0)
    front_radius: float = 0.05
    peak: float = 1.0e6
    decay_time: float = 1.1e-6
    direction: str = "in"
    support: float = 6.0  # tau cutoff in units of decay_time

    def waveform(self, tau):
        tau = np.asarray(tau, dtype=float)
        td = self.decay_time
        live = (tau >= 0.0) & (tau <= self.support * td)
        x = np.where(live, tau / td, 0.0)
        return np.where(
            live, self.peak * 2.0 * np.exp(-x) * np.cos(0.575 * x + np.pi / 3.0), 0.0
        )


def _strain_trace_of_pressure(p, mat):
    """Invert each cell's fluid pressure law for the strain trace.

    Uses the cell's own series truncation so a truncated-physics run starts
    from a state consistent with the law it will evolve under.
    """
    B, n, series = mat.B, mat.n, mat.series
    full = (1.0 + p / B) ** (-1.0 / n) - 1.0
    out = full
    if np.any(series == 1):
        out = np.where(series == 1, -p / (n * B), out)
    if np.any(series == 2):
        c2 = n * (n + 1.0) * B / 2.0
        disc = (n * B) ** 2 + 4.0 * c2 * p
        quad = (n * B - np.sqrt(np.maximum(disc, 0.0))) / (2.0 * c2)
        out = np.where(series == 2, quad, out)
    return out


def _radius_grid(patch: PatchGrid, center):
    x = patch.padded_centers(0)[:, None, None] - center[0]
    y = patch.padded_centers(1)[None, :, None] - center[1]
    z = patch.padded_centers(2)[None, None, :] - center[2]
    if 1 not in patch.active:
        y = np.zeros_like(y)
    return np.sqrt(x**2 + y**2 + z**2), (x, y, z)


def apply_initial_condition(spec, patch: PatchGrid):
    """Superimpose an initial disturbance on the rest state of a patch.

    Only fluid cells receive the pressure-derived strain and velocity;
    solid cells start quiescent.
    """
    mat = patch.mat
    fluid = mat.kind == KIND_FLUID
    if isinstance(spec, PressureBall):
        r, _ = _radius_grid(patch, spec.center)
        arg = np.minimum(r / spec.radius, 1.0)
        p = spec.amplitude * np.cos(0.5 * np.pi * arg) ** 2
        tr = np.where(fluid, _strain_trace_of_pressure(p, mat), 0.0)
        for k in (0, 1, 2):
            patch.q[k] += tr / 3.0
        return
    if isinstance(spec, AnalyticPulse):
        r, (x, y, z) = _radius_grid(patch, spec.center)
        c0 = np.sqrt(mat.n * mat.B / mat.rho0)  # rest sound speed, fluid law
        tau = np.where(r > 0.0, (spec.front_radius - r) / c0, np.inf)
        p = np.where(fluid, spec.waveform(tau), 0.0)
        tr = np.where(fluid, _strain_trace_of_pressure(p, mat), 0.0)
        for k in (0, 1, 2):
            patch.q[k] += tr / 3.0
        sign = -1.0 if spec.direction == "in" else 1.0
        rs = np.where(r > 0.0, r, 1.0)
        mom = sign * p / c0
        patch.q[6] += mom * x / rs
        if 1 in patch.active:
            patch.q[7] += mom * y / rs
        patch.q[8] += mom * z / rs
        return
    raise TypeError("unknown initial condition %r" % (spec,))
