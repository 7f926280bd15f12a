"""High-resolution wave-propagation update on a single patch.

The update is unsplit: normal sweeps along every active axis produce
fluctuations and limited correction fluxes from the same time-level data,
transverse (and in 3D corner) terms redistribute those fluctuations into
the correction fluxes of the other axes, and one final accumulation
applies everything.  All kernels are vectorized over whole patches; the
scalar interface solves in `riemann` define the reference behavior and the
tests hold the two paths together.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elasticity import AXIS_FAMILIES
from .eos import fluid_pressure_field, fluid_stiffness_field
from .errors import CflViolation, DegenerateImpedance, NoPropagation
from .riemann import FAMILY_KAPPA
from .statecore import GHOST, KIND_FLUID, PatchGrid

# ---------------------------------------------------------------------------
# limiters
# ---------------------------------------------------------------------------

def mc_limiter(theta):
    """Monotonized central-difference limiter, vectorized."""
    th = np.asarray(theta, dtype=float)
    return np.maximum(0.0, np.minimum(np.minimum(2.0 * th, 2.0), 0.5 * (1.0 + th)))


def minmod_limiter(theta):
    th = np.asarray(theta, dtype=float)
    return np.maximum(0.0, np.minimum(1.0, th))


def superbee_limiter(theta):
    th = np.asarray(theta, dtype=float)
    return np.maximum(0.0, np.maximum(np.minimum(1.0, 2.0 * th), np.minimum(2.0, th)))


LIMITERS = {
    "mc": mc_limiter,
    "minmod": minmod_limiter,
    "superbee": superbee_limiter,
    "none": None,
}


# ---------------------------------------------------------------------------
# per-step cell fields
# ---------------------------------------------------------------------------

# stress 6-vector ordering matches the strain slots: (11, 22, 33, 12, 23, 13)
_SIG_OF_STRAIN = (0, 1, 2, 3, 4, 5)


@dataclass
class CellFields:
    """Derived quantities evaluated once per step from the state snapshot."""

    vel: np.ndarray          # (3, shape) velocities m / rho0
    sig: np.ndarray          # (6, shape) stress components in strain order
    rho0: np.ndarray
    trace: np.ndarray
    fluid_k: np.ndarray      # tangent stiffness on fluid cells
    elastic: np.ndarray      # bool mask
    speeds: dict = field(default_factory=dict)   # axis -> (c_fam0, c_fam1, c_fam2)
    rows: dict = field(default_factory=dict)     # axis -> (r1, r2, r3, diag)

    def family_speeds(self, axis, mat):
        """Per-cell speeds of the three families for sweeps along `axis`."""
        if axis not in self.speeds:
            fams = AXIS_FAMILIES[axis]
            knorm = np.where(self.elastic, _cij(mat, fams[0][2]), self.fluid_k)
            cp = np.sqrt(knorm / self.rho0)
            cs_a = np.sqrt(_cij(mat, fams[1][2]) / (2.0 * self.rho0))
            cs_b = np.sqrt(_cij(mat, fams[2][2]) / (2.0 * self.rho0))
            self.speeds[axis] = (cp, cs_a, cs_b)
        return self.speeds[axis]

    def normal_row(self, axis, mat):
        """Normal-stress response row (and its diagonal) for one axis.

        Fluid cells use the tangent stiffness in every slot, which makes
        the longitudinal strain content reduce to the strain trace.
        """
        if axis not in self.rows:
            names = (("C11", "C12", "C13"), ("C12", "C22", "C23"),
                     ("C13", "C23", "C33"))[axis]
            row = tuple(np.where(self.elastic, _cij(mat, nm), self.fluid_k)
                        for nm in names)
            self.rows[axis] = row + (row[axis],)
        return self.rows[axis]


_CIJ_INDEX = {name: k for k, name in enumerate(
    ("C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66"))}


def _cij(mat, name):
    return mat.cij[_CIJ_INDEX[name]]


def stress_field(q, mat):
    """Vectorized stress 6-vector (11, 22, 33, 12, 23, 13) over a patch."""
    trace = q[0] + q[1] + q[2]
    fluid = mat.kind == KIND_FLUID
    sig = np.empty((6,) + q.shape[1:])
    # elastic and blend cells through the stiffness coefficients
    c = mat.cij
    sig[0] = c[0] * q[0] + c[3] * q[1] + c[4] * q[2]
    sig[1] = c[3] * q[0] + c[1] * q[1] + c[5] * q[2]
    sig[2] = c[4] * q[0] + c[5] * q[1] + c[2] * q[2]
    sig[3] = c[6] * q[3]
    sig[4] = c[8] * q[4]
    sig[5] = c[7] * q[5]
    if np.any(fluid):
        p = fluid_pressure_field(trace, mat.B, mat.n, mat.series, fluid)
        for k in range(3):
            sig[k] = np.where(fluid, -p, sig[k])
        for k in range(3, 6):
            sig[k] = np.where(fluid, 0.0, sig[k])
    return sig


def pressure_field(q, mat):
    """Scalar pressure: EOS pressure on fluid cells, -mean stress elsewhere."""
    sig = stress_field(q, mat)
    return -(sig[0] + sig[1] + sig[2]) / 3.0


def _fields_of(q, mat) -> CellFields:
    trace = q[0] + q[1] + q[2]
    fluid = mat.kind == KIND_FLUID
    fluid_k = fluid_stiffness_field(trace, mat.B, mat.n, mat.series, fluid)
    vel = q[6:9] / mat.rho0
    sig = stress_field(q, mat)
    return CellFields(vel=vel, sig=sig, rho0=mat.rho0, trace=trace,
                      fluid_k=fluid_k, elastic=~fluid)


def cell_fields(patch: PatchGrid) -> CellFields:
    return _fields_of(patch.q, patch.mat)


def flux_field(fields: CellFields, axis):
    """Flux vectors f(q) for sweeps along `axis`, evaluated per cell."""
    shape = fields.rho0.shape
    f = np.zeros((9,) + shape)
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        f[sidx] = -fields.vel[midx - 6] / fac
        f[midx] = -fields.sig[_SIG_OF_STRAIN[sidx]]
    return f


# ---------------------------------------------------------------------------
# normal sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    """Face-centered results of one normal sweep (faces along the axis)."""

    amdq: np.ndarray
    apdq: np.ndarray
    corr: np.ndarray     # limited correction fluxes, transverse terms add in
    courant: float


def _faces(arr, axis):
    """(left, right) cell views for faces along `axis` of a cell array."""
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return arr[tuple(lo)], arr[tuple(hi)]


def sweep(q, mat, axis, dt, dx, limiter="mc", fields=None):
    """Normal sweep along one axis over the whole padded patch.

    q is the component-first state snapshot and mat the matching material
    field; `fields` may pass in precomputed cell quantities so the three
    sweeps of a step share them.  Returns fluctuations and limited
    correction fluxes on every face of the padded index space; the caller
    decides which cells to update.
    """
    if fields is None:
        fields = _fields_of(q, mat)
    caxis = axis + 1   # arrays are component-first
    fl = flux_field(fields, axis)
    df = np.diff(fl, axis=caxis)
    face_shape = df.shape[1:]
    amdq = np.zeros((9,) + face_shape)
    apdq = np.zeros((9,) + face_shape)
    corr = np.zeros((9,) + face_shape)
    phi = LIMITERS[limiter] if limiter is not None else None
    courant = 0.0

    speeds = fields.family_speeds(axis, mat)
    rho_l, rho_r = _faces(fields.rho0, axis)
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        cl, cr = _faces(speeds[fam], axis)
        kl = fac * rho_l * cl
        kr = fac * rho_r * cr
        den = kl + kr
        a, b = df[sidx], df[midx]
        dead = den <= 0.0
        if fam == 0:
            if np.any(dead):
                raise DegenerateImpedance(
                    "longitudinal family lost impedance along axis %d" % axis)
            safe = den
        else:
            if np.any(dead & (b != 0.0)):
                raise DegenerateImpedance(
                    "shear family (%d,%d) axis %d carries stress across "
                    "zero-impedance interface" % (sidx, midx, axis))
            safe = np.where(dead, 1.0, den)
        beta_l = np.where(dead, 0.0, (a * kr + b) / safe)
        beta_r = np.where(dead, 0.0, (a * kl - b) / safe)

        moving_l = cl > 0.0
        moving_r = cr > 0.0
        bl = np.where(moving_l, beta_l, 0.0)
        br = np.where(moving_r, beta_r, 0.0)
        amdq[sidx] += bl
        amdq[midx] += bl * kl
        apdq[sidx] += br
        apdq[midx] += br * (-kr)

        cmax = max(np.max(cl, initial=0.0), np.max(cr, initial=0.0))
        courant = max(courant, cmax * dt / dx)

        if phi is None:
            continue
        # wave-by-wave limiting: compare each wave against the equivalent
        # wave at its upwind face, via eigen-coordinate inner products
        sl = kl       # momentum entry of the left-going eigenvector
        sr = -kr
        mid = [slice(None)] * df[sidx].ndim
        up1 = [slice(None)] * df[sidx].ndim
        dn1 = [slice(None)] * df[sidx].ndim
        mid[axis] = slice(1, -1)
        up1[axis] = slice(2, None)
        dn1[axis] = slice(None, -2)
        mid, up1, dn1 = tuple(mid), tuple(up1), tuple(dn1)

        for beta, s, moving, c, upwind in (
            (beta_l, sl, moving_l, cl, up1),     # left-going: upwind face is f+1
            (beta_r, sr, moving_r, cr, dn1),     # right-going: upwind face is f-1
        ):
            num = beta[upwind] * beta[mid] * (1.0 + s[upwind] * s[mid])
            den_loc = beta[mid] ** 2 * (1.0 + s[mid] ** 2)
            theta = np.where(den_loc > 0.0, num / np.where(den_loc > 0.0, den_loc, 1.0), 0.0)
            lim = phi(theta)
            z = np.where(moving[mid], lim * beta[mid], 0.0)
            nu = c[mid] * dt / dx
            half = 0.5 * (1.0 - nu)
            sgn = -1.0 if upwind is up1 else 1.0
            corr[(sidx,) + mid] += sgn * half * z
            corr[(midx,) + mid] += sgn * half * z * s[mid]
    return SweepResult(amdq, apdq, corr, courant)


# ---------------------------------------------------------------------------
# transverse terms
# ---------------------------------------------------------------------------

def _csl(ranges):
    """Index tuple for a component-first array from per-axis cell slices."""
    return (slice(None),) + tuple(ranges.get(a, slice(None)) for a in range(3))


def _weighted_split_field(v, fields: CellFields, mat, t_axis, region):
    """Vectorized speed-weighted transverse split of cell-indexed fluctuations.

    `v` is (9, *) over the cell region `region` (dict axis -> slice into the
    padded cell space).  Down-going speeds come from the t-neighbor below,
    up-going from above.  Returns (Bm, Bp) over the same region.
    """
    dn_region = dict(region)
    up_region = dict(region)
    r = region.get(t_axis, slice(None))
    lo = r.start if r.start is not None else 0
    hi = r.stop
    dn_region[t_axis] = slice(lo - 1, hi - 1 if hi is not None else -1)
    up_region[t_axis] = slice(lo + 1, hi + 1 if hi is not None else None)

    dn_idx = tuple(dn_region.get(a, slice(None)) for a in range(3))
    up_idx = tuple(up_region.get(a, slice(None)) for a in range(3))

    speeds = fields.family_speeds(t_axis, mat)
    row = fields.normal_row(t_axis, mat)
    a_p = np.zeros(v.shape[1:])
    for side_idx in (dn_idx, up_idx):
        r1, r2, r3, diag = (arr[side_idx] for arr in row)
        a_p += 0.5 * (r1 * v[0] + r2 * v[1] + r3 * v[2]) / diag
    bm = np.zeros_like(v)
    bp = np.zeros_like(v)
    for fam, (sidx, midx, _) in enumerate(AXIS_FAMILIES[t_axis]):
        fac = FAMILY_KAPPA[min(fam, 1)]
        c_dn = speeds[fam][dn_idx]
        c_up = speeds[fam][up_idx]
        r_dn = fields.rho0[dn_idx]
        r_up = fields.rho0[up_idx]
        k_dn = fac * r_dn * c_dn
        k_up = fac * r_up * c_up
        den = k_dn + k_up
        dead = den <= 0.0
        safe = np.where(dead, 1.0, den)
        a = a_p if fam == 0 else v[sidx]
        b = v[midx]
        g_dn = np.where(dead, 0.0, (a * k_up + b) / safe)
        g_up = np.where(dead, 0.0, (a * k_dn - b) / safe)
        bm[sidx] += -c_dn * g_dn
        bm[midx] += -c_dn * g_dn * k_dn
        bp[sidx] += c_up * g_up
        bp[midx] += c_up * g_up * (-k_up)
    return bm, bp


def _shift(region, axis, delta):
    out = dict(region)
    r = out.get(axis, slice(None))
    lo = (r.start or 0) + delta
    hi = None if r.stop is None else r.stop + delta
    out[axis] = slice(lo, hi)
    return out


# ---------------------------------------------------------------------------
# full step
# ---------------------------------------------------------------------------

@dataclass
class StepFluxes:
    """Per-axis (FM, FP) face arrays recorded for AMR conservation fixes.

    The cell update reads q_c -= dt/dx (FM at right face + FP at left face),
    with FM = amdq + corr and FP = apdq - corr.
    """

    fm: dict = field(default_factory=dict)
    fp: dict = field(default_factory=dict)


def step_hyperbolic(patch: PatchGrid, dt, transverse="full", limiter="mc",
                    need_fluxes=False, fields=None):
    """Advance one patch by dt (ghost cells must be filled already).

    transverse: 'none', 'simple' (transverse terms only), or 'full'
    (adds the 3D corner redistribution; identical to 'simple' in 2D).
    Returns StepFluxes when need_fluxes, else None.  Raises CflViolation
    if any wave crosses more than a cell.  `fields` lets a caller that
    already evaluated cell_fields on the pre-step state pass them in.
    """
    if transverse not in ("none", "simple", "full"):
        raise ValueError("transverse must be none, simple, or full")
    q, mat = patch.q, patch.mat
    active = patch.active
    if fields is None:
        fields = cell_fields(patch)

    results = {}
    for d in active:
        results[d] = sweep(q, mat, d, dt, patch.dx[d], limiter=limiter,
                           fields=fields)
    worst = max(results[d].courant for d in active)
    if worst > 1.0 + 1e-12:
        raise CflViolation("Courant number %.6f exceeds 1" % worst)

    corr = {d: results[d].corr for d in active}

    if transverse != "none" and len(active) > 1:
        for d in active:
            S_d = q.shape[1 + d]
            for t in active:
                if t == d:
                    continue
                third = [u for u in active if u != d and u != t]
                u_axis = third[0] if (transverse == "full" and third) else None
                _accumulate_transverse(results[d], corr[t], fields, mat,
                                       d, t, u_axis, dt, patch, S_d)

    # final accumulation: interior-of-one update along each active axis
    dq = np.zeros_like(q)
    for d in active:
        res = results[d]
        dtdx = dt / patch.dx[d]
        cells = {d: slice(1, -1)}
        left_faces = {d: slice(None, -1)}
        right_faces = {d: slice(1, None)}
        fm = res.amdq + corr[d]
        fp = res.apdq - corr[d]
        dq[_csl(cells)] -= dtdx * (
            fm[_csl(right_faces)]
            + fp[_csl(left_faces)]
        )
    q += dq

    if need_fluxes:
        out = StepFluxes()
        for d in active:
            out.fm[d] = results[d].amdq + corr[d]
            out.fp[d] = results[d].apdq - corr[d]
        return out
    return None


def _accumulate_transverse(res: SweepResult, corr_t, fields, mat,
                           d, t, u_axis, dt, patch, S_d):
    """Add transverse (and corner) contributions of axis-d fluctuations
    into the axis-t correction fluxes."""
    S_t = patch.q.shape[1 + t]
    half = dt / (2.0 * patch.dx[d])
    # home-cell regions: amdq lives in cell c = face f, apdq in c = f + 1
    for v_faces, home in ((res.amdq, "m"), (res.apdq, "p")):
        if home == "m":
            cell_region = {d: slice(0, S_d - 1), t: slice(1, S_t - 1)}
        else:
            cell_region = {d: slice(1, S_d), t: slice(1, S_t - 1)}
        if u_axis is not None:
            S_u = patch.q.shape[1 + u_axis]
            cell_region[u_axis] = slice(1, S_u - 1)
        face_region = dict(cell_region)
        if home == "p":
            face_region[d] = slice(cell_region[d].start - 1,
                                   cell_region[d].stop - 1)
        v = v_faces[_csl(face_region)]
        bm, bp = _weighted_split_field(v, fields, mat, t, cell_region)

        for piece, t_delta in ((bm, -1), (bp, 0)):
            # cells c write to the t-face at c + t_delta (face f is between
            # cells f and f+1); drop cells whose target face does not exist
            tgt = _shift(cell_region, t, t_delta)
            src = dict(cell_region)
            r = tgt[t]
            n_faces = S_t - 1
            lo, hi = r.start, r.stop
            clip_lo = max(0, -lo)
            clip_hi = max(0, hi - n_faces)
            if clip_lo or clip_hi:
                tgt[t] = slice(lo + clip_lo, hi - clip_hi)
                src[t] = slice(src[t].start + clip_lo, src[t].stop - clip_hi)
            sl_piece = _region_rel(src, cell_region)
            corr_t[_csl(tgt)] -= half * piece[sl_piece]

            if u_axis is not None:
                # corner terms: shift a fraction of this piece's influence
                # one cell along the third axis, in the direction its
                # u-split components propagate
                sixth = dt * dt / (6.0 * patch.dx[d] * patch.dx[u_axis])
                cm, cp = _weighted_split_field(piece, fields, mat, u_axis,
                                               cell_region)
                for cpart, u_delta, sgn in ((cm, -1, 1.0), (cp, 1, -1.0)):
                    corr_t[_csl(tgt)] += (-sgn) * sixth * cpart[sl_piece]
                    tgt_u = _shift(tgt, u_axis, u_delta)
                    src_u = dict(src)
                    ru = tgt_u[u_axis]
                    S_u = patch.q.shape[1 + u_axis]
                    clip_lo = max(0, -(ru.start))
                    clip_hi = max(0, ru.stop - S_u)
                    if clip_lo or clip_hi:
                        tgt_u[u_axis] = slice(ru.start + clip_lo, ru.stop - clip_hi)
                        src_u[u_axis] = slice(src_u[u_axis].start + clip_lo,
                                              src_u[u_axis].stop - clip_hi)
                    sl2 = _region_rel(src_u, cell_region)
                    corr_t[_csl(tgt_u)] += sgn * sixth * cpart[sl2]


def _region_rel(sub, base):
    """Index tuple selecting `sub` out of an array extracted over `base`."""
    out = [slice(None)]
    for a in range(3):
        b = base.get(a, slice(None))
        s = sub.get(a, slice(None))
        b_lo = b.start or 0
        s_lo = s.start or 0
        if s.stop is None and b.stop is None and s_lo == b_lo:
            out.append(slice(None))
        else:
            length = None
            if s.stop is not None:
                length = s.stop - s_lo
            lo = s_lo - b_lo
            out.append(slice(lo, lo + length if length is not None else None))
    return tuple(out)


# ---------------------------------------------------------------------------
# geometric source and time step control
# ---------------------------------------------------------------------------

def apply_axisym_source(patch: PatchGrid, dt):
    """Geometric source for axisymmetric runs, integrated exactly per cell.

    The x axis acts as the radius and the y slots hold the hoop strain
    and stress.  With the other strain components frozen, the split ODE

        d(e_tt)/dt = u / r,    rho0 du/dt = (C11 - C12)(e_rr - e_tt) / r

    is a harmonic oscillation of (e_tt, u) around e_tt = e_rr at frequency
    w = sqrt((C11 - C12) / rho0) / r, which we advance by its closed form.
    Forward Euler on this pair amplifies whenever a stiff solid sits near
    the axis (w dt is O(1) at r = dx/2); the exact rotation is neutrally
    stable at any dt and reduces to the plain e_tt += dt u / r update on
    fluid cells, where C11 - C12 vanishes.  The sigma_rz / r source on the
    z momentum commutes with the pair and keeps forward Euler, which is
    exact there because no source touches e_rz.  Applied to interior cells
    only; ghosts are refilled by the caller afterwards.
    """
    if not patch.axisym:
        raise ValueError("patch is not axisymmetric")
    inner = patch.interior()
    qin = patch.q[(slice(None),) + inner]
    mat = patch.mat
    rr = patch.centers(0)
    # broadcast radius over (x, y, z) interior block
    r = rr.reshape((-1,) + (1,) * (patch.q.ndim - 2))
    rho0 = mat.rho0[inner]
    u = qin[6] / rho0
    shear2 = (mat.cij[0] - mat.cij[3])[inner]  # C11 - C12, zero on fluids
    sig_rz = (mat.cij[7] * patch.q[5])[inner]
    if np.any(shear2 > 0.0):
        w = np.sqrt(np.maximum(shear2, 0.0) / rho0) / r
        th = w * dt
        solid = th > 0.0
        th_safe = np.where(solid, th, 1.0)
        sinc = np.where(solid, np.sin(th_safe) / th_safe, 1.0)
        amp = qin[1] - qin[0]
        e_tt = qin[0] + amp * np.cos(th) + u * dt * sinc / r
        u_new = u * np.cos(th) - amp * r * w * np.sin(th)
        qin[1] = np.where(solid, e_tt, qin[1] + dt * u / r)
        qin[6] = np.where(solid, rho0 * u_new, qin[6])
    else:
        qin[1] += dt * u / r
    qin[8] += dt * sig_rz / r


def stable_dt(patch: PatchGrid, cfl=0.9):
    """Largest dt with Courant number <= cfl on this patch."""
    fields = cell_fields(patch)
    rate = 0.0
    for d in patch.active:
        speeds = fields.family_speeds(d, patch.mat)
        cmax = max(float(np.max(s)) for s in speeds)
        rate = max(rate, cmax / patch.dx[d])
    if rate <= 0.0:
        raise NoPropagation("no nonzero characteristic speed on the patch")
    return cfl / rate


# ---------------------------------------------------------------------------
# physical boundary conditions
# ---------------------------------------------------------------------------

# components flipping sign under reflection at a wall normal to each axis
REFLECT_ODD = {0: (3, 5, 6), 1: (3, 4, 7), 2: (4, 5, 8)}


def apply_physical_bc(patch: PatchGrid, bc):
    """Fill ghost layers from boundary conditions.

    bc maps axis -> (low kind, high kind) with kinds 'outflow', 'reflect',
    'periodic'; None skips a side (used on refined patches whose face lies
    inside the domain).  Each axis is filled across the full transverse
    extent so corner ghosts end up consistent.
    """
    g = GHOST
    q = patch.q
    for a in patch.active:
        lo_kind, hi_kind = bc.get(a, ("outflow", "outflow"))
        n = q.shape[1 + a]
        for side, kind in ((0, lo_kind), (1, hi_kind)):
            if kind is None:
                continue
            idx = [slice(None)] * q.ndim
            if kind == "periodic":
                if side == 0:
                    src, dst = slice(n - 2 * g, n - g), slice(0, g)
                else:
                    src, dst = slice(g, 2 * g), slice(n - g, n)
                idx[1 + a] = dst
                jdx = list(idx)
                jdx[1 + a] = src
                q[tuple(idx)] = q[tuple(jdx)]
            elif kind == "outflow":
                edge = g if side == 0 else n - g - 1
                for k in range(g):
                    dst = k if side == 0 else n - 1 - k
                    idx[1 + a] = dst
                    jdx = list(idx)
                    jdx[1 + a] = edge
                    q[tuple(idx)] = q[tuple(jdx)]
            elif kind == "reflect":
                odd = REFLECT_ODD[a]
                for k in range(g):
                    dst = g - 1 - k if side == 0 else n - g + k
                    src = g + k if side == 0 else n - g - 1 - k
                    idx[1 + a] = dst
                    jdx = list(idx)
                    jdx[1 + a] = src
                    q[tuple(idx)] = q[tuple(jdx)]
                    for comp in odd:
                        cdx = list(idx)
                        cdx[0] = comp
                        cjx = list(jdx)
                        cjx[0] = comp
                        q[tuple(cdx)] = -q[tuple(cjx)]
            else:
                raise ValueError("unknown boundary kind %r" % (kind,))


def apply_material_bc(patch: PatchGrid, bc):
    """Mirror or wrap the material arrays into ghost layers (once per build)."""
    g = GHOST
    arrays = list(patch.mat.arrays_dict().values())
    for a in patch.active:
        lo_kind, hi_kind = bc.get(a, ("outflow", "outflow"))
        for arr in arrays:
            ax = arr.ndim - 3 + a   # cij has a leading component axis
            n = arr.shape[ax]
            for side, kind in ((0, lo_kind), (1, hi_kind)):
                if kind is None:
                    continue
                for k in range(g):
                    if kind == "periodic":
                        dst = k if side == 0 else n - g + k
                        src = n - 2 * g + k if side == 0 else g + k
                    elif kind == "reflect":
                        dst = g - 1 - k if side == 0 else n - g + k
                        src = g + k if side == 0 else n - g - 1 - k
                    else:
                        dst = k if side == 0 else n - 1 - k
                        src = g if side == 0 else n - g - 1
                    idx = [slice(None)] * arr.ndim
                    jdx = [slice(None)] * arr.ndim
                    idx[ax] = dst
                    jdx[ax] = src
                    arr[tuple(idx)] = arr[tuple(jdx)]
