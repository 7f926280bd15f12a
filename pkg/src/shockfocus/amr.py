"""Block-structured mesh refinement over patch grids.

Levels refine by a fixed integer ratio and advance with subcycled time
steps.  Each cycle: flag coarse cells on jump indicators, cluster flags
into boxes, fill ghost layers (same-level copy, space-time interpolation
from the parent, physical conditions at domain faces), advance, then
synchronize by conservative averaging plus a flux fix along coarse-fine
edges (one- and two-dimensional runs; the fix is skipped in 3D).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoPropagation, TimeBracketMissing
from .statecore import GHOST, NCOMP, PatchGrid
from .wavesolver import (
    apply_axisym_source,
    apply_physical_bc,
    cell_fields,
    flux_field,
    pressure_field,
    stable_dt,
    step_hyperbolic,
)


@dataclass(frozen=True)
class FlagRule:
    """Refinement indicators: flag a cell when the jump to a neighbor
    exceeds ``pressure_jump`` [Pa] or ``density_jump`` [kg/m3] in the
    reference density.  ``buffer`` dilates the flag set so features stay
    covered between regrids."""

    pressure_jump: float = float("inf")
    density_jump: float = float("inf")
    buffer: int = 4


def flag_cells(patch: PatchGrid, rule: FlagRule) -> np.ndarray:
    """Boolean flags over the patch interior."""
    fl = np.zeros(patch.q.shape[1:], dtype=bool)
    indicators = []
    if np.isfinite(rule.pressure_jump):
        indicators.append((pressure_field(patch.q, patch.mat), rule.pressure_jump))
    if np.isfinite(rule.density_jump):
        indicators.append((patch.mat.rho0, rule.density_jump))
    for fieldv, thr in indicators:
        for a in patch.active:
            jump = np.abs(np.diff(fieldv, axis=a)) > thr
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            fl[tuple(lo)] |= jump
            fl[tuple(hi)] |= jump
    return fl[patch.interior()]


def _dilate(mask: np.ndarray, active, width: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(width):
        grown = out.copy()
        for a in active:
            lo = [slice(None)] * out.ndim
            hi = [slice(None)] * out.ndim
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            grown[tuple(lo)] |= out[tuple(hi)]
            grown[tuple(hi)] |= out[tuple(lo)]
        out = grown
    return out


def _erode(mask: np.ndarray, active, width: int = 1) -> np.ndarray:
    """Shrink a mask; cells at the array edge keep their value so regions
    touching the domain boundary are not eaten away."""
    out = mask.copy()
    for _ in range(width):
        shrunk = out.copy()
        for a in active:
            pad = [(0, 0)] * out.ndim
            pad[a] = (1, 1)
            padded = np.pad(out, pad, mode="edge")
            lo = [slice(None)] * out.ndim
            hi = [slice(None)] * out.ndim
            lo[a] = slice(0, -2)
            hi[a] = slice(2, None)
            shrunk &= padded[tuple(lo)] & padded[tuple(hi)]
        out = shrunk
    return out


def cluster_flags(flags: np.ndarray, active=None, min_size: int = 4,
                  fill_ratio: float = 0.7):
    """Cover the flagged cells with boxes.

    Greedy bisection: shrink to the bounding box, accept when the flag
    fill fraction reaches ``fill_ratio`` (or the box is already small),
    otherwise split the longest axis where the flag histogram is thinnest
    and recurse.  Returns (lo, hi) index tuples, hi exclusive.
    """
    flags = np.asarray(flags, dtype=bool)
    if active is None:
        active = tuple(a for a in range(flags.ndim) if flags.shape[a] > 1)
    boxes = []

    def recurse(lo, hi):
        sub = flags[tuple(slice(l, h) for l, h in zip(lo, hi))]
        if not sub.any():
            return
        pts = np.argwhere(sub)
        mn, mx = pts.min(axis=0), pts.max(axis=0)
        lo = [l + int(m) for l, m in zip(lo, mn)]
        hi = [l + int(m) + 1 for l, m in zip(lo, mx - mn)]
        sub = flags[tuple(slice(l, h) for l, h in zip(lo, hi))]
        fill = sub.sum() / sub.size
        longest, axis = max((hi[a] - lo[a], a) for a in active)
        if fill >= fill_ratio or longest <= min_size:
            boxes.append((tuple(lo), tuple(hi)))
            return
        others = tuple(i for i in range(flags.ndim) if i != axis)
        hist = sub.sum(axis=others)
        cuts = range(min_size, longest - min_size + 1)
        if not cuts:
            boxes.append((tuple(lo), tuple(hi)))
            return
        best = min(cuts, key=lambda c: (hist[c - 1] + hist[c], abs(c - longest / 2)))
        mid_hi = list(hi)
        mid_hi[axis] = lo[axis] + best
        mid_lo = list(lo)
        mid_lo[axis] = lo[axis] + best
        recurse(lo, mid_hi)
        recurse(mid_lo, hi)

    recurse([0] * flags.ndim, list(flags.shape))
    return boxes


def _interp_separable(src: np.ndarray, fi_list) -> np.ndarray:
    """Linear interpolation of (ncomp, S0, S1, S2) data onto the tensor
    grid of fractional indices fi_list (one 1D array per axis)."""
    out = src
    for ax, fi in enumerate(fi_list):
        n = out.shape[1 + ax]
        if n == 1:
            continue
        i0 = np.clip(np.floor(fi).astype(int), 0, n - 2)
        w = fi - i0
        a = np.take(out, i0, axis=1 + ax)
        b = np.take(out, i0 + 1, axis=1 + ax)
        shape = [1] * out.ndim
        shape[1 + ax] = len(fi)
        w = w.reshape(shape)
        out = a * (1.0 - w) + b * w
    return out


def _block_mean(arr: np.ndarray, factors) -> np.ndarray:
    """Mean over blocks of shape ``factors`` along the trailing 3 axes."""
    lead = arr.shape[: arr.ndim - 3]
    view = arr
    shape = list(lead)
    for a in range(3):
        n = view.shape[len(lead) + a]
        f = factors[a]
        shape.extend([n // f, f])
    view = view.reshape(shape)
    for k in range(3):
        view = view.mean(axis=len(lead) + k + 1)
    return view


class AmrHierarchy:
    """Nested patch levels advancing in lockstep.

    The root level is a single patch covering the whole domain.  Finer
    levels are rebuilt every ``regrid_interval`` steps of their parent
    level (cascading down), advance ``ratio`` substeps per parent step,
    and are synchronized back by conservative averaging plus the
    coarse-fine flux fix.

    ``material_builder``: callable(patch) filling patch.mat (analytic
    rebuild at the patch resolution).  Without one, children copy the
    nearest parent cell's material.
    ``observers``: callables (hierarchy, level) invoked after every level
    step; gauges and running maxima hook in here.
    """

    def __init__(self, root: PatchGrid, bc, max_levels: int = 1, ratio: int = 2,
                 rule: FlagRule | None = None, material_builder=None,
                 transverse: str = "full", limiter: str = "mc",
                 regrid_interval: int = 4, reflux: bool = True,
                 min_box: int = 4, fill_ratio: float = 0.7):
        if root.level != 0:
            raise ValueError("root patch must be level 0")
        self.levels = [[root]]
        for _ in range(max_levels - 1):
            self.levels.append([])
        self.bc = bc
        self.max_levels = max_levels
        self.ratio = int(ratio)
        self.rule = rule
        self.material_builder = material_builder
        self.transverse = transverse
        self.limiter = limiter
        self.regrid_interval = regrid_interval
        self.min_box = min_box
        self.fill_ratio = fill_ratio
        self.active = root.active
        self.axisym = root.axisym
        self.root_cells = root.cells
        self.root_dx = root.dx
        self.domain_origin = root.origin
        self.reflux = reflux and len(root.active) <= 2
        self.steps = [0] * max_levels
        self.observers = []
        self.pool = None   # optional concurrent.futures executor for patch steps
        self._old = [None] * max_levels
        self._registers = [None] * max_levels
        self._coarse_fluxes = [None] * max_levels
        self._coarse_pointflux = [None] * max_levels
        if any(k == "periodic" for pair in bc.values() for k in pair) and max_levels > 1:
            raise ValueError("periodic boundaries are not supported with refinement")

    # ------------------------------------------------------------------
    # index-space helpers
    # ------------------------------------------------------------------

    def level_cells(self, level: int):
        return tuple(
            n * self.ratio**level if a in self.active else 1
            for a, n in enumerate(self.root_cells)
        )

    def level_dx(self, level: int):
        return tuple(
            d / self.ratio**level if a in self.active else d
            for a, d in enumerate(self.root_dx)
        )

    def finest_patch_at(self, point):
        """(level, patch) of the finest patch whose interior contains the
        physical point; None when outside the domain."""
        for level in range(len(self.levels) - 1, -1, -1):
            for p in self.levels[level]:
                ok = True
                for a in p.active:
                    if not (p.origin[a] <= point[a] <= p.upper(a)):
                        ok = False
                        break
                if ok:
                    return level, p
        return None

    def _patch_bc(self, patch: PatchGrid):
        """Per-patch boundary map: real conditions at domain faces, None
        (leave interpolated data alone) elsewhere."""
        cells = self.level_cells(patch.level)
        out = {}
        for a in patch.active:
            lo_kind, hi_kind = self.bc.get(a, ("outflow", "outflow"))
            lo = lo_kind if patch.anchor[a] == 0 else None
            hi = hi_kind if patch.anchor[a] + patch.cells[a] == cells[a] else None
            out[a] = (lo, hi)
        return out

    # ------------------------------------------------------------------
    # ghost filling
    # ------------------------------------------------------------------

    def _parent_state_at(self, level: int, t: float):
        """Blended (space of parent padded arrays) states at time t for
        every parent patch of `level`."""
        parents = self.levels[level - 1]
        old = self._old[level - 1]
        out = []
        for i, p in enumerate(parents):
            if old is not None and i < len(old):
                t0, q0 = old[i]
            else:
                t0, q0 = p.time, p.q
            span = p.time - t0
            tol = 1e-9 * max(abs(t0), abs(p.time), 1e-30) + 1e-30
            if t < t0 - tol or t > p.time + tol:
                raise TimeBracketMissing(
                    "level %d needs parent data at t=%r outside [%r, %r]"
                    % (level, t, t0, p.time)
                )
            if span <= 0.0:
                out.append((p, q0))
            else:
                th = min(max((t - t0) / span, 0.0), 1.0)
                out.append((p, (1.0 - th) * q0 + th * p.q))
        return out

    def fill_ghosts(self, level: int, patch: PatchGrid, t: float | None = None):
        """Fill every ghost cell of one patch for time ``t``.

        Order: parent interpolation paints all ghost slabs (refined levels),
        same-level neighbors overwrite where they overlap, and physical
        conditions overwrite the domain faces.
        """
        if t is None:
            t = patch.time
        g = GHOST
        if level > 0:
            blended = self._parent_state_at(level, t)
            for a in patch.active:
                S = patch.q.shape[1 + a]
                for rng in (slice(0, g), slice(S - g, S)):
                    region = [slice(None)] * 3
                    region[a] = rng
                    self._paint_from_parents(patch, tuple(region), blended)
        for other in self.levels[level]:
            if other is patch:
                continue
            self._copy_overlap(patch, other)
        apply_physical_bc(patch, self._patch_bc(patch))

    def _paint_from_parents(self, patch: PatchGrid, region, blended):
        coords = []
        for a in range(3):
            c = patch.padded_centers(a)[region[a]]
            coords.append(c)
        for parent, qb in blended:
            fis = []
            sels = []
            ok = True
            for a in range(3):
                if a not in patch.active:
                    fis.append(np.zeros(1))
                    sels.append(slice(None))
                    continue
                S = qb.shape[1 + a]
                fi = (coords[a] - parent.origin[a]) / parent.dx[a] - 0.5 + GHOST
                inside = (fi >= 0.0) & (fi <= S - 1.0)
                if not inside.any():
                    ok = False
                    break
                lo = int(np.argmax(inside))
                hi = len(inside) - int(np.argmax(inside[::-1]))
                fis.append(fi[lo:hi])
                sels.append(slice(lo, hi))
            if not ok:
                continue
            vals = _interp_separable(qb, fis)
            target = [slice(None)]
            for a in range(3):
                base = region[a]
                if isinstance(sels[a], slice) and sels[a] != slice(None):
                    start = (base.start or 0) + sels[a].start
                    target.append(slice(start, start + (sels[a].stop - sels[a].start)))
                else:
                    target.append(base)
            patch.q[tuple(target)] = vals

    def _copy_overlap(self, dst: PatchGrid, src: PatchGrid):
        """Copy src interior data into dst padded cells where they overlap
        in the level index space."""
        dst_sl = [slice(None)]
        src_sl = [slice(None)]
        for a in range(3):
            if a not in dst.active:
                dst_sl.append(slice(None))
                src_sl.append(slice(None))
                continue
            g = GHOST
            d_lo = dst.anchor[a] - g
            d_hi = dst.anchor[a] + dst.cells[a] + g
            s_lo = src.anchor[a]
            s_hi = src.anchor[a] + src.cells[a]
            lo = max(d_lo, s_lo)
            hi = min(d_hi, s_hi)
            if hi <= lo:
                return
            dst_sl.append(slice(lo - d_lo, hi - d_lo))
            src_sl.append(slice(lo - s_lo + g, hi - s_lo + g))
        dst.q[tuple(dst_sl)] = src.q[tuple(src_sl)]

    # ------------------------------------------------------------------
    # regridding
    # ------------------------------------------------------------------

    def regrid(self, from_level: int = 0):
        """Rebuild every level finer than ``from_level`` from fresh flags."""
        for L in range(from_level, self.max_levels - 1):
            self._rebuild_child_level(L)

    def _rebuild_child_level(self, L: int):
        parents = self.levels[L]
        if not parents or self.rule is None:
            self.levels[L + 1] = []
            return
        canvas = np.zeros(self.level_cells(L), dtype=bool)
        for p in parents:
            self.fill_ghosts(L, p, p.time)
            sl = tuple(
                slice(p.anchor[a], p.anchor[a] + p.cells[a]) if a in self.active
                else slice(None)
                for a in range(3)
            )
            canvas[sl] |= flag_cells(p, self.rule)
        canvas = _dilate(canvas, self.active, self.rule.buffer)
        if L > 0:
            covered = np.zeros_like(canvas)
            for p in parents:
                sl = tuple(
                    slice(p.anchor[a], p.anchor[a] + p.cells[a]) if a in self.active
                    else slice(None)
                    for a in range(3)
                )
                covered[sl] = True
            canvas &= _erode(covered, self.active, 1)
        boxes = cluster_flags(canvas, self.active, self.min_box, self.fill_ratio)
        # keep each box inside a single parent rectangle
        clipped = []
        for lo, hi in boxes:
            for p in parents:
                blo, bhi, empty = [], [], False
                for a in range(3):
                    if a not in self.active:
                        blo.append(0)
                        bhi.append(1)
                        continue
                    l = max(lo[a], p.anchor[a])
                    h = min(hi[a], p.anchor[a] + p.cells[a])
                    if h <= l:
                        empty = True
                        break
                    blo.append(l)
                    bhi.append(h)
                if not empty:
                    clipped.append((tuple(blo), tuple(bhi)))
        t_now = parents[0].time
        blended = None
        new_patches = []
        for lo, hi in clipped:
            child = self._make_child(L, lo, hi, t_now)
            if blended is None:
                blended = [(p, p.q) for p in parents]
            self._paint_from_parents(child, (slice(None),) * 3, blended)
            for old_child in self.levels[L + 1]:
                self._copy_overlap(child, old_child)
            new_patches.append(child)
        self.levels[L + 1] = new_patches
        self._old[L + 1] = None
        self._registers[L + 1] = None

    def _make_child(self, L: int, lo, hi, t_now: float) -> PatchGrid:
        r = self.ratio
        anchor, cells, origin = [], [], []
        dx = self.level_dx(L + 1)
        for a in range(3):
            if a in self.active:
                anchor.append(lo[a] * r)
                cells.append((hi[a] - lo[a]) * r)
                origin.append(self.domain_origin[a] + lo[a] * r * dx[a])
            else:
                anchor.append(0)
                cells.append(1)
                origin.append(self.domain_origin[a])
        child = PatchGrid(
            level=L + 1, anchor=tuple(anchor), cells=tuple(cells), dx=dx,
            origin=tuple(origin), active=self.active, time=t_now,
            axisym=self.axisym,
        )
        if self.material_builder is not None:
            self.material_builder(child)
        else:
            self._material_nearest(child)
        return child

    def _material_nearest(self, child: PatchGrid):
        """Fallback material prolongation: nearest parent cell."""
        parent = None
        for p in self.levels[child.level - 1]:
            inside = all(
                p.anchor[a] * self.ratio <= child.anchor[a]
                and child.anchor[a] < (p.anchor[a] + p.cells[a]) * self.ratio
                for a in child.active
            )
            if inside:
                parent = p
                break
        if parent is None:
            raise ValueError("new patch does not sit inside any parent")
        idx = []
        for a in range(3):
            c = child.padded_centers(a)
            S = parent.mat.rho0.shape[a]
            fi = (c - parent.origin[a]) / parent.dx[a] - 0.5 + (GHOST if a in parent.active else 0)
            idx.append(np.clip(np.rint(fi).astype(int), 0, S - 1))
        ix = idx[0][:, None, None]
        iy = idx[1][None, :, None]
        iz = idx[2][None, None, :]
        child.mat.copy_from(parent.mat, (slice(None),) * 3, (ix, iy, iz))

    # ------------------------------------------------------------------
    # time advance
    # ------------------------------------------------------------------

    def stable_root_dt(self, cfl: float = 0.9) -> float:
        best = None
        for L, patches in enumerate(self.levels):
            for p in patches:
                dt = stable_dt(p, cfl) * self.ratio**L
                best = dt if best is None else min(best, dt)
        if best is None:
            raise NoPropagation("hierarchy has no patches")
        return best

    def advance(self, dt: float):
        """One root-level step (children subcycle and synchronize)."""
        self._advance_level(0, dt)

    def _advance_level(self, level: int, dt: float):
        if self.rule is not None and level + 1 < self.max_levels \
                and self.steps[level] % self.regrid_interval == 0:
            self.regrid(level)
        patches = self.levels[level]
        if not patches:
            return
        for p in patches:
            self.fill_ghosts(level, p, p.time)
        self._old[level] = [(p.time, p.q.copy()) for p in patches]
        children = self.levels[level + 1] if level + 1 < self.max_levels else []
        need_fluxes = self.reflux and (bool(children) or level > 0)

        def step_one(p):
            fields = cell_fields(p) if need_fluxes else None
            edge_flux = None
            if need_fluxes:
                # pointwise flux columns of the pre-step state: the update
                # is flux-form with interface flux f(ql) + FM = f(qr) - FP,
                # so the synchronization fix needs f as well as FM/FP
                edge_flux = {a: flux_field(fields, a) for a in p.active}
            fl = step_hyperbolic(p, dt, transverse=self.transverse,
                                 limiter=self.limiter, need_fluxes=need_fluxes,
                                 fields=fields)
            if p.axisym:
                apply_axisym_source(p, dt)
            p.time += dt
            return fl, edge_flux

        # Each patch touches only its own arrays, so a pool changes nothing
        # but wall clock; results are collected in list order either way.
        if self.pool is None or len(patches) == 1:
            results = [step_one(p) for p in patches]
        else:
            results = list(self.pool.map(step_one, patches))
        fluxes = [fl for fl, _ in results]
        pointfluxes = [ef for _, ef in results]
        if self.reflux and level > 0:
            for i, p in enumerate(patches):
                self._accumulate_register(level, i, p, fluxes[i],
                                          pointfluxes[i], dt)
        if self.reflux and children:
            self._coarse_fluxes[level] = fluxes
            self._coarse_pointflux[level] = pointfluxes
        self.steps[level] += 1
        for cb in self.observers:
            cb(self, level)
        if children:
            self._reset_registers(level + 1)
            for _ in range(self.ratio):
                self._advance_level(level + 1, dt / self.ratio)
            self._sync(level, dt)

    # ------------------------------------------------------------------
    # coarse-fine synchronization
    # ------------------------------------------------------------------

    def _reset_registers(self, level: int):
        regs = []
        for p in self.levels[level]:
            entry = {}
            for a in p.active:
                shape = tuple(
                    p.cells[t] if (t in p.active and t != a) else 1
                    for t in range(3)
                )
                entry[(a, 0)] = np.zeros((NCOMP,) + shape)
                entry[(a, 1)] = np.zeros((NCOMP,) + shape)
            regs.append(entry)
        self._registers[level] = regs

    def _accumulate_register(self, level: int, i: int, p: PatchGrid, fl,
                             edge_flux, dt: float):
        """Add this substep's interface fluxes dt*(f(ql)+FM) (low side) and
        dt*(f(qr)-FP) (high side) along the patch boundary faces."""
        regs = self._registers[level]
        if regs is None or i >= len(regs):
            return
        g = GHOST
        for a in p.active:
            n = p.cells[a]
            sides = (
                (0, g - 1, g - 1, fl.fm[a], 1.0),
                (1, g + n - 1, g + n, fl.fp[a], -1.0),
            )
            for side, fidx, cidx, rec, sgn in sides:
                fsl = [slice(None)]
                csl = [slice(None)]
                for t in range(3):
                    if t == a:
                        fsl.append(slice(fidx, fidx + 1))
                        csl.append(slice(cidx, cidx + 1))
                    elif t in p.active:
                        tsl = slice(g, g + p.cells[t])
                        fsl.append(tsl)
                        csl.append(tsl)
                    else:
                        fsl.append(slice(None))
                        csl.append(slice(None))
                regs[i][(a, side)] += dt * (
                    edge_flux[a][tuple(csl)] + sgn * rec[tuple(fsl)]
                )

    def _sync(self, level: int, dt: float):
        parents = self.levels[level]
        children = self.levels[level + 1]
        if not children:
            return
        for child in children:
            self._average_down(child, parents)
        if self.reflux:
            self._apply_reflux(level, dt)

    def _average_down(self, child: PatchGrid, parents):
        r = self.ratio
        factors = tuple(r if a in child.active else 1 for a in range(3))
        coarse = _block_mean(child.interior_q(), factors)
        c_lo = tuple(child.anchor[a] // r if a in child.active else 0 for a in range(3))
        c_hi = tuple(
            (child.anchor[a] + child.cells[a]) // r if a in child.active else 1
            for a in range(3)
        )
        for p in parents:
            dst = [slice(None)]
            src = [slice(None)]
            ok = True
            for a in range(3):
                if a not in child.active:
                    dst.append(slice(None))
                    src.append(slice(None))
                    continue
                lo = max(c_lo[a], p.anchor[a])
                hi = min(c_hi[a], p.anchor[a] + p.cells[a])
                if hi <= lo:
                    ok = False
                    break
                dst.append(slice(lo - p.anchor[a] + GHOST, hi - p.anchor[a] + GHOST))
                src.append(slice(lo - c_lo[a], hi - c_lo[a]))
            if ok:
                p.q[tuple(dst)] = coarse[tuple(src)]

    def _covered_canvas(self, level: int) -> np.ndarray:
        canvas = np.zeros(self.level_cells(level), dtype=bool)
        r = self.ratio
        for child in self.levels[level + 1]:
            sl = tuple(
                slice(child.anchor[a] // r, (child.anchor[a] + child.cells[a]) // r)
                if a in self.active else slice(None)
                for a in range(3)
            )
            canvas[sl] = True
        return canvas

    def _apply_reflux(self, level: int, dt: float):
        """Fix coarse cells bordering fine patches so the face flux matches
        the time-integrated fine flux (1D / 2D runs)."""
        children = self.levels[level + 1]
        parents = self.levels[level]
        fluxes = self._coarse_fluxes[level]
        pointflux = self._coarse_pointflux[level]
        regs = self._registers[level + 1]
        if fluxes is None or regs is None:
            return
        covered = self._covered_canvas(level)
        r = self.ratio
        lvl_cells = self.level_cells(level)
        for ci, child in enumerate(children):
            for a in child.active:
                trans = [t for t in child.active if t != a]
                taxis = trans[0] if trans else None
                for side in (0, 1):
                    reg = regs[ci][(a, side)]
                    if taxis is not None:
                        factors = tuple(r if t == taxis else 1 for t in range(3))
                        integ = _block_mean(reg, factors)
                    else:
                        integ = reg
                    if side == 0:
                        face = child.anchor[a] // r
                        cell = face - 1
                    else:
                        face = (child.anchor[a] + child.cells[a]) // r
                        cell = face
                    if cell < 0 or cell >= lvl_cells[a]:
                        continue
                    t_lo = child.anchor[taxis] // r if taxis is not None else 0
                    t_hi = ((child.anchor[taxis] + child.cells[taxis]) // r
                            if taxis is not None else 1)
                    for pi, parent in enumerate(parents):
                        if not (parent.anchor[a] <= cell
                                < parent.anchor[a] + parent.cells[a]):
                            continue
                        p_lo, p_hi = t_lo, t_hi
                        if taxis is not None:
                            p_lo = max(t_lo, parent.anchor[taxis])
                            p_hi = min(t_hi, parent.anchor[taxis]
                                       + parent.cells[taxis])
                            if p_hi <= p_lo:
                                continue
                        rec = fluxes[pi].fm[a] if side == 0 else fluxes[pi].fp[a]
                        sgn = 1.0 if side == 0 else -1.0
                        fidx = face - parent.anchor[a] + GHOST - 1
                        cloc = cell - parent.anchor[a] + GHOST
                        fsl, csl, mask_idx = [slice(None)], [slice(None)], []
                        for t in range(3):
                            if t == a:
                                fsl.append(slice(fidx, fidx + 1))
                                csl.append(slice(cloc, cloc + 1))
                                mask_idx.append(slice(cell, cell + 1))
                            elif t == taxis:
                                tsl = slice(p_lo - parent.anchor[t] + GHOST,
                                            p_hi - parent.anchor[t] + GHOST)
                                fsl.append(tsl)
                                csl.append(tsl)
                                mask_idx.append(slice(p_lo, p_hi))
                            else:
                                fsl.append(slice(None))
                                csl.append(slice(None))
                                mask_idx.append(slice(None))
                        coarse_int = dt * (
                            pointflux[pi][a][tuple(csl)] + sgn * rec[tuple(fsl)]
                        )
                        fine_sl = [slice(None), slice(None), slice(None), slice(None)]
                        if taxis is not None:
                            fine_sl[1 + taxis] = slice(p_lo - t_lo, p_hi - t_lo)
                        corr = sgn * (coarse_int - integ[tuple(fine_sl)]) / parent.dx[a]
                        open_mask = ~covered[tuple(mask_idx)]
                        block = parent.q[tuple(csl)]
                        block += np.where(open_mask[None, ...], corr, 0.0)
