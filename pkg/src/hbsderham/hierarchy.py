"""Domain hierarchies, hierarchical basis selection and the local index sets.

Refinement domains are stored as boolean masks over the Bézier cells of the
level they refine into, so every "supported on" question is an integer box
count against a prefix-sum table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import splines_1d as s1
from .errors import ConfigurationError, IndexOutOfRange, NotContained, ZeroFormUnionViolation
from .tensor_forms import BasisKey, Bits, Box, Index, LevelSpaces, _check_levels, component_list


# --------------------------------------------------------------------------
# cell sets


def _prefix_sums(mask: np.ndarray) -> np.ndarray:
    s = mask.astype(np.int64)
    for ax in range(s.ndim):
        s = np.cumsum(s, axis=ax)
    return np.pad(s, [(1, 0)] * s.ndim)


def _box_counts(prefix: np.ndarray, lo: Sequence[np.ndarray], hi: Sequence[np.ndarray]) -> np.ndarray:
    """Number of set cells in every box ``prod [lo_k, hi_k)``, broadcast over an open grid."""
    n = len(lo)
    grids = np.ix_(*[np.arange(len(a)) for a in lo])
    total = np.zeros(tuple(len(a) for a in lo), dtype=np.int64)
    for corner in itertools.product((0, 1), repeat=n):
        idx = tuple((hi[k] if c else lo[k])[grids[k]] for k, c in enumerate(corner))
        sign = -1 if (n - sum(corner)) % 2 else 1
        total += sign * prefix[idx]
    return total


@dataclass(frozen=True, eq=False)
class SubdomainRef:
    """Union of Bézier cells of level ``level``; ``mask`` has one entry per cell."""

    level: int
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @cached_property
    def prefix(self) -> np.ndarray:
        return _prefix_sums(self.mask)

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def cells(self) -> list[tuple[int, ...]]:
        """Sorted cell ids (0-based per direction)."""
        return [tuple(int(v) for v in c) for c in np.argwhere(self.mask)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubdomainRef):
            return NotImplemented
        return self.level == other.level and np.array_equal(self.mask, other.mask)

    def __or__(self, other: "SubdomainRef") -> "SubdomainRef":
        if self.level != other.level:
            raise ValueError("cannot combine subdomains on different levels")
        return SubdomainRef(self.level, self.mask | other.mask)

    def __and__(self, other: "SubdomainRef") -> "SubdomainRef":
        if self.level != other.level:
            raise ValueError("cannot combine subdomains on different levels")
        return SubdomainRef(self.level, self.mask & other.mask)

    def issubset(self, other: "SubdomainRef") -> bool:
        return not (self.mask & ~other.mask).any()


def _cell_ranges(coarse_kv: s1.KnotVector, fine_kv: s1.KnotVector, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Fine-cell index range ``[lo, hi)`` covered by every coarse basis support of space ``j``."""
    idx = fine_kv.breakpoint_index
    p = coarse_kv.degree
    lo = np.array([idx[coarse_kv.xi(i)] for i in range(1, coarse_kv.m + j + 1)], dtype=np.int64)
    hi = np.array([idx[coarse_kv.xi(i + p - j + 1)] for i in range(1, coarse_kv.m + j + 1)], dtype=np.int64)
    return lo, hi


def _coarse_cell_of(coarse_kv: s1.KnotVector, fine_kv: s1.KnotVector) -> np.ndarray:
    """Coarse cell index containing each fine cell."""
    cb, fb = coarse_kv.breakpoints, fine_kv.breakpoints
    out = np.empty(len(fb) - 1, dtype=np.int64)
    k = 0
    for c in range(len(fb) - 1):
        while coarse_kv.breakpoints[k + 1] <= fb[c]:
            k += 1
        out[c] = k
    return out


# --------------------------------------------------------------------------
# hierarchy


@dataclass(frozen=True, eq=False)
class DomainHierarchy:
    levels: tuple[LevelSpaces, ...]
    omegas: tuple[SubdomainRef, ...]  # omegas[l] is Omega_l on level-l cells; omegas[0] is the full box
    refinement: tuple[tuple[Index, ...] | None, ...] = field(default=())

    @property
    def L(self) -> int:
        return len(self.levels) - 1

    @property
    def n(self) -> int:
        return self.levels[0].n

    def omega(self, level: int) -> SubdomainRef:
        """``Omega_level``; empty for levels beyond ``L``."""
        if level <= self.L:
            return self.omegas[level]
        sp_ = self.levels[self.L]
        return SubdomainRef(self.L, np.zeros(sp_.cell_counts, dtype=bool))

    def to_level(self, Y: SubdomainRef, level: int) -> SubdomainRef:
        """Express ``Y`` on the cells of a finer (or equal) ``level``."""
        if level == Y.level:
            return Y
        if level < Y.level:
            raise ValueError("cannot coarsen a cell set")
        maps = [_coarse_cell_of(kc, kf) for kc, kf in zip(self.levels[Y.level].knot_vectors, self.levels[level].knot_vectors)]
        return SubdomainRef(level, Y.mask[np.ix_(*maps)])

    def supported_mask(self, level: int, bits: Bits, Y: SubdomainRef) -> np.ndarray:
        """Boolean array over component ``bits`` of ``level``: support contained in ``Y``."""
        spaces = self.levels[level]
        if Y.level < level:
            Y = self.to_level(Y, level)
        fine = self.levels[Y.level]
        lo, hi = zip(*[_cell_ranges(kc, kf, b) for kc, kf, b in zip(spaces.knot_vectors, fine.knot_vectors, bits)])
        vol = np.ones(tuple(len(a) for a in lo), dtype=np.int64)
        for k in range(len(lo)):
            shape = [1] * len(lo)
            shape[k] = len(lo[k])
            vol = vol * (hi[k] - lo[k]).reshape(shape)
        return _box_counts(Y.prefix, lo, hi) == vol

    def support_ref(self, level: int, bits: Bits, index: Index, target_level: int | None = None) -> SubdomainRef:
        """Support of one basis function as a cell set on ``target_level`` (default: ``level + 1`` capped at ``L``)."""
        spaces = self.levels[level]
        spaces.check_key(bits, index)
        tl = min(level + 1, self.L) if target_level is None else target_level
        fine = self.levels[tl]
        mask = np.zeros(fine.cell_counts, dtype=bool)
        sl = []
        for kc, kf, b, i in zip(spaces.knot_vectors, fine.knot_vectors, bits, index):
            a, c = s1.support_1d(kc, b, i)
            sl.append(slice(kf.breakpoint_index[a], kf.breakpoint_index[c]))
        mask[tuple(sl)] = True
        return SubdomainRef(tl, mask)

    def refined_zero_forms(self, level: int) -> list[Index]:
        """Level-``level`` 0-forms supported on ``Omega_{level+1}`` (sorted)."""
        if level >= self.L:
            return []
        mask = self.supported_mask(level, (0,) * self.n, self.omega(level + 1))
        return [tuple(int(v) + 1 for v in ix) for ix in np.argwhere(mask)]


def box_to_mask(spaces: LevelSpaces, box: Box) -> np.ndarray:
    """Cell mask of a level-aligned box."""
    mask = np.zeros(spaces.cell_counts, dtype=bool)
    if box.is_empty:
        return mask
    sl = []
    for kv, (a, b) in zip(spaces.knot_vectors, box.intervals):
        idx = kv.breakpoint_index
        if a not in idx or b not in idx or not a < b:
            raise ConfigurationError(f"box {box} is not aligned with the level {spaces.level} Bézier mesh")
        sl.append(slice(idx[a], idx[b]))
    mask[tuple(sl)] = True
    return mask


def _validate_levels(levels: Sequence[LevelSpaces]) -> tuple[LevelSpaces, ...]:
    if not levels:
        raise ConfigurationError("at least one level is required")
    out = []
    for l, sp_ in enumerate(levels):
        if sp_.level != l:
            sp_ = LevelSpaces(sp_.knot_vectors, l)
        for kv in sp_.knot_vectors:
            if kv.m < 2:
                raise ConfigurationError(f"level {l}: every direction needs at least two 0-forms (got {kv.m})")
        out.append(sp_)
    for a, b in zip(out, out[1:]):
        _check_levels(a, b)
    return tuple(out)


def _full(spaces: LevelSpaces) -> SubdomainRef:
    return SubdomainRef(spaces.level, np.ones(spaces.cell_counts, dtype=bool))


def build_hierarchy(levels: Sequence[LevelSpaces], refinement: Sequence[Iterable[Index]]) -> DomainHierarchy:
    """Hierarchy whose ``Omega_{l+1}`` is the union of the supports of the level-``l`` 0-forms in ``refinement[l]``."""
    levels = _validate_levels(levels)
    L = len(levels) - 1
    if len(refinement) != L:
        raise ConfigurationError(f"need {L} refinement sets for {L + 1} levels, got {len(refinement)}")
    omegas = [_full(levels[0])]
    partial = DomainHierarchy(levels, tuple(omegas))
    sets = []
    n = levels[0].n
    for l, S in enumerate(refinement):
        S = tuple(sorted({tuple(int(v) for v in ix) for ix in S}))
        fine = levels[l + 1]
        mask = np.zeros(fine.cell_counts, dtype=bool)
        for ix in S:
            try:
                levels[l].check_key((0,) * n, ix)
            except IndexOutOfRange as exc:
                raise IndexOutOfRange(f"level {l} refinement: {exc}") from None
            if l > 0:
                inside = partial.supported_mask(l, (0,) * n, omegas[l])[tuple(i - 1 for i in ix)]
                if not inside:
                    raise NotContained(f"level {l} 0-form {ix} is not supported on Omega_{l}")
            mask |= partial.support_ref(l, (0,) * n, ix, l + 1).mask
        omegas.append(SubdomainRef(l + 1, mask))
        sets.append(S)
        partial = DomainHierarchy(levels, tuple(omegas))
    return DomainHierarchy(levels, tuple(omegas), tuple(sets))


def zero_form_cover(h: DomainHierarchy, level: int, Y: SubdomainRef) -> SubdomainRef:
    """Union of the supports of all level-``level`` 0-forms contained in ``Y`` (same cells as ``Y``)."""
    n = h.n
    inside = h.supported_mask(level, (0,) * n, Y)
    mask = np.zeros_like(Y.mask)
    for ix in np.argwhere(inside):
        mask |= h.support_ref(level, (0,) * n, tuple(int(v) + 1 for v in ix), Y.level).mask
    return SubdomainRef(Y.level, mask)


def build_hierarchy_from_cells(
    levels: Sequence[LevelSpaces],
    cell_masks: Sequence[np.ndarray],
    enforce_zero_form_union: bool = True,
) -> DomainHierarchy:
    """Hierarchy from raw cell sets; ``cell_masks[l]`` lives on the level ``l+1`` cells."""
    levels = _validate_levels(levels)
    L = len(levels) - 1
    if len(cell_masks) != L:
        raise ConfigurationError(f"need {L} cell sets for {L + 1} levels, got {len(cell_masks)}")
    omegas = [_full(levels[0])]
    for l, m in enumerate(cell_masks):
        m = np.asarray(m, dtype=bool)
        if m.shape != levels[l + 1].cell_counts:
            raise ConfigurationError(f"cell set {l} has shape {m.shape}, expected {levels[l + 1].cell_counts}")
        omegas.append(SubdomainRef(l + 1, m))
    partial = DomainHierarchy(levels, tuple(omegas))
    sets: list = []
    for l in range(L):
        nxt = omegas[l + 1]
        if not nxt.issubset(partial.to_level(omegas[l], l + 1)):
            raise NotContained(f"Omega_{l + 1} is not contained in Omega_{l}")
        if enforce_zero_form_union and not nxt.is_empty:
            cover = zero_form_cover(partial, l, nxt)
            if cover != nxt:
                missing = SubdomainRef(l + 1, nxt.mask & ~cover.mask).cells()
                raise ZeroFormUnionViolation(
                    f"Omega_{l + 1} is not a union of level-{l} 0-form supports; uncovered cells: {missing[:8]}"
                    + (" ..." if len(missing) > 8 else "")
                )
        sets.append(tuple(partial.refined_zero_forms(l)) if enforce_zero_form_union else None)
    return DomainHierarchy(levels, tuple(omegas), tuple(sets))


def zero_form_union_holds(h: DomainHierarchy) -> list[int]:
    """Levels ``l`` where ``Omega_{l+1}`` is not a union of level-``l`` 0-form supports."""
    bad = []
    for l in range(h.L):
        Y = h.omega(l + 1)
        if not Y.is_empty and zero_form_cover(h, l, Y) != Y:
            bad.append(l)
    return bad


# --------------------------------------------------------------------------
# hierarchical selection


@dataclass(frozen=True, eq=False)
class HierarchicalBasis:
    """Selected functions per component: ``selected[bits][level]`` holds sorted flat indices."""

    hierarchy: DomainHierarchy
    selected: dict[Bits, tuple[np.ndarray, ...]]

    def keys(self, bits: Bits) -> list[BasisKey]:
        out = []
        for level, flat in enumerate(self.selected[bits]):
            sp_ = self.hierarchy.levels[level]
            out.extend(BasisKey(level, bits, sp_.unflat(bits, int(f))) for f in flat)
        return out

    def count(self, bits: Bits) -> int:
        return int(sum(len(a) for a in self.selected[bits]))

    def dim(self, j: int) -> int:
        return sum(self.count(b) for b in component_list(self.hierarchy.n, j))

    def dims(self) -> list[int]:
        return [self.dim(j) for j in range(self.hierarchy.n + 1)]


def basis_on(h: DomainHierarchy, level: int, bits: Bits, Y: SubdomainRef) -> list[BasisKey]:
    """Keys of level ``level`` and component ``bits`` whose support lies in ``Y``."""
    if Y.level < level:
        raise ValueError("the subdomain must be expressed on cells at least as fine as the basis level")
    mask = h.supported_mask(level, bits, Y)
    return [BasisKey(level, bits, tuple(int(v) + 1 for v in ix)) for ix in np.argwhere(mask)]


def kraft_select_masks(h: DomainHierarchy, bits: Bits) -> list[np.ndarray]:
    """Per-level boolean masks of the selected functions of component ``bits``."""
    L = h.L
    inside = [h.supported_mask(l, bits, h.omega(l)) if l > 0 else np.ones(h.levels[0].component_shape(bits), bool) for l in range(L + 1)]
    active = [np.zeros_like(m) for m in inside]
    active[0] = inside[0].copy()
    for l in range(L):
        nxt = h.omega(l + 1)
        for q in range(l + 1):
            if active[q].any():
                active[q] &= ~h.supported_mask(q, bits, nxt)
        active[l + 1] = inside[l + 1].copy()
    return active


def kraft_select(h: DomainHierarchy, bits: Bits) -> list[BasisKey]:
    out = []
    for level, mask in enumerate(kraft_select_masks(h, bits)):
        out.extend(BasisKey(level, bits, tuple(int(v) + 1 for v in ix)) for ix in np.argwhere(mask))
    return out


def hierarchical_basis(h: DomainHierarchy) -> HierarchicalBasis:
    sel = {}
    for j in range(h.n + 1):
        for bits in component_list(h.n, j):
            masks = kraft_select_masks(h, bits)
            sel[bits] = tuple(np.flatnonzero(m.ravel()) for m in masks)
    return HierarchicalBasis(h, sel)


# --------------------------------------------------------------------------
# extended knot domains and the local index sets


def extended_knot_domain(spaces: LevelSpaces, bits: Bits, index: Index) -> Box:
    out = []
    for kv, b, i in zip(spaces.knot_vectors, bits, index):
        if not 1 <= i <= kv.m + b - 1:
            raise IndexOutOfRange(f"extended domain index {index} outside 1..m+j-1 for component {bits}")
        out.append((kv.xi(i), kv.xi(i + kv.degree - b + 2)))
    return Box(tuple(out))


def _valid_extended(dims0: Sequence[int], bits: Bits, index: Index) -> bool:
    return all(1 <= i <= m + b - 1 for m, b, i in zip(dims0, bits, index))


def neighbour_indices(bits: Bits, ibar: Index, dims0: Sequence[int]) -> list[Index | None]:
    """Indices ``i`` with ``j_k - 1 <= i_k - ibar_k <= 0``; out-of-range ones become ``None``."""
    out: list[Index | None] = []
    for offs in itertools.product(*[range(0, 2 - b) for b in bits]):
        i = tuple(ib - o for ib, o in zip(ibar, offs))
        out.append(i if _valid_extended(dims0, bits, i) else None)
    return out


def itpb(h: DomainHierarchy, level: int, bits: Bits) -> set[Index]:
    """Extended-domain indices neighbouring some refined level-``level`` 0-form."""
    dims0 = h.levels[level].dims0
    out: set[Index] = set()
    for ibar in h.refined_zero_forms(level):
        out.update(i for i in neighbour_indices(bits, ibar, dims0) if i is not None)
    return out


def deriv_set(h: DomainHierarchy, level: int, bits: Bits, index: Index) -> list[Index]:
    if level >= h.L:
        return []
    dims0 = h.levels[level].dims0
    refined = h.supported_mask(level, (0,) * h.n, h.omega(level + 1))
    out = []
    for offs in itertools.product(*[range(0, 2 - b) for b in bits]):
        ibar = tuple(i + o for i, o in zip(index, offs))
        if all(1 <= v <= m for v, m in zip(ibar, dims0)) and refined[tuple(v - 1 for v in ibar)]:
            out.append(ibar)
    return out


def omega_subdomain(h: DomainHierarchy, level: int, bits: Bits, index: Index | None) -> SubdomainRef:
    """Union of the supports of ``deriv_set`` members on level ``level+1`` cells (empty off ``itpb``)."""
    fine = h.levels[min(level + 1, h.L)]
    mask = np.zeros(fine.cell_counts, dtype=bool)
    if index is not None and _valid_extended(h.levels[level].dims0, bits, index):
        for ibar in deriv_set(h, level, bits, index):
            mask |= h.support_ref(level, (0,) * h.n, ibar, fine.level).mask
    return SubdomainRef(fine.level, mask)


def partition_check(h: DomainHierarchy, level: int, bits: Bits) -> bool:
    """Whether the subdomains ``omega_subdomain`` over all indices cover exactly ``Omega_{level+1}``."""
    target = h.omega(level + 1)
    union = np.zeros_like(target.mask)
    for index in itpb(h, level, bits):
        union |= omega_subdomain(h, level, bits, index).mask
    return bool(np.array_equal(union, target.mask))
