"""Greville cell complexes of restricted B-spline sets and their homology.

Each tensor B-spline is identified with a product of Greville points and
Greville edges.  A set of B-splines closed under "taking cofaces" (which the
sets used here are: the derivative of a B-spline only involves B-splines
with smaller supports) is an *open* subcomplex of the Greville mesh.  Its
Betti numbers follow from the restricted boundary matrices by duality:
``b_d`` equals the homology of the restricted chain complex in degree
``n - d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .hierarchy import DomainHierarchy, SubdomainRef, _box_counts, _cell_ranges, _prefix_sums, omega_subdomain
from .linalg import exact_rank, float_rank_details
from .sparse import SparseRationalMatrix
from .tensor_forms import Bits, Index, LevelSpaces, component_list, derivative_sign, exterior_derivative_matrix

Cell = tuple[Bits, Index]


@dataclass
class CuboidalComplex:
    spaces: LevelSpaces
    cells: list[list[Cell]]  # cells[d] sorted, d = 0..n

    @property
    def n(self) -> int:
        return self.spaces.n

    @property
    def is_empty(self) -> bool:
        return not any(self.cells)

    def counts(self) -> list[int]:
        return [len(c) for c in self.cells]

    def boundary(self, d: int) -> SparseRationalMatrix:
        """``d``-cells to ``(d-1)``-cells, restricted to faces present in the complex."""
        if d <= 0 or d > self.n:
            return SparseRationalMatrix((len(self.cells[d - 1]) if d > 0 else 0, len(self.cells[d]) if d <= self.n else 0))
        where = {c: r for r, c in enumerate(self.cells[d - 1])}
        entries = []
        for col, (bits, idx) in enumerate(self.cells[d]):
            for k in range(self.n):
                if not bits[k]:
                    continue
                sign = derivative_sign(bits, k)
                fb = bits[:k] + (0,) + bits[k + 1 :]
                for shift, s in ((0, 1), (-1, -1)):
                    face = (fb, idx[:k] + (idx[k] + shift,) + idx[k + 1 :])
                    r = where.get(face)
                    if r is not None:
                        entries.append((r, col, Fraction(sign * s)))
        return SparseRationalMatrix.from_entries((len(self.cells[d - 1]), len(self.cells[d])), entries)

    def geometry(self, cell: Cell) -> list[tuple[Fraction, Fraction]]:
        bits, idx = cell
        out = []
        for g, b, i in zip(self.spaces.greville, bits, idx):
            out.append((g[i], g[i]) if b == 0 else (g[i - 1], g[i]))
        return out

    def to_json(self) -> dict:
        return {
            "level": self.spaces.level,
            "cells": [
                [{"bits": list(b), "index": list(i), "box": [[str(a), str(c)] for a, c in self.geometry((b, i))]} for b, i in cs]
                for cs in self.cells
            ],
        }


@dataclass
class BettiProfile:
    ranks: list[int]
    chain_homology: list[int] = field(default_factory=list)

    def __iter__(self):
        return iter(self.ranks)

    def __eq__(self, other):
        if isinstance(other, BettiProfile):
            return self.ranks == other.ranks
        return list(self.ranks) == list(other)

    def __repr__(self) -> str:
        return f"BettiProfile({tuple(self.ranks)})"


def _complex_from_masks(spaces: LevelSpaces, masks: dict[Bits, np.ndarray]) -> CuboidalComplex:
    n = spaces.n
    cells: list[list[Cell]] = [[] for _ in range(n + 1)]
    for j in range(n + 1):
        for bits in component_list(n, j):
            for ix in np.argwhere(masks[bits]):
                cells[j].append((bits, tuple(int(v) + 1 for v in ix)))
        cells[j].sort()
    return CuboidalComplex(spaces, cells)


def restricted_masks(h: DomainHierarchy, level: int, s: int, Y: SubdomainRef, coarse_cover: bool = True) -> dict[Bits, np.ndarray]:
    """Per component, the level-``level+s`` B-splines used for the Greville complex over ``Y``.

    With ``coarse_cover`` a B-spline qualifies when its support lies in the
    support of some level-``level`` 0-form that is itself supported on
    ``Y ∩ Omega_{level+1}``; otherwise any B-spline supported on ``Y`` does.
    """
    target = level + s
    n = h.n
    masks = {}
    if not coarse_cover:
        for j in range(n + 1):
            for bits in component_list(n, j):
                masks[bits] = h.supported_mask(target, bits, Y)
        return masks
    Y1 = h.to_level(Y, level + 1) if Y.level < level + 1 else Y
    region = Y1 & h.to_level(h.omega(level + 1), Y1.level) if level + 1 <= h.L else Y1
    alpha = h.supported_mask(level, (0,) * n, region)
    prefix = _prefix_sums(alpha)
    coarse = h.levels[level]
    cell_level = max(target, Y1.level)
    fine = h.levels[cell_level]
    a_lo, a_hi = zip(*[_cell_ranges(kc, kf, 0) for kc, kf in zip(coarse.knot_vectors, fine.knot_vectors)])
    for j in range(n + 1):
        for bits in component_list(n, j):
            f_lo, f_hi = zip(*[_cell_ranges(kt, kf, b) for kt, kf, b in zip(h.levels[target].knot_vectors, fine.knot_vectors, bits)])
            lo, hi = [], []
            for k in range(n):
                amax = np.searchsorted(a_lo[k], f_lo[k], side="right")  # exclusive upper bound on alpha index
                amin = np.searchsorted(a_hi[k], f_hi[k], side="left")
                lo.append(amin)
                hi.append(np.maximum(amax, amin))
            masks[bits] = _box_counts(prefix, lo, hi) > 0
    return masks


def greville_subcomplex(h: DomainHierarchy, level: int, s: int, Y: SubdomainRef, coarse_cover: bool = True) -> CuboidalComplex:
    """Greville complex of the level-``level+s`` B-splines attached to ``Y`` (see :func:`restricted_masks`)."""
    return _complex_from_masks(h.levels[level + s], restricted_masks(h, level, s, Y, coarse_cover))


def _rank_int(M: SparseRationalMatrix, exact_limit: int = 60_000) -> int:
    if M.nnz == 0:
        return 0
    if M.nnz <= exact_limit:
        return exact_rank(M)
    res = float_rank_details(M.to_scipy())
    return res.rank


def betti(c: CuboidalComplex) -> BettiProfile:
    """Betti numbers ``b_0..b_n`` of the open cell set ``c``."""
    n = c.n
    counts = c.counts()
    ranks = [0] * (n + 2)
    for d in range(1, n + 1):
        ranks[d] = _rank_int(c.boundary(d))
    chain = [counts[d] - ranks[d] - ranks[d + 1] for d in range(n + 1)]
    return BettiProfile([chain[n - d] for d in range(n + 1)], chain)


def check_boundary_squares_to_zero(c: CuboidalComplex) -> bool:
    return all((c.boundary(d - 1) @ c.boundary(d)).is_zero() for d in range(2, c.n + 1))


def restricted_spline_dims(h: DomainHierarchy, level: int, s: int, Y: SubdomainRef, coarse_cover: bool = True, backend: str = "exact") -> list[int]:
    """Cohomology dimensions of the level-``level+s`` tensor spline complex restricted to ``Y``."""
    spaces = h.levels[level + s]
    n = h.n
    masks = restricted_masks(h, level, s, Y, coarse_cover)
    sel = []
    for j in range(n + 1):
        offs = spaces.component_offsets(j)
        cols = []
        for bits in component_list(n, j):
            cols.extend(offs[bits] + int(f) for f in np.flatnonzero(masks[bits].ravel()))
        sel.append(cols)
    ranks = [0] * (n + 1)
    for j in range(n):
        D = exterior_derivative_matrix(spaces, j, exact=True)
        sub = D.select_rows(sel[j + 1]).select_columns(sel[j])
        if backend == "exact":
            ranks[j] = exact_rank(sub)
        else:
            ranks[j] = float_rank_details(sub.to_scipy()).rank
    return [len(sel[j]) - ranks[j] - (ranks[j - 1] if j > 0 else 0) for j in range(n + 1)]


def duality_check(h: DomainHierarchy, level: int, bits: Bits, index: Index | None) -> bool:
    """On ``A = omega_subdomain(level, bits, index)``: both spline complexes exact and both Greville complexes balls."""
    A = omega_subdomain(h, level, bits, index)
    if A.is_empty:
        return True
    n = h.n
    top = [0] * n + [1]
    ball = [1] + [0] * n
    for s in (0, 1):
        if restricted_spline_dims(h, level, s, A) != top:
            return False
        if betti(greville_subcomplex(h, level, s, A)).ranks != ball:
            return False
    return True


def topology_change(h: DomainHierarchy, level: int = 0, coarse_cover: bool = False) -> dict:
    """Betti numbers of the coarse and fine Greville complexes over ``Omega_{level+1}``."""
    Y = h.omega(level + 1)
    coarse = betti(greville_subcomplex(h, level, 0, Y, coarse_cover))
    fine = betti(greville_subcomplex(h, level, 1, Y, coarse_cover))
    return {"coarse": coarse.ranks, "fine": fine.ranks}
