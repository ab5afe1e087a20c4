"""Tensor-product spline spaces of differential forms on one level.

A ``j``-form has one component per bit tuple ``bits`` with ``sum(bits) == j``;
direction ``k`` uses the univariate space ``bits[k]`` of that direction.
Coefficients of one component are flattened row-major (direction 0 slowest)
and components are concatenated in :func:`component_list` order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import splines_1d as s1
from .errors import BadDegree, DegreeMismatch, IndexOutOfRange, NotNested
from .sparse import SparseRationalMatrix, bmat, kron_all

Bits = tuple[int, ...]
Index = tuple[int, ...]


def component_list(n: int, j: int) -> list[Bits]:
    if not 0 <= j <= n:
        raise BadDegree(f"form degree {j} outside 0..{n}")
    out = []
    for ones in itertools.combinations(range(n), j):
        out.append(tuple(1 if k in ones else 0 for k in range(n)))
    return out


@dataclass(frozen=True)
class Box:
    """Product of open intervals; ``lo == hi`` marks a degenerate (point) factor.

    The empty box is represented by ``intervals == ()``.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def empty(cls) -> "Box":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, other: "Box") -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        return all(a <= c and d <= b for (a, b), (c, d) in zip(self.intervals, other.intervals))

    def closure_intersection(self, other: "Box") -> "Box | None":
        """Intersection of the closures, or ``None`` when they are disjoint."""
        if self.is_empty or other.is_empty:
            return None
        out = []
        for (a, b), (c, d) in zip(self.intervals, other.intervals):
            lo, hi = max(a, c), min(b, d)
            if lo > hi:
                return None
            out.append((lo, hi))
        return Box(tuple(out))

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        return " x ".join(f"({a},{b})" if a != b else f"{{{a}}}" for a, b in self.intervals)


@dataclass(frozen=True, order=True)
class BasisKey:
    level: int
    bits: Bits
    index: Index  # 1-based per direction


@dataclass(frozen=True)
class LevelSpaces:
    knot_vectors: tuple[s1.KnotVector, ...]
    level: int = 0

    def __post_init__(self):
        if not self.knot_vectors:
            raise BadDegree("need at least one direction")

    @property
    def n(self) -> int:
        return len(self.knot_vectors)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(kv.degree for kv in self.knot_vectors)

    @property
    def dims0(self) -> tuple[int, ...]:
        return tuple(kv.m for kv in self.knot_vectors)

    def component_shape(self, bits: Bits) -> tuple[int, ...]:
        return tuple(kv.m + b for kv, b in zip(self.knot_vectors, bits))

    def component_size(self, bits: Bits) -> int:
        return int(np.prod(self.component_shape(bits)))

    def component_offsets(self, j: int) -> dict[Bits, int]:
        off, out = 0, {}
        for bits in component_list(self.n, j):
            out[bits] = off
            off += self.component_size(bits)
        return out

    def form_dim(self, j: int) -> int:
        return sum(self.component_size(b) for b in component_list(self.n, j))

    @cached_property
    def greville(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(s1.greville_points(kv) for kv in self.knot_vectors)

    @cached_property
    def cell_counts(self) -> tuple[int, ...]:
        return tuple(kv.n_spans for kv in self.knot_vectors)

    def check_key(self, bits: Bits, index: Index) -> None:
        if len(bits) != self.n or len(index) != self.n:
            raise IndexOutOfRange(f"key dimension mismatch: bits={bits}, index={index}")
        for kv, b, i in zip(self.knot_vectors, bits, index):
            if not 1 <= i <= kv.m + b:
                raise IndexOutOfRange(f"index {index} outside the range of component {bits}")

    def flat(self, bits: Bits, index: Index) -> int:
        """Row-major offset of ``index`` inside its component block."""
        return int(np.ravel_multi_index(tuple(i - 1 for i in index), self.component_shape(bits)))

    def unflat(self, bits: Bits, flat: int) -> Index:
        return tuple(int(v) + 1 for v in np.unravel_index(flat, self.component_shape(bits)))


def _key_parts(spaces: LevelSpaces, key: BasisKey | tuple[Bits, Index]) -> tuple[Bits, Index]:
    if isinstance(key, BasisKey):
        bits, index = key.bits, key.index
    else:
        bits, index = key
    spaces.check_key(bits, index)
    return tuple(bits), tuple(index)


def tp_support(spaces: LevelSpaces, key: BasisKey | tuple[Bits, Index]) -> Box:
    bits, index = _key_parts(spaces, key)
    return Box(tuple(s1.support_1d(kv, b, i) for kv, b, i in zip(spaces.knot_vectors, bits, index)))


def tp_greville_entity(spaces: LevelSpaces, key: BasisKey | tuple[Bits, Index]) -> Box:
    bits, index = _key_parts(spaces, key)
    out = []
    for g, b, i in zip(spaces.greville, bits, index):
        out.append((g[i], g[i]) if b == 0 else (g[i - 1], g[i]))
    return Box(tuple(out))


def bezier_mesh(spaces: LevelSpaces) -> list[Box]:
    per_dir = [list(zip(kv.breakpoints, kv.breakpoints[1:])) for kv in spaces.knot_vectors]
    return [Box(tuple(c)) for c in itertools.product(*per_dir)]


# --------------------------------------------------------------------------
# operators


def _identity(n: int, exact: bool):
    return SparseRationalMatrix.identity(n) if exact else sp.identity(n, format="csr")


def _as_backend(M: SparseRationalMatrix, exact: bool):
    return M if exact else M.to_scipy()


def _kron(mats, exact: bool):
    if exact:
        return kron_all(mats)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return sp.csr_matrix(out)


def derivative_sign(bits: Bits, k: int) -> int:
    return -1 if sum(bits[:k]) % 2 else 1


def exterior_derivative_matrix(spaces: LevelSpaces, j: int, exact: bool = True):
    """Matrix of ``d`` from ``j``-form to ``(j+1)``-form coefficients.

    Returns a :class:`SparseRationalMatrix` (``exact=True``) or a scipy CSR matrix.
    """
    n = spaces.n
    if not 0 <= j <= n - 1:
        raise BadDegree(f"d is defined for 0 <= j <= {n - 1}, got {j}")
    return _derivative_cached(spaces, j, exact)


@lru_cache(maxsize=64)
def _derivative_cached(spaces: LevelSpaces, j: int, exact: bool):
    n = spaces.n
    src, dst = component_list(n, j), component_list(n, j + 1)
    blocks: list[list] = [[None] * len(src) for _ in dst]
    for c, bits in enumerate(src):
        for k in range(n):
            if bits[k]:
                continue
            target = tuple(1 if q == k else b for q, b in enumerate(bits))
            factors = []
            for q, kv in enumerate(spaces.knot_vectors):
                if q == k:
                    factors.append(_as_backend(s1.derivative_matrix_1d(kv), exact))
                else:
                    factors.append(_identity(kv.m + bits[q], exact))
            blk = _kron(factors, exact)
            if derivative_sign(bits, k) < 0:
                blk = -blk
            blocks[dst.index(target)][c] = blk
    rs = [spaces.component_size(b) for b in dst]
    cs = [spaces.component_size(b) for b in src]
    if exact:
        return bmat(blocks, rs, cs)
    return sp.csr_matrix(sp.bmat([[blk if blk is not None else sp.csr_matrix((r, c)) for blk, c in zip(row, cs)] for row, r in zip(blocks, rs)], format="csr"))


def _check_levels(coarse: LevelSpaces, fine: LevelSpaces) -> None:
    if coarse.n != fine.n:
        raise NotNested("levels have different dimensions")
    for kc, kf in zip(coarse.knot_vectors, fine.knot_vectors):
        if kc.degree != kf.degree:
            raise DegreeMismatch(f"degrees differ between levels: {kc.degree} vs {kf.degree}")
        if not s1.is_nested(kc, kf):
            raise NotNested(f"{kc} is not nested in {kf}")


def prolongation_factors(coarse: LevelSpaces, fine: LevelSpaces, bits: Bits) -> list[SparseRationalMatrix]:
    _check_levels(coarse, fine)
    return [s1.insertion_matrix_1d(kc, kf, b) for kc, kf, b in zip(coarse.knot_vectors, fine.knot_vectors, bits)]


def prolongation_matrix(coarse: LevelSpaces, fine: LevelSpaces, bits: Sequence[int], exact: bool = True):
    """Kronecker product of the per-direction knot-insertion matrices for component ``bits``."""
    factors = prolongation_factors(coarse, fine, tuple(bits))
    return _kron([_as_backend(f, exact) for f in factors], exact)


def form_prolongation_matrix(coarse: LevelSpaces, fine: LevelSpaces, j: int, exact: bool = True):
    """Block-diagonal prolongation of all ``j``-form components."""
    comps = component_list(coarse.n, j)
    mats = [prolongation_matrix(coarse, fine, b, exact) for b in comps]
    if exact:
        rs = [m.shape[0] for m in mats]
        cs = [m.shape[1] for m in mats]
        return bmat([[mats[a] if a == b else None for b in range(len(mats))] for a in range(len(mats))], rs, cs)
    return sp.csr_matrix(sp.block_diag(mats, format="csr"))
