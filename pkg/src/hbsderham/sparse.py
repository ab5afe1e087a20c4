"""Exact sparse matrices over the rationals.

Stored row-wise as ``{row: {col: Fraction}}`` with no explicit zeros.  The
class is deliberately small: it supports what the complex assembly needs
(products, sums, Kronecker products, block stacking) and conversion to a
scipy matrix for the floating path.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

Entry = tuple[int, int, Fraction]


class SparseRationalMatrix:
    __slots__ = ("shape", "_rows")

    def __init__(self, shape: tuple[int, int], rows: Mapping[int, Mapping[int, Fraction]] | None = None):
        nr, nc = int(shape[0]), int(shape[1])
        if nr < 0 or nc < 0:
            raise ValueError("negative matrix dimension")
        self.shape = (nr, nc)
        clean: dict[int, dict[int, Fraction]] = {}
        for r, row in (rows or {}).items():
            if not 0 <= r < nr:
                raise IndexError(f"row {r} outside {nr} rows")
            kept = {}
            for c, v in row.items():
                if not 0 <= c < nc:
                    raise IndexError(f"column {c} outside {nc} columns")
                if v:
                    kept[c] = Fraction(v)
            if kept:
                clean[r] = kept
        self._rows = clean

    # construction -----------------------------------------------------
    @classmethod
    def from_entries(cls, shape: tuple[int, int], entries: Iterable[Entry]) -> "SparseRationalMatrix":
        rows: dict[int, dict[int, Fraction]] = {}
        for r, c, v in entries:
            row = rows.setdefault(r, {})
            row[c] = row.get(c, Fraction(0)) + Fraction(v)
        return cls(shape, rows)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "SparseRationalMatrix":
        nr = len(dense)
        nc = len(dense[0]) if nr else 0
        return cls((nr, nc), {r: {c: Fraction(v) for c, v in enumerate(row) if v} for r, row in enumerate(dense)})

    @classmethod
    def identity(cls, n: int) -> "SparseRationalMatrix":
        return cls((n, n), {i: {i: Fraction(1)} for i in range(n)})

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseRationalMatrix":
        return cls((nrows, ncols))

    # access -----------------------------------------------------------
    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._rows.values())

    def entries(self) -> Iterator[Entry]:
        for r in sorted(self._rows):
            row = self._rows[r]
            for c in sorted(row):
                yield r, c, row[c]

    def row(self, r: int) -> dict[int, Fraction]:
        return dict(self._rows.get(r, {}))

    def rows_dict(self) -> dict[int, dict[int, Fraction]]:
        """Copy of the row storage (safe to mutate)."""
        return {r: dict(row) for r, row in self._rows.items()}

    def __getitem__(self, rc: tuple[int, int]) -> Fraction:
        r, c = rc
        return self._rows.get(r, {}).get(c, Fraction(0))

    def is_zero(self) -> bool:
        return not self._rows

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.shape[1] for _ in range(self.shape[0])]
        for r, c, v in self.entries():
            out[r][c] = v
        return out

    def to_scipy(self) -> sp.csr_matrix:
        rr, cc, vv = [], [], []
        for r, c, v in self.entries():
            rr.append(r)
            cc.append(c)
            vv.append(float(v))
        return sp.csr_matrix((np.array(vv, dtype=float), (np.array(rr, dtype=np.int64), np.array(cc, dtype=np.int64))), shape=self.shape)

    def toarray(self) -> np.ndarray:
        return self.to_scipy().toarray()

    # algebra ----------------------------------------------------------
    @property
    def T(self) -> "SparseRationalMatrix":
        rows: dict[int, dict[int, Fraction]] = {}
        for r, row in self._rows.items():
            for c, v in row.items():
                rows.setdefault(c, {})[r] = v
        return SparseRationalMatrix((self.shape[1], self.shape[0]), rows)

    def __matmul__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if not isinstance(other, SparseRationalMatrix):
            return NotImplemented
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        rows: dict[int, dict[int, Fraction]] = {}
        orows = other._rows
        for r, row in self._rows.items():
            acc: dict[int, Fraction] = {}
            for k, a in row.items():
                orow = orows.get(k)
                if not orow:
                    continue
                for c, b in orow.items():
                    acc[c] = acc.get(c, 0) + a * b
            if acc:
                rows[r] = acc
        return SparseRationalMatrix((self.shape[0], other.shape[1]), rows)

    def _combine(self, other: "SparseRationalMatrix", sign: int) -> "SparseRationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        rows = self.rows_dict()
        for r, row in other._rows.items():
            tgt = rows.setdefault(r, {})
            for c, v in row.items():
                tgt[c] = tgt.get(c, 0) + sign * v
        return SparseRationalMatrix(self.shape, rows)

    def __add__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        return self._combine(other, -1)

    def __neg__(self) -> "SparseRationalMatrix":
        return self.scaled(-1)

    def scaled(self, s) -> "SparseRationalMatrix":
        s = Fraction(s)
        return SparseRationalMatrix(self.shape, {r: {c: s * v for c, v in row.items()} for r, row in self._rows.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseRationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):  # mutable-looking container; identity hashing is enough
        return id(self)

    def __repr__(self) -> str:
        return f"SparseRationalMatrix(shape={self.shape}, nnz={self.nnz})"

    def kron(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        m2, n2 = other.shape
        rows: dict[int, dict[int, Fraction]] = {}
        for r1, row1 in self._rows.items():
            for r2, row2 in other._rows.items():
                tgt = rows.setdefault(r1 * m2 + r2, {})
                for c1, a in row1.items():
                    base = c1 * n2
                    for c2, b in row2.items():
                        tgt[base + c2] = a * b
        return SparseRationalMatrix((self.shape[0] * m2, self.shape[1] * n2), rows)

    def select_columns(self, cols: Sequence[int]) -> "SparseRationalMatrix":
        where = {c: k for k, c in enumerate(cols)}
        rows = {}
        for r, row in self._rows.items():
            kept = {where[c]: v for c, v in row.items() if c in where}
            if kept:
                rows[r] = kept
        return SparseRationalMatrix((self.shape[0], len(cols)), rows)

    def select_rows(self, rows_sel: Sequence[int]) -> "SparseRationalMatrix":
        return SparseRationalMatrix((len(rows_sel), self.shape[1]), {k: self._rows[r] for k, r in enumerate(rows_sel) if r in self._rows})


def bmat(blocks: Sequence[Sequence[SparseRationalMatrix | None]], row_sizes: Sequence[int], col_sizes: Sequence[int]) -> SparseRationalMatrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    roff = np.concatenate([[0], np.cumsum(row_sizes)]).astype(int)
    coff = np.concatenate([[0], np.cumsum(col_sizes)]).astype(int)
    rows: dict[int, dict[int, Fraction]] = {}
    for bi, brow in enumerate(blocks):
        for bj, blk in enumerate(brow):
            if blk is None:
                continue
            if blk.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block ({bi},{bj}) has shape {blk.shape}")
            for r, c, v in blk.entries():
                rows.setdefault(int(roff[bi]) + r, {})[int(coff[bj]) + c] = v
    return SparseRationalMatrix((int(roff[-1]), int(coff[-1])), rows)


def hstack(mats: Sequence[SparseRationalMatrix]) -> SparseRationalMatrix:
    nr = mats[0].shape[0]
    return bmat([list(mats)], [nr], [m.shape[1] for m in mats])


def vstack(mats: Sequence[SparseRationalMatrix]) -> SparseRationalMatrix:
    nc = mats[0].shape[1]
    return bmat([[m] for m in mats], [m.shape[0] for m in mats], [nc])


def kron_all(mats: Sequence[SparseRationalMatrix]) -> SparseRationalMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = out.kron(m)
    return out
