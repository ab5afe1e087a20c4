"""Rank computations: exact (rational) and floating (pivoted QR with a gap check)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BackendCapExceeded, NumericalIndeterminacy
from .sparse import SparseRationalMatrix

DEFAULT_TOL = 1e-10
DEFAULT_GAP = 1e3
DEFAULT_EXACT_CAP = 5_000_000


def _integer_rows(M: SparseRationalMatrix) -> list[dict[int, int]]:
    rows = []
    for row in M.rows_dict().values():
        den = 1
        for v in row.values():
            den = den * v.denominator // math.gcd(den, v.denominator)
        ints = {c: int(v * den) for c, v in row.items()}
        g = 0
        for v in ints.values():
            g = math.gcd(g, v)
        if g > 1:
            ints = {c: v // g for c, v in ints.items()}
        rows.append(ints)
    return rows


def exact_rank(M: SparseRationalMatrix, cap: int = DEFAULT_EXACT_CAP) -> int:
    """Rank over the rationals by fraction-free sparse elimination.

    Rows are kept as primitive integer vectors (content divided out after
    every update); pivots are chosen to limit fill-in.
    """
    if M.nnz > cap:
        raise BackendCapExceeded(f"{M.nnz} nonzeros exceed the exact-backend cap of {cap}")
    rows = _integer_rows(M)
    col_rows: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(r)
    active = set(range(len(rows)))
    rank = 0
    while active:
        r = min(active, key=lambda q: (len(rows[q]), q))
        row = rows[r]
        active.discard(r)
        if not row:
            continue
        c = min(row, key=lambda q: (len(col_rows[q]), q))
        a = row[c]
        for q in row:
            col_rows[q].discard(r)
        for r2 in list(col_rows[c]):
            other = rows[r2]
            b = other[c]
            g = math.gcd(a, b)
            fa, fb = a // g, b // g
            new = {k: fa * v for k, v in other.items()}
            for k, v in row.items():
                new[k] = new.get(k, 0) - fb * v
            new = {k: v for k, v in new.items() if v}
            cont = 0
            for v in new.values():
                cont = math.gcd(cont, v)
                if cont == 1:
                    break
            if cont > 1:
                new = {k: v // cont for k, v in new.items()}
            for k in other:
                if k not in new:
                    col_rows[k].discard(r2)
            for k in new:
                if k not in other:
                    col_rows.setdefault(k, set()).add(r2)
            rows[r2] = new
        rows[r] = {}
        rank += 1
    return rank


@dataclass
class FloatRank:
    rank: int
    pivots: np.ndarray  # |R_ii|, relative to the largest
    gap: float  # smallest accepted / largest rejected (inf when nothing was rejected)

    @property
    def determinate(self) -> bool:
        return self.gap > DEFAULT_GAP


def _dense_normalised(M) -> np.ndarray:
    if isinstance(M, SparseRationalMatrix):
        M = M.to_scipy()
    if sp.issparse(M):
        M = sp.csr_matrix(M)
        keep = np.flatnonzero(np.diff(M.indptr))
        M = M[keep]
        cn = np.sqrt(np.asarray(M.multiply(M).sum(axis=0)).ravel())
        M = M.tocsc()[:, cn > 0]
        cn = cn[cn > 0]
        A = M.toarray()
    else:
        A = np.asarray(M, dtype=float)
        A = A[np.any(A != 0, axis=1)]
        cn = np.linalg.norm(A, axis=0)
        A = A[:, cn > 0]
        cn = cn[cn > 0]
    if A.size:
        A /= cn
    return A


def float_rank_details(M, tol: float = DEFAULT_TOL) -> FloatRank:
    A = _dense_normalised(M)
    if A.size == 0:
        return FloatRank(0, np.zeros(0), math.inf)
    if A.shape[0] < A.shape[1]:
        A = A.T.copy()
    R = sla.qr(A, mode="r", pivoting=True, overwrite_a=True, check_finite=False)[0]
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0:
        return FloatRank(0, d, math.inf)
    d = d / d[0]
    r = int(np.sum(d > tol))
    if r < d.size:
        gap = d[r - 1] / d[r] if d[r] > 0 else math.inf
    else:
        gap = math.inf
    return FloatRank(r, d, float(gap))


def rank(M, backend: str = "exact", tol: float = DEFAULT_TOL, cap: int = DEFAULT_EXACT_CAP, gap: float = DEFAULT_GAP) -> int:
    """Matrix rank with the exact or floating backend.

    The floating backend raises :class:`NumericalIndeterminacy` when the
    accepted and rejected pivots are not separated by a factor ``gap``.
    """
    if backend == "exact":
        if not isinstance(M, SparseRationalMatrix):
            raise TypeError("the exact backend needs a SparseRationalMatrix")
        return exact_rank(M, cap)
    if backend == "float":
        res = float_rank_details(M, tol)
        if res.gap <= gap:
            raise NumericalIndeterminacy(f"rank {res.rank} with pivot gap {res.gap:.3g} <= {gap:g}")
        return res.rank
    raise ValueError(f"unknown backend {backend!r}")


def laplacian_nullity(K, tol: float = DEFAULT_TOL, dense_limit: int = 800) -> tuple[int, float]:
    """Number of eigenvalues of the symmetric PSD matrix ``K`` below ``tol`` times its largest.

    Returns ``(nullity, gap)`` where ``gap`` is the ratio of the smallest
    accepted eigenvalue to the largest rejected one.  Large sparse inputs use
    shift-invert Lanczos near zero, so only a handful of eigenvalues are formed.
    """
    K = sp.csc_matrix(K, dtype=float)
    N = K.shape[0]
    if N == 0:
        return 0, math.inf
    if N <= dense_limit:
        w = np.linalg.eigvalsh(K.toarray())
    else:
        top = float(spla.eigsh(K, k=1, which="LA", return_eigenvectors=False, tol=1e-6)[0])
        shift = -1e-6 * top
        k = min(8, N - 2)
        while True:
            w = np.sort(spla.eigsh(K, k=k, sigma=shift, which="LM", return_eigenvectors=False))
            if np.any(w > tol * top) or k >= N - 2:
                break
            k = min(2 * k, N - 2)
        if not np.any(w > tol * top):
            w = np.linalg.eigvalsh(K.toarray())
        else:
            w = np.concatenate([w, [top]])
    top = float(np.max(w))
    if top <= 0:
        return N, math.inf
    w = np.sort(w) / top
    nullity = int(np.sum(w <= tol))
    if nullity == 0 or nullity == w.size:
        return nullity, math.inf
    small = max(w[nullity - 1], 0.0)
    gap = w[nullity] / small if small > 0 else math.inf
    return nullity, float(gap)


def null_space(A: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal null-space basis via SVD with a relative threshold."""
    A = np.asarray(A, dtype=float)
    if A.shape[1] == 0:
        return np.zeros((0, 0))
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vt[r:].T.copy()


def to_fraction_matrix(A) -> SparseRationalMatrix:
    """Exact copy of a float matrix (each float converted exactly)."""
    A = sp.coo_matrix(A)
    return SparseRationalMatrix.from_entries(A.shape, ((int(r), int(c), Fraction(float(v))) for r, c, v in zip(A.row, A.col, A.data)))
