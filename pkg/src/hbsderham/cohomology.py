"""Cohomology of the hierarchical spline complex by rank computations.

Every hierarchical basis function is written in the finest level's tensor
basis (matrix ``P_j``); the complex's differential is then the finest-level
``d`` applied to those columns, and

    dim H^j = dim HBS^j - rank(D_j P_j) - rank(D_{j-1} P_{j-1}).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import splines_1d as s1
from .errors import ClosureViolated, NumericalIndeterminacy
from .hierarchy import DomainHierarchy, HierarchicalBasis, hierarchical_basis
from .linalg import DEFAULT_GAP, DEFAULT_TOL, exact_rank, float_rank_details, laplacian_nullity, rank
from .sparse import SparseRationalMatrix, hstack
from .tensor_forms import BasisKey, Bits, LevelSpaces, component_list, exterior_derivative_matrix


@dataclass
class BasisMatrix:
    j: int
    matrix: object  # SparseRationalMatrix or scipy CSC, rows = finest-level coefficients
    keys: list[BasisKey]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _chain_factors(h: DomainHierarchy, level: int, bits: Bits) -> list[SparseRationalMatrix]:
    fine = h.levels[h.L]
    return [s1.insertion_matrix_1d(kc, kf, b) for kc, kf, b in zip(h.levels[level].knot_vectors, fine.knot_vectors, bits)]


def _exact_columns(factors: list[SparseRationalMatrix], shape_c: tuple[int, ...], flat: np.ndarray) -> list[dict[int, Fraction]]:
    cols_1d = [f.T.rows_dict() for f in factors]
    fine_shape = tuple(f.shape[0] for f in factors)
    strides = [int(np.prod(fine_shape[k + 1 :])) for k in range(len(fine_shape))]
    out = []
    for fi in flat:
        idx = np.unravel_index(int(fi), shape_c)
        col = {0: Fraction(1)}
        for k, ik in enumerate(idx):
            nxt = {}
            for base, v in col.items():
                for r, w in cols_1d[k].get(int(ik), {}).items():
                    nxt[base + r * strides[k]] = v * w
            col = nxt
        out.append(col)
    return out


def hierarchical_basis_matrix(h: DomainHierarchy, basis: HierarchicalBasis, j: int, exact: bool = False) -> BasisMatrix:
    """Finest-level coefficients of every hierarchical ``j``-form basis function (one column each)."""
    fine = h.levels[h.L]
    comps = component_list(h.n, j)
    row_off = fine.component_offsets(j)
    n_rows = fine.form_dim(j)
    keys: list[BasisKey] = []
    if exact:
        columns: list[dict[int, Fraction]] = []
        for bits in comps:
            for level, flat in enumerate(basis.selected[bits]):
                if not len(flat):
                    continue
                sp_ = h.levels[level]
                for col in _exact_columns(_chain_factors(h, level, bits), sp_.component_shape(bits), flat):
                    columns.append({r + row_off[bits]: v for r, v in col.items()})
                keys.extend(BasisKey(level, bits, sp_.unflat(bits, int(f))) for f in flat)
        rows: dict[int, dict[int, Fraction]] = {}
        for c, col in enumerate(columns):
            for r, v in col.items():
                rows.setdefault(r, {})[c] = v
        return BasisMatrix(j, SparseRationalMatrix((n_rows, len(columns)), rows), keys)
    blocks = []
    for bits in comps:
        for level, flat in enumerate(basis.selected[bits]):
            if not len(flat):
                continue
            sp_ = h.levels[level]
            T = None
            for f in _chain_factors(h, level, bits):
                fs = f.to_scipy()
                T = fs if T is None else sp.kron(T, fs, format="csr")
            T = sp.csc_matrix(T)[:, flat]
            T = sp.vstack([sp.csc_matrix((row_off[bits], T.shape[1])), T, sp.csc_matrix((n_rows - row_off[bits] - T.shape[0], T.shape[1]))])
            blocks.append(sp.csc_matrix(T))
            keys.extend(BasisKey(level, bits, sp_.unflat(bits, int(f))) for f in flat)
    M = sp.hstack(blocks, format="csc") if blocks else sp.csc_matrix((n_rows, 0))
    return BasisMatrix(j, M, keys)


@dataclass
class ComplexMatrices:
    """Finest-level derivative matrices and hierarchical basis matrices for one backend."""

    P: list[BasisMatrix]
    D: list[object]  # D[j]: j-forms -> (j+1)-forms on the finest level
    exact: bool

    def DP(self, j: int):
        return self.D[j] @ self.P[j].matrix


def complex_matrices(h: DomainHierarchy, basis: HierarchicalBasis | None = None, exact: bool = False) -> ComplexMatrices:
    basis = basis or hierarchical_basis(h)
    fine = h.levels[h.L]
    P = [hierarchical_basis_matrix(h, basis, j, exact) for j in range(h.n + 1)]
    D = [exterior_derivative_matrix(fine, j, exact) for j in range(h.n)]
    return ComplexMatrices(P, D, exact)


def _closure_float(P, B, tol: float = 1e-8, block: int = 256) -> bool:
    P = sp.csc_matrix(P)
    B = sp.csc_matrix(B)
    if B.shape[1] == 0:
        return True
    if P.shape[1] == 0:
        return B.count_nonzero() == 0
    lu = spla.splu(sp.csc_matrix(P.T @ P))
    PT = sp.csr_matrix(P.T)
    scale = np.maximum(np.sqrt(np.asarray(B.multiply(B).sum(axis=0)).ravel()), 1.0)
    # least-squares residuals in column blocks, so no dense array spans all of B
    for a in range(0, B.shape[1], block):
        Bb = B[:, a : a + block]
        X = lu.solve(np.asarray((PT @ Bb).todense()))
        R = Bb.toarray() - P @ X
        if np.max(np.linalg.norm(R, axis=0) / scale[a : a + block]) > tol:
            return False
    return True


def closure_check(h: DomainHierarchy, basis: HierarchicalBasis | None = None, j: int = 0, backend: str = "exact", mats: ComplexMatrices | None = None) -> bool:
    """Whether ``d`` maps the hierarchical ``j``-forms into the hierarchical ``(j+1)``-forms."""
    if mats is None:
        mats = complex_matrices(h, basis, exact=backend == "exact")
    B = mats.DP(j)
    P1 = mats.P[j + 1].matrix
    if mats.exact:
        return exact_rank(hstack([P1, B])) == exact_rank(P1)
    return _closure_float(P1, B)


@dataclass
class CohomologyReport:
    dims: list[int]
    spurious: list[int]
    space_dims: list[int]
    ranks: list[int]
    backend: str
    rank_tolerance: float | None
    closure: list[bool]
    timings: dict[str, float] = field(default_factory=dict)
    pivot_gaps: list[float] = field(default_factory=list)
    float_method: str | None = None

    @property
    def exact(self) -> bool:
        return not any(self.spurious)

    @property
    def euler_consistent(self) -> bool:
        a = sum((-1) ** j * d for j, d in enumerate(self.space_dims))
        b = sum((-1) ** j * d for j, d in enumerate(self.dims))
        return a == b

    def to_json(self) -> dict:
        return {
            "dims": self.dims,
            "spurious": self.spurious,
            "exact": self.exact,
            "space_dims": self.space_dims,
            "ranks": self.ranks,
            "backend": self.backend,
            "rank_tolerance": self.rank_tolerance,
            "closure": self.closure,
            "euler_consistent": self.euler_consistent,
            "pivot_gaps": self.pivot_gaps,
            "float_method": self.float_method,
            "timings": self.timings,
        }


QR_COLUMN_LIMIT = 2000


def _unit_columns(M) -> sp.csr_matrix:
    M = sp.csr_matrix(M, dtype=float)
    cn = np.sqrt(np.asarray(M.multiply(M).sum(axis=0)).ravel())
    cn[cn == 0] = 1.0
    return sp.csr_matrix(M @ sp.diags(1.0 / cn))


def laplacian_dims(mats: ComplexMatrices, tol: float = DEFAULT_TOL) -> tuple[list[int], list[float]]:
    """Cohomology dimensions as nullities of coefficient-space Hodge Laplacians.

    With the hierarchical columns scaled to unit length, the harmonic
    ``j``-forms are the kernel of ``A_j^T A_j + B_j^T B_j`` where
    ``A_j = D_j P_j`` and ``B_j = (D_{j-1} P_{j-1})^T P_j``.
    """
    n = len(mats.D)
    P = [_unit_columns(mats.P[j].matrix) for j in range(n + 1)]
    A = [sp.csr_matrix(mats.D[j] @ P[j]) for j in range(n)]
    dims, gaps = [], []
    for j in range(n + 1):
        N = P[j].shape[1]
        K = sp.csr_matrix((N, N))
        if j < n:
            K = K + A[j].T @ A[j]
        if j > 0:
            B = sp.csr_matrix(A[j - 1].T @ P[j])
            K = K + B.T @ B
        null, gap = laplacian_nullity(K, tol)
        dims.append(null)
        gaps.append(gap)
    return dims, gaps


def cohomology_dims(
    h: DomainHierarchy,
    basis: HierarchicalBasis | None = None,
    backend: str = "float",
    tol: float = DEFAULT_TOL,
    check_closure: bool = True,
    mats: ComplexMatrices | None = None,
    float_method: str = "auto",
) -> CohomologyReport:
    """Dimensions of the hierarchical complex's cohomology.

    The floating backend uses pivoted QR ranks while every ``P_j`` has at most
    ``QR_COLUMN_LIMIT`` columns (``float_method="auto"``) and sparse Laplacian
    nullities beyond that; ``float_method`` forces either route.
    """
    t0 = time.perf_counter()
    basis = basis or hierarchical_basis(h)
    exact = backend == "exact"
    if mats is None:
        mats = complex_matrices(h, basis, exact=exact)
    t1 = time.perf_counter()
    n = h.n
    closure = []
    if check_closure:
        for j in range(n):
            ok = closure_check(h, basis, j, backend, mats)
            closure.append(ok)
            if not ok:
                raise ClosureViolated(f"d maps hierarchical {j}-forms outside the hierarchical {j + 1}-forms")
    t2 = time.perf_counter()
    space = basis.dims()
    if float_method not in ("auto", "qr", "laplacian"):
        raise ValueError(f"unknown float_method {float_method!r}")
    use_laplacian = not exact and (
        float_method == "laplacian" or (float_method == "auto" and max(space) > QR_COLUMN_LIMIT)
    )
    ranks, gaps = [], []
    if use_laplacian:
        dims, gaps = laplacian_dims(mats, tol)
        for j, g in enumerate(gaps):
            if g <= DEFAULT_GAP:
                raise NumericalIndeterminacy(f"Laplacian nullity for {j}-forms: eigenvalue gap {g:.3g} is too small")
        for j in range(n):
            ranks.append(space[j] - dims[j] - (ranks[j - 1] if j > 0 else 0))
        if space[n] - ranks[n - 1] != dims[n] or min(ranks) < 0:
            raise NumericalIndeterminacy(f"Laplacian nullities {dims} are inconsistent with space dimensions {space}")
        ranks.append(0)
    else:
        for j in range(n):
            A = mats.DP(j)
            if exact:
                ranks.append(rank(A, "exact"))
            else:
                res = float_rank_details(A, tol)
                gaps.append(res.gap)
                if not res.determinate:
                    raise NumericalIndeterminacy(f"rank of D_{j} P_{j}: pivot gap {res.gap:.3g} is too small")
                ranks.append(res.rank)
        ranks.append(0)
        dims = [space[j] - ranks[j] - (ranks[j - 1] if j > 0 else 0) for j in range(n + 1)]
    t3 = time.perf_counter()
    expected = [0] * n + [1]
    spurious = [d - e for d, e in zip(dims, expected)]
    return CohomologyReport(
        dims=dims,
        spurious=spurious,
        space_dims=space,
        ranks=ranks[:n],
        backend=backend,
        rank_tolerance=None if exact else tol,
        float_method=None if exact else ("laplacian" if use_laplacian else "qr"),
        closure=closure,
        timings={"assembly": t1 - t0, "closure": t2 - t1, "ranks": t3 - t2},
        pivot_gaps=[float(g) for g in gaps],
    )
