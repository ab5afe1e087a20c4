"""L2 inner products, discrete harmonic forms and field sampling."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import splines_1d as s1
from .cohomology import ComplexMatrices, cohomology_dims, complex_matrices
from .errors import ConfigurationError, DimensionMismatch, ShapeMismatch
from .hierarchy import DomainHierarchy, HierarchicalBasis, hierarchical_basis
from .linalg import null_space
from .sparse import SparseRationalMatrix, bmat, kron_all
from .tensor_forms import LevelSpaces, component_list

Poly = list  # power-basis coefficients, lowest degree first


def _pmul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return out


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] += y
    return out


def _span_polynomials(knots: tuple[Fraction, ...], q: int, s: int) -> dict[int, Poly]:
    """Degree-``q`` B-splines restricted to span ``[knots[s], knots[s+1])`` as polynomials (0-based ids)."""
    cur = {s: [Fraction(1)]}
    for d in range(1, q + 1):
        nxt: dict[int, Poly] = {}
        for i in range(max(s - d, 0), min(s, len(knots) - d - 2) + 1):
            acc: Poly = [Fraction(0)]
            den = knots[i + d] - knots[i]
            if den and i in cur:
                acc = _padd(acc, _pmul([-knots[i] / den, 1 / den], cur[i]))
            den = knots[i + d + 1] - knots[i + 1]
            if den and (i + 1) in cur:
                acc = _padd(acc, _pmul([knots[i + d + 1] / den, -1 / den], cur[i + 1]))
            if any(acc):
                nxt[i] = acc
        cur = nxt
    return cur


def _integrate(poly: Poly, a: Fraction, b: Fraction) -> Fraction:
    return sum((c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(poly)), Fraction(0))


@lru_cache(maxsize=None)
def gram_matrix_1d(kv: s1.KnotVector, j: int) -> SparseRationalMatrix:
    """Exact ``int B_i B_r dx`` for the basis of space ``j`` (span-wise polynomial integration)."""
    knots = kv.knots
    q = kv.degree - j
    nb = kv.m + j
    entries: dict[tuple[int, int], Fraction] = {}
    for s in range(len(knots) - 1):
        a, b = knots[s], knots[s + 1]
        if a == b:
            continue
        polys = {i: pl for i, pl in _span_polynomials(knots, q, s).items() if 0 <= i < nb}
        for i, pi in polys.items():
            for r, pr in polys.items():
                if r < i:
                    continue
                v = _integrate(_pmul(pi, pr), a, b)
                entries[(i, r)] = entries.get((i, r), Fraction(0)) + v
    full = []
    for (i, r), v in entries.items():
        full.append((i, r, v))
        if i != r:
            full.append((r, i, v))
    return SparseRationalMatrix.from_entries((nb, nb), full)


def mass_matrix(spaces: LevelSpaces, j: int, exact: bool = False):
    """Block-diagonal L2 Gram matrix of the ``j``-form basis; each block is a Kronecker product."""
    blocks = []
    for bits in component_list(spaces.n, j):
        factors = [gram_matrix_1d(kv, b) for kv, b in zip(spaces.knot_vectors, bits)]
        if exact:
            blocks.append(kron_all(factors))
        else:
            M = None
            for f in factors:
                fs = f.to_scipy()
                M = fs if M is None else sp.kron(M, fs, format="csr")
            blocks.append(M)
    if exact:
        sizes = [b.shape[0] for b in blocks]
        return bmat([[blocks[a] if a == c else None for c in range(len(blocks))] for a in range(len(blocks))], sizes, sizes)
    return sp.csr_matrix(sp.block_diag(blocks, format="csr"))


@dataclass
class HarmonicSet:
    j: int
    representatives: list[np.ndarray]  # finest-level coefficient vectors, unit M-norm
    hierarchical: list[np.ndarray]  # the same forms in hierarchical coefficients

    @property
    def count(self) -> int:
        return len(self.representatives)


def _normalised_null_space(A: np.ndarray, tol: float) -> np.ndarray:
    """Null space of ``A`` after scaling its columns to unit norm (mapped back to the original columns)."""
    cn = np.linalg.norm(A, axis=0)
    cn[cn == 0] = 1.0
    return null_space(A / cn, tol) / cn[:, None]


def harmonic_representatives(
    h: DomainHierarchy,
    basis: HierarchicalBasis | None = None,
    j: int = 0,
    tol: float = 1e-10,
    mats: ComplexMatrices | None = None,
    expected: int | None = None,
) -> HarmonicSet:
    """Basis of the hierarchical ``j``-forms that are closed and L2-orthogonal to all exact forms.

    ``expected`` (usually ``dim H^j`` from the rank computation) triggers a
    :class:`DimensionMismatch` when the two routes disagree.
    """
    basis = basis or hierarchical_basis(h)
    mats = mats or complex_matrices(h, basis, exact=False)
    fine = h.levels[h.L]
    P = sp.csc_matrix(mats.P[j].matrix)
    N = P.shape[1]
    if j < h.n:
        K = _normalised_null_space(np.asarray(mats.DP(j).todense()), tol)
    else:
        K = np.eye(N)
    M = mass_matrix(fine, j)
    if j > 0 and K.shape[1]:
        B = sp.csr_matrix(mats.DP(j - 1))
        G = np.asarray((B.T @ (M @ (P @ K))))
        rn = np.linalg.norm(G, axis=1)
        keep = rn > 0
        G = G[keep] / rn[keep, None]
        Y = null_space(G, tol) if G.shape[0] else np.eye(K.shape[1])
        C = K @ Y
    else:
        C = K
    V = P @ C
    reps, hier = [], []
    if C.shape[1]:
        S = V.T @ (M @ V)
        w, U = np.linalg.eigh((S + S.T) / 2)
        W = U / np.sqrt(w)
        V = V @ W
        C = C @ W
        for k in range(V.shape[1]):
            v, c = V[:, k], C[:, k]
            if v[np.argmax(np.abs(v))] < 0:
                v, c = -v, -c
            reps.append(np.ascontiguousarray(v))
            hier.append(np.ascontiguousarray(c))
    out = HarmonicSet(j, reps, hier)
    if expected is not None and out.count != expected:
        raise DimensionMismatch(f"{out.count} harmonic {j}-forms found, cohomology dimension is {expected}")
    return out


def harmonic_residuals(h: DomainHierarchy, mats: ComplexMatrices, j: int, v: np.ndarray) -> tuple[float, float]:
    """``(|D_j v| / |v|_M, |(D_{j-1} P_{j-1})^T M_j v| / |v|)`` for a finest-level vector ``v``."""
    fine = h.levels[h.L]
    M = mass_matrix(fine, j)
    mnorm = float(np.sqrt(v @ (M @ v)))
    r1 = float(np.linalg.norm(mats.D[j] @ v)) / mnorm if j < h.n else 0.0
    r2 = float(np.linalg.norm(mats.DP(j - 1).T @ (M @ v))) / float(np.linalg.norm(v)) if j > 0 else 0.0
    return r1, r2


def all_harmonics(h: DomainHierarchy, tol: float = 1e-10) -> tuple[list[HarmonicSet], object]:
    """Representatives for every degree, cross-checked against the rank-based dimensions."""
    basis = hierarchical_basis(h)
    mats = complex_matrices(h, basis, exact=False)
    report = cohomology_dims(h, basis, backend="float", mats=mats)
    sets = [harmonic_representatives(h, basis, j, tol, mats, expected=report.dims[j]) for j in range(h.n + 1)]
    return sets, report


def sample_field(spaces: LevelSpaces, coefficients: np.ndarray, j: int, resolution: int) -> np.ndarray:
    """Values of every component on a uniform grid with ``resolution`` points per direction.

    Returns an array of shape ``(n_components, resolution, ..., resolution)``.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim != 1 or coefficients.size != spaces.form_dim(j):
        raise ShapeMismatch(f"expected {spaces.form_dim(j)} coefficients for {j}-forms, got {coefficients.shape}")
    if resolution < 2:
        raise ConfigurationError(f"resolution must be at least 2, got {resolution}")
    # t / (r - 1) is correctly rounded, so grid points on rational knots land on the knot
    xs = np.arange(resolution) / (resolution - 1)
    comps = component_list(spaces.n, j)
    offs = spaces.component_offsets(j)
    out = np.zeros((len(comps),) + (resolution,) * spaces.n)
    for c, bits in enumerate(comps):
        shape = spaces.component_shape(bits)
        block = coefficients[offs[bits] : offs[bits] + int(np.prod(shape))].reshape(shape)
        for k, (kv, b) in enumerate(zip(spaces.knot_vectors, bits)):
            Bk = s1.basis_matrix(kv, b, xs)
            block = np.moveaxis(np.tensordot(block, Bk, axes=([k], [1])), -1, k)
        out[c] = block
    return out
