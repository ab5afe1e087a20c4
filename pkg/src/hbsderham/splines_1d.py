"""Univariate open knot vectors and the two boundary-condition spline spaces.

Conventions (1-based indices throughout the public API):

* a knot vector of degree ``p`` starts with ``p`` zeros and ends with ``p``
  ones, so every degree-``p`` B-spline vanishes at both ends;
* ``j = 0`` is the degree-``p`` space with ``m = len(knots) - p - 1`` functions,
  ``j = 1`` the degree-``p-1`` space with ``m + 1`` functions;
* the ``i``-th function of space ``j`` lives on the knots
  ``xi_i, ..., xi_{i+p-j+1}``.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadDegree,
    BadRange,
    DegreeMismatch,
    ExcessMultiplicity,
    IndexOutOfRange,
    NotNested,
    NotOpen,
    NotSorted,
    OutOfDomain,
)
from .sparse import SparseRationalMatrix

RationalLike = Union[int, str, Fraction]


def as_rational(value: RationalLike | float) -> Fraction:
    """Parse ``value`` into a Fraction; strings may be ``"a/b"`` or integers."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class KnotVector:
    """Validated open knot vector.  Build it with :func:`validate_knot_vector`."""

    degree: int
    knots: tuple[Fraction, ...]

    @property
    def p(self) -> int:
        return self.degree

    @property
    def m(self) -> int:
        return len(self.knots) - self.degree - 1

    def xi(self, i: int) -> Fraction:
        """1-based knot access."""
        return self.knots[i - 1]

    @cached_property
    def breakpoints(self) -> tuple[Fraction, ...]:
        """Unique knot values in increasing order."""
        return tuple(sorted(set(self.knots)))

    @cached_property
    def breakpoint_index(self) -> dict[Fraction, int]:
        return {v: k for k, v in enumerate(self.breakpoints)}

    @property
    def n_spans(self) -> int:
        return len(self.breakpoints) - 1

    def dim(self, j: int) -> int:
        return self.m + j

    def __str__(self) -> str:
        return f"p={self.degree} [" + ", ".join(str(k) for k in self.knots) + "]"


def validate_knot_vector(knots: Iterable[RationalLike], p: int) -> KnotVector:
    ks = tuple(as_rational(k) for k in knots)
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise BadDegree(f"degree must be a positive integer, got {p!r}")
    p = int(p)
    if not ks:
        raise BadRange("empty knot vector")
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise NotSorted("knots must be non-decreasing")
    if ks[0] != 0 or ks[-1] != 1:
        raise BadRange(f"knots must start at 0 and end at 1, got {ks[0]} .. {ks[-1]}")
    mult = Counter(ks)
    if mult[Fraction(0)] != p or mult[Fraction(1)] != p:
        raise NotOpen(f"end knots must appear exactly p={p} times (0 appears {mult[Fraction(0)]}, 1 appears {mult[Fraction(1)]})")
    for v, c in mult.items():
        if c > p:
            raise ExcessMultiplicity(f"knot {v} appears {c} > p={p} times")
    if len(ks) - p - 1 < 1:
        raise BadRange("knot vector too short: need at least one 0-form")
    return KnotVector(p, ks)


def uniform_knot_vector(p: int, n_spans: int) -> KnotVector:
    """Open uniform knot vector with ``n_spans`` equal spans and simple interior knots."""
    interior = [Fraction(k, n_spans) for k in range(1, n_spans)]
    return validate_knot_vector([Fraction(0)] * p + interior + [Fraction(1)] * p, p)


@dataclass(frozen=True)
class UnivariateSpace:
    kv: KnotVector
    j: int

    def __post_init__(self):
        if self.j not in (0, 1):
            raise BadDegree(f"univariate form degree must be 0 or 1, got {self.j}")

    @property
    def degree(self) -> int:
        return self.kv.degree - self.j


def dimension(space: UnivariateSpace) -> int:
    return space.kv.m + space.j


@dataclass(frozen=True)
class GrevilleMesh1D:
    points: tuple[Fraction, ...]

    @property
    def edges(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.points[:-1], self.points[1:]))


def greville_points(kv: KnotVector) -> tuple[Fraction, ...]:
    p, m = kv.degree, kv.m
    inner = [sum(kv.knots[i : i + p], Fraction(0)) / p for i in range(1, m + 1)]
    return (Fraction(0), *inner, Fraction(1))


def greville_mesh(kv: KnotVector) -> GrevilleMesh1D:
    return GrevilleMesh1D(greville_points(kv))


def _check_index(kv: KnotVector, j: int, i: int) -> None:
    if j not in (0, 1):
        raise BadDegree(f"j must be 0 or 1, got {j}")
    if not 1 <= i <= kv.m + j:
        raise IndexOutOfRange(f"index {i} outside 1..{kv.m + j} for j={j}")


def local_knot_vector(kv: KnotVector, j: int, i: int) -> tuple[Fraction, ...]:
    _check_index(kv, j, i)
    return kv.knots[i - 1 : i + kv.degree - j + 1]


def support_1d(kv: KnotVector, j: int, i: int) -> tuple[Fraction, Fraction]:
    """Open support interval ``(xi_i, xi_{i+p-j+1})``."""
    _check_index(kv, j, i)
    return kv.xi(i), kv.xi(i + kv.degree - j + 1)


# --------------------------------------------------------------------------
# evaluation


def _span_index(knots: Sequence, x) -> int:
    """0-based ``s`` with ``knots[s] <= x < knots[s+1]``; the last non-empty span is closed on the right."""
    if x >= knots[-1]:
        s = len(knots) - 2
        while knots[s] == knots[s + 1]:
            s -= 1
        return s
    return bisect_right(knots, x) - 1


def _cox_de_boor_scalar(knots: Sequence, q: int, x):
    """All degree-``q`` B-spline values at ``x`` (works with Fractions or floats)."""
    nb = len(knots) - q - 1
    s = _span_index(knots, x)
    one, zero = (Fraction(1), Fraction(0)) if isinstance(x, Fraction) else (1.0, 0.0)
    vals = [zero] * (len(knots) - 1)
    vals[s] = one
    for d in range(1, q + 1):
        nxt = [zero] * (len(knots) - 1 - d)
        for i in range(len(nxt)):
            acc = zero
            den = knots[i + d] - knots[i]
            if den and vals[i]:
                acc += (x - knots[i]) / den * vals[i]
            den = knots[i + d + 1] - knots[i + 1]
            if den and vals[i + 1]:
                acc += (knots[i + d + 1] - x) / den * vals[i + 1]
            nxt[i] = acc
        vals = nxt
    return vals[:nb]


def eval_basis(kv: KnotVector, j: int, i: int, x: RationalLike | float, exact: bool = False):
    """Value of the ``i``-th basis function of space ``j`` at ``x``.

    Returns a float; with ``exact=True`` and a rational ``x`` the value is an
    exact Fraction.
    """
    _check_index(kv, j, i)
    if isinstance(x, float):
        xv = x
    else:
        xv = as_rational(x)
    if not 0 <= xv <= 1:
        raise OutOfDomain(f"x={x} outside [0, 1]")
    if exact:
        if isinstance(xv, float):
            xv = Fraction(xv)
        return _cox_de_boor_scalar(kv.knots, kv.degree - j, xv)[i - 1]
    return float(_cox_de_boor_scalar(_float_knots(kv), kv.degree - j, float(xv))[i - 1])


@lru_cache(maxsize=None)
def _float_knots_cached(knots: tuple[Fraction, ...]) -> tuple[float, ...]:
    return tuple(float(k) for k in knots)


def _float_knots(kv: KnotVector) -> tuple[float, ...]:
    return _float_knots_cached(kv.knots)


def basis_matrix(kv: KnotVector, j: int, xs: np.ndarray) -> np.ndarray:
    """Values of all basis functions of space ``j`` at the points ``xs``.

    Vectorised Cox–de Boor; returns an array of shape ``(len(xs), m + j)``.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 0 or xs.max() > 1):
        raise OutOfDomain("evaluation points must lie in [0, 1]")
    t = np.array(_float_knots(kv))
    q = kv.degree - j
    nk = len(t)
    spans = np.searchsorted(t, xs, side="right") - 1
    last = nk - 2
    while t[last] == t[last + 1]:
        last -= 1
    spans = np.where(xs >= t[-1], last, spans)
    vals = np.zeros((xs.size, nk - 1))
    vals[np.arange(xs.size), spans] = 1.0
    for d in range(1, q + 1):
        nxt = np.zeros((xs.size, nk - 1 - d))
        for i in range(nk - 1 - d):
            den = t[i + d] - t[i]
            if den > 0:
                nxt[:, i] += (xs - t[i]) / den * vals[:, i]
            den = t[i + d + 1] - t[i + 1]
            if den > 0:
                nxt[:, i] += (t[i + d + 1] - xs) / den * vals[:, i + 1]
        vals = nxt
    return vals[:, : kv.m + j]


# --------------------------------------------------------------------------
# exact structural matrices


@lru_cache(maxsize=None)
def derivative_matrix_1d(kv: KnotVector) -> SparseRationalMatrix:
    """Bidiagonal ``(m+1) x m`` matrix mapping S^0 coefficients to S^1 coefficients of the derivative."""
    p, m = kv.degree, kv.m
    entries = []
    for i in range(1, m + 1):
        entries.append((i - 1, i - 1, Fraction(p) / (kv.xi(i + p) - kv.xi(i))))
        entries.append((i, i - 1, -Fraction(p) / (kv.xi(i + p + 1) - kv.xi(i + 1))))
    return SparseRationalMatrix.from_entries((m + 1, m), entries)


def integral_weights_1d(kv: KnotVector) -> tuple[Fraction, ...]:
    """Integrals of the S^1 basis functions, ``(xi_{r+p} - xi_r) / p``."""
    p = kv.degree
    return tuple((kv.xi(r + p) - kv.xi(r)) / p for r in range(1, kv.m + 2))


def is_nested(coarse: KnotVector, fine: KnotVector) -> bool:
    if coarse.degree != fine.degree:
        raise DegreeMismatch(f"degrees differ: {coarse.degree} vs {fine.degree}")
    cf = Counter(fine.knots)
    return all(c <= cf[v] for v, c in Counter(coarse.knots).items())


def _single_insertion(knots: list[Fraction], q: int, u: Fraction) -> SparseRationalMatrix:
    """Boehm matrix for inserting ``u`` into the degree-``q`` basis on ``knots``."""
    nb = len(knots) - q - 1
    s = bisect_right(knots, u) - 1

    def omega(i: int) -> Fraction:
        if i <= s - q:
            return Fraction(1)
        if i >= s + 1:
            return Fraction(0)
        return (u - knots[i]) / (knots[i + q] - knots[i])

    entries = []
    for i in range(nb):
        w = omega(i)
        entries.append((i, i, w))
        entries.append((i + 1, i, 1 - omega(i + 1)))
    return SparseRationalMatrix.from_entries((nb + 1, nb), entries)


@lru_cache(maxsize=None)
def insertion_matrix_1d(coarse: KnotVector, fine: KnotVector, j: int) -> SparseRationalMatrix:
    """Matrix ``T`` with fine coefficients ``= T @ coarse`` coefficients for space ``j``."""
    if j not in (0, 1):
        raise BadDegree(f"j must be 0 or 1, got {j}")
    if not is_nested(coarse, fine):
        raise NotNested(f"{coarse} is not nested in {fine}")
    q = coarse.degree - j
    missing = Counter(fine.knots) - Counter(coarse.knots)
    knots = list(coarse.knots)
    T = SparseRationalMatrix.identity(coarse.m + j)
    for u in sorted(missing.elements()):
        T = _single_insertion(knots, q, u) @ T
        knots.insert(bisect_right(knots, u), u)
    return T


def dyadic_refinement(kv: KnotVector) -> KnotVector:
    """Bisect every non-empty span, keeping existing multiplicities."""
    b = kv.breakpoints
    mids = [(a + c) / 2 for a, c in zip(b, b[1:])]
    return KnotVector(kv.degree, tuple(sorted(kv.knots + tuple(mids))))
