"""Local admissibility checks for refined 0-forms.

Two refined level-``l`` 0-forms whose supports meet in a slab that is at least
``p`` fine spans thick in all but one direction must be joined by a monotone
unit-step chain of refined 0-forms.  Offsets with mixed signs are handled per
axis by ordering the two endpoints, which is the same as reflecting that axis.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import IndexOutOfRange, NotRefined
from .hierarchy import DomainHierarchy, zero_form_union_holds
from .tensor_forms import Index


def _fine_positions(h: DomainHierarchy, level: int):
    """Per direction: knot value -> (first, last) 1-based position in the level+1 knot vector."""
    out = []
    for kv in h.levels[level + 1].knot_vectors:
        first: dict = {}
        last: dict = {}
        for pos, v in enumerate(kv.knots, start=1):
            first.setdefault(v, pos)
            last[v] = pos
        out.append((first, last))
    return out


def index_maps(h: DomainHierarchy, level: int, index: Index) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(I_minus, I_plus)``: positions in the next level's knots of the first and last knot of ``alpha_index``."""
    if not 0 <= level < h.L:
        raise IndexOutOfRange(f"level {level} has no finer level")
    coarse = h.levels[level]
    coarse.check_key((0,) * h.n, index)
    pos = _fine_positions(h, level)
    lo, hi = [], []
    for kv, (first, last), i in zip(coarse.knot_vectors, pos, index):
        lo.append(first[kv.xi(i)])
        hi.append(last[kv.xi(i + kv.degree + 1)])
    return tuple(lo), tuple(hi)


class _Refined:
    """Lookup of refined 0-forms on one level plus cached index maps."""

    def __init__(self, h: DomainHierarchy, level: int):
        self.h = h
        self.level = level
        self.mask = h.supported_mask(level, (0,) * h.n, h.omega(level + 1))
        self.fine_degrees = h.levels[level + 1].degrees
        self.degrees = h.levels[level].degrees
        pos = _fine_positions(h, level)
        self.lo = []
        self.hi = []
        for kv, (first, last) in zip(h.levels[level].knot_vectors, pos):
            self.lo.append([0] + [first[kv.xi(i)] for i in range(1, kv.m + 1)])
            self.hi.append([0] + [last[kv.xi(i + kv.degree + 1)] for i in range(1, kv.m + 1)])

    def __contains__(self, index: Index) -> bool:
        if any(not 1 <= i <= s for i, s in zip(index, self.mask.shape)):
            return False
        return bool(self.mask[tuple(i - 1 for i in index)])

    def require(self, index: Index) -> None:
        if index not in self:
            raise NotRefined(f"level {self.level} 0-form {index} is not supported on Omega_{self.level + 1}")

    def overlap_widths(self, a: Index, b: Index) -> list[int]:
        out = []
        for k, (x, y) in enumerate(zip(a, b)):
            left, right = (x, y) if x <= y else (y, x)
            out.append(self.hi[k][left] - self.lo[k][right])
        return out


def _intersection(ref: _Refined, a: Index, b: Index) -> tuple[bool, list[int]]:
    widths = ref.overlap_widths(a, b)
    n = len(widths)
    if any(w < 0 for w in widths):
        return False, []
    thick = [w >= p for w, p in zip(widths, ref.fine_degrees)]
    if sum(thick) < n - 1:
        return False, []
    k0 = [k for k in range(n) if all(thick[q] for q in range(n) if q != k)]
    return True, k0


def shares_intersection(h: DomainHierarchy, level: int, ibar: Index, delta: tuple[int, ...]) -> tuple[bool, list[int]]:
    """Whether two refined 0-forms share a thick intersection, and the admissible thin directions."""
    ref = _Refined(h, level)
    other = tuple(i + d for i, d in zip(ibar, delta))
    ref.require(tuple(ibar))
    ref.require(other)
    return _intersection(ref, tuple(ibar), other)


def _chain(ref: _Refined, a: Index, b: Index) -> list[Index] | None:
    n = len(a)
    steps = [1 if y >= x else -1 for x, y in zip(a, b)]
    extent = [abs(y - x) for x, y in zip(a, b)]
    reach = np.zeros([e + 1 for e in extent], dtype=bool)
    for off in itertools.product(*[range(e + 1) for e in extent]):
        point = tuple(x + s * o for x, s, o in zip(a, steps, off))
        if point not in ref:
            continue
        if not any(off):
            reach[off] = True
            continue
        for k in range(n):
            if off[k] and reach[off[:k] + (off[k] - 1,) + off[k + 1 :]]:
                reach[off] = True
                break
    end = tuple(extent)
    if not reach[end]:
        return None
    path = [end]
    cur = end
    while any(cur):
        for k in range(n):
            if cur[k]:
                prev = cur[:k] + (cur[k] - 1,) + cur[k + 1 :]
                if reach[prev]:
                    cur = prev
                    break
        path.append(cur)
    path.reverse()
    return [tuple(x + s * o for x, s, o in zip(a, steps, off)) for off in path]


def shortest_chain(h: DomainHierarchy, level: int, ibar: Index, delta: tuple[int, ...]) -> list[Index] | None:
    """A monotone unit-step chain of refined 0-forms from ``ibar`` to ``ibar + delta``, if one exists."""
    ref = _Refined(h, level)
    other = tuple(i + d for i, d in zip(ibar, delta))
    ref.require(tuple(ibar))
    ref.require(other)
    return _chain(ref, tuple(ibar), other)


def enumerate_chains(h: DomainHierarchy, level: int, ibar: Index, delta: tuple[int, ...]) -> Iterator[list[Index]]:
    """Brute-force enumeration of every monotone lattice path, yielding the fully refined ones."""
    ref = _Refined(h, level)
    steps = [(1 if d >= 0 else -1) for d in delta]
    moves = [k for k, d in enumerate(delta) for _ in range(abs(d))]
    seen = set()
    for order in itertools.permutations(moves):
        if order in seen:
            continue
        seen.add(order)
        cur = list(ibar)
        path = [tuple(cur)]
        for k in order:
            cur[k] += steps[k]
            path.append(tuple(cur))
        if all(p in ref for p in path):
            yield path


@dataclass
class PairReport:
    level: int
    first: Index
    second: Index
    shares_intersection: bool
    directions: list[int]
    shortest_chain: list[Index] | None
    verdict: str  # "pass", "no-chain-needed", "violation"
    reason: str = ""

    @property
    def delta(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.first, self.second))

    def to_json(self) -> dict:
        return {"level": self.level, "i": list(self.first), "delta": list(self.delta), "reason": self.reason}


@dataclass
class AdmissibilityReport:
    violations: list[PairReport] = field(default_factory=list)
    zero_form_union_violations: list[int] = field(default_factory=list)
    pairs_checked: int = 0
    pairs_pruned: int = 0

    @property
    def overall(self) -> bool:
        return not self.violations and not self.zero_form_union_violations

    def to_json(self) -> dict:
        items = [v.to_json() for v in self.violations]
        items += [{"level": l, "i": None, "delta": None, "reason": "refinement domain is not a union of 0-form supports"} for l in self.zero_form_union_violations]
        return {"overall": self.overall, "violations": items, "pairs_checked": self.pairs_checked, "pairs_pruned": self.pairs_pruned}


def check_level(h: DomainHierarchy, level: int, report: AdmissibilityReport) -> None:
    ref = _Refined(h, level)
    refined = [tuple(int(v) + 1 for v in ix) for ix in np.argwhere(ref.mask)]
    verified: set[tuple[Index, Index]] = set()
    # closed supports can still touch along a knot hyperplane one step past p,
    # and further when that knot is repeated
    reach = [kv.degree + max(Counter(kv.knots[kv.degree : -kv.degree] or (0,)).values()) for kv in h.levels[level].knot_vectors]
    ranges = [range(-r, r + 1) for r in reach]
    for a in refined:
        for delta in itertools.product(*ranges):
            b = tuple(x + d for x, d in zip(a, delta))
            if not b > a or b not in ref:
                continue
            if (a, b) in verified:
                report.pairs_pruned += 1
                continue
            ok, dirs = _intersection(ref, a, b)
            if not ok:
                continue
            report.pairs_checked += 1
            chain = _chain(ref, a, b)
            if chain is None:
                report.violations.append(PairReport(level, a, b, True, dirs, None, "violation", "no shortest chain"))
                continue
            for x, y in itertools.combinations(chain, 2):
                verified.add((x, y) if x < y else (y, x))


def check_chain_condition(h: DomainHierarchy, include_zero_form_union: bool = True) -> AdmissibilityReport:
    """Sweep all refined pairs on every level; optionally also flag domains that are not 0-form unions."""
    report = AdmissibilityReport()
    for level in range(h.L):
        check_level(h, level, report)
    if include_zero_form_union:
        report.zero_form_union_violations = zero_form_union_holds(h)
    return report


check_assumption3 = check_chain_condition
