"""Seeded random generators for knot vectors, level spaces and hierarchies."""

from __future__ import annotations

from fractions import Fraction
from importlib.resources import files
from pathlib import Path

import numpy as np

from hbsderham.hierarchy import DomainHierarchy, build_hierarchy
from hbsderham.scenario import build_scenario, parse_scenario
from hbsderham.splines_1d import KnotVector, dyadic_refinement, validate_knot_vector
from hbsderham.tensor_forms import LevelSpaces

SCENARIOS = Path(str(files("hbsderham") / "scenarios"))


def scenario_path(group: str, name: str) -> Path:
    return SCENARIOS / group / f"{name}.json"


def load(group: str, name: str):
    sc = parse_scenario(scenario_path(group, name))
    return sc, build_scenario(sc)


def random_knot_vector(rng: np.random.Generator, p: int, max_spans: int = 5, denominator: int = 12) -> KnotVector:
    """Open knot vector with rational interior knots and multiplicities up to ``p``."""
    while True:
        spans = int(rng.integers(1, max_spans + 1))
        values = sorted({Fraction(int(v), denominator) for v in rng.integers(1, denominator, size=spans - 1)})
        knots = [Fraction(0)] * p
        for v in values:
            knots += [v] * int(rng.integers(1, p + 1))
        knots += [Fraction(1)] * p
        if len(knots) - p - 1 >= 1:
            return validate_knot_vector(knots, p)


def random_spaces(rng: np.random.Generator, n: int, max_p: int = 4, max_spans: int = 4, min_dim: int = 1) -> LevelSpaces:
    kvs = []
    for _ in range(n):
        while True:
            kv = random_knot_vector(rng, int(rng.integers(1, max_p + 1)), max_spans)
            if kv.m >= min_dim:
                break
        kvs.append(kv)
    return LevelSpaces(tuple(kvs), 0)


def dyadic_levels(base: LevelSpaces, L: int) -> list[LevelSpaces]:
    levels = [base]
    for l in range(1, L + 1):
        levels.append(LevelSpaces(tuple(dyadic_refinement(kv) for kv in levels[-1].knot_vectors), l))
    return levels


def uniform_spaces(n: int, p: int, spans: int) -> LevelSpaces:
    interior = [Fraction(k, spans) for k in range(1, spans)]
    kv = validate_knot_vector([0] * p + interior + [1] * p, p)
    return LevelSpaces((kv,) * n, 0)


def random_hierarchy(rng: np.random.Generator, n: int, max_p: int = 3, max_spans: int = 4,
                     L: int = 2, density: float = 0.35) -> DomainHierarchy:
    """Dyadic hierarchy whose refinement sets are random refined-domain 0-forms."""
    base = random_spaces(rng, n, max_p, max_spans, min_dim=2)
    levels = dyadic_levels(base, L)
    sets = []
    for l in range(L):
        cand = [tuple(int(v) + 1 for v in ix) for ix in np.ndindex(*levels[l].dims0)]
        if l:
            # deeper refinements must stay inside Omega_l
            partial = build_hierarchy(levels[: l + 1], sets)
            allowed = partial.supported_mask(l, (0,) * n, partial.omega(l))
            cand = [ix for ix in cand if allowed[tuple(i - 1 for i in ix)]]
        sets.append([ix for ix in cand if rng.random() < density])
    return build_hierarchy(levels, sets)
