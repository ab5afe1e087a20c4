"""Regenerate the bundled scenario corpus under src/hbsderham/scenarios/.

Run from the repository root:  python3 tools/make_corpus.py
Index conventions: ``zero_forms`` entries are 1-based, so a support starting
at cell ``a`` of a uniform mesh has index ``a + p``.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hbsderham" / "scenarios"


def write(group: str, name: str, data: dict) -> None:
    path = OUT / group / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def scenario(n, p, spans, refinement, name, **kw) -> dict:
    d = {"name": name, "dimension": n, "degree": p, "spans": spans, "levels": 2, "refinement": [refinement]}
    d.update(kw)
    return d


def zero_forms(p, starts):
    return {"zero_forms": [[a + p for a in s] for s in starts]}


def cells(N, *boxes):
    """Boxes given in cell units of an N-span uniform base mesh: (lo0, hi0, lo1, hi1, ...)."""
    return {"cells": [[[f"{b[2 * k]}/{N}", f"{b[2 * k + 1]}/{N}"] for k in range(len(b) // 2)] for b in boxes]}


def block(lo, hi):
    return list(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]))


def planar_ring(R, cut):
    """Starts on the boundary of an R x R square, minus the corner where x + y <= cut."""
    pts = [(x, y) for x in range(R + 1) for y in range(R + 1) if x in (0, R) or y in (0, R)]
    return [(x, y, 0) for x, y in pts if x + y > cut]


def cube_shell(R, cut=-1, both=False):
    """Starts on the surface of an R-cube, optionally minus one or two opposite corners."""
    out = []
    for c in itertools.product(range(R + 1), repeat=3):
        if not (0 in c or R in c):
            continue
        if sum(c) <= cut or (both and sum(R - v for v in c) <= cut):
            continue
        out.append(c)
    return out


def main() -> None:
    # one dimension, quartic, two disjoint refinement regions
    write("line_bisect", "two_regions", {
        "name": "two_regions", "dimension": 1, "degree": 4,
        "knots": [[0, 0, 0, 0, "1/5", "2/5", "3/5", "4/5", 1, 1, 1, 1]],
        "levels": 2,
        "refinement": [{"cells": [[["0", "3/10"]], [["3/5", "1"]]]}],
        "enforce_zero_form_union": False,
    })

    # quadratic chain search fixtures
    base = [(3, 5), (5, 8)]
    sets = {
        "no_chain": base,
        "unique_chain": base + [(4, 5), (4, 6), (5, 6), (5, 7)],
        "no_shortest_chain": base + [(3, 4), (4, 4), (5, 4), (6, 4), (7, 4), (7, 5), (7, 6), (7, 7), (7, 8), (6, 8)],
    }
    for name, S in sets.items():
        write("chains_quadratic", name, scenario(2, 2, [10, 11], {"zero_forms": [list(s) for s in S]}, name))

    # degree six, two refined 0-forms on the diagonal
    pairs = dict(a=(1, 9), b=(1, 8), c=(2, 8), d=(2, 7), e=(3, 7), f=(3, 6), g=(4, 6), h=(4, 5))
    for name, (s, t) in pairs.items():
        write("planar_p6", name, scenario(2, 6, 17, zero_forms(6, [(s, s), (t, t)]), name))

    # planar refinements with spurious cohomology
    write("planar_inexact", "a", scenario(2, 3, 4, cells(4, (1, 3, 1, 3)), "a", enforce_zero_form_union=False))
    write("planar_inexact", "b", scenario(2, 2, 7, zero_forms(2, [(1, 1), (3, 3)]), "b"))
    write("planar_inexact", "c", scenario(2, 2, 9, cells(9, (1, 4, 1, 5), (4, 8, 1, 4), (5, 8, 4, 8), (3, 5, 5, 8)), "c"))
    write("planar_inexact", "d", scenario(2, 2, 9, cells(9, (1, 4, 1, 5), (4, 6, 1, 4), (5, 8, 4, 8), (3, 5, 5, 8)), "d"))

    # trivariate refinements with spurious cohomology
    g = "solid_inexact"
    write(g, "a", scenario(3, 3, 6, cells(6, (2, 4, 2, 4, 2, 4)), "a", enforce_zero_form_union=False))
    write(g, "b", scenario(3, 2, [7, 7, 3], zero_forms(2, planar_ring(4, 1)), "b"))
    write(g, "c", scenario(3, 3, 6, zero_forms(3, [(0, 0, 0), (2, 2, 2)]), "c"))
    write(g, "d", scenario(3, 2, 7, zero_forms(2, cube_shell(4, 2)), "d"))
    write(g, "e", scenario(3, 2, 7, zero_forms(2, cube_shell(4, 2, both=True)), "e"))
    write(g, "f", scenario(3, 3, 8, zero_forms(3, [(0, 3, 4), (1, 0, 4), (1, 4, 2), (2, 1, 0)]), "f"))

    # trivariate exact refinements that satisfy the chain condition
    g = "solid_supported"
    ell = sorted(set(block((0, 0, 0), (2, 0, 1)) + block((0, 0, 0), (0, 2, 1))))
    for name, p in (("a", 2), ("b", 3), ("c", 4)):
        N = [max(s[k] for s in ell) + p + 1 for k in range(3)]
        write(g, name, scenario(3, p, N, zero_forms(p, ell), name))
    for name, p in (("d", 2), ("e", 3), ("f", 4)):
        write(g, name, scenario(3, p, [2 * p + 3, p + 1, p + 1], zero_forms(p, [(0, 0, 0), (p + 2, 0, 0)]), name))
    for name, p, R, T in (("g", 2, (4, 4), 0), ("h", 3, (5, 5), 0), ("i", 3, (5, 6), 1)):
        S = [(x, y, z) for x in range(R[0] + 1) for y in range(R[1] + 1) for z in range(T + 1)
             if x in (0, R[0]) or y in (0, R[1])]
        write(g, name, scenario(3, p, [R[0] + p + 1, R[1] + p + 1, T + p + 1], zero_forms(p, S), name))
    for name, p in (("j", 2), ("k", 3)):
        write(g, name, scenario(3, p, 2 * p + 3, zero_forms(p, cube_shell(p + 2)), name))

    # trivariate exact refinements the chain condition rejects
    g = "solid_unsupported"
    for name, p, off in UNSUPPORTED_PAIRS:
        S = [(0, 0, 0), off]
        N = [max(s[k] for s in S) + p + 1 for k in range(3)]
        write(g, name, scenario(3, p, N, zero_forms(p, S), name))
    for name, N, boxes in UNSUPPORTED_BOXES:
        write(g, name, scenario(3, 3, N, cells(N, *boxes), name, enforce_zero_form_union=False))


# two refined 0-forms sharing a face-like overlap but no chain of supports
UNSUPPORTED_PAIRS = [("a", 2, (2, 1, 0)), ("b", 3, (3, 1, 0)), ("c", 4, (4, 1, 0))]
# unions of 3-form supports meeting along an edge or a corner
UNSUPPORTED_BOXES = [
    ("d", 7, [(0, 4, 0, 4, 0, 4), (3, 6, 3, 6, 0, 3)]),
    ("e", 7, [(0, 4, 0, 4, 0, 4), (3, 6, 3, 6, 0, 4)]),
    ("f", 7, [(0, 4, 0, 4, 0, 4), (3, 6, 3, 6, 3, 6)]),
]

if __name__ == "__main__":
    main()
