"""Declarative refinement scenarios (JSON) and their translation to hierarchies.

Schema (all keys except ``dimension``, ``degree`` and one of ``spans`` /
``knots`` are optional)::

    {
      "name": "two-boxes",
      "dimension": 2,
      "degree": 2,                      # or one entry per direction
      "spans": 7,                       # uniform base mesh, or ...
      "knots": [["0", "0", "1/3", ...]],# ... explicit open knot vectors per direction
      "levels": 2,                      # number of levels L + 1
      "rule": "dyadic",                 # or "explicit" with "level_knots"
      "level_knots": [[[...], [...]]],  # levels 1..L, one knot vector per direction
      "refinement": [                   # one entry per level 0..L-1
        {"zero_forms": [[3, 3], [5, 5]]},
        {"cells": [[["1/4", "1/2"], ["0", "1/2"]]]}
      ],
      "enforce_zero_form_union": true,
      "options": {"backend": "float", "tolerance": 1e-10}
    }

Rationals are JSON integers, decimal numbers (read exactly as written) or
strings ``"a/b"``.  ``zero_forms`` entries are 1-based level-``l`` 0-form
indices; ``cells`` entries are boxes aligned with the level ``l + 1`` mesh.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import splines_1d as s1
from .errors import (
    ConfigurationError,
    DegreeMismatch,
    IndexOutOfRange,
    KnotVectorError,
    NotContained,
    NotNested,
    ScenarioParseError,
    ScenarioValidationError,
    ZeroFormUnionViolation,
)
from .hierarchy import DomainHierarchy, box_to_mask, build_hierarchy, build_hierarchy_from_cells
from .tensor_forms import Box, LevelSpaces

BACKENDS = ("exact", "float")


@dataclass(frozen=True)
class Refinement:
    kind: str  # "zero_forms" | "cells"
    zero_forms: tuple[tuple[int, ...], ...] = ()
    cells: tuple[tuple[tuple[Fraction, Fraction], ...], ...] = ()


@dataclass(frozen=True)
class Scenario:
    n: int
    degrees: tuple[int, ...]
    knots: tuple[tuple[Fraction, ...], ...]
    levels: int = 1
    rule: str = "dyadic"
    level_knots: tuple[tuple[tuple[Fraction, ...], ...], ...] = ()
    refinement: tuple[Refinement, ...] = ()
    enforce_zero_form_union: bool = True
    backend: str = "float"
    tolerance: float = 1e-10
    name: str = ""
    extra: tuple[tuple[str, Any], ...] = field(default=(), compare=False)

    def semantic_key(self) -> tuple:
        """Everything that changes the computed hierarchy or the backend choice."""
        return (self.n, self.degrees, self.knots, self.levels, self.rule, self.level_knots,
                self.refinement, self.enforce_zero_form_union, self.backend, self.tolerance)


# --------------------------------------------------------------------------
# parsing helpers


def _rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or value is None:
        raise ScenarioParseError(f"expected a rational, got {value!r}", where)
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        if isinstance(value, (int, str)):
            return Fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioParseError(f"malformed rational {value!r} ({exc})", where) from None
    raise ScenarioParseError(f"expected a rational, got {value!r}", where)


def _int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioParseError(f"expected an integer, got {value!r}", where)
    if minimum is not None and value < minimum:
        raise ScenarioParseError(f"must be at least {minimum}, got {value}", where)
    return value


def _list(value: Any, where: str, length: int | None = None) -> list:
    if not isinstance(value, list):
        raise ScenarioParseError(f"expected a list, got {type(value).__name__}", where)
    if length is not None and len(value) != length:
        raise ScenarioParseError(f"expected {length} entries, got {len(value)}", where)
    return value


def _per_direction(value: Any, n: int, where: str, minimum: int) -> tuple[int, ...]:
    if isinstance(value, list):
        return tuple(_int(v, f"{where}[{k}]", minimum) for k, v in enumerate(_list(value, where, n)))
    v = _int(value, where, minimum)
    return (v,) * n


def _knot_list(value: Any, where: str) -> tuple[Fraction, ...]:
    return tuple(_rational(v, f"{where}[{i}]") for i, v in enumerate(_list(value, where)))


_KNOWN = {"name", "dimension", "degree", "spans", "knots", "levels", "rule", "level_knots",
          "refinement", "enforce_zero_form_union", "options"}


def scenario_from_dict(data: Any) -> Scenario:
    """Validate the JSON structure (not yet the geometry) of a scenario."""
    if not isinstance(data, dict):
        raise ScenarioParseError("top level must be an object", "$")
    if "dimension" not in data:
        raise ScenarioParseError("missing required field", "$.dimension")
    n = _int(data["dimension"], "$.dimension", 1)
    if n > 3:
        raise ScenarioParseError("only dimensions 1, 2 and 3 are supported", "$.dimension")
    if "degree" not in data:
        raise ScenarioParseError("missing required field", "$.degree")
    degrees = _per_direction(data["degree"], n, "$.degree", 1)
    if ("spans" in data) == ("knots" in data):
        raise ScenarioParseError("give exactly one of 'spans' and 'knots'", "$")
    if "spans" in data:
        spans = _per_direction(data["spans"], n, "$.spans", 1)
        knots = tuple(s1.uniform_knot_vector(p, N).knots for p, N in zip(degrees, spans))
    else:
        kl = _list(data["knots"], "$.knots", n)
        knots = tuple(_knot_list(v, f"$.knots[{k}]") for k, v in enumerate(kl))
    levels = _int(data.get("levels", 1), "$.levels", 1)
    rule = data.get("rule", "dyadic")
    if rule not in ("dyadic", "explicit"):
        raise ScenarioParseError(f"unknown refinement rule {rule!r}", "$.rule")
    level_knots: tuple = ()
    if rule == "explicit":
        lk = _list(data.get("level_knots"), "$.level_knots", levels - 1)
        level_knots = tuple(
            tuple(_knot_list(kv, f"$.level_knots[{l}][{k}]") for k, kv in enumerate(_list(per, f"$.level_knots[{l}]", n)))
            for l, per in enumerate(lk)
        )
    elif "level_knots" in data:
        raise ScenarioParseError("only allowed with rule 'explicit'", "$.level_knots")
    refs = _list(data.get("refinement", [{"zero_forms": []}] * (levels - 1)), "$.refinement", levels - 1)
    refinement = []
    for l, entry in enumerate(refs):
        where = f"$.refinement[{l}]"
        if not isinstance(entry, dict) or len(entry) != 1 or next(iter(entry)) not in ("zero_forms", "cells"):
            raise ScenarioParseError("expected an object with exactly one of 'zero_forms' or 'cells'", where)
        kind, items = next(iter(entry.items()))
        items = _list(items, f"{where}.{kind}")
        if kind == "zero_forms":
            zf = tuple(
                tuple(_int(v, f"{where}.zero_forms[{i}][{k}]", 1) for k, v in enumerate(_list(ix, f"{where}.zero_forms[{i}]", n)))
                for i, ix in enumerate(items)
            )
            refinement.append(Refinement("zero_forms", zero_forms=tuple(sorted(set(zf)))))
        else:
            boxes = []
            for i, bx in enumerate(items):
                bw = f"{where}.cells[{i}]"
                iv = []
                for k, pair in enumerate(_list(bx, bw, n)):
                    a, b = _list(pair, f"{bw}[{k}]", 2)
                    iv.append((_rational(a, f"{bw}[{k}][0]"), _rational(b, f"{bw}[{k}][1]")))
                boxes.append(tuple(iv))
            refinement.append(Refinement("cells", cells=tuple(boxes)))
    enforce = data.get("enforce_zero_form_union", True)
    if not isinstance(enforce, bool):
        raise ScenarioParseError("expected true or false", "$.enforce_zero_form_union")
    opts = data.get("options", {})
    if not isinstance(opts, dict):
        raise ScenarioParseError("expected an object", "$.options")
    backend = opts.get("backend", "float")
    if backend not in BACKENDS:
        raise ScenarioParseError(f"backend must be one of {BACKENDS}", "$.options.backend")
    tol = opts.get("tolerance", 1e-10)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not 0 < tol < 1:
        raise ScenarioParseError("tolerance must be a number in (0, 1)", "$.options.tolerance")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ScenarioParseError("expected a string", "$.name")
    extra = tuple(sorted((k, v) for k, v in data.items() if k not in _KNOWN))
    return Scenario(n, degrees, knots, levels, rule, level_knots, tuple(refinement), enforce,
                    backend, float(tol), name, extra)


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    return scenario_from_dict(data)


def parse_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file, including building its hierarchy once."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario: {exc.strerror}", str(path)) from None
    sc = parse_scenario_text(text, str(path))
    build_scenario(sc)
    return sc


# --------------------------------------------------------------------------
# serialization


def _fmt(q: Fraction) -> str | int:
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def scenario_to_dict(sc: Scenario) -> dict:
    out: dict[str, Any] = {
        "dimension": sc.n,
        "degree": list(sc.degrees),
        "knots": [[_fmt(k) for k in kv] for kv in sc.knots],
        "levels": sc.levels,
        "rule": sc.rule,
    }
    if sc.name:
        out["name"] = sc.name
    if sc.rule == "explicit":
        out["level_knots"] = [[[_fmt(k) for k in kv] for kv in per] for per in sc.level_knots]
    refs = []
    for r in sc.refinement:
        if r.kind == "zero_forms":
            refs.append({"zero_forms": [list(ix) for ix in r.zero_forms]})
        else:
            refs.append({"cells": [[[_fmt(a), _fmt(b)] for a, b in bx] for bx in r.cells]})
    out["refinement"] = refs
    out["enforce_zero_form_union"] = sc.enforce_zero_form_union
    out["options"] = {"backend": sc.backend, "tolerance": sc.tolerance}
    for k, v in sc.extra:
        out[k] = v
    return out


def serialize_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# building


def level_spaces(sc: Scenario) -> list[LevelSpaces]:
    try:
        base = tuple(s1.validate_knot_vector(kv, p) for kv, p in zip(sc.knots, sc.degrees))
    except KnotVectorError as exc:
        raise ScenarioValidationError(f"invalid base knot vector: {exc}", "$.knots") from None
    levels = [LevelSpaces(base, 0)]
    for l in range(1, sc.levels):
        if sc.rule == "dyadic":
            kvs = tuple(s1.dyadic_refinement(kv) for kv in levels[-1].knot_vectors)
        else:
            try:
                kvs = tuple(s1.validate_knot_vector(kv, p) for kv, p in zip(sc.level_knots[l - 1], sc.degrees))
            except KnotVectorError as exc:
                raise ScenarioValidationError(f"invalid knot vector: {exc}", f"$.level_knots[{l - 1}]") from None
        levels.append(LevelSpaces(kvs, l))
    return levels


def build_scenario(sc: Scenario) -> DomainHierarchy:
    """The scenario's domain hierarchy; geometric problems become ScenarioValidationError."""
    levels = level_spaces(sc)
    try:
        if all(r.kind == "zero_forms" for r in sc.refinement):
            return build_hierarchy(levels, [r.zero_forms for r in sc.refinement])
        probe = DomainHierarchy(tuple(levels), ())
        masks = []
        for l, r in enumerate(sc.refinement):
            fine = levels[l + 1]
            mask = np.zeros(fine.cell_counts, dtype=bool)
            if r.kind == "cells":
                for i, bx in enumerate(r.cells):
                    try:
                        mask |= box_to_mask(fine, Box(bx))
                    except ConfigurationError as exc:
                        raise ScenarioValidationError(str(exc), f"$.refinement[{l}].cells[{i}]") from None
            else:
                for ix in r.zero_forms:
                    try:
                        mask |= probe.support_ref(l, (0,) * sc.n, ix, l + 1).mask
                    except IndexOutOfRange as exc:
                        raise ScenarioValidationError(str(exc), f"$.refinement[{l}].zero_forms") from None
            masks.append(mask)
        return build_hierarchy_from_cells(levels, masks, enforce_zero_form_union=sc.enforce_zero_form_union)
    except ZeroFormUnionViolation as exc:
        err = ScenarioValidationError(f"zero-form union rule violated: {exc}", "$.refinement")
        err.rule = "zero_form_union"
        raise err from None
    except (NotNested, DegreeMismatch) as exc:
        err = ScenarioValidationError(f"level spaces are not nested: {exc}", "$.level_knots")
        err.rule = "nested_spaces"
        raise err from None
    except (NotContained, IndexOutOfRange) as exc:
        raise ScenarioValidationError(str(exc), "$.refinement") from None
    except ScenarioParseError:
        raise
    except ConfigurationError as exc:
        raise ScenarioValidationError(str(exc), "$") from None


def with_options(sc: Scenario, backend: str | None = None, tolerance: float | None = None) -> Scenario:
    return replace(
        sc,
        backend=sc.backend if backend is None else backend,
        tolerance=sc.tolerance if tolerance is None else tolerance,
    )
