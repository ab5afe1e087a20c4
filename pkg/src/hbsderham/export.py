"""SVG, legacy VTK and CSV writers for meshes, Greville complexes and sampled forms.

All writers are deterministic: coordinates are printed from exact rationals
(or with 17 significant digits for sampled values) in a fixed order.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import UnsupportedDimension
from .greville_topology import CuboidalComplex, greville_subcomplex
from .hierarchy import DomainHierarchy, _coarse_cell_of

SVG_SIZE = 600
LEVEL_FILLS = ("#ffffff", "#f6c28b", "#8fbcd4", "#a8d5a2", "#d9a3d0", "#e8e288")
LAYER_COLOURS = ("#d2691e", "#1f5f8b")


def _num(x: float | Fraction) -> str:
    return format(float(x), ".17g")


def leaf_cells(h: DomainHierarchy) -> list[tuple[int, list[tuple[Fraction, Fraction]]]]:
    """Active Bézier cells: those of ``Omega_l`` not refined into ``Omega_{l+1}``, as (level, box)."""
    out = []
    for l in range(h.L + 1):
        spaces = h.levels[l]
        active = h.omega(l).mask.copy()
        if l < h.L:
            nxt = h.omega(l + 1)
            # a level-l cell is refined when any of its children is in Omega_{l+1}
            maps = [_coarse_cell_of(kc, kf) for kc, kf in zip(spaces.knot_vectors, h.levels[l + 1].knot_vectors)]
            refined = np.zeros_like(active)
            for ix in np.argwhere(nxt.mask):
                refined[tuple(m[i] for m, i in zip(maps, ix))] = True
            active &= ~refined
        bps = [kv.breakpoints for kv in spaces.knot_vectors]
        for ix in np.argwhere(active):
            out.append((l, [(b[i], b[i + 1]) for b, i in zip(bps, ix)]))
    return out


def greville_layers(h: DomainHierarchy, level: int = 0) -> list[CuboidalComplex]:
    """The coarse and fine Greville complexes over ``Omega_{level+1}``."""
    Y = h.omega(level + 1)
    return [greville_subcomplex(h, level, s, Y, coarse_cover=False) for s in (0, 1)]


# --------------------------------------------------------------------------
# SVG (2D only)


def _svg_xy(x: Fraction, y: Fraction) -> tuple[str, str]:
    return _num(x * SVG_SIZE), _num((1 - y) * SVG_SIZE)


def _svg_header() -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE + 20}" height="{SVG_SIZE + 20}" '
        f'viewBox="-10 -10 {SVG_SIZE + 20} {SVG_SIZE + 20}">',
    ]


def _rect(box, fill: str, stroke: str, width: str, opacity: str = "1") -> str:
    (x0, x1), (y0, y1) = box
    X0, Y1 = _svg_xy(x0, y1)
    w = _num((x1 - x0) * SVG_SIZE)
    hgt = _num((y1 - y0) * SVG_SIZE)
    return f'<rect x="{X0}" y="{Y1}" width="{w}" height="{hgt}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="{width}"/>'


def mesh_svg(h: DomainHierarchy) -> str:
    if h.n != 2:
        raise UnsupportedDimension("SVG export needs a two-dimensional scenario")
    lines = _svg_header()
    for l, box in leaf_cells(h):
        lines.append(_rect(box, LEVEL_FILLS[min(l, len(LEVEL_FILLS) - 1)], "#000000", "0.8"))
    lines.append(_rect([(Fraction(0), Fraction(1))] * 2, "none", "#000000", "2"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def greville_svg(h: DomainHierarchy, level: int = 0) -> str:
    if h.n != 2:
        raise UnsupportedDimension("SVG export needs a two-dimensional scenario")
    lines = _svg_header()
    lines.append(_rect([(Fraction(0), Fraction(1))] * 2, "none", "#808080", "1"))
    for s, cx in enumerate(greville_layers(h, level)):
        colour = LAYER_COLOURS[s]
        lines.append(f'<g id="layer{s}" fill="{colour}" stroke="{colour}">')
        for cell in cx.cells[2]:
            lines.append("  " + _rect(cx.geometry(cell), colour, "none", "0", "0.25"))
        for cell in cx.cells[1]:
            (x0, x1), (y0, y1) = cx.geometry(cell)
            X0, Y0 = _svg_xy(x0, y0)
            X1, Y1 = _svg_xy(x1, y1)
            lines.append(f'  <line x1="{X0}" y1="{Y0}" x2="{X1}" y2="{Y1}" stroke-width="1.5"/>')
        for cell in cx.cells[0]:
            (x0, _), (y0, _) = cx.geometry(cell)
            X0, Y0 = _svg_xy(x0, y0)
            lines.append(f'  <circle cx="{X0}" cy="{Y0}" r="{3 if s else 4}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# legacy VTK


def _box_points(box) -> list[tuple[Fraction, ...]]:
    """Corner points in VTK pixel/voxel order (x fastest)."""
    n = len(box)
    pts = []
    for c in range(2 ** n):
        pts.append(tuple(box[k][(c >> k) & 1] for k in range(n)))
    return pts


def _vtk_unstructured(title: str, cells: list[tuple[list, int]], data: dict[str, list[int]]) -> str:
    """``cells``: (points, vtk type); points padded to 3D."""
    pts: list[tuple] = []
    conn = []
    for cp, _ in cells:
        ids = []
        for p in cp:
            p = tuple(p) + (Fraction(0),) * (3 - len(p))
            ids.append(len(pts))
            pts.append(p)
        conn.append(ids)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID", f"POINTS {len(pts)} double"]
    lines += [" ".join(_num(v) for v in p) for p in pts]
    size = sum(len(c) + 1 for c in conn)
    lines.append(f"CELLS {len(conn)} {size}")
    lines += [" ".join(str(v) for v in [len(c)] + c) for c in conn]
    lines.append(f"CELL_TYPES {len(conn)}")
    lines += [str(t) for _, t in cells]
    if data:
        lines.append(f"CELL_DATA {len(conn)}")
        for name in sorted(data):
            lines.append(f"SCALARS {name} int 1")
            lines.append("LOOKUP_TABLE default")
            lines += [str(v) for v in data[name]]
    return "\n".join(lines) + "\n"


_VTK_BOX = {0: 1, 1: 3, 2: 8, 3: 11}  # vertex, line, pixel, voxel


def _check_vtk_dim(h: DomainHierarchy) -> None:
    if h.n not in (2, 3):
        raise UnsupportedDimension("VTK export needs a two- or three-dimensional scenario")


def mesh_vtk(h: DomainHierarchy) -> str:
    _check_vtk_dim(h)
    leaves = leaf_cells(h)
    cells = [(_box_points(box), _VTK_BOX[h.n]) for _, box in leaves]
    return _vtk_unstructured("hierarchical Bezier mesh", cells, {"level": [l for l, _ in leaves]})


def greville_vtk(h: DomainHierarchy, level: int = 0) -> str:
    _check_vtk_dim(h)
    cells, layer, dim = [], [], []
    for s, cx in enumerate(greville_layers(h, level)):
        for d in range(h.n + 1):
            for cell in cx.cells[d]:
                box = cx.geometry(cell)
                live = [k for k, iv in enumerate(box) if iv[0] != iv[1]]
                pts = []
                for c in range(2 ** len(live)):
                    p = [iv[0] for iv in box]
                    for t, k in enumerate(live):
                        p[k] = box[k][(c >> t) & 1]
                    pts.append(tuple(p))
                cells.append((pts, _VTK_BOX[d]))
                layer.append(s)
                dim.append(d)
    return _vtk_unstructured("Greville complexes", cells, {"dimension": dim, "layer": layer})


def field_vtk(values: np.ndarray, title: str = "sampled form") -> str:
    """``values`` of shape (components, r, ..., r) on the unit box, written as STRUCTURED_POINTS."""
    ncomp = values.shape[0]
    n = values.ndim - 1
    if n not in (2, 3):
        raise UnsupportedDimension("VTK export needs a two- or three-dimensional scenario")
    r = values.shape[1]
    dims = [r] * n + [1] * (3 - n)
    sp_ = 1.0 / (r - 1)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_POINTS",
             "DIMENSIONS " + " ".join(map(str, dims)), "ORIGIN 0 0 0",
             "SPACING " + " ".join(_num(sp_) if k < n else "1" for k in range(3)),
             f"POINT_DATA {r ** n}"]
    # VTK wants x fastest: transpose (x, y, z) -> (z, y, x) before flattening
    flat = [np.transpose(values[c]).ravel() for c in range(ncomp)]
    if ncomp == 1:
        lines += ["SCALARS value double 1", "LOOKUP_TABLE default"]
        lines += [_num(v) for v in flat[0]]
    else:
        lines.append("VECTORS value double")
        pad = [np.zeros_like(flat[0])] * (3 - ncomp)
        for row in zip(*(flat + pad)):
            lines.append(" ".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# CSV


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def mesh_csv(h: DomainHierarchy) -> str:
    head = ["level"] + [f"{a}{k}" for k in range(h.n) for a in ("lo", "hi")]
    rows = [",".join(head)]
    for l, box in leaf_cells(h):
        rows.append(",".join([str(l)] + [_q(v) for iv in box for v in iv]))
    return "\n".join(rows) + "\n"


def greville_csv(h: DomainHierarchy, level: int = 0) -> str:
    head = ["layer", "dimension", "bits", "index"] + [f"{a}{k}" for k in range(h.n) for a in ("lo", "hi")]
    rows = [",".join(head)]
    for s, cx in enumerate(greville_layers(h, level)):
        for d in range(h.n + 1):
            for bits, idx in cx.cells[d]:
                box = cx.geometry((bits, idx))
                rows.append(",".join([str(s), str(d), "".join(map(str, bits)), " ".join(map(str, idx))]
                                     + [_q(v) for iv in box for v in iv]))
    return "\n".join(rows) + "\n"


def field_csv(values: np.ndarray) -> str:
    ncomp = values.shape[0]
    n = values.ndim - 1
    r = values.shape[1]
    xs = np.arange(r) / (r - 1)
    head = [f"x{k}" for k in range(n)] + [f"c{c}" for c in range(ncomp)]
    rows = [",".join(head)]
    for ix in np.ndindex(*values.shape[1:]):
        rows.append(",".join([_num(xs[i]) for i in ix] + [_num(values[(c,) + ix]) for c in range(ncomp)]))
    return "\n".join(rows) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)
    return path
