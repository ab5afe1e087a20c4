"""Command-line front end: ``hbs check|cohomology|harmonics|topology|export|batch``.

Exit codes: 0 pass/exact, 1 admissibility violation or spurious cohomology,
2 configuration error, 3 numerical indeterminacy.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from . import export as ex
from .admissibility import check_chain_condition
from .cohomology import cohomology_dims, complex_matrices
from .errors import (
    BackendCapExceeded,
    ClosureViolated,
    ConfigurationError,
    DimensionMismatch,
    HBSError,
    NumericalIndeterminacy,
)
from .greville_topology import topology_change
from .harmonics import harmonic_representatives, harmonic_residuals, sample_field
from .hierarchy import hierarchical_basis
from .jsonio import dumps
from .scenario import Scenario, build_scenario, parse_scenario, with_options

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INDETERMINATE = 0, 1, 2, 3


def _scenario(args) -> Scenario:
    sc = parse_scenario(args.scenario)
    return with_options(sc, backend=getattr(args, "backend", None), tolerance=getattr(args, "tol", None))


def _stem(args) -> str:
    return Path(args.scenario).stem


def _emit(args, suffix: str, payload: dict) -> None:
    text = dumps(payload)
    if getattr(args, "out", None):
        ex.write_text(Path(args.out) / f"{_stem(args)}.{suffix}.json", text)
    sys.stdout.write(text)


def run_check(sc: Scenario) -> tuple[int, dict]:
    h = build_scenario(sc)
    rep = check_chain_condition(h)
    return (EXIT_OK if rep.overall else EXIT_FAIL), rep.to_json()


def run_cohomology(sc: Scenario, timings: bool = False) -> tuple[int, dict]:
    h = build_scenario(sc)
    rep = cohomology_dims(h, backend=sc.backend, tol=sc.tolerance)
    out = rep.to_json()
    if not timings:
        out.pop("timings", None)
    return (EXIT_OK if rep.exact else EXIT_FAIL), out


def run_harmonics(sc: Scenario) -> tuple[int, dict, list]:
    h = build_scenario(sc)
    basis = hierarchical_basis(h)
    mats = complex_matrices(h, basis, exact=False)
    rep = cohomology_dims(h, basis, backend="float", tol=sc.tolerance, mats=mats)
    sets, forms = [], []
    for j in range(h.n + 1):
        hs = harmonic_representatives(h, basis, j, sc.tolerance, mats, expected=rep.dims[j])
        res = [harmonic_residuals(h, mats, j, v) for v in hs.representatives]
        sets.append({"degree": j, "count": hs.count,
                     "max_closed_residual": max((r[0] for r in res), default=0.0),
                     "max_coclosed_residual": max((r[1] for r in res), default=0.0)})
        forms.append(hs)
    out = {"dims": rep.dims, "spurious": rep.spurious, "harmonics": sets}
    return (EXIT_OK if rep.exact else EXIT_FAIL), out, forms


def run_topology(sc: Scenario) -> tuple[int, dict]:
    h = build_scenario(sc)
    out = {"levels": []}
    for l in range(h.L):
        tc = topology_change(h, l)
        out["levels"].append({"level": l, "coarse_betti": tc["coarse"], "fine_betti": tc["fine"],
                              "changed": tc["coarse"] != tc["fine"]})
    return EXIT_OK, out


def run_export(sc: Scenario, what: str, fmt: str, out_dir: Path, stem: str,
               degree: int | None = None, index: int = 0, resolution: int = 64) -> Path:
    h = build_scenario(sc)
    if what == "harmonic":
        code, info, forms = run_harmonics(sc)
        if degree is None:
            spur = [j for j, s in enumerate(info["spurious"]) if s > 0]
            degree = spur[0] if spur else h.n
        hs = forms[degree]
        if not 0 <= index < hs.count:
            raise ConfigurationError(f"there are {hs.count} harmonic {degree}-forms, index {index} is out of range")
        values = sample_field(h.levels[h.L], hs.representatives[index], degree, resolution)
        if fmt == "vtk":
            text = ex.field_vtk(values, f"harmonic {degree}-form {index}")
        elif fmt == "csv":
            text = ex.field_csv(values)
        else:
            raise ConfigurationError("harmonic fields export to vtk or csv")
        name = f"{stem}.harmonic{degree}_{index}.{fmt}"
    else:
        writers: dict[tuple[str, str], Callable] = {
            ("mesh", "svg"): ex.mesh_svg, ("mesh", "vtk"): ex.mesh_vtk, ("mesh", "csv"): ex.mesh_csv,
            ("greville", "svg"): ex.greville_svg, ("greville", "vtk"): ex.greville_vtk, ("greville", "csv"): ex.greville_csv,
        }
        text = writers[(what, fmt)](h)
        name = f"{stem}.{what}.{fmt}"
    return ex.write_text(out_dir / name, text)


# --------------------------------------------------------------------------
# batch


def _batch_one(job: tuple[str, str, str | None, float | None, str | None]) -> dict:
    path, command, backend, tol, out = job
    t0 = time.perf_counter()
    try:
        sc = with_options(parse_scenario(path), backend=backend, tolerance=tol)
        if command == "check":
            code, payload = run_check(sc)
        elif command == "topology":
            code, payload = run_topology(sc)
        else:
            code, payload = run_cohomology(sc)
    except ConfigurationError as exc:
        code, payload = EXIT_CONFIG, {"error": type(exc).__name__, "message": str(exc)}
    except NumericalIndeterminacy as exc:
        code, payload = EXIT_INDETERMINATE, {"error": type(exc).__name__, "message": str(exc)}
    if out:
        ex.write_text(Path(out) / f"{Path(path).stem}.{command}.json", dumps(payload))
    return {"scenario": path, "exit_code": code, "seconds": time.perf_counter() - t0}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("HBS_THREADS", "1")))
    except ValueError:
        raise ConfigurationError("HBS_THREADS must be a positive integer") from None


def run_batch(paths: list[str], command: str, backend: str | None, tol: float | None, out: str | None) -> tuple[int, dict]:
    jobs = [(p, command, backend, tol, out) for p in sorted(paths)]
    nthreads = threads()
    if nthreads == 1 or len(jobs) == 1:
        results = [_batch_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(_batch_one, jobs))
    code = max((r["exit_code"] for r in results), default=EXIT_OK)
    summary = {"command": command, "results": [{k: r[k] for k in ("scenario", "exit_code")} for r in results]}
    return code, summary


# --------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hbs", description="Hierarchical B-spline de Rham complex toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, backend=True):
        p.add_argument("scenario", help="scenario JSON file")
        if backend:
            p.add_argument("--backend", choices=("exact", "float"), default=None)
            p.add_argument("--tol", type=float, default=None, help="relative rank tolerance (floating backend)")
        p.add_argument("--out", default=None, help="also write results into this directory")

    common(sub.add_parser("check", help="verify the local exactness condition on the refinement"), backend=False)
    p = sub.add_parser("cohomology", help="dimensions of the hierarchical complex's cohomology")
    common(p)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte stability)")
    common(sub.add_parser("harmonics", help="harmonic representatives and their residuals"))
    common(sub.add_parser("topology", help="Betti numbers of coarse and fine Greville complexes"), backend=False)
    p = sub.add_parser("export", help="write SVG / VTK / CSV files")
    common(p)
    p.add_argument("--what", choices=("mesh", "greville", "harmonic"), default="mesh")
    p.add_argument("--format", choices=("svg", "vtk", "csv"), default="svg")
    p.add_argument("--degree", type=int, default=None, help="form degree of the harmonic to sample")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--resolution", type=int, default=64)
    p = sub.add_parser("batch", help="run many scenarios in a process pool (HBS_THREADS)")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--run", choices=("check", "cohomology", "topology"), default="cohomology")
    p.add_argument("--backend", choices=("exact", "float"), default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "batch":
            code, payload = run_batch(args.scenarios, args.run, args.backend, args.tol, args.out)
            sys.stdout.write(dumps(payload))
            return code
        sc = _scenario(args)
        if args.command == "check":
            code, payload = run_check(sc)
            _emit(args, "check", payload)
        elif args.command == "cohomology":
            code, payload = run_cohomology(sc, timings=args.timings)
            _emit(args, "cohomology", payload)
        elif args.command == "harmonics":
            code, payload, forms = run_harmonics(sc)
            _emit(args, "harmonics", payload)
            if args.out:
                for hs in forms:
                    for k, c in enumerate(hs.hierarchical):
                        np.savetxt(Path(args.out) / f"{_stem(args)}.harmonic{hs.j}_{k}.coeffs.csv", c, fmt="%.17g")
        elif args.command == "topology":
            code, payload = run_topology(sc)
            _emit(args, "topology", payload)
        else:
            path = run_export(sc, args.what, args.format, Path(args.out or "."), _stem(args),
                              args.degree, args.index, args.resolution)
            sys.stdout.write(dumps({"written": str(path)}))
            code = EXIT_OK
        return code
    except (ConfigurationError, BackendCapExceeded) as exc:
        sys.stderr.write(f"hbs: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG
    except (NumericalIndeterminacy, DimensionMismatch) as exc:
        sys.stderr.write(f"hbs: {type(exc).__name__}: {exc}\n")
        return EXIT_INDETERMINATE
    except ClosureViolated as exc:
        sys.stderr.write(f"hbs: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL
    except OSError as exc:
        sys.stderr.write(f"hbs: cannot write output: {exc}\n")
        return EXIT_CONFIG
    except HBSError as exc:  # pragma: no cover - every subclass is mapped above
        sys.stderr.write(f"hbs: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
