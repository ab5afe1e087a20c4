"""Acceptance criteria: one PASS/FAIL line per criterion, with the pinned tolerances.

Each test prints its line immediately and the lines are repeated in the
terminal summary.  Runtime budgets are wall-clock seconds per scenario.
"""

import itertools
import time
from fractions import Fraction as F

import numpy as np
from acceptance_log import record
from builders import SCENARIOS, dyadic_levels, load, random_hierarchy, random_knot_vector, random_spaces
from oracles import chain_exists, space_value

from hbsderham.admissibility import check_chain_condition, enumerate_chains, shortest_chain
from hbsderham.cli import run_check, run_cohomology, run_harmonics
from hbsderham.cohomology import closure_check, cohomology_dims, complex_matrices
from hbsderham.greville_topology import betti, greville_subcomplex
from hbsderham.hierarchy import hierarchical_basis, itpb, omega_subdomain, partition_check
from hbsderham.linalg import exact_rank, float_rank_details
from hbsderham.scenario import build_scenario, scenario_from_dict
from hbsderham.splines_1d import eval_basis, insertion_matrix_1d, validate_knot_vector
from hbsderham.tensor_forms import component_list, exterior_derivative_matrix, form_prolongation_matrix

SEED = 20240601
ORACLE_TOL = 1e-12
PLANAR_BUDGET, INEXACT_2D_BUDGET, SOLID_BUDGET = 60.0, 30.0, 600.0


def _emit(capsys, label, ok, detail):
    line = record(label, ok, detail)
    with capsys.disabled():
        print("\n" + line)
    return ok


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def _corpus_run(group, name):
    sc, _ = load(group, name)
    (code, payload), secs = _timed(run_cohomology, sc)
    return sc, code, payload, secs


# 1. degree-6 planar patterns


def test_criterion_1_planar_degree_six_patterns(capsys):
    exact_want, check_want = set("abcdh"), set("abcd")
    rows, ok = [], True
    for name in "abcdefgh":
        sc, code, payload, t_coh = _corpus_run("planar_p6", name)
        (ccode, _), t_chk = _timed(run_check, sc)
        exact, passed = payload["exact"], ccode == 0
        secs = t_coh + t_chk
        good = (exact == (name in exact_want) and passed == (name in check_want)
                and (code == 0) == exact and secs <= PLANAR_BUDGET and payload["euler_consistent"])
        ok &= good
        rows.append(f"{name}:{'exact' if exact else 'inexact'}/{'pass' if passed else 'fail'}/{secs:.1f}s")
    _emit(capsys, "criterion 1 (planar p=6 exactness and check, <= 60 s each)", ok, " ".join(rows))
    assert ok


# 2. planar inexact corpus


def test_criterion_2_planar_inexact(capsys):
    want = {"a": [0, 0, 1], "b": [0, 1, 0], "c": [0, 1, 0], "d": [0, 2, 0]}
    rows, ok = [], True
    for name, spurious in want.items():
        sc, _ = load("planar_inexact", name)
        (code, payload, forms), secs = _timed(run_harmonics, sc)
        counts = [hs.count for hs in forms]
        good = (payload["spurious"] == spurious and counts == payload["dims"] and code == 1
                and secs <= INEXACT_2D_BUDGET
                and all(s["max_closed_residual"] <= 1e-8 and s["max_coclosed_residual"] <= 1e-8 for s in payload["harmonics"]))
        ok &= good
        rows.append(f"{name}:spurious={payload['spurious']} harmonics={counts} {secs:.1f}s")
    _emit(capsys, "criterion 2 (planar inexact spurious counts and harmonics, <= 30 s each)", ok, "; ".join(rows))
    assert ok


# 3. solid inexact corpus


def test_criterion_3_solid_inexact(capsys):
    want = {"a": [0, 0, 0, 1], "b": [0, 0, 1, 0], "c": [0, 0, 1, 0],
            "d": [0, 1, 0, 0], "e": [0, 2, 0, 0], "f": [0, 1, 0, 0]}
    rows, ok = [], True
    for name, spurious in want.items():
        sc, code, payload, secs = _corpus_run("solid_inexact", name)
        good = (payload["spurious"] == spurious and code == 1 and payload["euler_consistent"]
                and secs <= SOLID_BUDGET and sc.backend == "float")
        ok &= good
        rows.append(f"{name}(p={sc.degrees[0]}):spurious={payload['spurious']} {secs:.0f}s")
    _emit(capsys, "criterion 3 (solid inexact spurious counts, float backend, <= 600 s each)", ok, "; ".join(rows))
    assert ok


# 4. solid exact corpora


def test_criterion_4_solid_exact_corpora(capsys):
    rows, ok = [], True
    for group, want_pass in (("solid_supported", True), ("solid_unsupported", False)):
        names = sorted(p.stem for p in (SCENARIOS / group).glob("*.json"))
        for name in names:
            sc, code, payload, secs = _corpus_run(group, name)
            (ccode, _), _t = _timed(run_check, sc)
            good = not any(payload["spurious"]) and code == 0 and (ccode == 0) == want_pass
            ok &= good
            rows.append(f"{group}/{name}:{'exact' if code == 0 else 'inexact'}/{'pass' if ccode == 0 else 'fail'}")
    _emit(capsys, "criterion 4 (solid exact corpora; supported pass, unsupported fail the check)", ok, " ".join(rows))
    assert ok


# 5. property suite


def _property_d_squared(rng):
    for k in range(200):
        sp_ = random_spaces(rng, 1 + k % 3, max_p=4, max_spans=3)
        for j in range(sp_.n - 1):
            if not (exterior_derivative_matrix(sp_, j + 1) @ exterior_derivative_matrix(sp_, j)).is_zero():
                return False, 200
    return True, 200


def _property_commutation(rng, count=60):
    for k in range(count):
        coarse, fine = dyadic_levels(random_spaces(rng, 1 + k % 3, max_p=3, max_spans=3), 1)
        for j in range(coarse.n):
            lhs = exterior_derivative_matrix(fine, j) @ form_prolongation_matrix(coarse, fine, j)
            rhs = form_prolongation_matrix(coarse, fine, j + 1) @ exterior_derivative_matrix(coarse, j)
            if not (lhs - rhs).is_zero():
                return False, count
    return True, count


def _hierarchy_corpus(rng, count=100):
    return [random_hierarchy(rng, 1 + k % 3, max_p=3, max_spans=3, L=1 if k % 3 == 2 else 2) for k in range(count)]


def _property_closure_partition(corpus):
    closure = partition = True
    for h in corpus:
        mats = complex_matrices(h, exact=True)
        closure &= all(closure_check(h, j=j, mats=mats) for j in range(h.n))
        partition &= all(partition_check(h, l, bits) for l in range(h.L)
                         for j in range(h.n + 1) for bits in component_list(h.n, j))
    return closure, partition


def _property_subdomain_balls(rng, target=500):
    sampled = failures = 0
    while sampled < target:
        h = random_hierarchy(rng, int(rng.integers(1, 4)), max_p=2, max_spans=3, L=1, density=0.3)
        if not check_chain_condition(h).overall:
            continue
        pool = [(bits, i) for j in range(h.n + 1) for bits in component_list(h.n, j) for i in itpb(h, 0, bits)]
        for k in rng.permutation(len(pool))[:5]:
            bits, i = pool[int(k)]
            A = omega_subdomain(h, 0, bits, i)
            ball = [1] + [0] * h.n
            failures += any(betti(greville_subcomplex(h, 0, s, A)).ranks != ball for s in (0, 1))
            sampled += 1
    return failures == 0, sampled, failures


def _property_euler_and_ranks(corpus):
    euler = agree = True
    matrices = 0
    for h in corpus:
        basis = hierarchical_basis(h)
        exact = complex_matrices(h, basis, exact=True)
        flt = complex_matrices(h, basis, exact=False)
        rep = cohomology_dims(h, basis, backend="float", mats=flt, check_closure=False)
        euler &= rep.euler_consistent
        for j in range(h.n):
            if exact.P[j].matrix.shape[1] > 2000:
                continue
            for A, B in ((exact.DP(j), flt.DP(j)), (exact.P[j].matrix, flt.P[j].matrix)):
                res = float_rank_details(B)
                agree &= res.determinate and res.rank == exact_rank(A)
                matrices += 1
    return euler, agree, matrices


def _property_chains(rng, count=40):
    pairs = 0
    for _ in range(count):
        h = random_hierarchy(rng, 2, max_p=3, max_spans=4, L=1, density=0.6)
        members = {tuple(int(v) + 1 for v in ix) for ix in np.argwhere(h.supported_mask(0, (0, 0), h.omega(1)))}
        for a, b in itertools.combinations(sorted(members), 2):
            if max(abs(x - y) for x, y in zip(a, b)) > 3:
                continue
            delta = tuple(y - x for x, y in zip(a, b))
            dp = shortest_chain(h, 0, a, delta)
            brute = list(enumerate_chains(h, 0, a, delta))
            if (dp is None) != (not brute) or (dp is not None and dp not in brute) or (dp is None) == chain_exists(members, a, b):
                return False, pairs
            pairs += 1
    return True, pairs


def test_criterion_5_property_suite(capsys):
    rng = np.random.default_rng(SEED)
    dd, n_dd = _property_d_squared(rng)
    comm, n_comm = _property_commutation(rng)
    corpus = _hierarchy_corpus(rng)
    closure, partition = _property_closure_partition(corpus)
    balls, n_balls, bad_balls = _property_subdomain_balls(rng)
    euler, ranks, n_mats = _property_euler_and_ranks(corpus)
    chains, n_pairs = _property_chains(rng)
    parts = [
        ("i d∘d=0", dd, f"{n_dd} spaces"),
        ("ii commutation", comm, f"{n_comm} level pairs"),
        ("iii closure", closure, f"{len(corpus)} hierarchies"),
        ("iv partition", partition, f"{len(corpus)} hierarchies"),
        ("v subdomain balls", balls, f"{n_balls} subdomains, {bad_balls} not balls"),
        ("vi Euler", euler, f"{len(corpus)} runs"),
        ("vii chains", chains, f"{n_pairs} pairs"),
        ("viii exact=float rank", ranks, f"{n_mats} matrices"),
    ]
    ok = all(p[1] for p in parts)
    _emit(capsys, "criterion 5 (property suite)", ok, "; ".join(f"({name}) {'ok' if good else 'FAILED'} on {what}" for name, good, what in parts))
    assert ok


# 6. oracle equivalence


def test_criterion_6_oracle_equivalence(capsys):
    rng = np.random.default_rng(SEED + 6)
    worst, samples = 0.0, 0
    while samples < 10_000:
        p = int(rng.integers(1, 6))
        kv = random_knot_vector(rng, p, max_spans=6)
        for _ in range(20):
            j = int(rng.integers(0, 2))
            i = int(rng.integers(1, kv.m + j + 1))
            x = F(int(rng.integers(0, 10**6)), 10**6)
            worst = max(worst, abs(eval_basis(kv, j, i, x) - float(space_value(kv.knots, p, j, i, x))))
            samples += 1
    inserted = True
    for _ in range(50):
        p = int(rng.integers(1, 5))
        coarse = random_knot_vector(rng, p, max_spans=4)
        extra = sorted(F(int(v), 16) for v in rng.integers(1, 16, size=3))
        knots = list(coarse.knots)
        for v in extra:
            if knots.count(v) < p:
                knots.append(v)
        fine = validate_knot_vector(sorted(knots), p)
        for j in (0, 1):
            T = insertion_matrix_1d(coarse, fine, j).to_dense()
            for _ in range(3):
                x = F(int(rng.integers(0, 1000)), 1000)
                for i in range(1, coarse.m + j + 1):
                    lhs = eval_basis(coarse, j, i, x, exact=True)
                    rhs = sum(T[r][i - 1] * eval_basis(fine, j, r + 1, x, exact=True) for r in range(fine.m + j))
                    inserted &= lhs == rhs
    ok = worst <= ORACLE_TOL and inserted
    _emit(capsys, "criterion 6 (oracle equivalence at 1e-12; exact insertion)", ok,
          f"{samples} samples, max error {worst:.2e}; insertion identities {'exact' if inserted else 'BROKEN'}")
    assert ok


# 7. unrefined exactness


def test_criterion_7_unrefined_exactness(capsys):
    rng = np.random.default_rng(SEED + 7)
    failures = []
    for k in range(50):
        n = 1 + k % 3
        degrees = [int(rng.integers(1, 4)) for _ in range(n)]
        spans = [int(rng.integers(max(1, 4 - p), 6)) for p in degrees]  # at least two 0-forms
        sc = scenario_from_dict({"dimension": n, "degree": degrees, "spans": spans, "levels": 1})
        rep = cohomology_dims(build_scenario(sc), backend="exact")
        if rep.dims != [0] * n + [1]:
            failures.append((degrees, spans, rep.dims))
    ok = not failures
    _emit(capsys, "criterion 7 (unrefined scenarios have dims (0,...,0,1))", ok, f"50 scenarios in n=1,2,3; failures: {failures}")
    assert ok
