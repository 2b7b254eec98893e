"""Acceptance gate: one test per criterion, each printing a pass/fail line."""

import itertools
import math
import random
import time

import pytest

from symdet import cfi, exactalg, forge, game, graphs
from symdet import circuits as cc
from symdet import permgroup as pg
from symdet.pipeline import game_circuits_check, inter_supports_check, run_cfi_games


def _brute_matchings(g):
    """Independent count: permutations of the right side along edges."""
    adj = [set(g.left_neighbors(u)) for u in range(g.left)]
    return sum(all(p[u] in adj[u] for u in range(g.left)) for p in itertools.permutations(range(g.right)))


def _random_bipartite(rng, n, p):
    edges = [(u, v) for u in range(n) for v in range(n) if rng.random() < p]
    return graphs.BipartiteGraph(n, n, edges)


@pytest.fixture(scope="module")
def alt_run():
    t0 = time.perf_counter()
    recs = game_circuits_check(100, seed=0, family="alt")
    return recs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def alt_records(alt_run):
    return alt_run[0]


@pytest.fixture(scope="module")
def sym_records():
    return game_circuits_check(20, seed=0, family="sym")


def test_c01_matching_counts(criterion):
    t0 = time.perf_counter()
    fixed = {
        "K33": graphs.count_perfect_matchings(graphs.complete_bipartite(3, 3)),
        "Q3": graphs.count_perfect_matchings(graphs.cube_q3()),
        "C6": graphs.count_perfect_matchings(graphs.even_cycle(6)),
    }
    q3_ryser = exactalg.permanent_ryser(graphs.biadjacency(graphs.cube_q3()))
    ok = fixed == {"K33": 6, "Q3": 9, "C6": 2} and q3_ryser == 9
    rng = random.Random(1)
    bad = 0
    oracle = 0.0
    for _ in range(100):
        n = rng.randint(1, 10)
        g = _random_bipartite(rng, n, rng.choice([0.3, 0.5, 0.8]))
        enum = sum(1 for _ in graphs.enumerate_perfect_matchings(g))
        bad += not (enum == exactalg.permanent_ryser(graphs.biadjacency(g)) == graphs.count_perfect_matchings(g))
        if n <= 7:
            t1 = time.perf_counter()
            bad += enum != _brute_matchings(g)
            oracle += time.perf_counter() - t1
    dt = time.perf_counter() - t0 - oracle
    ok = ok and bad == 0 and dt < 5
    criterion(1, "matching counts", ok, f"{fixed} ryser(Q3)={q3_ryser} random mismatches={bad} {dt:.2f}s")
    assert ok


def test_c02_forge(criterion):
    t0 = time.perf_counter()
    problems = []
    steps = 0
    for n in (8, 12, 16, 20):
        for seed in range(100):
            rep = forge.forge(n, seed)
            g = rep.graph
            if not (g.left == g.right == n and g.is_regular(3)):
                problems.append((n, seed, "shape"))
            # full GF(2) rank iff the integer determinant is odd
            if exactalg.det(graphs.biadjacency(g)) % 2 != 1:
                problems.append((n, seed, "rank"))
            if any(b <= a for a, b in zip(rep.rank_trace, rep.rank_trace[1:])):
                problems.append((n, seed, "rank trace"))
            if any(r.rank_after <= r.rank_before for r in rep.repairs):
                problems.append((n, seed, "repair"))
            steps += len(rep.repairs)
            if n <= 14 and graphs.count_perfect_matchings(g) % 2 != 1:
                problems.append((n, seed, "even count"))
    dt = time.perf_counter() - t0
    ok = not problems and dt < 60
    criterion(2, "forge regular, full rank, odd counts", ok, f"repairs={steps} problems={problems[:5]} {dt:.1f}s")
    assert ok


def test_c03_acceptance_rate(criterion):
    rate = forge.acceptance_rate(50, 20_000, seed=0)
    ok = 0.03 <= rate <= 0.07
    criterion(3, "disjoint triple rate n=50", ok, f"rate={rate:.4f} (e^-3={math.exp(-3):.4f})")
    assert ok


def test_c04_cfi_structure(criterion):
    bases = {
        "K33": graphs.complete_bipartite(3, 3),
        "Q3": graphs.cube_q3(),
        "forged12": forge.forge(12, 0).graph,
    }
    details = []
    ok = True
    for name, base in bases.items():
        c = cfi.build_cfi(base)
        m = base.left
        good = c.graph.left == c.graph.right == 10 * m and c.graph.is_regular(3)
        for w in range(2 * m):
            counts = cfi.gadget_pair_automorphisms(c, w)
            swaps = {s: k for s, k in counts.items() if s}
            # exactly the three pairwise swaps, each realised once, plus the identity
            good = good and counts.get(frozenset()) == 1
            good = good and sorted(len(s) for s in swaps) == [2, 2, 2] and set(swaps.values()) == {1}
        details.append(f"{name}:{'ok' if good else 'bad'}")
        ok = ok and good
    criterion(4, "CFI structure and gadget automorphisms", ok, " ".join(details))
    assert ok


def test_c05_determinant_q3(criterion):
    t0 = time.perf_counter()
    c = cfi.build_cfi(graphs.cube_q3())
    M, N = cfi.matrices_MN(c)
    dm, dn = exactalg.det(M), exactalg.det(N)
    v2 = exactalg.two_adic_valuation(dm) if dm else None
    via = cfi.det_via_two_factors(c)
    nf = len(cfi.base_two_factors(c))
    dt = time.perf_counter() - t0
    ok = dm != 0 and dn == -dm and v2 == 16 == 4 * c.m and via == dm and nf == 9 and (dm >> 16) % 2 == 1 and dt < 10
    criterion(5, "determinant pipeline CFI(Q3)", ok, f"det={dm} detN={dn} v2={v2} two-factors={nf} {dt:.2f}s")
    assert ok


def test_c06_census_k33(criterion):
    t0 = time.perf_counter()
    c = cfi.build_cfi(graphs.complete_bipartite(3, 3))
    cen = cfi.census(c)
    dm = exactalg.det(cfi.matrices_MN(c)[0])
    mu = {}
    for (F, _f), (count, _signs) in cen.buckets.items():
        mu[F] = mu.get(F, 0) + count
    mu_sizes = set(mu.values())
    dt = time.perf_counter() - t0
    ok = (
        len(cen.factor_signs) == 6
        and cen.bucket_sizes() == {1 << (2 * c.m)}
        and len(cen.buckets) == 6 * 64
        and mu_sizes == {1 << 12}
        and all(len(s) == 1 for s in cen.factor_signs.values())
        and cen.involution_ok
        and cen.signed_non_uniform == 0
        and cen.signed_total == dm
        and cen.total == graphs.count_perfect_matchings(c.graph)
        and dt < 300
    )
    criterion(
        6,
        "census CFI(K33)",
        ok,
        f"factors={len(cen.factor_signs)} buckets={len(cen.buckets)} sizes={cen.bucket_sizes()} "
        f"mu(F)={mu_sizes} signed={cen.signed_total} det={dm} {dt:.1f}s",
    )
    assert ok


def test_c07_game_engine(criterion, alt_run):
    alt_records, spent = alt_run
    t0 = time.perf_counter()
    d2 = pg.matrix_domain(2, 2)
    d3 = pg.matrix_domain(3, 3)
    M = [[1, 2, 0], [0, 1, 1], [2, 0, 1]]
    same = game.solve_exhaustive(game.matrix_game(M, M, pg.alt_x_alt(d3), 2)).winner
    one_cell = game.solve_exhaustive(game.matrix_game([[1, 0], [0, 0]], [[0, 0], [0, 0]], pg.Trivial(d2), 2))
    bad = [r.seed for r in alt_records if r.counterexample]
    dist = sum(r.distinguishes for r in alt_records)
    ok = same == "duplicator" and one_cell.winner == "spoiler" and not bad and len(alt_records) == 100
    dt = time.perf_counter() - t0 + spent
    criterion(
        7,
        "game engine verdicts and circuit implication",
        ok,
        f"M=M:{same} one-cell:{one_cell.winner} in {one_cell.spoiler_rounds()} "
        f"instances={len(alt_records)} distinguishing={dist} counterexamples={bad} {dt:.1f}s",
    )
    assert ok
    assert dt < 120


def test_c08_cfi_duplicator(criterion):
    t0 = time.perf_counter()
    rep = forge.forge(12, 1, connectivity_k=5, require_connectivity=True)
    exact = graphs.well_connectedness(rep.graph, 8)
    c = cfi.build_cfi(rep.graph)
    res = run_cfi_games(c, 2, 1000, 200, seed=0)
    wins = {k: v["spoiler_wins"] for k, v in res.items()}
    checked = {k: v["rounds_checked"] for k, v in res.items()}
    dt = time.perf_counter() - t0
    ok = exact == 5 and all(w == 0 for w in wins.values()) and all(x == 200_000 for x in checked.values())
    criterion(8, "CFI Duplicator survives", ok, f"well-connected={exact} wins={wins} rounds checked={checked} {dt:.0f}s")
    assert ok
    assert dt < 300


def test_c09_circuit_spoiler(criterion, alt_records, sym_records):
    recs = alt_records + sym_records
    dist = [r for r in recs if r.distinguishes]
    fails = [(r.seed, r.circuit_spoiler_rounds, r.sp * r.depth) for r in dist if not r.strategy_ok]
    worst = max((r.circuit_spoiler_rounds / (r.sp * r.depth) for r in dist), default=0)
    ok = bool(dist) and not fails
    criterion(9, "circuit Spoiler within SP*depth", ok, f"distinguishing={len(dist)} failures={fails} max ratio={worst:.2f}")
    assert ok


def _brute_min_support(elems, cell, points):
    for size in range(len(points) + 1):
        found = [
            frozenset(s)
            for s in itertools.combinations(points, size)
            if all(pg.matrix_action(p, cell) == cell for p in elems if all(p(x) == x for x in s))
        ]
        if found:
            return found
    return []


def test_c10_circuits(criterion):
    ok = True
    notes = []
    for n in (3, 4):
        c = cc.build_ryser_circuit(n)
        sym = cc.check_symmetric(c, pg.sym_x_sym(pg.matrix_domain(n, n)))
        rng = random.Random(n)
        mism = 0
        for _ in range(20):
            m = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
            mism += cc.evaluate(c, cc.matrix_inputs(m)) != exactalg.permanent_ryser(m)
        ok = ok and sym and mism == 0
        notes.append(f"n={n} symmetric={sym} mismatches={mism}")
    d = pg.matrix_domain(4, 4)
    elems = pg.alt_x_alt(d).elements()
    g = pg.Explicit(d, frozenset(elems), validate=False)
    sup_ok = len(elems) == 144
    for i in range(4):
        for j in range(4):
            res = cc.variable_gate_support(4, 4, g, i, j)
            brute = _brute_min_support(elems, (i, j), range(8))
            sup_ok = sup_ok and res.canonical and res.support == frozenset({i, 4 + j}) and brute == [res.support]
    ok = ok and sup_ok
    notes.append(f"x_ij supports under Alt4xAlt4 ({len(elems)} elements): {'ok' if sup_ok else 'bad'}")
    criterion(10, "Ryser circuit and variable supports", ok, "; ".join(notes))
    assert ok


def test_c11_permanent_pair(criterion):
    t0 = time.perf_counter()
    x, xt = cfi.build_permanent_pair(graphs.complete_bipartite(3, 3))
    px, pxt = graphs.count_perfect_matchings(x), graphs.count_perfect_matchings(xt)
    diff = abs(px - pxt)
    pow2 = diff > 0 and diff & (diff - 1) == 0
    dt = time.perf_counter() - t0
    # second route, timed apart: Ryser on the biadjacency matrices
    t1 = time.perf_counter()
    rx, rxt = exactalg.permanent_ryser(graphs.biadjacency(x)), exactalg.permanent_ryser(graphs.biadjacency(xt))
    dt_oracle = time.perf_counter() - t1
    ok = x.is_regular(4) and xt.is_regular(4) and px != pxt and (px, pxt) == (rx, rxt) and dt < 120
    criterion(
        11,
        "permanent pair on K33",
        ok,
        f"perm X={px} perm X~={pxt} |diff|={diff} power of 2={pow2} {dt:.1f}s (Ryser oracle {dt_oracle:.0f}s)",
    )
    assert ok


def test_c12_supports(criterion):
    res = inter_supports_check(500, size=6, seed=0)
    ok = res.instances == 500 and res.violations == 0 and res.uniqueness_violations == 0 and res.uniqueness_checked > 0
    criterion(
        12,
        "intersection of supports is a support",
        ok,
        f"pairs={res.pairs_checked} violations={res.violations} "
        f"uniqueness checks={res.uniqueness_checked} violations={res.uniqueness_violations}",
    )
    assert ok


def _path(n):
    return [[v for v in (u - 1, u + 1) if 0 <= v < n] for u in range(n)]


def _cycle(n):
    return [[(u - 1) % n, (u + 1) % n] for u in range(n)]


def test_c13_cops(criterion):
    star = [[1, 2, 3, 4]] + [[0]] * 4
    tree = [[1, 2], [0, 3, 4], [0, 5, 6], [1], [1], [2], [2]]
    k4 = [[v for v in range(4) if v != u] for u in range(4)]
    checks = {
        "path7 k=2": graphs.cops_win(_path(7), 2),
        "star k=2": graphs.cops_win(star, 2),
        "tree k=2": graphs.cops_win(tree, 2),
        "tree7 not k=1": not graphs.cops_win(tree, 1),
        "C5 k=3": graphs.cops_win(_cycle(5), 3),
        "C6 k=3": graphs.cops_win(_cycle(6), 3),
        "C6 not k=2": not graphs.cops_win(_cycle(6), 2),
        "K4 k=4": graphs.cops_win(k4, 4),
        "K4 not k=3": not graphs.cops_win(k4, 3),
    }
    ok = all(checks.values())
    criterion(13, "cops and robbers", ok, " ".join(f"{k}:{'ok' if v else 'bad'}" for k, v in checks.items()))
    assert ok
