"""End-to-end runs and the lemma verification drivers behind the CLI."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

from . import cfi as cfimod
from . import exactalg, forge as forgemod, game, graphs
from .circuits import evaluate, matrix_inputs, random_symmetric_circuit, support_stat
from .permgroup import (
    Domain,
    Explicit,
    Permutation,
    Sym,
    alt_x_alt,
    closure,
    group_supports,
    matrix_domain,
    sym_x_sym,
)


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.original = exc


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and not isinstance(ev, StageError):
            raise StageError(self.name, ev) from ev
        return False


# ---------------------------------------------------------------- determinant pipeline

def run_cfi_games(
    c: cfimod.CfiGraph,
    k: int,
    games: int,
    rounds: int,
    seed: int,
    spoilers=("random", "greedy"),
) -> dict:
    """Play the CFI Duplicator against each Spoiler; the invariant is asserted every round."""
    cfg = game.cfi_game(c, k, rounds)
    makers = {"random": game.RandomSpoiler, "greedy": game.GreedySpoiler}
    out = {}
    for name in spoilers:
        wins = 0
        rounds_played = 0
        cases = {"plain": 0, "cycle": 0}
        for g in range(games):
            dup = game.CfiDuplicator(c, k)
            res = game.play(cfg, makers[name](seed * 100_003 + g), dup, record=False)
            wins += res.spoiler_won
            rounds_played += dup.rounds
            for key in cases:
                cases[key] += dup.case_counts[key]
        out[name] = {
            "games": games,
            "rounds_per_game": rounds,
            "spoiler_wins": wins,
            "rounds_checked": rounds_played,
            "moves": cases,
        }
    return out


def pipeline_determinant(
    n: int,
    seed: int,
    k: int,
    base: Optional[graphs.BipartiteGraph] = None,
    games: int = 20,
    rounds: int = 200,
    separator_budget: int = graphs.DEFAULT_SEPARATOR_BUDGET,
    resample_budget: int = forgemod.DEFAULT_RESAMPLE_BUDGET,
) -> dict:
    """Forge a base graph, build the CFI matrices, check the determinants, play games."""
    report: dict = {"params": {"n": n, "seed": seed, "k": k, "games": games, "rounds": rounds}}
    with _Stage("forge"):
        if base is None:
            fr = forgemod.forge(n, seed, connectivity_k=k + 3, require_connectivity=True,
                                resample_budget=resample_budget, separator_budget=separator_budget)
            g = fr.graph
            report["base"] = {
                "source": "forge",
                "attempts": fr.attempts,
                "repairs": len(fr.repairs),
                "rank_trace": fr.rank_trace,
                "connectivity": fr.connectivity_label(),
                "graph": g.to_json(),
            }
        else:
            g = base
            conn = graphs.well_connectedness(g, k + 3, separator_budget)
            report["base"] = {"source": "override", "connectivity": conn, "graph": g.to_json()}
            report["params"]["n"] = g.left
    with _Stage("cfi"):
        c = cfimod.build_cfi(g)
        M, N = cfimod.matrices_MN(c)
        report["cfi"] = {"m": c.m, "size": c.n, "regular": c.graph.is_regular(3)}
    with _Stage("determinant"):
        dm, dn = exactalg.det(M), exactalg.det(N)
        v2 = exactalg.two_adic_valuation(dm) if dm else None
        report["determinant"] = {
            "det_M": str(dm),
            "det_N": str(dn),
            "v2_det_M": v2,
            "expected_v2": 4 * c.m,
            "nonzero": dm != 0,
            "negated": dn == -dm,
        }
    with _Stage("games"):
        report["games"] = run_cfi_games(c, k, games, rounds, seed)
    det_ok = dm != 0 and dn == -dm
    games_ok = all(v["spoiler_wins"] == 0 for v in report["games"].values())
    report["passed"] = det_ok and games_ok
    return report


def format_pipeline(report: dict) -> str:
    d = report["determinant"]
    lines = [
        f"base: {report['base']['source']} n={report['params']['n']} connectivity={report['base']['connectivity']}",
        f"CFI: {report['cfi']['size']}x{report['cfi']['size']} matrices",
        f"det(M) = {d['det_M']}",
        f"det(N) = {d['det_N']}  (negated: {d['negated']})",
        f"v2(det M) = {d['v2_det_M']} (4m = {d['expected_v2']})",
    ]
    for name, g in report["games"].items():
        lines.append(f"games vs {name} Spoiler: {g['spoiler_wins']} Spoiler wins in {g['games']} x {g['rounds_per_game']} rounds")
    lines.append("PASS" if report["passed"] else "FAIL")
    return "\n".join(lines)


# ---------------------------------------------------------------- randomized drivers

def random_subgroup_sym(size: int, rng: random.Random) -> Explicit:
    """A random subgroup of ``Sym(size)``: a point-wise stabiliser of a random set,
    enlarged by at most one random permutation."""
    d = Domain.single(size)
    fixed = rng.sample(range(size), rng.randint(0, size))
    moving = [x for x in range(size) if x not in fixed]
    gens = []
    if len(moving) >= 2:
        gens += Sym(d, frozenset(moving)).generators()
    if rng.random() < 0.5:
        img = list(range(size))
        rng.shuffle(img)
        gens.append(Permutation(d, tuple(img)))
    return Explicit(d, frozenset(closure(d, gens)), validate=False)


@dataclass
class InterSupportResult:
    instances: int
    pairs_checked: int
    violations: int
    uniqueness_checked: int
    uniqueness_violations: int


def inter_supports_check(trials: int = 500, size: int = 6, seed: int = 0) -> InterSupportResult:
    """Supports of random ``H <= Sym(size)``: ``A``, ``B`` supports with ``A | B != Y`` give ``A & B``."""
    rng = random.Random(f"inter-supports:{seed}")
    d = Domain.single(size)
    ambient = Sym(d, frozenset(range(size)))
    pts = list(range(size))
    pairs = bad = uq = uq_bad = 0
    for _ in range(trials):
        h = random_subgroup_sym(size, rng)
        sups = set(group_supports(ambient, h.contains, pts))
        sl = sorted(sups, key=lambda s: (len(s), sorted(s)))
        for i, a in enumerate(sl):
            for b in sl[i:]:
                if a | b != frozenset(pts):
                    pairs += 1
                    if a & b not in sups:
                        bad += 1
        small = min(len(s) for s in sups)
        if 2 * small < size:
            uq += 1
            if sum(1 for s in sups if len(s) == small) != 1:
                uq_bad += 1
    return InterSupportResult(trials, pairs, bad, uq, uq_bad)


@dataclass
class GameCircuitRecord:
    seed: int
    sp: int
    depth: int
    distinguishes: bool
    winner: str
    spoiler_rounds: Optional[int]
    circuit_spoiler_won: Optional[bool]
    circuit_spoiler_rounds: Optional[int]

    @property
    def counterexample(self) -> bool:
        return self.winner == "duplicator" and self.distinguishes

    @property
    def strategy_ok(self) -> bool:
        if not self.distinguishes:
            return True
        return bool(self.circuit_spoiler_won) and self.circuit_spoiler_rounds <= self.sp * self.depth


def _tiny_pair(rng: random.Random, d, g_elems, wide: list[Permutation], size: int):
    M = [[rng.randint(0, 2) for _ in range(size)] for _ in range(size)]
    kind = rng.randrange(3)
    if kind == 0:
        N = [[rng.randint(0, 2) for _ in range(size)] for _ in range(size)]
    else:
        p = rng.choice(g_elems if kind == 1 else wide)
        # (pM)(i, j) = M(p^-1 i, p^-1 j)
        q = p.inverse()
        N = [[M[q(i)][q(size + j) - size] for j in range(size)] for i in range(size)]
    return M, N


def game_circuit_instance(seed: int, size: int = 3, family: str = "alt") -> GameCircuitRecord:
    """One random tiny instance: a symmetric circuit, inputs, the solver and the circuit Spoiler.

    ``family`` picks the group: ``alt`` (Alt x Alt) or ``sym`` (Sym x Sym).  The
    circuit Spoiler plays against the solver's Duplicator and against a
    random legal one; ``circuit_spoiler_won`` needs both.
    """
    rng = random.Random(f"game-circuits:{family}:{size}:{seed}")
    d = matrix_domain(size, size)
    base = alt_x_alt(d) if family == "alt" else sym_x_sym(d)
    group = Explicit(d, frozenset(base.elements()), validate=False)
    wide = sym_x_sym(d).elements()
    circ = random_symmetric_circuit(rng, size, size, group, layers=rng.randint(1, 2), width=rng.randint(1, 2))
    st = support_stat(circ, group)
    M, N = _tiny_pair(rng, d, group.elements(), wide, size)
    dist = evaluate(circ, matrix_inputs(M)) != evaluate(circ, matrix_inputs(N))
    k = st.sp
    cfg = game.matrix_game(M, N, group, 2 * k, mode="support", round_limit=max(1, k * circ.depth()) + 2)
    sol = game.solve_exhaustive(cfg)
    won = rounds = None
    if dist:
        won, rounds = True, 0
        for dup in (game.SolverDuplicator(sol), game.RandomLegalDuplicator(cfg, seed)):
            out = game.play(cfg, game.CircuitSpoiler(circ, group), dup)
            won = won and out.spoiler_won
            rounds = max(rounds, out.rounds)
    return GameCircuitRecord(seed, k, circ.depth(), dist, sol.winner, sol.spoiler_rounds(), won, rounds)


def game_circuits_check(instances: int = 100, seed: int = 0, family: str = "alt") -> list[GameCircuitRecord]:
    return [game_circuit_instance(seed * 1_000_003 + i, family=family) for i in range(instances)]


def forge_rank_check(count: int = 50, n: int = 12, seed: int = 0) -> dict:
    strict = 0
    steps = 0
    for s in range(count):
        rep = forgemod.forge(n, seed + s)
        ok = all(r.rank_after > r.rank_before for r in rep.repairs)
        steps += len(rep.repairs)
        strict += ok and rep.final_rank == n
    return {"graphs": count, "strict": strict, "steps": steps}


# ---------------------------------------------------------------- lemma suite

@dataclass
class LemmaRow:
    target: str
    check: str
    expected: str
    observed: str
    passed: bool

    def line(self) -> str:
        return f"{self.target}: {self.check}: expected {self.expected}, observed {self.observed}: {'PASS' if self.passed else 'FAIL'}"


LEMMA_TARGETS = (
    "non-uniform",
    "fixed-Ff",
    "sign",
    "sign-factor",
    "determinant",
    "rank",
    "inter-supports",
    "game-circuits",
    "base-graph",
)

_census_cache: dict = {}


def _k33_census():
    if "k33" not in _census_cache:
        c = cfimod.build_cfi(graphs.complete_bipartite(3, 3))
        _census_cache["k33"] = (c, cfimod.census(c))
    return _census_cache["k33"]


def _lemma_non_uniform():
    c, cen = _k33_census()
    return [
        LemmaRow("non-uniform", "involution pairs opposite signs", "True", str(cen.involution_ok), cen.involution_ok),
        LemmaRow("non-uniform", "signed sum of non-uniform matchings", "0", str(cen.signed_non_uniform), cen.signed_non_uniform == 0),
    ]


def _lemma_fixed_ff():
    c, cen = _k33_census()
    sizes = cen.bucket_sizes()
    want = 1 << (2 * c.m)
    ok = sizes == {want}
    return [LemmaRow("fixed-Ff", f"all {len(cen.buckets)} buckets have size {want}", f"{{{want}}}", str(sorted(sizes)), ok)]


def _lemma_sign():
    c, cen = _k33_census()
    mixed = sum(1 for v in cen.buckets.values() if len(v[1]) != 1)
    return [LemmaRow("sign", "buckets with a single sign", str(len(cen.buckets)), str(len(cen.buckets) - mixed), mixed == 0)]


def _lemma_sign_factor():
    c, cen = _k33_census()
    per_f: dict = {}
    for (F, _f), (cnt, _s) in cen.buckets.items():
        per_f[F] = per_f.get(F, 0) + cnt
    want = 1 << (4 * c.m)
    mixed = sum(1 for s in cen.factor_signs.values() if len(s) != 1)
    total = cen.signed_total
    det = exactalg.det(cfimod.matrices_MN(c)[0])
    return [
        LemmaRow("sign-factor", "two-factors with a single sign", str(len(cen.factor_signs)), str(len(cen.factor_signs) - mixed), mixed == 0),
        LemmaRow("sign-factor", "matchings per two-factor", str(want), str(sorted(set(per_f.values()))), set(per_f.values()) == {want}),
        LemmaRow("sign-factor", "signed census equals det(M)", str(det), str(total), total == det),
    ]


def _lemma_determinant():
    c = cfimod.build_cfi(graphs.cube_q3())
    M, N = cfimod.matrices_MN(c)
    dm, dn = exactalg.det(M), exactalg.det(N)
    v = exactalg.two_adic_valuation(dm) if dm else None
    odd = dm != 0 and v == 4 * c.m
    via = cfimod.det_via_two_factors(c)
    return [
        LemmaRow("determinant", f"det = 2^{4 * c.m} x odd", f"v2 = {4 * c.m}", f"det = {dm}, v2 = {v}", odd),
        LemmaRow("determinant", "det(N) = -det(M)", str(-dm), str(dn), dn == -dm),
        LemmaRow("determinant", "det = 2^(4m) x sum of two-factor signs", str(via), str(dm), via == dm),
    ]


def _lemma_rank(count: int = 50):
    r = forge_rank_check(count)
    return [LemmaRow("rank", f"{count}/{count} strict rank increases", f"{count}/{count}", f"{r['strict']}/{count}", r["strict"] == count)]


def _lemma_inter_supports(trials: int = 500):
    r = inter_supports_check(trials)
    return [
        LemmaRow("inter-supports", f"A & B is a support over {r.pairs_checked} pairs", "0 violations", f"{r.violations} violations", r.violations == 0),
        LemmaRow("inter-supports", f"unique minimum support ({r.uniqueness_checked} groups)", "0 violations", f"{r.uniqueness_violations} violations", r.uniqueness_violations == 0),
    ]


def _lemma_game_circuits(instances: int = 100):
    recs = game_circuits_check(instances)
    bad = sum(r.counterexample for r in recs)
    strat = sum(not r.strategy_ok for r in recs)
    dup = sum(r.winner == "duplicator" for r in recs)
    return [
        LemmaRow("game-circuits", f"Duplicator wins imply equal outputs ({dup} Duplicator wins)", "0 counterexamples", f"{bad} counterexamples", bad == 0),
        LemmaRow("game-circuits", "circuit Spoiler wins within k*depth rounds", "0 failures", f"{strat} failures", strat == 0),
    ]


def _lemma_base_graph(seeds: int = 10):
    rows = []
    for n in (8, 12, 14):
        odd = 0
        for s in range(seeds):
            g = forgemod.forge(n, s).graph
            count = graphs.count_perfect_matchings(g)
            odd += g.is_regular(3) and count % 2 == 1
        rows.append(LemmaRow("base-graph", f"n={n}: 3-regular with an odd matching count", f"{seeds}/{seeds}", f"{odd}/{seeds}", odd == seeds))
    return rows


_LEMMAS: dict[str, Callable[[], list[LemmaRow]]] = {
    "non-uniform": _lemma_non_uniform,
    "fixed-Ff": _lemma_fixed_ff,
    "sign": _lemma_sign,
    "sign-factor": _lemma_sign_factor,
    "determinant": _lemma_determinant,
    "rank": _lemma_rank,
    "inter-supports": _lemma_inter_supports,
    "game-circuits": _lemma_game_circuits,
    "base-graph": _lemma_base_graph,
}


def lemma_suite(target: str) -> list[LemmaRow]:
    if target == "all":
        return [row for t in LEMMA_TARGETS for row in _LEMMAS[t]()]
    if target not in _LEMMAS:
        raise ValueError(f"unknown lemma target {target!r}")
    return _LEMMAS[target]()
