"""Command-line interface: ``symdet <command> ...``.

Every command is a thin shell over library calls.  JSON output uses sorted
keys.  Exit status is 0 when every requested check passes, 1 when a check
fails and 2 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from . import cfi as cfimod
from . import circuits as circ
from . import exactalg, forge as forgemod, game, graphs, pipeline
from .permgroup import matrix_domain

THREADS_ENV = "SYMDET_THREADS"


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: Optional[int]
    version: str
    threads: int
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def threads() -> int:
    # work is single-threaded; the value is recorded so runs stay comparable
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def dump_json(obj, path: Optional[str] = None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def load_base(desc: str) -> graphs.BipartiteGraph:
    """A graph JSON path, or one of the built-ins ``q3``, ``k33``."""
    if desc == "q3":
        return graphs.cube_q3()
    if desc == "k33":
        return graphs.complete_bipartite(3, 3)
    return graphs.load_graph(desc)


def load_matrix(path: str) -> list[list[int]]:
    """Whitespace matrix format, or a JSON list of rows."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return [[int(x) for x in row] for row in json.loads(text)]
    return exactalg.loads(text)


# ---------------------------------------------------------------- commands

def cmd_forge(args) -> int:
    rep = forgemod.forge(
        args.n,
        args.seed,
        connectivity_k=args.certify_k,
        require_connectivity=args.require,
        resample_budget=args.resample_budget,
        separator_budget=args.budget,
    )
    if args.out:
        graphs.dump_graph(rep.graph, args.out)
    dump_json(rep.to_json(), args.report)
    ok = rep.final_rank == args.n
    if args.certify_k is not None and args.require:
        ok = ok and rep.connectivity >= args.certify_k
    return 0 if ok else 1


def cmd_cfi(args) -> int:
    base = load_base(args.base)
    c = cfimod.build_cfi(base)
    if args.action == "build":
        out = c.to_json()
        out["matrices"] = dict(zip(("M", "N"), cfimod.matrices_MN(c)))
        dump_json(out, args.out)
        return 0
    if args.action == "det":
        M, N = cfimod.matrices_MN(c)
        dm, dn = exactalg.det(M), exactalg.det(N)
        res = {"mode": args.mode, "det_M": str(dm), "det_N": str(dn), "negated": dn == -dm}
        ok = dn == -dm
        if args.mode == "two-factor":
            via = cfimod.det_via_two_factors(c)
            res["two_factor_formula"] = str(via)
            ok = ok and via == dm
        elif args.mode == "census":
            cen = cfimod.census(c, budget=args.budget)
            res["census"] = cen.summary()
            ok = ok and cen.signed_total == dm
        if dm:
            res["v2_det_M"] = exactalg.two_adic_valuation(dm)
        dump_json(res, args.out)
        return 0 if ok else 1
    if args.action == "perm-pair":
        x, xt = cfimod.build_permanent_pair(base)
        px, pxt = graphs.count_perfect_matchings(x), graphs.count_perfect_matchings(xt)
        diff = abs(px - pxt)
        res = {
            "X": {"left": x.left, "right": x.right, "regular_degree": 4 if x.is_regular(4) else None, "perfect_matchings": px},
            "X_twisted": {"left": xt.left, "right": xt.right, "regular_degree": 4 if xt.is_regular(4) else None, "perfect_matchings": pxt},
            "difference": diff,
            "difference_is_power_of_two": diff > 0 and diff & (diff - 1) == 0,
        }
        if args.out_graphs:
            dump_json({"X": x.to_json(), "X_twisted": xt.to_json()}, args.out_graphs)
        dump_json(res, args.out)
        return 0 if px != pxt else 1
    raise AssertionError(args.action)


def cmd_det(args) -> int:
    m = load_matrix(args.matrix)
    res = {"det": str(exactalg.det(m))}
    ok = True
    if args.cross_check:
        cof = exactalg.det_cofactor(m)
        res["cofactor"] = str(cof)
        ok = cof == exactalg.det(m)
    if args.mod is not None:
        res["det_mod"] = exactalg.det_mod(m, args.mod)
        ok = ok and res["det_mod"] == exactalg.det(m) % args.mod
    dump_json(res)
    return 0 if ok else 1


def cmd_perm(args) -> int:
    if args.graph:
        g = load_base(args.graph)
        value = graphs.count_perfect_matchings(g)
        res = {"perfect_matchings": value}
        if args.cross_check:
            res["ryser"] = exactalg.permanent_ryser(graphs.biadjacency(g))
            ok = res["ryser"] == value
        else:
            ok = True
    else:
        m = load_matrix(args.matrix)
        methods = {"auto": exactalg.permanent, "ryser": exactalg.permanent_ryser, "brute": exactalg.permanent_bruteforce}
        value = methods[args.method](m)
        res = {"permanent": str(value), "method": args.method}
        ok = True
        if args.cross_check:
            other = exactalg.permanent_ryser(m) if args.method != "ryser" else exactalg.permanent_bruteforce(m)
            res["cross_check"] = str(other)
            ok = other == value
    dump_json(res)
    return 0 if ok else 1


def cmd_census(args) -> int:
    c = cfimod.build_cfi(load_base(args.base))
    cen = cfimod.census(c, budget=args.budget)
    det = exactalg.det(cfimod.matrices_MN(c)[0])
    s = cen.summary()
    s["det_M"] = str(det)
    want = 1 << (2 * c.m)
    ok = (
        cen.bucket_sizes() <= {want}
        and all(len(v[1]) == 1 for v in cen.buckets.values())
        and all(len(v) == 1 for v in cen.factor_signs.values())
        and cen.involution_ok
        and cen.signed_non_uniform == 0
        and cen.signed_total == det
    )
    s["passed"] = ok
    dump_json(s, args.out)
    return 0 if ok else 1


def _make_spoiler(name: str, loaded: game.LoadedGame, seed: int):
    if name == "random":
        return game.RandomSpoiler(seed)
    if name == "greedy":
        return game.GreedySpoiler(seed)
    if name == "interactive":
        return game.InteractiveSpoiler(sys.stdin, sys.stderr)
    if name == "circuit":
        if loaded.circuit is None:
            raise ValueError("the circuit Spoiler needs a 'circuit' entry in the config")
        return game.CircuitSpoiler(loaded.circuit, loaded.group)
    raise AssertionError(name)


def _make_duplicator(name: str, loaded: game.LoadedGame, seed: int, budget: int):
    if name == "identity":
        return game.IdentityDuplicator()
    if name == "cfi":
        if loaded.cfi is None:
            raise ValueError("the cfi Duplicator needs a 'cfi' config")
        return game.CfiDuplicator(loaded.cfi, loaded.cfg.k, form=loaded.form)
    if name == "solver":
        return game.SolverDuplicator(game.solve_exhaustive(loaded.cfg, group_budget=budget))
    raise AssertionError(name)


def cmd_game(args) -> int:
    obj = load_json(args.config)
    loaded = game.config_from_json(obj)
    if args.action == "solve":
        sol = game.solve_exhaustive(loaded.cfg, group_budget=args.budget, board_budget=args.board_budget)
        dump_json({"winner": sol.winner, "spoiler_rounds": sol.spoiler_rounds(), "boards": len(sol.boards)}, args.out)
        return 0
    rounds = args.rounds if args.rounds is not None else loaded.cfg.round_limit
    spoiler = _make_spoiler(args.spoiler, loaded, args.seed)
    dup = _make_duplicator(args.duplicator, loaded, args.seed, args.budget)
    out = game.play(loaded.cfg, spoiler, dup, rounds=rounds)
    if args.transcript:
        with open(args.transcript, "w") as fh:
            game.write_transcript(out, fh)
    else:
        game.write_transcript(out, sys.stdout)
    return 0


def _load_group(desc: str, d):
    if os.path.exists(desc):
        return game._group_from_desc(load_json(desc), d, explicit=False)
    return game._group_from_desc(desc, d, explicit=False)


def cmd_circuit(args) -> int:
    if args.action == "ryser":
        dump_json(circ.build_ryser_circuit(args.n).to_json(), args.out)
        return 0
    c = circ.Circuit.from_json(load_json(args.circuit))
    dom = c.meta.get("domain") or {}
    nrows, ncols = dom.get("rows"), dom.get("cols")
    if nrows is None:
        cells = [g.var for g in c.gates if g.op == "var"]
        nrows = 1 + max(i for i, _ in cells)
        ncols = 1 + max(j for _, j in cells)
    if args.action == "eval":
        m = load_matrix(args.matrix)
        dump_json({"value": str(circ.evaluate(c, circ.matrix_inputs(m)))}, args.out)
        return 0
    d = matrix_domain(nrows, ncols)
    g = _load_group(args.group, d)
    if args.action == "check-sym":
        ok = circ.check_symmetric(c, g)
        dump_json({"symmetric": ok, "rigid": c.is_rigid()}, args.out)
        return 0 if ok else 1
    if args.action == "orbits":
        orbits = circ.gate_orbits(c, g)
        dump_json({"orbits": orbits, "ORB": max(len(o) for o in orbits)}, args.out)
        return 0
    if args.action == "supports":
        st = circ.support_stat(c, g, budget=args.budget)
        dump_json(
            {
                "supports": {str(k): [list(d.locate(x)) for x in sorted(v)] for k, v in sorted(st.supports.items())},
                "canonical": {str(k): v for k, v in sorted(st.canonical.items())},
                "SP": st.sp,
                "ORB": st.orb,
            },
            args.out,
        )
        return 0
    raise AssertionError(args.action)


def cmd_lemmas(args) -> int:
    rows = pipeline.lemma_suite(args.target)
    for r in rows:
        print(r.line())
    return 0 if all(r.passed for r in rows) else 1


def cmd_pipeline(args) -> int:
    base = load_base(args.base) if args.base else None
    rep = pipeline.pipeline_determinant(
        args.n, args.seed, args.k, base=base, games=args.games, rounds=args.rounds,
        separator_budget=args.budget, resample_budget=args.resample_budget,
    )
    dump_json(rep, args.out)
    if args.out and args.out != "-":
        print(pipeline.format_pipeline(rep))
    return 0 if rep["passed"] else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symdet", description="CFI matrices, bijection games and symmetric circuits.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--manifest", help="write a run manifest (JSON) to this path")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("forge", help="sample and repair a base graph")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--certify-k", type=int, dest="certify_k")
    f.add_argument("--require", action="store_true", help="resample until the certificate holds")
    f.add_argument("--out", help="graph JSON output")
    f.add_argument("--report", help="report JSON output (default stdout)")
    f.add_argument("--budget", type=int, default=graphs.DEFAULT_SEPARATOR_BUDGET, help="separator search budget")
    f.add_argument("--resample-budget", type=int, default=forgemod.DEFAULT_RESAMPLE_BUDGET)
    f.set_defaults(func=cmd_forge)

    c = sub.add_parser("cfi", help="CFI graphs and matrices")
    c.add_argument("action", choices=["build", "det", "perm-pair"])
    c.add_argument("--base", required=True, help="graph JSON, or q3 / k33")
    c.add_argument("--mode", choices=["direct", "two-factor", "census"], default="direct")
    c.add_argument("--out")
    c.add_argument("--out-graphs", help="perm-pair: write both graphs here")
    c.add_argument("--budget", type=int, default=cfimod.CENSUS_BUDGET, help="census matching budget")
    c.set_defaults(func=cmd_cfi)

    d = sub.add_parser("det", help="exact determinant of an integer matrix file")
    d.add_argument("--matrix", required=True)
    d.add_argument("--mod", type=int, help="also compute modulo this prime")
    d.add_argument("--cross-check", action="store_true", help="compare against cofactor expansion")
    d.set_defaults(func=cmd_det)

    pm = sub.add_parser("perm", help="permanent of a matrix, or matching count of a graph")
    src = pm.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--graph")
    pm.add_argument("--method", choices=["auto", "ryser", "brute"], default="auto")
    pm.add_argument("--cross-check", action="store_true")
    pm.set_defaults(func=cmd_perm)

    cs = sub.add_parser("census", help="classify every perfect matching of a CFI graph")
    cs.add_argument("--base", required=True)
    cs.add_argument("--budget", type=int, default=cfimod.CENSUS_BUDGET)
    cs.add_argument("--out")
    cs.set_defaults(func=cmd_census)

    g = sub.add_parser("game", help="play or solve a bijection game")
    g.add_argument("action", choices=["play", "solve"])
    g.add_argument("--config", required=True)
    g.add_argument("--spoiler", choices=["random", "greedy", "interactive", "circuit"], default="random")
    g.add_argument("--duplicator", choices=["cfi", "identity", "solver"], default="identity")
    g.add_argument("--rounds", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--transcript", help="JSON-lines transcript path (default stdout)")
    g.add_argument("--out")
    g.add_argument("--budget", type=int, default=5_000, help="group enumeration budget")
    g.add_argument("--board-budget", type=int, default=200_000)
    g.set_defaults(func=cmd_game)

    ci = sub.add_parser("circuit", help="circuit evaluation and symmetry analysis")
    ci.add_argument("action", choices=["eval", "check-sym", "orbits", "supports", "ryser"])
    ci.add_argument("--circuit")
    ci.add_argument("--matrix")
    ci.add_argument("--group", default="sym_x_sym", help="shorthand or group JSON path")
    ci.add_argument("--n", type=int, help="ryser: matrix size")
    ci.add_argument("--out")
    ci.add_argument("--budget", type=int, default=200_000, help="support search budget")
    ci.set_defaults(func=cmd_circuit)

    le = sub.add_parser("lemmas", help="run a lemma verification")
    le.add_argument("--target", choices=list(pipeline.LEMMA_TARGETS) + ["all"], default="all")
    le.set_defaults(func=cmd_lemmas)

    pl = sub.add_parser("pipeline", help="forge -> CFI -> determinants -> games")
    pl.add_argument("--n", type=int, default=12)
    pl.add_argument("--seed", type=int, required=True)
    pl.add_argument("--k", type=int, default=2)
    pl.add_argument("--base", help="use this base graph instead of forging")
    pl.add_argument("--games", type=int, default=20)
    pl.add_argument("--rounds", type=int, default=200)
    pl.add_argument("--out")
    pl.add_argument("--budget", type=int, default=graphs.DEFAULT_SEPARATOR_BUDGET)
    pl.add_argument("--resample-budget", type=int, default=forgemod.DEFAULT_RESAMPLE_BUDGET)
    pl.set_defaults(func=cmd_pipeline)
    return p


_INPUT_FLAGS = ("base", "config", "matrix", "circuit", "graph")
_OUTPUT_FLAGS = ("out", "report", "transcript", "out_graphs")


def _manifest(args, argv) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    inputs = {}
    for k in _INPUT_FLAGS:
        v = getattr(args, k, None)
        if v and os.path.exists(v):
            inputs[v] = file_digest(v)
    outputs = {}
    for k in _OUTPUT_FLAGS:
        v = getattr(args, k, None)
        if v and v != "-" and os.path.exists(v):
            outputs[v] = file_digest(v)
    return RunManifest(args.command, params, getattr(args, "seed", None), __version__, threads(), inputs, outputs)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (pipeline.StageError, RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.manifest:
        dump_json(_manifest(args, argv).to_json(), args.manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
