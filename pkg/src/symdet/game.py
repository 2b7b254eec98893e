"""Pebble bijection games with bijections restricted to a coset ``T(G, alpha)``.

Rules, as implemented:

* Pebbles live on the index domain ``Y`` (for a matrix: rows + cols).  A
  board is a set of pebbled pairs ``(a, b)``.
* Each round Spoiler picks up a pebble pair (a free one if available).
  Duplicator answers with a bijection ``beta`` in ``T(G, alpha)`` that maps
  every remaining ``a`` to its ``b``; if none exists Spoiler wins.  Spoiler
  then puts the pebble on some ``a`` and its partner on ``beta(a)``.
* Spoiler wins once the board is not a partial isomorphism.  In ``matrix``
  mode that means some pebbled row pair ``(r, r')`` and column pair
  ``(c, c')`` have ``M[r][c] != N[r'][c']``.  In ``support`` mode it means
  some cell ``x`` is determined by the board (every legal bijection sends
  it to the same ``x'``) and ``M(x) != N(x')``.

Bounded play only ever reports that Duplicator survived; winner verdicts
come from :func:`solve_exhaustive`.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, TextIO

from . import cfi as cfimod
from .circuits import Circuit, ExtensionCache, evaluate_all, support_stat
from .permgroup import (
    BijectionCoset,
    Domain,
    Explicit,
    PermGroup,
    Permutation,
    alt_x_alt,
    matrix_domain,
)


class IllegalMove(RuntimeError):
    pass


class InvariantViolation(AssertionError):
    pass


class StrategyFailure(RuntimeError):
    pass


# ---------------------------------------------------------------- config and state

@dataclass
class GameConfig:
    k: int
    coset: BijectionCoset
    M: list[list[Any]]
    N: list[list[Any]]
    round_limit: int = 100
    mode: str = "matrix"

    def __post_init__(self):
        if self.mode not in ("matrix", "support"):
            raise ValueError(f"unknown mode {self.mode!r}")
        d = self.domain
        if d.parts != (("rows", len(self.M)), ("cols", len(self.M[0]))):
            raise ValueError("coset domain must be rows + cols of the inputs")
        if len(self.N) != len(self.M) or len(self.N[0]) != len(self.M[0]):
            raise ValueError("M and N must have the same shape")

    @property
    def domain(self) -> Domain:
        return self.coset.base.domain

    @property
    def nrows(self) -> int:
        return len(self.M)

    @property
    def ncols(self) -> int:
        return len(self.M[0])

    def cell(self, a: int, b: int) -> Optional[tuple[int, int]]:
        """The matrix cell at row point ``a`` and column point ``b`` (or ``None``)."""
        if a < self.nrows <= b:
            return (a, b - self.nrows)
        if b < self.nrows <= a:
            return (b, a - self.nrows)
        return None


def matrix_game(
    M,
    N,
    group: PermGroup,
    k: int,
    alpha: Optional[Permutation] = None,
    round_limit: int = 100,
    mode: str = "matrix",
) -> GameConfig:
    d = matrix_domain(len(M), len(M[0]))
    if group.domain != d:
        raise ValueError("group must act on rows + cols")
    base = alpha if alpha is not None else Permutation.identity(d)
    return GameConfig(k, BijectionCoset(base, group), [list(r) for r in M], [list(r) for r in N], round_limit, mode)


@dataclass
class GameState:
    k: int
    pebbles: dict[int, tuple[int, int]] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)
    last_beta: Optional[Permutation] = None

    def board(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.pebbles.values())

    def free_pebbles(self) -> list[int]:
        return [i for i in range(self.k) if i not in self.pebbles]


def legal_duplicator_moves(board: frozenset[tuple[int, int]] | dict, coset: BijectionCoset) -> Callable[[Permutation], bool]:
    """Predicate on bijections: in the coset and consistent with every pebbled pair."""
    pairs = list(board.values()) if isinstance(board, dict) else list(board)

    def ok(beta: Permutation) -> bool:
        return all(beta(a) == b for a, b in pairs) and coset.contains(beta)

    return ok


def _matrix_iso(cfg: GameConfig, pairs) -> bool:
    rows = [(a, b) for a, b in pairs if a < cfg.nrows]
    cols = [(a - cfg.nrows, b - cfg.nrows) for a, b in pairs if a >= cfg.nrows]
    if any(b >= cfg.nrows for _, b in rows) or any(b < 0 for _, b in cols):
        return False
    M, N = cfg.M, cfg.N
    return all(M[r][c] == N[r2][c2] for r, r2 in rows for c, c2 in cols)


def _support_iso(cfg: GameConfig, pairs, legal: Sequence[Permutation]) -> bool:
    if not legal:
        return False
    R = cfg.nrows
    for i in range(R):
        for j in range(cfg.ncols):
            a, b = i, R + j
            img = {(p(a), p(b)) for p in legal}
            if len(img) == 1:
                (ra, cb), = img
                if cfg.M[i][j] != cfg.N[ra][cb - R]:
                    return False
    return True


def partial_isomorphism(cfg: GameConfig, board, legal: Optional[Sequence[Permutation]] = None, budget: int = 10_000) -> bool:
    """Winning condition for Duplicator on a board (see the module docstring)."""
    pairs = list(board.values()) if isinstance(board, dict) else list(board)
    if cfg.mode == "matrix":
        return _matrix_iso(cfg, pairs)
    if legal is None:
        pred = legal_duplicator_moves(pairs, cfg.coset)
        legal = [p for p in cfg.coset.elements(budget) if pred(p)]
    return _support_iso(cfg, pairs, legal)


# ---------------------------------------------------------------- strategies

class Spoiler:
    def pick(self, state: GameState, cfg: GameConfig) -> int:
        raise NotImplementedError

    def place(self, state: GameState, cfg: GameConfig, beta: Permutation) -> int:
        raise NotImplementedError

    def note_placed(self, idx: int) -> None:
        pass


class Duplicator:
    def respond(self, state: GameState, cfg: GameConfig) -> Optional[Permutation]:
        raise NotImplementedError

    def observe(self, state: GameState, cfg: GameConfig, placed: int, a: int, b: int) -> None:
        pass


class RandomSpoiler(Spoiler):
    def __init__(self, seed: int = 0):
        self.rng = random.Random(f"random-spoiler:{seed}")

    def pick(self, state, cfg):
        return self.rng.randrange(cfg.k)

    def place(self, state, cfg, beta):
        return self.rng.randrange(cfg.domain.size)


class GreedySpoiler(Spoiler):
    """Lifts the oldest pebble; places where ``beta`` breaks the most pebbled cells.

    Ties are broken at random.
    """

    def __init__(self, seed: int = 0):
        self.rng = random.Random(f"greedy-spoiler:{seed}")
        self.age: dict[int, int] = {}
        self.clock = 0

    def pick(self, state, cfg):
        free = state.free_pebbles()
        if free:
            return free[0]
        return min(state.pebbles, key=lambda i: self.age.get(i, -1))

    def place(self, state, cfg, beta):
        R = cfg.nrows
        pairs = list(state.pebbles.values())
        rows = [(a, b) for a, b in pairs if a < R]
        cols = [(a - R, b - R) for a, b in pairs if a >= R]
        M, N = cfg.M, cfg.N
        img = beta.images
        scores = []
        for a in range(R):
            b = img[a]
            if b >= R:
                scores.append(len(cols) + 1)
            else:
                Ma, Nb = M[a], N[b]
                scores.append(sum(1 for c, c2 in cols if Ma[c] != Nb[c2]))
        for a in range(R, cfg.domain.size):
            b = img[a]
            if b < R:
                scores.append(len(rows) + 1)
            else:
                ca, cb = a - R, b - R
                scores.append(sum(1 for r, r2 in rows if M[r][ca] != N[r2][cb]))
        best = max(scores)
        return self.rng.choice([a for a, s in enumerate(scores) if s == best])

    def note_placed(self, idx):
        self.clock += 1
        self.age[idx] = self.clock


class InteractiveSpoiler(Spoiler):
    """Reads ``<pebble>`` and then ``<part> <index>`` lines from a stream."""

    def __init__(self, inp: TextIO = sys.stdin, out: TextIO = sys.stdout):
        self.inp = inp
        self.out = out

    def _ask(self, prompt: str) -> str:
        self.out.write(prompt)
        self.out.flush()
        line = self.inp.readline()
        if not line:
            raise EOFError("no more Spoiler input")
        return line.strip()

    def pick(self, state, cfg):
        d = cfg.domain
        self.out.write("board:\n")
        for i, (a, b) in sorted(state.pebbles.items()):
            self.out.write(f"  pebble {i}: {d.locate(a)} -> {d.locate(b)}\n")
        return int(self._ask(f"pick pebble [0-{cfg.k - 1}]: "))

    def place(self, state, cfg, beta):
        part, idx = self._ask("place on <part> <index>: ").split()
        return cfg.domain.index(part, int(idx))


class IdentityDuplicator(Duplicator):
    """Always plays the base of the coset (the identity for ``T(G, id)``)."""

    def respond(self, state, cfg):
        return cfg.coset.base


class RandomLegalDuplicator(Duplicator):
    """Plays a uniformly random legal bijection (explicitly enumerable cosets only)."""

    def __init__(self, cfg: GameConfig, seed: int = 0, budget: int = 10_000):
        self.rng = random.Random(f"random-duplicator:{seed}")
        self.elems = cfg.coset.elements(budget)

    def respond(self, state, cfg):
        pairs = list(state.pebbles.values())
        legal = [p for p in self.elems if all(p(a) == b for a, b in pairs)]
        return self.rng.choice(legal) if legal else None


# ---------------------------------------------------------------- CFI Duplicator

@dataclass
class CfiPosition:
    beta: Permutation
    edge: tuple[int, int]


class CfiDuplicator(Duplicator):
    """Duplicator for matrices of a CFI graph, keeping ``beta`` coherent and good bar some edge.

    Internally the game is the one on two copies of ``M`` with bijections from
    ``T(Alt x Alt, alpha)``, ``alpha`` the swap of the chosen column pair.
    With ``form="MN"`` the bijections handed to the engine are for the
    equivalent game on ``(M, N)`` with ``T(Alt x Alt, id)``: ``s * beta`` where
    ``s`` is the column swap.
    """

    def __init__(self, c: cfimod.CfiGraph, k: int, form: str = "MN", check: bool = True):
        if form not in ("MN", "MM"):
            raise ValueError("form must be 'MN' or 'MM'")
        self.c = c
        self.k = k
        self.form = form
        self.check = check
        d = c.domain
        self.swap = Permutation.transposition(d, *c.swap_pair())
        u0 = 0
        self.position = CfiPosition(self.swap, (u0, c.nbrs[u0][0]))
        self.alt = alt_x_alt(d)
        self.swap_inv = self.swap.inverse()
        self.rounds = 0
        self.case_counts = {"plain": 0, "cycle": 0}
        self._components: dict[frozenset[int], Optional[frozenset[int]]] = {}
        self.assert_invariant([])

    def _internal_pairs(self, state: GameState) -> list[tuple[int, int]]:
        pairs = list(state.pebbles.values())
        if self.form == "MN":
            pairs = [(a, self.swap(b)) for a, b in pairs]
        return pairs

    def respond(self, state, cfg):
        beta = self.position.beta
        return self.swap * beta if self.form == "MN" else beta

    def large_component(self, pairs) -> frozenset[int]:
        key = frozenset(self.c.gadget_of(a) for a, _ in pairs)
        if key not in self._components:
            self._components[key] = cfimod.large_component(self.c, key)
        comp = self._components[key]
        if comp is None:
            raise InvariantViolation("no large component; base graph not well-connected enough")
        return comp

    def assert_invariant(self, pairs):
        c = self.c
        beta = self.position.beta
        u, v = self.position.edge
        comp = self.large_component(pairs)
        if u not in comp or v not in comp:
            raise InvariantViolation(f"edge {(u, v)} left the large component")
        if not cfimod.is_good_bar(c, beta, u, v):
            raise InvariantViolation(f"beta is not coherent and good bar {(u, v)}")
        if not self.alt.contains(beta * self.swap_inv):
            raise InvariantViolation("beta left the coset of Alt x Alt")
        for a, b in pairs:
            if beta(a) != b:
                raise InvariantViolation("beta does not respect the pebbles")
        if any(c.gadget_of(a) in (u, v) for a, _ in pairs):
            raise InvariantViolation("a pebble sits in a gadget of the marked edge")

    def observe(self, state, cfg, placed, a, b):
        c = self.c
        x, bx = a, (self.swap(b) if self.form == "MN" else b)
        others = [(p, q) for i, (p, q) in state.pebbles.items() if i != placed]
        if self.form == "MN":
            others = [(p, self.swap(q)) for p, q in others]
        beta = self.position.beta
        u, v = self.position.edge
        old_comp = self.large_component(others)
        new_comp = self.large_component(others + [(x, bx)])
        u2, v2 = next((e for e in c.base_edges() if e[0] in new_comp and e[1] in new_comp), (None, None))
        if u2 is None:
            raise InvariantViolation("large component has no edge")
        d = c.domain
        t_old = Permutation.transposition(d, *c.pair(u, v))
        t_new = Permutation.transposition(d, *c.pair(u2, v2))
        if x not in c.pair(u, v):
            rho = t_old * t_new
            self.case_counts["plain"] += 1
        else:
            path = cfimod.path_avoiding_edge(c, u, v, old_comp)
            if path is None:
                raise InvariantViolation(f"no path from {u} to {v} avoiding their edge in the large component")
            bc = cfimod.cycle_automorphism(c, path, check=self.check)
            rho = t_old * bc * t_new
            self.case_counts["cycle"] += 1
        self.position = CfiPosition(beta * rho, (u2, v2))
        self.rounds += 1
        if self.check:
            self.assert_invariant(others + [(x, bx)])


def cfi_game(c: cfimod.CfiGraph, k: int, round_limit: int = 200, form: str = "MN") -> GameConfig:
    """Game on the CFI matrices: ``(M, N)`` with ``T(Alt x Alt, id)``, or ``(M, M)`` with the column swap."""
    M, N = cfimod.matrices_MN(c)
    d = c.domain
    g = alt_x_alt(d)
    if form == "MN":
        return GameConfig(k, BijectionCoset(Permutation.identity(d), g), M, N, round_limit)
    swap = Permutation.transposition(d, *c.swap_pair())
    return GameConfig(k, BijectionCoset(swap, g), M, M, round_limit)


# ---------------------------------------------------------------- play

@dataclass
class Outcome:
    winner: str  # "spoiler" or "survived"
    rounds: int
    transcript: list[dict]
    reason: str = ""

    @property
    def spoiler_won(self) -> bool:
        return self.winner == "spoiler"

    def to_json(self) -> dict:
        key = "SpoilerWin" if self.spoiler_won else "DuplicatorSurvived"
        return {"outcome": key, "round": self.rounds, "reason": self.reason}


def beta_digest(beta: Permutation) -> str:
    return f"{hash(beta.images) & 0xFFFFFFFFFFFF:012x}"


def play(
    cfg: GameConfig,
    spoiler: Spoiler,
    duplicator: Duplicator,
    rounds: Optional[int] = None,
    record: bool = True,
    legal_budget: int = 10_000,
) -> Outcome:
    limit = cfg.round_limit if rounds is None else rounds
    state = GameState(cfg.k)
    transcript: list[dict] = []
    d = cfg.domain
    if not partial_isomorphism(cfg, {}, budget=legal_budget):
        return Outcome("spoiler", 0, transcript, "empty board already distinguishes")
    if cfg.k == 0:
        return Outcome("survived", limit, transcript, "no pebbles")
    for r in range(1, limit + 1):
        idx = spoiler.pick(state, cfg)
        if not 0 <= idx < cfg.k:
            raise IllegalMove(f"Spoiler picked pebble {idx}")
        state.pebbles.pop(idx, None)
        beta = duplicator.respond(state, cfg)
        if beta is None:
            return Outcome("spoiler", r, transcript, "no legal bijection")
        if not legal_duplicator_moves(state.pebbles, cfg.coset)(beta):
            return Outcome("spoiler", r, transcript, "Duplicator played an illegal bijection")
        state.last_beta = beta
        a = spoiler.place(state, cfg, beta)
        if not 0 <= a < d.size:
            raise IllegalMove(f"Spoiler placed outside the domain: {a}")
        b = beta(a)
        state.pebbles[idx] = (a, b)
        spoiler.note_placed(idx)
        duplicator.observe(state, cfg, idx, a, b)
        ok = partial_isomorphism(cfg, state.pebbles, budget=legal_budget)
        if record:
            transcript.append(
                {
                    "round": r,
                    "picked": idx,
                    "beta_digest": beta_digest(beta),
                    "placement": list(d.locate(a)),
                    "partner": list(d.locate(b)),
                    "iso_ok": ok,
                }
            )
        if not ok:
            return Outcome("spoiler", r, transcript, "partial isomorphism broken")
    return Outcome("survived", limit, transcript)


def write_transcript(outcome: Outcome, fh: TextIO) -> None:
    for rec in outcome.transcript:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")
    fh.write(json.dumps(outcome.to_json(), sort_keys=True) + "\n")


# ---------------------------------------------------------------- exhaustive solver

Board = frozenset


@dataclass
class Solution:
    winner: str  # "spoiler" or "duplicator"
    rank: dict  # board -> rounds Spoiler needs (absent: Duplicator survives forever)
    boards: list
    coset_elements: list[Permutation]
    _legal: dict = field(repr=False, default_factory=dict)
    cfg: Optional[GameConfig] = field(repr=False, default=None)

    def spoiler_rounds(self) -> Optional[int]:
        return self.rank.get(frozenset())

    def lifts(self, board) -> list:
        out = [board - {p} for p in sorted(board)]
        if len(board) < self.cfg.k:
            out.insert(0, board)
        return out

    def legal(self, board) -> list[int]:
        hit = self._legal.get(board)
        if hit is None:
            hit = [i for i, p in enumerate(self.coset_elements) if all(p(a) == b for a, b in board)]
            self._legal[board] = hit
        return hit

    def successor(self, board, beta_index: int, a: int):
        p = self.coset_elements[beta_index]
        return board | {(a, p(a))}

    def best_beta(self, lifted) -> Optional[Permutation]:
        """Duplicator's best answer: maximise the rounds Spoiler still needs (forever if possible)."""
        inf = float("inf")
        best, best_val = None, -1.0
        size = self.cfg.domain.size
        for i in self.legal(lifted):
            val = min(self.rank.get(self.successor(lifted, i, a), inf) for a in range(size))
            if val > best_val:
                best, best_val = i, val
        return None if best is None else self.coset_elements[best]

    def best_spoiler_move(self, board) -> Optional[tuple]:
        """A lift achieving the board's rank, or ``None`` when the board is safe."""
        r = self.rank.get(board)
        if r is None or r == 0:
            return None
        size = self.cfg.domain.size
        for lifted in self.lifts(board):
            legal = self.legal(lifted)
            if all(any(self.rank.get(self.successor(lifted, i, a), r) < r for a in range(size)) for i in legal):
                return lifted
        raise AssertionError("ranked board without a winning lift")


def solve_exhaustive(cfg: GameConfig, group_budget: int = 5_000, board_budget: int = 200_000) -> Solution:
    """Decide the game by fixpoint over every board reachable from the empty one."""
    elems = cfg.coset.elements(group_budget)
    sol = Solution("duplicator", {}, [], elems, cfg=cfg)
    size = cfg.domain.size
    start: Board = frozenset()
    seen = {start}
    order = [start]
    i = 0
    while i < len(order):
        b = order[i]
        i += 1
        for lifted in sol.lifts(b):
            for bi in sol.legal(lifted):
                for a in range(size):
                    s = sol.successor(lifted, bi, a)
                    if s not in seen:
                        seen.add(s)
                        order.append(s)
                        if len(order) > board_budget:
                            raise RuntimeError(f"solver explored more than {board_budget} boards")
    sol.boards = order
    iso = {}
    for b in order:
        legal = [elems[j] for j in sol.legal(b)]
        iso[b] = partial_isomorphism(cfg, b, legal=legal) if legal else False
    rank = {b: 0 for b in order if not iso[b]}
    # outcome vectors per lifted board, computed once
    vectors: dict = {}
    for b in order:
        for lifted in sol.lifts(b):
            if lifted not in vectors:
                vectors[lifted] = [[sol.successor(lifted, bi, a) for a in range(size)] for bi in sol.legal(lifted)]
    r = 0
    while True:
        r += 1
        newly = []
        for b in order:
            if b in rank:
                continue
            for lifted in sol.lifts(b):
                vecs = vectors[lifted]
                if all(any(s in rank for s in vec) for vec in vecs):
                    newly.append(b)
                    break
        if not newly:
            break
        for b in newly:
            rank[b] = r
    sol.rank = rank
    sol.winner = "spoiler" if start in rank else "duplicator"
    return sol


class SolverDuplicator(Duplicator):
    def __init__(self, sol: Solution):
        self.sol = sol

    def respond(self, state, cfg):
        return self.sol.best_beta(state.board())


class SolverSpoiler(Spoiler):
    """Optimal Spoiler from the solver's ranks (plays arbitrarily on safe boards)."""

    def __init__(self, sol: Solution):
        self.sol = sol
        self._lifted = None

    def pick(self, state, cfg):
        target = self.sol.best_spoiler_move(state.board())
        free = state.free_pebbles()
        if target is None or target == state.board():
            return free[0] if free else 0
        (gone,) = state.board() - target
        return next(i for i, p in state.pebbles.items() if p == gone)

    def place(self, state, cfg, beta):
        lifted = state.board()
        r = self.sol.rank
        best, best_val = 0, float("inf")
        for a in range(cfg.domain.size):
            val = r.get(lifted | {(a, beta(a))}, float("inf"))
            if val < best_val:
                best, best_val = a, val
        return best


# ---------------------------------------------------------------- Spoiler from a circuit

@dataclass
class _Target:
    gate: int
    tup: tuple[int, ...]


class CircuitSpoiler(Spoiler):
    """Spoiler that follows a circuit separating ``M`` from ``N`` down to an input gate.

    The current gate ``g`` has a support ``Z`` that is fully pebbled, and its
    values under ``M`` and ``beta N`` differ for every legal ``beta``.  To
    move to a child it takes an orbit (under the pointwise stabiliser of the
    pinned points) of pairs ``(child, support tuple)`` on which the value
    counts differ, then pins the tuple one point at a time, each time keeping
    the part of the orbit whose next point lands where the counts still
    differ.  Needs ``2 * SP`` pebbles, and the coset ``T(G, id)`` with ``G``
    explicit.
    """

    def __init__(self, circuit: Circuit, group: Explicit):
        self.c = circuit
        self.group = group
        self.elems = group.elements()
        self.ext = ExtensionCache(circuit)
        self.stats = support_stat(circuit, group)
        self.supports = {g: tuple(sorted(s)) for g, s in self.stats.supports.items()}
        self.k = self.stats.sp
        self.level: Optional[_Target] = None  # current gate with its pinned support
        self.step: Optional[_Target] = None  # current child pair being pinned
        self.i = 0
        self.pinned: list[int] = []
        self.m_vals: Optional[list] = None
        self._bn_cache: dict[Permutation, list] = {}
        self.rounds_used = 0
        self.levels_done = 0

    # values
    def _vals_m(self, cfg):
        if self.m_vals is None:
            self.m_vals = evaluate_all(self.c, lambda x: cfg.M[x[0]][x[1]])
        return self.m_vals

    def _vals_bn(self, cfg, beta: Permutation):
        hit = self._bn_cache.get(beta)
        if hit is None:
            R = cfg.nrows

            def inp(x):
                return cfg.N[beta(x[0])][beta(R + x[1]) - R]

            hit = evaluate_all(self.c, inp)
            self._bn_cache[beta] = hit
        return hit

    def _stab(self, points) -> list[Permutation]:
        pts = list(points)
        return [p for p in self.elems if all(p(y) == y for y in pts)]

    def _pair_orbit(self, gate: int, tup: tuple[int, ...], stab: list[Permutation]) -> set:
        return {(self.ext(p)[gate], tuple(p(y) for y in tup)) for p in stab}

    @staticmethod
    def _counts(pairs, vals) -> dict:
        out: dict = {}
        for h, _ in pairs:
            out[vals[h]] = out.get(vals[h], 0) + 1
        return out

    def _start_level(self, cfg, beta):
        g = self.level.gate
        vm, vb = self._vals_m(cfg), self._vals_bn(cfg, beta)
        if vm[g] == vb[g]:
            raise StrategyFailure(f"gate {g} does not separate the inputs under the current bijection")
        gate = self.c.gates[g]
        if gate.op == "var":
            self.step = None
            return
        stab = self._stab(self.pinned)
        remaining = set(gate.children)
        while remaining:
            h = min(remaining)
            orbit = self._pair_orbit(h, self.supports[h], stab)
            remaining -= {p[0] for p in orbit}
            if self._counts(orbit, vm) != self._counts(orbit, vb):
                self.step = _Target(h, self.supports[h])
                self.i = 0
                return
        raise StrategyFailure(f"no child orbit of gate {g} separates the inputs")

    def _advance(self, cfg, beta):
        """Skip tuple points already pinned and climb to the next level when done."""
        while True:
            if self.level is None:
                out = self.c.output
                self.pinned = []
                if self.supports[out]:
                    # pin the output's own support first, as if it hung below a virtual gate
                    self.level = _Target(-1, ())
                    self.step = _Target(out, self.supports[out])
                    self.i = 0
                else:
                    self.level = _Target(out, ())
                    self._start_level(cfg, beta)
            if self.step is None:
                return
            while self.i < len(self.step.tup) and self.step.tup[self.i] in self.pinned:
                self.i += 1
            if self.i < len(self.step.tup):
                return
            self.level = self.step
            self.pinned = list(self.step.tup)
            self.levels_done += 1
            self._start_level(cfg, beta)

    def pick(self, state, cfg):
        beta = state.last_beta or cfg.coset.base
        self._advance(cfg, beta)
        free = state.free_pebbles()
        if free:
            return free[0]
        for idx, (a, _) in sorted(state.pebbles.items()):
            if a not in self.pinned:
                return idx
        raise StrategyFailure("every pebble is pinned; not enough pebbles")

    def place(self, state, cfg, beta):
        self.rounds_used += 1
        if self.step is None:
            # the current gate is an input gate; its support is already pebbled
            return self.pinned[0] if self.pinned else 0
        stab = self._stab(self.pinned)
        orbit = self._pair_orbit(self.step.gate, self.step.tup, stab)
        vm, vb = self._vals_m(cfg), self._vals_bn(cfg, beta)
        classes: dict[int, list] = {}
        for pair in orbit:
            classes.setdefault(pair[1][self.i], []).append(pair)
        for cpt in sorted(classes):
            cls = classes[cpt]
            if self._counts(cls, vm) != self._counts(cls, vb):
                h, tup = min(cls)
                self.step = _Target(h, tup)
                self.pinned.append(cpt)
                self.i += 1
                return cpt
        raise StrategyFailure("orbit split has no separating class")


# ---------------------------------------------------------------- config files

GROUP_SHORTHANDS = ("trivial", "sym_x_sym", "alt_x_alt", "equal_sign")


def _group_from_desc(desc, d: Domain, explicit: bool) -> PermGroup:
    from .permgroup import Trivial, equal_sign_product, group_from_json, sym_x_sym

    if isinstance(desc, str):
        table = {
            "trivial": lambda: Trivial(d),
            "sym_x_sym": lambda: sym_x_sym(d),
            "alt_x_alt": lambda: alt_x_alt(d),
            "equal_sign": lambda: equal_sign_product(d),
        }
        if desc not in table:
            raise ValueError(f"unknown group shorthand {desc!r}; use one of {GROUP_SHORTHANDS}")
        g = table[desc]()
    else:
        g = group_from_json(desc)
    if explicit and not isinstance(g, Explicit):
        g = Explicit(d, frozenset(g.elements()), validate=False)
    return g


@dataclass
class LoadedGame:
    cfg: GameConfig
    cfi: Optional[cfimod.CfiGraph] = None
    circuit: Optional[Circuit] = None
    group: Optional[PermGroup] = None
    form: str = "MN"


def config_from_json(obj: dict) -> LoadedGame:
    """Build a game from a JSON object.

    Matrix games: ``{"M", "N", "k", "group", "alpha"?, "rounds"?, "mode"?,
    "circuit"?}`` where ``group`` is a shorthand or a group JSON.  CFI games:
    ``{"cfi": {"base": "q3" | "k33" | graph JSON}, "k", "rounds"?, "form"?}``.
    """
    from .circuits import Circuit as _Circuit
    from .graphs import BipartiteGraph, complete_bipartite, cube_q3

    rounds = int(obj.get("rounds", 100))
    if "cfi" in obj:
        base = obj["cfi"]["base"]
        if base == "q3":
            g = cube_q3()
        elif base == "k33":
            g = complete_bipartite(3, 3)
        else:
            g = BipartiteGraph.from_json(base)
        c = cfimod.build_cfi(g)
        form = obj.get("form", "MN")
        return LoadedGame(cfi_game(c, int(obj["k"]), rounds, form), cfi=c, form=form)
    M, N = obj["M"], obj["N"]
    d = matrix_domain(len(M), len(M[0]))
    circuit = _Circuit.from_json(obj["circuit"]) if "circuit" in obj else None
    group = _group_from_desc(obj.get("group", "trivial"), d, explicit=circuit is not None)
    alpha = Permutation.from_json(obj["alpha"]) if "alpha" in obj else None
    mode = obj.get("mode", "support" if circuit is not None else "matrix")
    cfg = matrix_game(M, N, group, int(obj["k"]), alpha, rounds, mode)
    return LoadedGame(cfg, circuit=circuit, group=group)
