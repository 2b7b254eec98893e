"""Random 3-regular bipartite graphs with an odd number of perfect matchings.

A graph is the union of three pairwise-disjoint random bijections
``U -> V``.  Its biadjacency matrix is then repaired over GF(2) by edge
switches until it has full rank, which makes the determinant, and hence the
number of perfect matchings, odd.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from . import gf2
from .graphs import BipartiteGraph, biadjacency, well_connectedness, DEFAULT_SEPARATOR_BUDGET


class RepairError(RuntimeError):
    pass


class ForgeGaveUp(RuntimeError):
    pass


def _rng(n: int, seed: int, attempt: int) -> random.Random:
    # string seeds hash through sha512, so streams are stable across platforms
    return random.Random(f"forge:{n}:{seed}:{attempt}")


def _three_bijections(n: int, rng: random.Random) -> tuple[list[int], list[int], list[int]]:
    out = []
    for _ in range(3):
        p = list(range(n))
        rng.shuffle(p)
        out.append(p)
    return out[0], out[1], out[2]


def _disjoint(p: list[int], q: list[int]) -> bool:
    return all(a != b for a, b in zip(p, q))


def triple_is_disjoint(n: int, rng: random.Random) -> bool:
    """Draw three uniform bijections and report whether they are pairwise disjoint."""
    a, b, c = _three_bijections(n, rng)
    return _disjoint(a, b) and _disjoint(a, c) and _disjoint(b, c)


def acceptance_rate(n: int, trials: int, seed: int = 0) -> float:
    rng = random.Random(f"acceptance:{n}:{seed}")
    hits = sum(triple_is_disjoint(n, rng) for _ in range(trials))
    return hits / trials


def _sample(n: int, rng: random.Random) -> tuple[BipartiteGraph, int]:
    rejections = 0
    while True:
        a, b, c = _three_bijections(n, rng)
        if _disjoint(a, b) and _disjoint(a, c) and _disjoint(b, c):
            edges = [(u, p[u]) for p in (a, b, c) for u in range(n)]
            return BipartiteGraph.from_edges(n, n, edges), rejections
        rejections += 1


def sample_three_matchings(n: int, seed: int) -> BipartiteGraph:
    """Union of three pairwise-disjoint uniform bijections, by rejection sampling."""
    if n < 4:
        raise ValueError("need n >= 4")
    return _sample(n, _rng(n, seed, 0))[0]


def gf2_biadjacency(g: BipartiteGraph) -> gf2.GF2Matrix:
    """Rows are left vertices; bit ``v`` of row ``u`` is set iff ``(u, v)`` is an edge."""
    rows = [0] * g.left
    for u, v in g.edges:
        rows[u] |= 1 << v
    return gf2.GF2Matrix(g.left, g.right, tuple(rows))


def zero_sum_limit(n: int) -> int:
    """Largest admissible size for a repair set: strictly below ``2n/3``."""
    return math.ceil(2 * n / 3) - 1


@dataclass(frozen=True)
class RepairStep:
    zero_sum_set: tuple[int, ...]
    i: int
    j: int
    k: int
    l: int
    removed: tuple[tuple[int, int], tuple[int, int]]
    added: tuple[tuple[int, int], tuple[int, int]]
    rank_before: int
    rank_after: int

    def to_json(self) -> dict:
        return {
            "zero_sum_set": list(self.zero_sum_set),
            "ijkl": [self.i, self.j, self.k, self.l],
            "removed": [list(e) for e in self.removed],
            "added": [list(e) for e in self.added],
            "rank_before": self.rank_before,
            "rank_after": self.rank_after,
        }


def repair_step_detail(g: BipartiteGraph, depth: int = 2) -> tuple[BipartiteGraph, RepairStep]:
    """One rank-increasing switch; returns the new graph and what was done.

    Rows are left vertices ``k, l`` and columns right vertices ``i, j``.
    With ``S`` a small zero-sum set of rows and ``N(S)`` its neighbourhood,
    pick ``i`` in ``N(S)`` and ``j`` outside it such that the vector with
    ones at ``i`` and ``j`` lies outside the row span.  Then ``k`` in ``S`` is
    joined to ``i`` and ``l`` outside ``S`` is joined to ``j`` but not to
    ``i``; edges ``ki, lj`` become ``kj, li``.
    """
    if g.left != g.right or not g.is_regular(3):
        raise ValueError("repair needs a 3-regular bipartite graph with equal sides")
    n = g.left
    a = gf2_biadjacency(g)
    before = gf2.rank(a)
    s = gf2.find_zero_sum_set(a, zero_sum_limit(n), depth=depth)
    if s is None:
        raise RepairError("no admissible zero-sum set")
    nbhd = sorted({v for u in s for v in g.left_neighbors(u)})
    outside = [j for j in range(n) if j not in set(nbhd)]
    span = gf2.RowSpan(a)
    for i in nbhd:
        for j in outside:
            if (1 << i | 1 << j) in span:
                continue
            k = next(u for u in sorted(s) if i in g.left_neighbors(u))
            i_nbrs = set(g.right_neighbors(i))
            l = next((u for u in g.right_neighbors(j) if u not in s and u not in i_nbrs), None)
            if l is None:
                raise AssertionError("no switch partner found; degree argument violated")
            removed = ((k, i), (l, j))
            added = ((k, j), (l, i))
            edges = (g.edges - set(removed)) | set(added)
            h = BipartiteGraph(n, n, frozenset(edges))
            after = gf2.rank(gf2_biadjacency(h))
            if after <= before:
                raise AssertionError(f"switch did not raise rank ({before} -> {after})")
            return h, RepairStep(tuple(sorted(s)), i, j, k, l, removed, added, before, after)
    raise RepairError("no spanning-gap t_ij found")


def repair_step(g: BipartiteGraph) -> BipartiteGraph:
    return repair_step_detail(g)[0]


@dataclass
class ForgeReport:
    graph: BipartiteGraph
    n: int
    seed: int
    attempts: int
    rejections: int
    repairs: list[RepairStep] = field(default_factory=list)
    rank_trace: list[int] = field(default_factory=list)
    connectivity: Optional[int] = None
    connectivity_checked_upto: Optional[int] = None
    dead_ends: list[str] = field(default_factory=list)

    @property
    def final_rank(self) -> int:
        return self.rank_trace[-1]

    def connectivity_label(self) -> str:
        if self.connectivity_checked_upto is None:
            return "unverified"
        if self.connectivity == self.connectivity_checked_upto:
            return f"certified {self.connectivity}, unverified above {self.connectivity}"
        return f"certified {self.connectivity} (exact)"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "attempts": self.attempts,
            "rejections": self.rejections,
            "repairs": [r.to_json() for r in self.repairs],
            "rank_trace": list(self.rank_trace),
            "connectivity": self.connectivity,
            "connectivity_checked_upto": self.connectivity_checked_upto,
            "connectivity_label": self.connectivity_label(),
            "dead_ends": list(self.dead_ends),
            "graph": self.graph.to_json(),
        }


DEFAULT_RESAMPLE_BUDGET = 1000


def forge(
    n: int,
    seed: int,
    connectivity_k: Optional[int] = None,
    require_connectivity: bool = False,
    resample_budget: int = DEFAULT_RESAMPLE_BUDGET,
    separator_budget: int = DEFAULT_SEPARATOR_BUDGET,
) -> ForgeReport:
    """Sample and repair until the biadjacency matrix has full GF(2) rank.

    With ``connectivity_k`` the result is certified k-well-connected for the
    largest ``k <= connectivity_k`` that holds.  If ``require_connectivity``
    is set, graphs falling short are discarded and resampled.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    total_rejections = 0
    dead_ends = []
    for attempt in range(resample_budget):
        rng = _rng(n, seed, attempt)
        g, rej = _sample(n, rng)
        total_rejections += rej
        trace = [gf2.rank(gf2_biadjacency(g))]
        repairs = []
        try:
            while trace[-1] < n:
                g, step = repair_step_detail(g)
                repairs.append(step)
                trace.append(step.rank_after)
        except RepairError as exc:
            dead_ends.append(f"attempt {attempt}: {exc}")
            continue
        report = ForgeReport(g, n, seed, attempt + 1, total_rejections, repairs, trace, dead_ends=dead_ends)
        if connectivity_k is not None:
            report.connectivity = well_connectedness(g, connectivity_k, separator_budget)
            report.connectivity_checked_upto = connectivity_k
            if require_connectivity and report.connectivity < connectivity_k:
                dead_ends.append(f"attempt {attempt}: only {report.connectivity}-well-connected")
                continue
        return report
    raise ForgeGaveUp(f"no graph after {resample_budget} attempts (n={n}, seed={seed})")


def biadjacency_matrix(g: BipartiteGraph) -> list[list[int]]:
    return biadjacency(g)
