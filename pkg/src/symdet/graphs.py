"""Bipartite graphs, perfect matchings, separators and cops-and-robbers.

Vertices of a :class:`BipartiteGraph` are integers on each side.  Where a
single vertex numbering is needed (separators, the cops game) left vertex
``u`` is ``u`` and right vertex ``v`` is ``left + v``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Optional, Sequence


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured budget."""


@dataclass(frozen=True)
class BipartiteGraph:
    left: int
    right: int
    edges: frozenset[tuple[int, int]]
    left_labels: Optional[tuple[str, ...]] = None
    right_labels: Optional[tuple[str, ...]] = None
    _adj: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.edges, frozenset):
            object.__setattr__(self, "edges", frozenset(self.edges))
        adj_l = [[] for _ in range(self.left)]
        adj_r = [[] for _ in range(self.right)]
        for u, v in self.edges:
            if not (0 <= u < self.left and 0 <= v < self.right):
                raise ValueError(f"edge {(u, v)} out of range")
            adj_l[u].append(v)
            adj_r[v].append(u)
        for labels, size in ((self.left_labels, self.left), (self.right_labels, self.right)):
            if labels is not None and len(labels) != size:
                raise ValueError("label list length does not match side size")
        object.__setattr__(
            self, "_adj", (tuple(tuple(sorted(a)) for a in adj_l), tuple(tuple(sorted(a)) for a in adj_r))
        )

    @classmethod
    def from_edges(cls, left: int, right: int, edges: Iterable[tuple[int, int]], **labels) -> "BipartiteGraph":
        edges = list(edges)
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        return cls(left, right, frozenset(edges), **labels)

    def left_neighbors(self, u: int) -> tuple[int, ...]:
        return self._adj[0][u]

    def right_neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[1][v]

    def left_degree(self, u: int) -> int:
        return len(self._adj[0][u])

    def right_degree(self, v: int) -> int:
        return len(self._adj[1][v])

    def is_regular(self, d: int) -> bool:
        return all(len(a) == d for a in self._adj[0]) and all(len(a) == d for a in self._adj[1])

    @property
    def num_vertices(self) -> int:
        return self.left + self.right

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency_lists(self) -> list[list[int]]:
        """Neighbour lists in the combined numbering (right ``v`` is ``left + v``)."""
        out = [[self.left + v for v in self._adj[0][u]] for u in range(self.left)]
        out += [list(self._adj[1][v]) for v in range(self.right)]
        return out

    def to_json(self) -> dict:
        d = {"left": self.left, "right": self.right, "edges": [list(e) for e in self.sorted_edges()]}
        if self.left_labels is not None:
            d["left_labels"] = list(self.left_labels)
        if self.right_labels is not None:
            d["right_labels"] = list(self.right_labels)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "BipartiteGraph":
        ll = d.get("left_labels")
        rl = d.get("right_labels")
        return cls.from_edges(
            d["left"],
            d["right"],
            [tuple(e) for e in d["edges"]],
            left_labels=tuple(ll) if ll is not None else None,
            right_labels=tuple(rl) if rl is not None else None,
        )


def dump_graph(g: BipartiteGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> BipartiteGraph:
    with open(path) as fh:
        return BipartiteGraph.from_json(json.load(fh))


def to_dot(g: BipartiteGraph, matching: Optional[dict[int, int]] = None) -> str:
    """Graphviz rendering; matched edges are drawn bold."""
    matched = set(matching.items()) if matching else set()
    lname = g.left_labels or tuple(f"L{u}" for u in range(g.left))
    rname = g.right_labels or tuple(f"R{v}" for v in range(g.right))
    lines = ["graph G {", "  rankdir=LR;"]
    for u in range(g.left):
        lines.append(f'  l{u} [label="{lname[u]}", shape=box];')
    for v in range(g.right):
        lines.append(f'  r{v} [label="{rname[v]}"];')
    for u, v in g.sorted_edges():
        style = " [style=bold, color=red]" if (u, v) in matched else ""
        lines.append(f"  l{u} -- r{v}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# small named graphs used throughout the tests and the lemma suite

def complete_bipartite(a: int, b: int) -> BipartiteGraph:
    return BipartiteGraph.from_edges(a, b, [(u, v) for u in range(a) for v in range(b)])


def cube_q3() -> BipartiteGraph:
    """The 3-cube with even-weight vertices on the left, odd-weight on the right."""
    even = [x for x in range(8) if bin(x).count("1") % 2 == 0]
    odd = [x for x in range(8) if bin(x).count("1") % 2 == 1]
    edges = [(i, j) for i, a in enumerate(even) for j, b in enumerate(odd) if bin(a ^ b).count("1") == 1]
    return BipartiteGraph.from_edges(4, 4, edges)


def even_cycle(length: int) -> BipartiteGraph:
    """Cycle on ``length`` vertices (even), alternating sides."""
    if length % 2 or length < 4:
        raise ValueError("bipartite cycle needs even length >= 4")
    k = length // 2
    return BipartiteGraph.from_edges(k, k, [(i, i) for i in range(k)] + [(i, (i + 1) % k) for i in range(k)])


def disjoint_union(g: BipartiteGraph, h: BipartiteGraph) -> BipartiteGraph:
    edges = list(g.edges) + [(u + g.left, v + g.right) for u, v in h.edges]
    return BipartiteGraph.from_edges(g.left + h.left, g.right + h.right, edges)


# ---------------------------------------------------------------- matrices

def biadjacency(
    g: BipartiteGraph, row_order: Optional[Sequence[int]] = None, col_order: Optional[Sequence[int]] = None
) -> list[list[int]]:
    """0/1 matrix with entry (i, j) = 1 iff ``(row_order[i], col_order[j])`` is an edge."""
    rows = list(range(g.left)) if row_order is None else list(row_order)
    cols = list(range(g.right)) if col_order is None else list(col_order)
    if sorted(rows) != list(range(g.left)):
        raise ValueError("row_order is not a permutation of the left side")
    if sorted(cols) != list(range(g.right)):
        raise ValueError("col_order is not a permutation of the right side")
    pos = {v: j for j, v in enumerate(cols)}
    out = []
    for u in rows:
        line = [0] * len(cols)
        for v in g.left_neighbors(u):
            line[pos[v]] = 1
        out.append(line)
    return out


# ---------------------------------------------------------------- matchings

def _require_square(g: BipartiteGraph):
    if g.left != g.right:
        raise ValueError("perfect matchings need equal side sizes")


def enumerate_perfect_matchings(g: BipartiteGraph) -> Iterator[dict[int, int]]:
    """Yield every perfect matching as a dict left -> right.

    Backtracking over left vertices in index order, trying right neighbours
    in index order, so the emission order is fixed.  A branch is cut as soon
    as some unmatched right vertex has no free left neighbour remaining.
    """
    _require_square(g)
    n = g.left
    nbrs = [g.left_neighbors(u) for u in range(n)]
    # for pruning: right vertex v is dead at depth d if all its neighbours are < d and taken
    last_left = [max(g.right_neighbors(v), default=-1) for v in range(n)]
    closing = [[] for _ in range(n)]
    for v in range(n):
        if last_left[v] >= 0:
            closing[last_left[v]].append(v)
    if any(x < 0 for x in last_left):
        return
    match = [-1] * n
    used = [False] * n
    if n == 0:
        yield {}
        return
    last = n - 1

    def rec(u):
        if u == last:
            # the last left vertex: emit directly instead of recursing
            for v in nbrs[u]:
                if not used[v]:
                    match[u] = v
                    yield dict(enumerate(match))
            match[u] = -1
            return
        for v in nbrs[u]:
            if used[v]:
                continue
            used[v] = True
            match[u] = v
            cl = closing[u]
            if not cl or all(used[w] for w in cl):
                yield from rec(u + 1)
            used[v] = False
        match[u] = -1

    yield from rec(0)


def _frontier_order(g: BipartiteGraph) -> list[int]:
    """Left vertices ordered to keep the set of half-covered right vertices small.

    Greedy: always take the left vertex with the most neighbours already
    touched, ties to the lowest index.
    """
    n = g.left
    touched: set[int] = set()
    done = [False] * n
    order = []
    for _ in range(n):
        best = max((u for u in range(n) if not done[u]), key=lambda u: (sum(v in touched for v in g.left_neighbors(u)), -u))
        done[best] = True
        order.append(best)
        touched.update(g.left_neighbors(best))
    return order


def _count_dp(g: BipartiteGraph) -> int:
    """Count perfect matchings by DP over (step, used right set).

    Left vertices are processed in :func:`_frontier_order`; after the last
    left neighbour of a right vertex is processed that vertex must be used,
    which keeps the number of live states small.
    """
    n = g.left
    order = _frontier_order(g)
    step_of = {u: t for t, u in enumerate(order)}
    nbr_bits = [[1 << v for v in g.left_neighbors(u)] for u in order]
    # right vertices whose last left neighbour comes at step t must be covered after it
    must = [0] * n
    for v in range(n):
        nb = g.right_neighbors(v)
        if not nb:
            return 0
        must[max(step_of[u] for u in nb)] |= 1 << v
    states = {0: 1}
    for t in range(n):
        nxt: dict[int, int] = {}
        req = must[t]
        for used, cnt in states.items():
            for b in nbr_bits[t]:
                if used & b:
                    continue
                s = used | b
                if s & req != req:
                    continue
                nxt[s] = nxt.get(s, 0) + cnt
        states = nxt
        if not states:
            return 0
    return sum(states.values())


def count_perfect_matchings(g: BipartiteGraph) -> int:
    """Number of perfect matchings, computed exactly.

    Uses a frontier DP, which is exact and independent of the number of
    matchings; for dense small graphs it defers to Ryser's formula when that
    is estimated to be cheaper.
    """
    _require_square(g)
    n = g.left
    if n == 0:
        return 1
    density = len(g.edges) / (n * n)
    if n <= 20 and density > 0.6:
        from .exactalg import permanent_ryser

        return permanent_ryser(biadjacency(g))
    return _count_dp(g)


def two_factors(g: BipartiteGraph) -> list[frozenset[tuple[int, int]]]:
    """All 2-factors of a 3-regular bipartite graph, as complements of perfect matchings."""
    if not g.is_regular(3):
        raise ValueError("two_factors requires a 3-regular graph")
    out = []
    for mu in enumerate_perfect_matchings(g):
        out.append(frozenset(g.edges - set(mu.items())))
    return out


# ---------------------------------------------------------------- separators

def _neighbor_masks(adj: Sequence[Sequence[int]]) -> list[int]:
    masks = []
    for nb in adj:
        m = 0
        for w in nb:
            m |= 1 << w
        masks.append(m)
    return masks


def _components(masks: Sequence[int], alive: int) -> list[int]:
    comps = []
    rest = alive
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            grow = 0
            f = frontier
            while f:
                low = f & -f
                grow |= masks[low.bit_length() - 1]
                f ^= low
            grow &= rest & ~comp
            comp |= grow
            frontier = grow
        comps.append(comp)
        rest &= ~comp
    return comps


def _largest_component(masks: Sequence[int], alive: int) -> int:
    return max((c.bit_count() for c in _components(masks, alive)), default=0)


def components(adj: Sequence[Sequence[int]], removed: Iterable[int] = ()) -> list[list[int]]:
    """Connected components of the graph minus ``removed``, each sorted."""
    masks = _neighbor_masks(adj)
    alive = (1 << len(adj)) - 1
    for r in removed:
        alive &= ~(1 << r)
    out = [sorted(_bits(c)) for c in _components(masks, alive)]
    return sorted(out)


def _bits(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def _as_adjacency(g) -> list[list[int]]:
    if isinstance(g, BipartiteGraph):
        return g.adjacency_lists()
    return [list(nb) for nb in g]


def is_balanced_separator(g, sep: Iterable[int]) -> bool:
    """No component of ``g - sep`` has more than half of all vertices."""
    adj = _as_adjacency(g)
    masks = _neighbor_masks(adj)
    alive = (1 << len(adj)) - 1
    for s in sep:
        alive &= ~(1 << s)
    return 2 * _largest_component(masks, alive) <= len(adj)


DEFAULT_SEPARATOR_BUDGET = 5_000_000


def _balanced_of_size(masks, nv, size) -> Optional[tuple[int, ...]]:
    full = (1 << nv) - 1
    for sep in combinations(range(nv), size):
        alive = full
        for s in sep:
            alive ^= 1 << s
        if 2 * _largest_component(masks, alive) <= nv:
            return sep
    return None


def min_balanced_separator_upto(g, s: int, budget: int = DEFAULT_SEPARATOR_BUDGET):
    """Smallest balanced separator of size at most ``s``.

    ``g`` is a :class:`BipartiteGraph` or a list of neighbour lists.  Returns
    ``(separator, components)`` or ``None``.  A component of exactly half the
    vertices still counts as balanced.  Raises :class:`BudgetExceeded` when
    more than ``budget`` subsets would have to be examined.
    """
    adj = _as_adjacency(g)
    nv = len(adj)
    s = min(s, nv)
    cost = sum(comb(nv, t) for t in range(s + 1))
    if cost > budget:
        raise BudgetExceeded(f"separator search needs {cost} subsets, budget {budget}")
    masks = _neighbor_masks(adj)
    # balancedness is monotone under adding vertices, so a smallest separator
    # can be located by growing the size until one appears
    for size in range(s + 1):
        sep = _balanced_of_size(masks, nv, size)
        if sep is not None:
            return frozenset(sep), components(adj, sep)
    return None


def is_k_well_connected(g, k: int, budget: int = DEFAULT_SEPARATOR_BUDGET) -> bool:
    """True iff every balanced separator of ``g`` has more than ``k`` vertices."""
    adj = _as_adjacency(g)
    nv = len(adj)
    if k >= nv:
        return False
    if comb(nv, k) > budget:
        raise BudgetExceeded(f"well-connectedness check needs {comb(nv, k)} subsets, budget {budget}")
    # monotonicity: a balanced separator of size <= k exists iff one of size exactly k does
    return _balanced_of_size(_neighbor_masks(adj), nv, k) is None


def well_connectedness(g, upto: int, budget: int = DEFAULT_SEPARATOR_BUDGET) -> int:
    """Largest ``k <= upto`` for which ``g`` is k-well-connected (0 if none)."""
    best = 0
    for k in range(1, upto + 1):
        if not is_k_well_connected(g, k, budget):
            break
        best = k
    return best


# ---------------------------------------------------------------- cops and robbers

MAX_COPS_VERTICES = 16


def cops_win(adj: Sequence[Sequence[int]] | BipartiteGraph, k: int, max_vertices: int = MAX_COPS_VERTICES) -> bool:
    """Decide whether ``k`` cops catch a visible robber.

    A position is a cop set ``C`` and the robber's component ``R`` of
    ``G - C``.  The cops announce a new set ``C'``; the robber may run inside
    the component of ``G - (C & C')`` holding ``R`` and must end outside
    ``C'``.  Cop-winning positions are computed as a least fixpoint.
    """
    adj = _as_adjacency(adj)
    nv = len(adj)
    if nv > max_vertices:
        raise BudgetExceeded(f"cops_win limited to {max_vertices} vertices")
    if nv == 0:
        return True
    masks = _neighbor_masks(adj)
    full = (1 << nv) - 1
    k = min(k, nv)
    cop_sets = [sum(1 << v for v in c) for t in range(k + 1) for c in combinations(range(nv), t)]
    comps_of = {c: _components(masks, full & ~c) for c in cop_sets}
    positions = [(c, r) for c in cop_sets for r in comps_of[c]]
    won: set[tuple[int, int]] = set()
    # reach[(c, c2)] -> components of G - (c & c2), cached lazily
    stay_comps: dict[int, list[int]] = {}

    def region(c, c2, r):
        keep = c & c2
        if keep not in stay_comps:
            stay_comps[keep] = _components(masks, full & ~keep)
        for comp in stay_comps[keep]:
            if comp & r:
                return comp
        raise AssertionError("robber component vanished")

    changed = True
    while changed:
        changed = False
        for pos in positions:
            if pos in won:
                continue
            c, r = pos
            for c2 in cop_sets:
                reach = region(c, c2, r)
                ok = True
                for r2 in comps_of[c2]:
                    if r2 & reach and (c2, r2) not in won:
                        ok = False
                        break
                if ok:
                    won.add(pos)
                    changed = True
                    break
    return all((0, r) in won for r in comps_of[0])
