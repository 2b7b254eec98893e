"""CFI graphs over a 3-regular bipartite base, their matrices and automorphisms.

Base vertices get a single numbering: left vertex ``u`` is ``u`` and right
vertex ``v`` is ``m + v``.  Each base vertex ``w`` with neighbours
``a < b < c`` becomes a ten-vertex gadget:

* inner vertices ``("I", w, S)`` for the even subsets ``S`` of ``{a, b, c}``,
* outer vertices ``("O", w, x, bit)``, a pair for each neighbour ``x``.

``("I", w, S)`` is joined to ``("O", w, x, 1)`` when ``x`` is in ``S`` and to
``("O", w, x, 0)`` otherwise.  A base edge ``{w, x}`` gives the two edges
``("O", w, x, bit) -- ("O", x, w, bit)``.

The X side holds the inner vertices of left gadgets and the outer vertices of
right gadgets; Y holds the rest.  Permutations of ``X + Y`` live on the
two-part domain ``rows`` (= X) and ``cols`` (= Y), indexed by position in
the canonical order, so a permutation of the graph is literally a pair of
row and column permutations of its biadjacency matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

from . import exactalg
from .graphs import BipartiteGraph, biadjacency, enumerate_perfect_matchings, two_factors
from .permgroup import Domain, Permutation, alt_x_alt, matrix_domain


Vertex = tuple


def _even_subsets(nbrs: Sequence[int]) -> list[frozenset[int]]:
    return [frozenset()] + [frozenset(p) for p in combinations(nbrs, 2)]


def _label(v: Vertex) -> str:
    if v[0] == "I":
        inside = ",".join(str(x) for x in sorted(v[2]))
        return f"I{v[1]}{{{inside}}}"
    return f"O{v[1]}:{v[2]}:{v[3]}"


@dataclass
class CfiGraph:
    base: BipartiteGraph
    m: int
    graph: BipartiteGraph
    x_vertices: list[Vertex]
    y_vertices: list[Vertex]
    nbrs: list[tuple[int, ...]]
    x_index: dict = field(repr=False)
    y_index: dict = field(repr=False)

    @property
    def n(self) -> int:
        return 10 * self.m

    @property
    def domain(self) -> Domain:
        return matrix_domain(self.n, self.n)

    def is_left(self, w: int) -> bool:
        return w < self.m

    def point(self, v: Vertex) -> int:
        """Domain index of a labelled vertex (X first, then Y)."""
        if v in self.x_index:
            return self.x_index[v]
        return self.n + self.y_index[v]

    def vertex(self, p: int) -> Vertex:
        return self.x_vertices[p] if p < self.n else self.y_vertices[p - self.n]

    def gadget_of(self, p: int) -> int:
        return self.vertex(p)[1]

    @cached_property
    def _edge_codes(self) -> tuple[tuple[tuple[int, int], ...], frozenset[int]]:
        # edges as (x, n + y) point pairs, and the set of codes x * 2n + (n + y)
        n = self.n
        pairs = tuple((x, n + y) for x, y in self.graph.edges)
        return pairs, frozenset(a * 2 * n + b for a, b in pairs)

    @cached_property
    def _classes(self) -> tuple:
        # (kind, gadget) per point: coherent maps preserve it
        return tuple(v[:2] for v in self.x_vertices + self.y_vertices)

    def inner(self, w: int) -> list[int]:
        return [self.point(("I", w, s)) for s in _even_subsets(self.nbrs[w])]

    def outer(self, w: int) -> list[int]:
        return [self.point(("O", w, x, b)) for x in self.nbrs[w] for b in (0, 1)]

    def pair(self, w: int, x: int) -> tuple[int, int]:
        """The outer pair ``(x_0, x_1)`` of gadget ``w`` facing neighbour ``x``."""
        return self.point(("O", w, x, 0)), self.point(("O", w, x, 1))

    def edge_pair(self, w: int, x: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """``(e_0, e_1)`` for base edge ``{w, x}``, each as ``(X index, Y index)``."""
        out = []
        for b in (0, 1):
            p, q = self.point(("O", w, x, b)), self.point(("O", x, w, b))
            if p > q:
                p, q = q, p
            out.append((p, q - self.n))
        return out[0], out[1]

    def base_edges(self) -> list[tuple[int, int]]:
        """Base edges in the combined numbering, ``(left, right)``, sorted."""
        return sorted((u, self.m + v) for u, v in self.base.edges)

    def base_adjacency(self) -> list[list[int]]:
        return [list(nb) for nb in self.nbrs]

    def swap_pair(self) -> tuple[int, int]:
        """Outer pair of the lowest left gadget facing its lowest neighbour (in Y)."""
        return self.pair(0, self.nbrs[0][0])

    def edge_points(self) -> list[tuple[int, int]]:
        """Graph edges as domain index pairs ``(x, n + y)``."""
        return [(x, self.n + y) for x, y in self.graph.edges]

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "m": self.m,
            "graph": self.graph.to_json(),
        }


def build_cfi(base: BipartiteGraph) -> CfiGraph:
    if base.left != base.right or not base.is_regular(3):
        raise ValueError("CFI construction needs a 3-regular bipartite base with equal sides")
    m = base.left
    nbrs = []
    for u in range(m):
        nbrs.append(tuple(sorted(m + v for v in base.left_neighbors(u))))
    for v in range(m):
        nbrs.append(tuple(sorted(base.right_neighbors(v))))
    xs: list[Vertex] = []
    ys: list[Vertex] = []
    for w in range(2 * m):
        inner = [("I", w, s) for s in _even_subsets(nbrs[w])]
        outer = [("O", w, x, b) for x in nbrs[w] for b in (0, 1)]
        if w < m:
            xs += inner
            ys += outer
        else:
            ys += inner
            xs += outer
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    edges = []
    for w in range(2 * m):
        for s in _even_subsets(nbrs[w]):
            iv = ("I", w, s)
            for x in nbrs[w]:
                ov = ("O", w, x, 1 if x in s else 0)
                if w < m:
                    edges.append((x_index[iv], y_index[ov]))
                else:
                    edges.append((x_index[ov], y_index[iv]))
    for u, v in base.edges:
        for b in (0, 1):
            edges.append((x_index[("O", m + v, u, b)], y_index[("O", u, m + v, b)]))
    graph = BipartiteGraph.from_edges(
        len(xs), len(ys), edges, left_labels=tuple(_label(v) for v in xs), right_labels=tuple(_label(v) for v in ys)
    )
    return CfiGraph(base, m, graph, xs, ys, nbrs, x_index, y_index)


# ---------------------------------------------------------------- matrices

def _check_order(order, size, what):
    if sorted(order) != list(range(size)):
        raise ValueError(f"{what} is not a bijection onto [{size}]")


def matrices_MN(
    c: CfiGraph, eta: Optional[Sequence[int]] = None, eta_prime: Optional[Sequence[int]] = None
) -> tuple[list[list[int]], list[list[int]]]:
    """Biadjacency ``M`` under the row/column orders, and ``N``: ``M`` with the swap pair's columns exchanged.

    ``eta[i]`` is the X vertex (canonical index) placed in row ``i``; likewise
    ``eta_prime`` for columns.  Both default to the canonical order.
    """
    rows = list(range(c.n)) if eta is None else list(eta)
    cols = list(range(c.n)) if eta_prime is None else list(eta_prime)
    _check_order(rows, c.n, "row order")
    _check_order(cols, c.n, "column order")
    m = biadjacency(c.graph, rows, cols)
    y0, y1 = (p - c.n for p in c.swap_pair())
    j0, j1 = cols.index(y0), cols.index(y1)
    return m, exactalg.swap_columns(m, j0, j1)


# ---------------------------------------------------------------- automorphisms

def is_automorphism(c: CfiGraph, p: Permutation) -> bool:
    """Edge-set preservation by a side-preserving permutation of X + Y."""
    img = p.images
    n = c.n
    if any(img[x] >= n for x in range(n)):
        return False
    pairs, codes = c._edge_codes
    w = 2 * n
    return codes.issuperset([img[a] * w + img[b] for a, b in pairs])


def preserves_gadget_edges(c: CfiGraph, p: Permutation, w: int) -> bool:
    pts = set(c.inner(w) + c.outer(w))
    inner = set(c.inner(w))
    internal = set()
    for x, y in c.edge_points():
        if x in pts and y in pts:
            internal.add((x, y))
    if any(p(q) not in pts for q in pts) or any((p(q) in inner) != (q in inner) for q in pts):
        return False
    return all((p(x), p(y)) in internal for x, y in internal)


def gadget_automorphism(c: CfiGraph, v: int, a: int, b: int) -> Permutation:
    """Swap the ``a`` and ``b`` outer pairs of gadget ``v`` and the matching inner vertices."""
    nb = c.nbrs[v]
    if a not in nb or b not in nb or a == b:
        raise ValueError(f"{a} and {b} must be distinct neighbours of {v}")
    (cc,) = [x for x in nb if x not in (a, b)]
    cycles = [c.pair(v, a), c.pair(v, b)]
    cycles.append((c.point(("I", v, frozenset())), c.point(("I", v, frozenset((a, b))))))
    cycles.append((c.point(("I", v, frozenset((a, cc)))), c.point(("I", v, frozenset((b, cc))))))
    return Permutation.from_cycles(c.domain, cycles)


def _check_simple_cycle(c: CfiGraph, cycle: Sequence[int]):
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        raise ValueError("not a simple cycle")
    for i, w in enumerate(cycle):
        if cycle[(i + 1) % len(cycle)] not in c.nbrs[w]:
            raise ValueError(f"{w} and {cycle[(i + 1) % len(cycle)]} are not adjacent")


def cycle_automorphism(c: CfiGraph, cycle: Sequence[int], check: bool = True) -> Permutation:
    """Product of the gadget automorphisms along a simple cycle of the base."""
    _check_simple_cycle(c, cycle)
    out = Permutation.identity(c.domain)
    L = len(cycle)
    for i, w in enumerate(cycle):
        out = out * gadget_automorphism(c, w, cycle[i - 1], cycle[(i + 1) % L])
    if check:
        assert is_automorphism(c, out), "cycle permutation is not an automorphism"
        assert alt_x_alt(c.domain).contains(out), "cycle permutation is not even on both sides"
    return out


def is_coherent(c: CfiGraph, beta: Permutation) -> bool:
    """Every inner set and every outer set is mapped onto itself."""
    cls = c._classes
    return [cls[q] for q in beta.images] == list(cls)


def is_good_bar(c: CfiGraph, beta: Permutation, u: int, v: int) -> bool:
    """``beta`` is coherent and ``beta * (v_0 v_1)`` is an automorphism, with ``(v_0, v_1)`` in ``O_u``."""
    if v not in c.nbrs[u]:
        raise ValueError(f"{{{u}, {v}}} is not a base edge")
    if not (c.is_left(u) and not c.is_left(v)):
        raise ValueError("good bar uv needs u on the left and v on the right")
    if not is_coherent(c, beta):
        return False
    return is_automorphism(c, beta * Permutation.transposition(c.domain, *c.pair(u, v)))


def gadget_pair_automorphisms(c: CfiGraph, w: int) -> dict[frozenset[int], int]:
    """Brute-force the gadget's automorphisms that fix each outer pair setwise.

    Returns, for every set of swapped pairs (named by neighbour), how many
    such automorphisms exist.
    """
    inner = c.inner(w)
    nb = c.nbrs[w]
    counts: dict[frozenset[int], int] = {}
    for flips in range(8):
        swapped = frozenset(nb[i] for i in range(3) if flips >> i & 1)
        cycles = [c.pair(w, x) for x in swapped]
        base = Permutation.from_cycles(c.domain, cycles)
        for perm in permutations(inner):
            img = list(base.images)
            for src, dst in zip(inner, perm):
                img[src] = dst
            p = Permutation(c.domain, tuple(img))
            if preserves_gadget_edges(c, p, w):
                counts[swapped] = counts.get(swapped, 0) + 1
    return counts


# ---------------------------------------------------------------- matchings

@dataclass(frozen=True)
class MatchingClass:
    uniform: bool
    F: Optional[frozenset[tuple[int, int]]]
    f: Optional[tuple[tuple[tuple[int, int], int], ...]]
    doubled: frozenset[tuple[int, int]] = frozenset()


def _edge_pair_lookup(c: CfiGraph) -> dict[tuple[int, int], tuple[tuple[int, int], int]]:
    out = {}
    for e in c.base_edges():
        e0, e1 = c.edge_pair(*e)
        out[e0] = (e, 0)
        out[e1] = (e, 1)
    return out


def classify_matching(c: CfiGraph, mu: dict[int, int], lookup=None) -> MatchingClass:
    if len(mu) != c.n or len(set(mu.values())) != c.n:
        raise ValueError("matching is not perfect")
    if lookup is None:
        lookup = _edge_pair_lookup(c)
    used: dict[tuple[int, int], list[int]] = {}
    for x, y in mu.items():
        hit = lookup.get((x, y))
        if hit is not None:
            used.setdefault(hit[0], []).append(hit[1])
    doubled = frozenset(e for e, bits in used.items() if len(bits) == 2)
    if doubled:
        return MatchingClass(False, None, None, doubled)
    F = frozenset(used)
    f = tuple(sorted((e, bits[0]) for e, bits in used.items()))
    return MatchingClass(True, F, f)


def matching_sign(mu: dict[int, int]) -> int:
    """Sign with the canonical orders, where rows and columns are vertex indices."""
    perm = [0] * len(mu)
    for x, y in mu.items():
        perm[x] = y
    return exactalg.perm_sign(perm)


def _gadget_matchings(c: CfiGraph, w: int, removed: Iterable[int]) -> list[dict[int, int]]:
    """All perfect matchings between ``I_w`` and ``O_w`` minus ``removed``.

    Returned maps go from the X-side vertex to the Y-side vertex, as domain
    indices minus ``n`` for Y.
    """
    n = c.n
    inner = c.inner(w)
    rest = [p for p in c.outer(w) if p not in set(removed)]
    edges = set(c.edge_points())
    out = []
    for perm in permutations(rest):
        pairs = list(zip(inner, perm))
        ok = all(((a, b) if a < n else (b, a)) in edges for a, b in pairs)
        if ok:
            mu = {}
            for a, b in pairs:
                x, y = (a, b) if a < n else (b, a)
                mu[x] = y - n
            out.append(mu)
    return out


def partner_matching(c: CfiGraph, mu: dict[int, int], cls: Optional[MatchingClass] = None) -> dict[int, int]:
    """Sign-reversing partner of a non-uniform matching.

    Take the least left base vertex ``v`` lying on an edge whose two copies
    are both matched; re-match ``I_v`` the other way round.
    """
    if cls is None:
        cls = classify_matching(c, mu)
    if cls.uniform:
        raise ValueError("uniform matchings have no partner")
    v = min(u for e in cls.doubled for u in e if c.is_left(u))
    x = next(b for a, b in sorted(cls.doubled) if a == v)
    options = _gadget_matchings(c, v, c.pair(v, x))
    assert len(options) == 2, "a gadget with one full pair removed must have two matchings"
    current = {p: mu[p] for p in c.inner(v)}
    other = options[1] if options[0] == current else options[0]
    assert current in options
    out = dict(mu)
    out.update(other)
    return out


CENSUS_BUDGET = 2_000_000


@dataclass
class Census:
    total: int
    uniform: int
    non_uniform: int
    signed_total: int
    signed_uniform: int
    signed_non_uniform: int
    buckets: dict  # (F, f) -> [count, set of signs]
    factor_signs: dict  # F -> set of signs
    involution_ok: bool
    involution_pairs: int

    def bucket_sizes(self) -> set[int]:
        return {v[0] for v in self.buckets.values()}

    def summary(self) -> dict:
        return {
            "total": self.total,
            "uniform": self.uniform,
            "non_uniform": self.non_uniform,
            "signed_total": self.signed_total,
            "signed_uniform": self.signed_uniform,
            "signed_non_uniform": self.signed_non_uniform,
            "num_buckets": len(self.buckets),
            "bucket_sizes": sorted(self.bucket_sizes()),
            "num_two_factors": len(self.factor_signs),
            "factor_sign_sets": sorted(sorted(s) for s in self.factor_signs.values()),
            "involution_ok": self.involution_ok,
            "involution_pairs": self.involution_pairs,
        }


def census(c: CfiGraph, budget: int = CENSUS_BUDGET) -> Census:
    """Enumerate every perfect matching and bucket it by its class."""
    lookup = _edge_pair_lookup(c)
    buckets: dict = {}
    factor_signs: dict = {}
    total = uniform = 0
    s_uni = s_non = 0
    pairs = 0
    inv_ok = True
    for mu in enumerate_perfect_matchings(c.graph):
        total += 1
        if total > budget:
            raise RuntimeError(f"census exceeded {budget} matchings")
        sg = matching_sign(mu)
        cls = classify_matching(c, mu, lookup)
        if cls.uniform:
            uniform += 1
            s_uni += sg
            slot = buckets.setdefault((cls.F, cls.f), [0, set()])
            slot[0] += 1
            slot[1].add(sg)
            factor_signs.setdefault(cls.F, set()).add(sg)
        else:
            s_non += sg
            other = partner_matching(c, mu, cls)
            ocls = classify_matching(c, other, lookup)
            back = partner_matching(c, other, ocls)
            if other == mu or back != mu or ocls.uniform or matching_sign(other) != -sg:
                inv_ok = False
            pairs += 1
    return Census(
        total, uniform, total - uniform, s_uni + s_non, s_uni, s_non, buckets, factor_signs, inv_ok, pairs // 2
    )


def uniform_matching(c: CfiGraph, F: Iterable[tuple[int, int]], f=None) -> dict[int, int]:
    """One matching in the class ``(F, f)`` built gadget by gadget (``f`` defaults to all zeros).

    ``F`` holds base edges in the combined numbering.
    """
    F = {tuple(sorted(e)) for e in F}
    bits = {e: 0 for e in F} if f is None else {tuple(sorted(e)): b for e, b in dict(f).items()}
    mu: dict[int, int] = {}
    n = c.n
    for e in sorted(F):
        pair = c.edge_pair(*e)[bits[e]]
        mu[pair[0]] = pair[1]
    for w in range(2 * c.m):
        used = [c.point(("O", w, x, bits[tuple(sorted((w, x)))])) for x in c.nbrs[w] if tuple(sorted((w, x))) in F]
        if len(used) != 2:
            raise ValueError(f"F is not a 2-factor at base vertex {w}")
        options = _gadget_matchings(c, w, used)
        if not options:
            raise AssertionError(f"gadget {w} has no completion")
        mu.update(options[0])
    if len(mu) != n:
        raise AssertionError("assembled matching is not perfect")
    return mu


def base_two_factors(c: CfiGraph) -> list[frozenset[tuple[int, int]]]:
    out = []
    for F in two_factors(c.base):
        out.append(frozenset((u, c.m + v) for u, v in F))
    return sorted(out, key=sorted)


def det_via_two_factors(c: CfiGraph) -> int:
    """``2^(4m)`` times the sum over 2-factors ``F`` of the sign of one matching in class ``(F, 0)``."""
    total = 0
    for F in base_two_factors(c):
        total += matching_sign(uniform_matching(c, F))
    return (1 << (4 * c.m)) * total


# ---------------------------------------------------------------- permanent pair

def build_permanent_pair(base: BipartiteGraph) -> tuple[BipartiteGraph, BipartiteGraph]:
    """Contract each ``e_0`` and ``e_1`` and add an apex per gadget; the second graph twists one edge.

    Left side: contracted edge vertices ``(e, bit)`` then apexes; right side:
    all inner vertices, gadget by gadget.  The twist is at base vertex 0 and
    its lowest neighbour: inside that gadget the ``bit 0`` and ``bit 1``
    connections of the edge are exchanged.
    """
    c = build_cfi(base)
    m = c.m
    edges_b = c.base_edges()
    contracted = [(e, b) for e in edges_b for b in (0, 1)]
    left_index = {v: i for i, v in enumerate(contracted)}
    apex0 = len(contracted)
    inner_list = [("I", w, s) for w in range(2 * m) for s in _even_subsets(c.nbrs[w])]
    right_index = {v: i for i, v in enumerate(inner_list)}
    twist_w, twist_x = 0, c.nbrs[0][0]

    def make(twisted: bool) -> BipartiteGraph:
        edges = []
        for w in range(2 * m):
            for s in _even_subsets(c.nbrs[w]):
                r = right_index[("I", w, s)]
                edges.append((apex0 + w, r))
                for x in c.nbrs[w]:
                    b = 1 if x in s else 0
                    if twisted and w == twist_w and x == twist_x:
                        b ^= 1
                    e = tuple(sorted((w, x)))
                    edges.append((left_index[(e, b)], r))
        labels_l = tuple([f"E{e[0]}-{e[1]}:{b}" for e, b in contracted] + [f"A{w}" for w in range(2 * m)])
        labels_r = tuple(_label(v) for v in inner_list)
        return BipartiteGraph.from_edges(len(labels_l), len(labels_r), edges, left_labels=labels_l, right_labels=labels_r)

    return make(False), make(True)


# ---------------------------------------------------------------- base graph helpers

def large_component(c: CfiGraph, removed: Iterable[int]) -> Optional[frozenset[int]]:
    """The component of the base minus ``removed`` with more than half of all base vertices."""
    removed = set(removed)
    total = 2 * c.m
    seen: set[int] = set()
    for s in range(total):
        if s in removed or s in seen:
            continue
        comp = {s}
        queue = deque([s])
        while queue:
            w = queue.popleft()
            for x in c.nbrs[w]:
                if x not in removed and x not in comp:
                    comp.add(x)
                    queue.append(x)
        seen |= comp
        if 2 * len(comp) > total:
            return frozenset(comp)
    return None


def path_avoiding_edge(c: CfiGraph, u: int, v: int, within: frozenset[int]) -> Optional[list[int]]:
    """Shortest ``u``-``v`` path inside ``within`` that does not use the edge ``{u, v}``."""
    prev = {u: None}
    queue = deque([u])
    while queue:
        w = queue.popleft()
        for x in c.nbrs[w]:
            if x not in within or x in prev:
                continue
            if w == u and x == v:
                continue
            prev[x] = w
            if x == v:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(x)
    return None
