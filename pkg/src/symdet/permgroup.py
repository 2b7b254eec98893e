"""Permutations of structured finite domains, symbolic groups, cosets, supports.

Composition convention, used everywhere in the package::

    (p * q)(x) == p(q(x))

and the bijection coset with base ``alpha`` over ``G`` is
``{g * alpha : g in G}``.

Symmetric and alternating groups are never materialised; membership,
generators and pointwise stabilisers are computed from the set of points
they act on.  Only :class:`Explicit` groups store their elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import factorial
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

from .exactalg import perm_sign

DEFAULT_ELEMENT_BUDGET = 20_000


class GroupBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Domain:
    """Disjoint union of named index sets; points are numbered part by part."""

    parts: tuple[tuple[str, int], ...]
    _offsets: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = [p for p, _ in self.parts]
        if len(set(names)) != len(names):
            raise ValueError("part names must be distinct")
        offsets = {}
        start = 0
        for name, size in self.parts:
            if size < 0:
                raise ValueError("negative part size")
            offsets[name] = (start, size)
            start += size
        object.__setattr__(self, "_offsets", offsets)

    @classmethod
    def single(cls, size: int, name: str = "Y") -> "Domain":
        return cls(((name, size),))

    @property
    def size(self) -> int:
        return sum(s for _, s in self.parts)

    def index(self, part: str, i: int) -> int:
        start, size = self._offsets[part]
        if not 0 <= i < size:
            raise IndexError(f"{part}[{i}] out of range")
        return start + i

    def locate(self, x: int) -> tuple[str, int]:
        for name, (start, size) in self._offsets.items():
            if start <= x < start + size:
                return name, x - start
        raise IndexError(f"point {x} outside domain")

    def part_points(self, part: str) -> range:
        start, size = self._offsets[part]
        return range(start, start + size)

    def part_of(self, x: int) -> str:
        return self.locate(x)[0]

    def to_json(self) -> list:
        return [[n, s] for n, s in self.parts]

    @classmethod
    def from_json(cls, d) -> "Domain":
        return cls(tuple((n, int(s)) for n, s in d))


def matrix_domain(nrows: int, ncols: int) -> Domain:
    return Domain((("rows", nrows), ("cols", ncols)))


@dataclass(frozen=True)
class Permutation:
    domain: Domain
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.domain.size or sorted(self.images) != list(range(self.domain.size)):
            raise ValueError("images do not form a bijection of the domain")

    @classmethod
    def _trusted(cls, domain: Domain, images: tuple[int, ...]) -> "Permutation":
        # skips validation; only for images built from valid permutations
        p = object.__new__(cls)
        object.__setattr__(p, "domain", domain)
        object.__setattr__(p, "images", images)
        return p

    @classmethod
    def identity(cls, domain: Domain) -> "Permutation":
        return cls(domain, tuple(range(domain.size)))

    @classmethod
    def from_cycles(cls, domain: Domain, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = list(range(domain.size))
        touched = set()
        for cyc in cycles:
            for a in cyc:
                if a in touched:
                    raise ValueError("cycles are not disjoint")
                touched.add(a)
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a] = b
        return cls(domain, tuple(img))

    @classmethod
    def transposition(cls, domain: Domain, a: int, b: int) -> "Permutation":
        return cls.from_cycles(domain, [(a, b)])

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.domain != self.domain:
            raise ValueError("domain mismatch")
        img = self.images
        return Permutation._trusted(self.domain, tuple([img[y] for y in other.images]))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation._trusted(self.domain, tuple(inv))

    def __pow__(self, k: int) -> "Permutation":
        out = Permutation.identity(self.domain)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.images))

    def moved_points(self) -> frozenset[int]:
        return frozenset(x for x, y in enumerate(self.images) if x != y)

    def sign(self) -> int:
        return perm_sign(self.images)

    def preserves_parts(self) -> bool:
        d = self.domain
        return all(d.part_of(x) == d.part_of(y) for x, y in enumerate(self.images) if x != y)

    def restrict(self, points: Iterable[int]) -> "Permutation":
        """The permutation agreeing with ``self`` on ``points`` (assumed invariant) and fixing the rest."""
        img = list(range(self.domain.size))
        for x in points:
            img[x] = self.images[x]
        return Permutation(self.domain, tuple(img))

    def part_signs(self) -> dict[str, int]:
        if not self.preserves_parts():
            raise ValueError("permutation mixes parts")
        out = {}
        for name, _ in self.domain.parts:
            pts = self.domain.part_points(name)
            out[name] = perm_sign([y - pts.start for y in self.images[pts.start:pts.stop]])
        return out

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for x in range(len(self.images)):
            if x in seen or self.images[x] == x:
                continue
            cyc = [x]
            seen.add(x)
            y = self.images[x]
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = self.images[y]
            out.append(tuple(cyc))
        return out

    def to_json(self) -> dict:
        """Per-part image arrays of ``[part, index]`` targets."""
        d = self.domain
        images = {}
        for name, _ in d.parts:
            images[name] = [list(d.locate(self.images[x])) for x in d.part_points(name)]
        return {"domain": d.to_json(), "images": images}

    @classmethod
    def from_json(cls, obj: dict) -> "Permutation":
        d = Domain.from_json(obj["domain"])
        img = [0] * d.size
        for name, _ in d.parts:
            for x, (p, i) in zip(d.part_points(name), obj["images"][name]):
                img[x] = d.index(p, i)
        return cls(d, tuple(img))


def _block_sign(img, lo: int, hi: int) -> int:
    """Sign of ``img`` restricted to ``[lo, hi)``, assumed to map that block onto itself."""
    seen = bytearray(hi - lo)
    parity = 0
    for i in range(lo, hi):
        if seen[i - lo]:
            continue
        j = i
        while not seen[j - lo]:
            seen[j - lo] = 1
            j = img[j]
            parity ^= 1
        parity ^= 1
    return -1 if parity else 1


def sign(p: Permutation) -> int:
    return p.sign()


# ---------------------------------------------------------------- groups

class PermGroup:
    """A permutation group on ``domain`` described symbolically."""

    domain: Domain

    def contains(self, p: Permutation) -> bool:
        raise NotImplementedError

    def generators(self) -> list[Permutation]:
        raise NotImplementedError

    def stabilizer(self, points: Iterable[int]) -> "PermGroup":
        raise NotImplementedError

    def order(self) -> int:
        raise NotImplementedError

    def region(self) -> frozenset[int]:
        """Points the group is allowed to move."""
        raise NotImplementedError

    def can_be_odd(self) -> bool:
        return any(g.sign() == -1 for g in self.generators())

    def elements(self, budget: int = DEFAULT_ELEMENT_BUDGET) -> list[Permutation]:
        return closure(self.domain, self.generators(), budget)

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check(self, p: Permutation):
        if p.domain != self.domain:
            raise ValueError("permutation and group live on different domains")


@dataclass(frozen=True)
class Trivial(PermGroup):
    domain: Domain

    def contains(self, p):
        self._check(p)
        return p.is_identity()

    def generators(self):
        return []

    def stabilizer(self, points):
        return self

    def order(self):
        return 1

    def region(self):
        return frozenset()

    def to_json(self):
        return {"type": "trivial", "domain": self.domain.to_json()}


@dataclass(frozen=True)
class Sym(PermGroup):
    """All permutations of ``points`` (fixing everything else)."""

    domain: Domain
    points: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "points", frozenset(self.points))

    @classmethod
    def on_parts(cls, domain: Domain, *parts: str) -> "Sym":
        return cls(domain, frozenset(x for p in parts for x in domain.part_points(p)))

    def contains(self, p):
        self._check(p)
        return p.moved_points() <= self.points

    def generators(self):
        pts = sorted(self.points)
        if len(pts) < 2:
            return []
        gens = [Permutation.transposition(self.domain, pts[0], pts[1])]
        if len(pts) > 2:
            gens.append(Permutation.from_cycles(self.domain, [pts]))
        return gens

    def stabilizer(self, points):
        return Sym(self.domain, self.points - frozenset(points))

    def order(self):
        return factorial(len(self.points))

    def region(self):
        return self.points

    def can_be_odd(self):
        return len(self.points) >= 2

    def to_json(self):
        return {"type": "sym", "domain": self.domain.to_json(), "points": sorted(self.points)}


@dataclass(frozen=True)
class Alt(PermGroup):
    """Even permutations of ``points``."""

    domain: Domain
    points: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "points", frozenset(self.points))

    @classmethod
    def on_parts(cls, domain: Domain, *parts: str) -> "Alt":
        return cls(domain, frozenset(x for p in parts for x in domain.part_points(p)))

    def contains(self, p):
        self._check(p)
        return p.moved_points() <= self.points and p.sign() == 1

    def generators(self):
        pts = sorted(self.points)
        return [Permutation.from_cycles(self.domain, [(pts[0], pts[1], c)]) for c in pts[2:]]

    def stabilizer(self, points):
        return Alt(self.domain, self.points - frozenset(points))

    def order(self):
        r = len(self.points)
        return factorial(r) // 2 if r >= 2 else 1

    def region(self):
        return self.points

    def can_be_odd(self):
        return False

    def to_json(self):
        return {"type": "alt", "domain": self.domain.to_json(), "points": sorted(self.points)}


@dataclass(frozen=True)
class Product(PermGroup):
    """Direct product of groups on disjoint regions.

    With ``equal_signs`` only tuples whose components all have the same sign
    are kept; over two symmetric factors this is ``{(s, t) : sgn s = sgn t}``.
    """

    domain: Domain
    factors: tuple[PermGroup, ...]
    equal_signs: bool = False

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        seen: set[int] = set()
        for f in self.factors:
            if f.domain != self.domain:
                raise ValueError("factor on a different domain")
            r = f.region()
            if seen & r:
                raise ValueError("product factors overlap")
            seen |= r

    def region(self):
        out: frozenset[int] = frozenset()
        for f in self.factors:
            out |= f.region()
        return out

    def _components(self, p):
        comps = []
        for f in self.factors:
            r = f.region()
            if any(p(x) not in r for x in r):
                return None
            comps.append(p.restrict(r))
        return comps

    @cached_property
    def _interval_layout(self) -> Optional[list[tuple[int, int, bool]]]:
        # (start, stop, must_be_even) when every factor is Sym/Alt on a contiguous block
        out = []
        for f in self.factors:
            if type(f) not in (Sym, Alt) or not f.points:
                return None
            lo, hi = min(f.points), max(f.points) + 1
            if hi - lo != len(f.points):
                return None
            out.append((lo, hi, type(f) is Alt))
        return sorted(out)

    def _contains_fast(self, layout, p) -> bool:
        img = p.images
        pos = 0
        signs = set()
        for lo, hi, even in layout:
            if any(img[x] != x for x in range(pos, lo)):
                return False
            block = img[lo:hi]
            if min(block) < lo or max(block) >= hi:
                return False
            s = _block_sign(img, lo, hi)
            if even and s == -1:
                return False
            signs.add(s)
            pos = hi
        if any(img[x] != x for x in range(pos, len(img))):
            return False
        return not self.equal_signs or len(signs) <= 1

    def contains(self, p):
        self._check(p)
        layout = self._interval_layout
        if layout is not None:
            return self._contains_fast(layout, p)
        if not p.moved_points() <= self.region():
            return False
        comps = self._components(p)
        if comps is None:
            return False
        if not all(f.contains(c) for f, c in zip(self.factors, comps)):
            return False
        if self.equal_signs:
            return len({c.sign() for c in comps}) <= 1
        return True

    def generators(self):
        if not self.equal_signs:
            return [g for f in self.factors for g in f.generators()]
        gens = []
        odd_parts = []
        for f in self.factors:
            gens += [g for g in even_subgroup(f).generators()]
            odd_parts.append(f.can_be_odd())
        if self.factors and all(odd_parts):
            twist = Permutation.identity(self.domain)
            for f in self.factors:
                twist = twist * next(g for g in f.generators() if g.sign() == -1)
            gens.append(twist)
        return gens

    def stabilizer(self, points):
        return Product(self.domain, tuple(f.stabilizer(points) for f in self.factors), self.equal_signs)

    def order(self):
        if not self.equal_signs:
            out = 1
            for f in self.factors:
                out *= f.order()
            return out
        out = 1
        for f in self.factors:
            out *= even_subgroup(f).order()
        if self.factors and all(f.can_be_odd() for f in self.factors):
            out *= 2
        return out

    def can_be_odd(self):
        return any(g.sign() == -1 for g in self.generators())

    def to_json(self):
        return {
            "type": "product",
            "domain": self.domain.to_json(),
            "factors": [f.to_json() for f in self.factors],
            "equal_signs": self.equal_signs,
        }


def even_subgroup(g: PermGroup) -> PermGroup:
    if isinstance(g, Sym):
        return Alt(g.domain, g.points)
    if isinstance(g, (Alt, Trivial)):
        return g
    if isinstance(g, Explicit):
        return Explicit(g.domain, frozenset(p for p in g.members if p.sign() == 1))
    raise TypeError(f"no symbolic even subgroup for {type(g).__name__}")


@dataclass(frozen=True)
class Explicit(PermGroup):
    """A group given by its full element list (validated on construction)."""

    domain: Domain
    members: frozenset[Permutation]
    validate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.validate:
            return
        if Permutation.identity(self.domain) not in self.members:
            raise ValueError("explicit group lacks the identity")
        for p in self.members:
            if p.domain != self.domain:
                raise ValueError("element on a different domain")
            if p.inverse() not in self.members:
                raise ValueError("explicit group not closed under inverse")
        for p in self.members:
            for q in self.members:
                if p * q not in self.members:
                    raise ValueError("explicit group not closed under composition")

    @classmethod
    def generated_by(cls, domain: Domain, gens: Sequence[Permutation], budget: int = DEFAULT_ELEMENT_BUDGET):
        return cls(domain, frozenset(closure(domain, gens, budget)), validate=False)

    def contains(self, p):
        self._check(p)
        return p in self.members

    def generators(self):
        return sorted((p for p in self.members if not p.is_identity()), key=lambda p: p.images)

    def elements(self, budget=DEFAULT_ELEMENT_BUDGET):
        if len(self.members) > budget:
            raise GroupBudgetExceeded(f"group has {len(self.members)} elements, budget {budget}")
        return sorted(self.members, key=lambda p: p.images)

    def stabilizer(self, points):
        pts = list(points)
        return Explicit(self.domain, frozenset(p for p in self.members if all(p(x) == x for x in pts)), validate=False)

    def order(self):
        return len(self.members)

    def region(self):
        out: set[int] = set()
        for p in self.members:
            out |= p.moved_points()
        return frozenset(out)

    def to_json(self):
        return {
            "type": "explicit",
            "domain": self.domain.to_json(),
            "elements": [list(p.images) for p in self.elements()],
        }


def group_from_json(obj: dict) -> PermGroup:
    d = Domain.from_json(obj["domain"])
    t = obj["type"]
    if t == "trivial":
        return Trivial(d)
    if t == "sym":
        return Sym(d, frozenset(obj["points"]))
    if t == "alt":
        return Alt(d, frozenset(obj["points"]))
    if t == "product":
        return Product(d, tuple(group_from_json(f) for f in obj["factors"]), bool(obj.get("equal_signs", False)))
    if t == "explicit":
        return Explicit(d, frozenset(Permutation(d, tuple(e)) for e in obj["elements"]))
    raise ValueError(f"unknown group type {t!r}")


def sym_x_sym(domain: Domain) -> Product:
    return Product(domain, tuple(Sym.on_parts(domain, name) for name, _ in domain.parts))


def alt_x_alt(domain: Domain) -> Product:
    return Product(domain, tuple(Alt.on_parts(domain, name) for name, _ in domain.parts))


def equal_sign_product(domain: Domain) -> Product:
    """``{(s, t) : sgn s = sgn t}`` on a two-part domain (the determinant's symmetry group)."""
    return Product(domain, tuple(Sym.on_parts(domain, name) for name, _ in domain.parts), equal_signs=True)


def membership(g: PermGroup, p: Permutation) -> bool:
    return g.contains(p)


def closure(domain: Domain, gens: Sequence[Permutation], budget: int = DEFAULT_ELEMENT_BUDGET) -> list[Permutation]:
    """All products of ``gens``, by breadth-first search from the identity."""
    ident = Permutation.identity(domain)
    seen = {ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = g * p
                if q not in seen:
                    seen.add(q)
                    order.append(q)
                    nxt.append(q)
                    if len(seen) > budget:
                        raise GroupBudgetExceeded(f"group exceeds {budget} elements")
        frontier = nxt
    return order


# ---------------------------------------------------------------- cosets

@dataclass(frozen=True)
class BijectionCoset:
    """``T(G, alpha) = {g * alpha : g in G}``."""

    base: Permutation
    group: PermGroup

    def contains(self, beta: Permutation) -> bool:
        if beta.domain != self.base.domain:
            raise ValueError("domain mismatch")
        return self.group.contains(beta * self.base.inverse())

    def elements(self, budget: int = DEFAULT_ELEMENT_BUDGET) -> list[Permutation]:
        return [g * self.base for g in self.group.elements(budget)]


def coset_membership(t: BijectionCoset, beta: Permutation) -> bool:
    return t.contains(beta)


# ---------------------------------------------------------------- actions

Action = Callable[[Permutation, Any], Any]


def orbit(g: PermGroup, x: Hashable, action: Action, budget: int = DEFAULT_ELEMENT_BUDGET) -> set:
    """Orbit of ``x``; closure of ``{x}`` under the generators."""
    gens = g.generators()
    seen = {x}
    frontier = [x]
    while frontier:
        nxt = []
        for y in frontier:
            for s in gens:
                z = action(s, y)
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
                    if len(seen) > budget:
                        raise GroupBudgetExceeded(f"orbit exceeds {budget} points")
        frontier = nxt
    return seen


def point_action(p: Permutation, x: int) -> int:
    return p(x)


def matrix_action(p: Permutation, cell: tuple[int, int]) -> tuple[int, int]:
    """Action on cells of a matrix whose domain is ``rows`` then ``cols``."""
    d = p.domain
    i, j = cell
    part_r, i2 = d.locate(p(d.index("rows", i)))
    part_c, j2 = d.locate(p(d.index("cols", j)))
    if part_r != "rows" or part_c != "cols":
        raise ValueError("permutation does not preserve rows/cols")
    return (i2, j2)


def pointwise_stabilizer(g: PermGroup, points: Iterable[int]) -> PermGroup:
    return g.stabilizer(points)


@dataclass
class IndexedSet:
    """Elements ``X`` acted on by a group ``G`` of permutations of ``Y``."""

    elements: Sequence[Hashable]
    group: PermGroup
    action: Action

    def __post_init__(self):
        if isinstance(self.group, Explicit):
            els = self.group.elements()
            ident = Permutation.identity(self.group.domain)
            sample = list(self.elements)[:16]
            for x in sample:
                if self.action(ident, x) != x:
                    raise ValueError("identity does not act trivially")
            for p in els[:8]:
                for q in els[:8]:
                    for x in sample:
                        if self.action(p * q, x) != self.action(p, self.action(q, x)):
                            raise ValueError("action is not compatible with composition")

    @property
    def domain(self) -> Domain:
        return self.group.domain

    def orbit(self, x):
        return orbit(self.group, x, self.action)

    def fixes(self, x) -> Callable[[Permutation], bool]:
        return lambda p: self.action(p, x) == x


def matrix_indexed_set(nrows: int, ncols: int, group: Optional[PermGroup] = None) -> IndexedSet:
    d = matrix_domain(nrows, ncols)
    g = group if group is not None else alt_x_alt(d)
    return IndexedSet([(i, j) for i in range(nrows) for j in range(ncols)], g, matrix_action)


# ---------------------------------------------------------------- supports

def is_support(g: PermGroup, s: Iterable[int], fixes: Callable[[Permutation], bool]) -> bool:
    """``stab_G(s)`` is contained in the group of permutations satisfying ``fixes``.

    ``fixes`` must describe a subgroup (such as the stabiliser of an
    element), so testing the generators of ``stab_G(s)`` suffices.
    """
    return all(fixes(h) for h in g.stabilizer(s).generators())


@dataclass(frozen=True)
class SupportResult:
    support: frozenset[int]
    canonical: bool
    """Minimum size is below half the domain and no other subset of that size is a support."""


DEFAULT_SUPPORT_BUDGET = 200_000


def canonical_support(
    g: PermGroup,
    fixes: Callable[[Permutation], bool],
    points: Optional[Sequence[int]] = None,
    budget: int = DEFAULT_SUPPORT_BUDGET,
    check_unique: bool = False,
) -> SupportResult:
    """Smallest support, searching subsets in (size, lexicographic) order.

    When the minimum size is below half of the ``points`` considered, the
    other subsets of that size are tested too and ``canonical`` reports
    whether the minimum is unique.  Uniqueness is guaranteed when supports
    are taken relative to the full symmetric group, but not for smaller
    ambient groups: in ``Alt_3`` every single point is a support of the
    trivial group.  With ``check_unique`` a second minimum support below half
    the domain raises ``AssertionError``.
    """
    pts = sorted(points) if points is not None else list(range(g.domain.size))
    tried = 0
    for size in range(len(pts) + 1):
        for s in combinations(pts, size):
            tried += 1
            if tried > budget:
                raise GroupBudgetExceeded(f"support search exceeded {budget} subsets")
            if is_support(g, s, fixes):
                if 2 * size >= len(pts):
                    return SupportResult(frozenset(s), False)
                other = next((t for t in combinations(pts, size) if t != s and is_support(g, t, fixes)), None)
                if other is not None and check_unique:
                    raise AssertionError(f"two minimum supports {s} and {other} below half the domain")
                return SupportResult(frozenset(s), other is None)
    raise AssertionError("the full domain is always a support")


def group_supports(g: PermGroup, h_contains: Callable[[Permutation], bool], points: Sequence[int]) -> list[frozenset[int]]:
    """All subsets ``S`` of ``points`` whose pointwise stabiliser in ``g`` lies in ``h``."""
    out = []
    for size in range(len(points) + 1):
        for s in combinations(points, size):
            if is_support(g, s, h_contains):
                out.append(frozenset(s))
    return out
