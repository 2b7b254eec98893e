"""Circuits over fully symmetric bases: evaluation, automorphisms, orbits and supports.

Gates are stored in a list in topological order (children before parents).
Operations:

``var``    input gate labelled by an element ``x`` of the variable set
``const``  constant
``+ *``    sum and product of the children
``and or`` Boolean, on 0/1 values
``not``    exactly one child
``thr``    1 iff at least ``threshold`` children are non-zero

Children form a set.  Group elements act on variables through an action
function ``(perm, x) -> x``; the default is the matrix-cell action of
:func:`symdet.permgroup.matrix_action`.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from math import prod
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

from .permgroup import (
    DEFAULT_SUPPORT_BUDGET,
    Explicit,
    PermGroup,
    Permutation,
    canonical_support,
    matrix_action,
    matrix_domain,
)

OPS = ("var", "const", "+", "*", "and", "or", "not", "thr")
SYMMETRIC_OPS = ("+", "*", "and", "or", "not", "thr")


@dataclass(frozen=True)
class Gate:
    op: str
    children: tuple[int, ...] = ()
    var: Any = None
    const: Any = None
    threshold: Optional[int] = None
    name: Optional[str] = None

    def signature(self, children=None) -> tuple:
        ch = frozenset(self.children if children is None else children)
        if self.op == "var":
            return ("var", self.var)
        if self.op == "const":
            return ("const", self.const)
        if self.op == "thr":
            return ("thr", self.threshold, ch)
        return (self.op, ch)


class CircuitError(ValueError):
    pass


@dataclass
class Circuit:
    gates: list[Gate]
    output: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, g in enumerate(self.gates):
            if g.op not in OPS:
                raise CircuitError(f"gate {i}: unknown op {g.op!r}")
            if any(not 0 <= c < i for c in g.children):
                raise CircuitError(f"gate {i}: children must precede the gate")
            if len(set(g.children)) != len(g.children):
                raise CircuitError(f"gate {i}: repeated child")
            if g.op in ("var", "const") and g.children:
                raise CircuitError(f"gate {i}: {g.op} gate with children")
            if g.op == "not" and len(g.children) != 1:
                raise CircuitError(f"gate {i}: not needs exactly one child")
            if g.op == "thr" and g.threshold is None:
                raise CircuitError(f"gate {i}: threshold gate without threshold")
        if not 0 <= self.output < len(self.gates):
            raise CircuitError("output out of range")

    def __len__(self):
        return len(self.gates)

    def variables(self) -> dict[Hashable, int]:
        return {g.var: i for i, g in enumerate(self.gates) if g.op == "var"}

    def depth(self) -> int:
        d = [0] * len(self.gates)
        for i, g in enumerate(self.gates):
            if g.children:
                d[i] = 1 + max(d[c] for c in g.children)
        return d[self.output]

    def reachable(self) -> set[int]:
        seen = {self.output}
        stack = [self.output]
        while stack:
            for c in self.gates[stack.pop()].children:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def signature_classes(self) -> dict[tuple, list[int]]:
        out: dict[tuple, list[int]] = {}
        for i, g in enumerate(self.gates):
            out.setdefault(g.signature(), []).append(i)
        return out

    def is_rigid(self) -> bool:
        return all(len(v) == 1 for v in self.signature_classes().values())

    def rigidity_report(self) -> list[list[int]]:
        return [v for v in self.signature_classes().values() if len(v) > 1]

    def to_json(self) -> dict:
        gates = []
        for i, g in enumerate(self.gates):
            d: dict = {"id": i, "op": g.op, "children": list(g.children)}
            if g.op == "var":
                d["var"] = list(g.var) if isinstance(g.var, tuple) else g.var
            if g.op == "const":
                d["const"] = g.const
            if g.threshold is not None:
                d["threshold"] = g.threshold
            if g.name is not None:
                d["name"] = g.name
            gates.append(d)
        return {"gates": gates, "output": self.output, "domain": self.meta.get("domain", {})}

    @classmethod
    def from_json(cls, obj: dict) -> "Circuit":
        ids = [g["id"] for g in obj["gates"]]
        pos = {gid: i for i, gid in enumerate(ids)}
        gates = []
        for g in obj["gates"]:
            var = g.get("var")
            if isinstance(var, list):
                var = tuple(var)
            gates.append(
                Gate(
                    g["op"],
                    tuple(pos[c] for c in g.get("children", [])),
                    var=var,
                    const=g.get("const"),
                    threshold=g.get("threshold"),
                    name=g.get("name"),
                )
            )
        return cls(gates, pos[obj["output"]], {"domain": obj.get("domain", {})})


def dumps(c: Circuit) -> str:
    return json.dumps(c.to_json(), sort_keys=True)


def loads(text: str) -> Circuit:
    return Circuit.from_json(json.loads(text))


class Builder:
    """Hash-consing circuit builder; identical gates are created once."""

    def __init__(self):
        self.gates: list[Gate] = []
        self.index: dict[tuple, int] = {}

    def add(self, gate: Gate) -> int:
        key = gate.signature()
        if key in self.index:
            return self.index[key]
        self.gates.append(gate)
        self.index[key] = len(self.gates) - 1
        return self.index[key]

    def var(self, x, name=None) -> int:
        return self.add(Gate("var", var=x, name=name))

    def const(self, value) -> int:
        return self.add(Gate("const", const=value))

    def op(self, op: str, children: Iterable[int], threshold=None, name=None) -> int:
        ch = tuple(sorted(set(children)))
        if op == "not" and len(ch) != 1:
            raise CircuitError("not needs exactly one child")
        return self.add(Gate(op, ch, threshold=threshold, name=name))

    def build(self, output: int, **meta) -> Circuit:
        return Circuit(list(self.gates), output, dict(meta))


# ---------------------------------------------------------------- evaluation

def _apply(g: Gate, vals: list):
    if g.op == "+":
        return sum(vals)
    if g.op == "*":
        return prod(vals)
    if g.op in ("and", "or", "not"):
        if any(v not in (0, 1, True, False) for v in vals):
            raise TypeError(f"Boolean gate {g.op} got non-Boolean input")
        if g.op == "and":
            return int(all(vals))
        if g.op == "or":
            return int(any(vals))
        return int(not vals[0])
    if g.op == "thr":
        return int(sum(1 for v in vals if v) >= g.threshold)
    raise AssertionError(g.op)


def evaluate_all(c: Circuit, inputs: Callable[[Any], Any] | dict) -> list:
    """Value of every gate; ``inputs`` maps variables to values."""
    get = inputs.__getitem__ if isinstance(inputs, dict) else inputs
    vals: list = [None] * len(c.gates)
    for i, g in enumerate(c.gates):
        if g.op == "var":
            vals[i] = get(g.var)
        elif g.op == "const":
            vals[i] = g.const
        else:
            vals[i] = _apply(g, [vals[ch] for ch in g.children])
    return vals


def evaluate(c: Circuit, inputs) -> Any:
    return evaluate_all(c, inputs)[c.output]


def matrix_inputs(m: Sequence[Sequence[Any]]) -> Callable[[tuple[int, int]], Any]:
    return lambda cell: m[cell[0]][cell[1]]


# ---------------------------------------------------------------- automorphisms

@dataclass(frozen=True)
class Extension:
    status: str  # "unique", "ambiguous" or "none"
    mapping: Optional[tuple[int, ...]] = None
    reason: str = ""

    @property
    def exists(self) -> bool:
        return self.status != "none"


def extend_automorphism(c: Circuit, sigma: Permutation, action: Callable = matrix_action) -> Extension:
    """The gate bijection induced by ``sigma`` on the variables, if any.

    Built bottom-up: the image of a gate is the gate with the transported
    signature.  Gates sharing a signature are matched in index order and the
    result is reported as ambiguous.
    """
    classes = c.signature_classes()
    ambiguous = any(len(v) > 1 for v in classes.values())
    image: list[int] = [-1] * len(c.gates)
    taken: dict[tuple, int] = {}
    for i, g in enumerate(c.gates):
        if g.op == "var":
            try:
                key = ("var", action(sigma, g.var))
            except ValueError as exc:
                return Extension("none", reason=str(exc))
        elif g.op == "const":
            key = g.signature()
        else:
            key = g.signature([image[ch] for ch in g.children])
        targets = classes.get(key)
        if not targets:
            return Extension("none", reason=f"no gate matches the image of gate {i}")
        slot = taken.get(key, 0)
        if slot >= len(targets):
            return Extension("none", reason=f"signature class of gate {i} exhausted")
        image[i] = targets[slot]
        taken[key] = slot + 1
    if len(set(image)) != len(image):
        return Extension("none", reason="induced map is not injective")
    return Extension("ambiguous" if ambiguous else "unique", tuple(image))


def check_symmetric(c: Circuit, g: PermGroup, action: Callable = matrix_action) -> bool:
    """Every generator of ``g`` extends, so every element does."""
    return all(extend_automorphism(c, s, action).exists for s in g.generators())


def _require_rigid(c: Circuit):
    bad = c.rigidity_report()
    if bad:
        raise CircuitError(f"circuit is not rigid; gates sharing a signature: {bad[:3]}")


class ExtensionCache:
    """Memoised extensions of a rigid, symmetric circuit."""

    def __init__(self, c: Circuit, action: Callable = matrix_action):
        _require_rigid(c)
        self.circuit = c
        self.action = action
        self._cache: dict[Permutation, tuple[int, ...]] = {}

    def __call__(self, sigma: Permutation) -> tuple[int, ...]:
        hit = self._cache.get(sigma)
        if hit is None:
            ext = extend_automorphism(self.circuit, sigma, self.action)
            if not ext.exists:
                raise CircuitError(f"permutation does not extend: {ext.reason}")
            hit = ext.mapping
            self._cache[sigma] = hit
        return hit


def gate_orbits(c: Circuit, g: PermGroup, action: Callable = matrix_action, cache: Optional[ExtensionCache] = None) -> list[list[int]]:
    """Orbit partition of the gates, by union-find over generator extensions."""
    ext = cache or ExtensionCache(c, action)
    parent = list(range(len(c.gates)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in g.generators():
        img = ext(s)
        for i, j in enumerate(img):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(c.gates)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def orb_stat(c: Circuit, g: PermGroup, action: Callable = matrix_action) -> int:
    return max(len(o) for o in gate_orbits(c, g, action))


@dataclass
class SupportStats:
    supports: dict[int, frozenset[int]]
    canonical: dict[int, bool]
    sp: int
    orb: int


def gate_support(c: Circuit, g: PermGroup, gate: int, cache: ExtensionCache, budget=DEFAULT_SUPPORT_BUDGET, check_unique=False):
    return canonical_support(g, lambda h: cache(h)[gate] == gate, budget=budget, check_unique=check_unique)


def support_stat(
    c: Circuit,
    g: PermGroup,
    action: Callable = matrix_action,
    budget: int = DEFAULT_SUPPORT_BUDGET,
    check_unique: bool = False,
) -> SupportStats:
    """Minimum supports of every gate, SP (largest of them) and ORB.

    One gate per orbit is searched; the rest are transported along a group
    element, which keeps the supports of an orbit consistent.
    """
    cache = ExtensionCache(c, action)
    orbits = gate_orbits(c, g, action, cache)
    supports: dict[int, frozenset[int]] = {}
    canonical: dict[int, bool] = {}
    for orbit in orbits:
        rep = orbit[0]
        res = gate_support(c, g, rep, cache, budget, check_unique)
        supports[rep] = res.support
        canonical[rep] = res.canonical
        # transport along a BFS over generators
        frontier = [(rep, Permutation.identity(g.domain))]
        while frontier:
            nxt = []
            for h, p in frontier:
                for s in g.generators():
                    q = s * p
                    h2 = cache(s)[h]
                    if h2 not in supports:
                        supports[h2] = frozenset(q(y) for y in res.support)
                        canonical[h2] = res.canonical
                        nxt.append((h2, q))
            frontier = nxt
    return SupportStats(supports, canonical, max(len(s) for s in supports.values()), max(len(o) for o in orbits))


# ---------------------------------------------------------------- Ryser

MAX_RYSER_N = 6


def build_ryser_circuit(n: int) -> Circuit:
    """Permanent of an ``n x n`` matrix by Ryser's formula as a circuit.

    Sum gates ``(S, i)`` add row ``i`` over the column set ``S``; ``P_S`` is
    their product over all rows; ``E`` and ``O`` collect ``P_S`` by the parity
    of ``n - |S|``; the output is ``E + (-1) * O``.
    """
    if not 1 <= n <= MAX_RYSER_N:
        raise ValueError(f"Ryser circuit supported for 1 <= n <= {MAX_RYSER_N}")
    b = Builder()
    xs = {(i, j): b.var((i, j), name=f"x{i}{j}") for i in range(n) for j in range(n)}
    even, odd = [], []
    for mask in range(1, 1 << n):
        cols = [j for j in range(n) if mask >> j & 1]
        label = "".join(map(str, cols))
        sums = [b.op("+", [xs[i, j] for j in cols], name=f"s[{label}][{i}]") for i in range(n)]
        p = b.op("*", sums, name=f"P[{label}]")
        (odd if (n - len(cols)) & 1 else even).append(p)
    e = b.op("+", even, name="E")
    parts = [e]
    if odd:
        o = b.op("+", odd, name="O")
        parts.append(b.op("*", [b.const(-1), o], name="-O"))
    out = b.op("+", parts, name="out") if len(parts) > 1 else e
    return b.build(out, domain={"rows": n, "cols": n})


# ---------------------------------------------------------------- random symmetric circuits

def _orbit_gates(b: Builder, gate_fn, group_elems, base_children, op, threshold=None):
    """Add the gate ``op(children)`` and all its images under ``group_elems``.

    ``gate_fn(perm, gate)`` transports an existing gate index.
    """
    out = set()
    for p in group_elems:
        ch = [gate_fn(p, c) for c in base_children]
        out.add(b.op(op, ch, threshold=threshold))
    return sorted(out)


def random_symmetric_circuit(
    rng: random.Random,
    nrows: int,
    ncols: int,
    group: Explicit,
    layers: int = 2,
    width: int = 2,
    ops: Sequence[str] = ("+", "*"),
) -> Circuit:
    """A random arithmetic circuit on an ``nrows x ncols`` matrix, symmetric under ``group``.

    Every gate is added together with its whole orbit, so the result is
    symmetric; the builder hash-conses, so it is rigid as well.
    """
    elems = group.elements()
    b = Builder()
    for i in range(nrows):
        for j in range(ncols):
            b.var((i, j))
    # transported image of a gate index, memoised per permutation
    images: dict[tuple[Permutation, int], int] = {}

    def transport(p: Permutation, gi: int) -> int:
        key = (p, gi)
        if key in images:
            return images[key]
        g = b.gates[gi]
        if g.op == "var":
            r = b.var(matrix_action(p, g.var))
        elif g.op == "const":
            r = gi
        else:
            r = b.op(g.op, [transport(p, c) for c in g.children], threshold=g.threshold)
        images[key] = r
        return r

    level = sorted(b.index[("var", (i, j))] for i in range(nrows) for j in range(ncols))
    everything = list(level)
    for _ in range(layers):
        new: set[int] = set()
        for _ in range(width):
            k = rng.randint(1, min(3, len(everything)))
            children = rng.sample(everything, k)
            if rng.random() < 0.3:
                children.append(b.const(rng.choice([1, 2])))
            new.update(_orbit_gates(b, transport, elems, children, rng.choice(list(ops))))
        level = sorted(new)
        everything = sorted(set(everything) | new)
    top = b.op(rng.choice(list(ops)), level)
    return b.build(top, domain={"rows": nrows, "cols": ncols})


def variable_gate_support(nrows: int, ncols: int, g: PermGroup, i: int, j: int, check_unique: bool = True):
    """Minimum support of the single-cell function ``x_ij`` under ``g``."""
    d = matrix_domain(nrows, ncols)
    if g.domain != d:
        raise ValueError("group must act on the rows + cols domain")
    return canonical_support(g, lambda p: matrix_action(p, (i, j)) == (i, j), check_unique=check_unique)
