import random

import pytest
from hypothesis import given, settings, strategies as st

from symdet import permgroup as pg
from symdet.permgroup import Domain, Permutation


def rand_perm(d, rng):
    img = list(range(d.size))
    rng.shuffle(img)
    return Permutation(d, tuple(img))


def rand_part_perm(d, rng):
    img = []
    for name, size in d.parts:
        block = list(d.part_points(name))
        rng.shuffle(block)
        img += block
    return Permutation(d, tuple(img))


seeds = st.integers(0, 10**6)


@given(seeds)
def test_composition_convention(seed):
    d = Domain.single(6)
    rng = random.Random(seed)
    p, q = rand_perm(d, rng), rand_perm(d, rng)
    assert all((p * q)(x) == p(q(x)) for x in range(6))
    assert (p * p.inverse()).is_identity()


@given(seeds)
def test_sign_is_homomorphism(seed):
    d = Domain.single(7)
    rng = random.Random(seed)
    p, q = rand_perm(d, rng), rand_perm(d, rng)
    assert (p * q).sign() == p.sign() * q.sign()


@settings(max_examples=50)
@given(seeds)
def test_coset_membership(seed):
    rng = random.Random(seed)
    d = pg.matrix_domain(3, 4)
    g = pg.alt_x_alt(d)
    alpha = rand_part_perm(d, rng)
    t = pg.BijectionCoset(alpha, g)
    gamma = rand_part_perm(d, rng)
    while not g.contains(gamma):
        gamma = rand_part_perm(d, rng)
    assert t.contains(gamma * alpha)
    # Alt x Alt is normal in Sym x Sym, so alpha * gamma lies in the coset too
    assert t.contains(alpha * gamma)
    odd = Permutation.transposition(d, 0, 1)
    assert not t.contains(odd * alpha)


def test_symbolic_orders_match_enumeration():
    d = pg.matrix_domain(3, 3)
    for g, order in ((pg.sym_x_sym(d), 36), (pg.alt_x_alt(d), 9), (pg.equal_sign_product(d), 18), (pg.Trivial(d), 1)):
        els = g.elements()
        assert len(set(els)) == len(els) == order == g.order()
        assert all(g.contains(p) for p in els)


def test_alt4_x_alt4_has_144_elements():
    d = pg.matrix_domain(4, 4)
    assert len(pg.alt_x_alt(d).elements()) == 144


def test_orbits():
    d = Domain.single(3)
    assert pg.orbit(pg.Sym(d, frozenset({0, 1, 2})), 0, pg.point_action) == {0, 1, 2}
    assert pg.orbit(pg.Trivial(d), 1, pg.point_action) == {1}
    m = pg.matrix_domain(3, 3)
    a = pg.Explicit(m, frozenset(pg.alt_x_alt(m).elements()))
    assert pg.orbit(a, (1, 1), pg.matrix_action) == {(i, j) for i in range(3) for j in range(3)}


def test_orbit_sizes_divide_order():
    m = pg.matrix_domain(3, 3)
    g = pg.Explicit(m, frozenset(pg.sym_x_sym(m).elements()))
    for cell in [(0, 0), (2, 1)]:
        assert g.order() % len(pg.orbit(g, cell, pg.matrix_action)) == 0


def test_stabilizers():
    d = Domain.single(5)
    s = pg.pointwise_stabilizer(pg.Sym(d, frozenset(range(5))), [0, 1])
    assert s.order() == 6 and s.region() == frozenset({2, 3, 4})
    a = pg.pointwise_stabilizer(pg.Alt(d, frozenset(range(5))), [0, 1])
    assert a.order() == 3
    assert all(p.sign() == 1 and p(0) == 0 and p(1) == 1 for p in a.elements())
    m = pg.matrix_domain(3, 3)
    e = pg.Explicit(m, frozenset(pg.alt_x_alt(m).elements()))
    assert e.stabilizer([0]).order() == 3


def test_variable_support_alt4():
    d = pg.matrix_domain(4, 4)
    g = pg.Explicit(d, frozenset(pg.alt_x_alt(d).elements()), validate=False)
    for i, j in [(0, 0), (1, 2), (3, 3)]:
        res = pg.canonical_support(g, lambda p: pg.matrix_action(p, (i, j)) == (i, j), check_unique=True)
        assert res.support == frozenset({i, 4 + j}) and res.canonical


def test_support_of_invariant_is_empty():
    d = pg.matrix_domain(3, 3)
    g = pg.sym_x_sym(d)
    assert pg.canonical_support(g, lambda p: True).support == frozenset()


def test_supports_not_unique_under_alt3():
    # every point alone is a support of the trivial subgroup of Alt_3
    d = Domain.single(3)
    g = pg.Alt(d, frozenset(range(3)))
    sups = pg.group_supports(g, lambda p: p.is_identity(), [0, 1, 2])
    assert {frozenset({x}) for x in range(3)} <= set(sups)
    res = pg.canonical_support(g, lambda p: p.is_identity())
    assert not res.canonical
    with pytest.raises(AssertionError):
        pg.canonical_support(g, lambda p: p.is_identity(), check_unique=True)


def test_json_roundtrips():
    d = pg.matrix_domain(2, 3)
    p = Permutation.from_cycles(d, [(0, 1), (2, 3, 4)])
    assert Permutation.from_json(p.to_json()) == p
    assert Domain.from_json(d.to_json()) == d
    for g in (pg.sym_x_sym(d), pg.alt_x_alt(d), pg.Trivial(d), pg.equal_sign_product(d)):
        h = pg.group_from_json(g.to_json())
        assert h == g
    e = pg.Explicit.generated_by(d, [p])
    assert pg.group_from_json(e.to_json()).members == e.members


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation(Domain.single(3), (0, 0, 1))


def test_closure_budget():
    d = Domain.single(8)
    gens = pg.Sym(d, frozenset(range(8))).generators()
    with pytest.raises(pg.GroupBudgetExceeded):
        pg.closure(d, gens, budget=100)
