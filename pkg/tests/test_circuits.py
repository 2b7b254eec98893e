import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from symdet import circuits as cc
from symdet import exactalg
from symdet import permgroup as pg


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ryser_circuit_symmetric_and_correct(n):
    c = cc.build_ryser_circuit(n)
    d = pg.matrix_domain(n, n)
    assert c.is_rigid()
    assert cc.check_symmetric(c, pg.sym_x_sym(d))
    rng = random.Random(n)
    for _ in range(10):
        m = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        assert cc.evaluate(c, cc.matrix_inputs(m)) == exactalg.permanent_ryser(m)


def test_single_variable_not_symmetric():
    b = cc.Builder()
    x = b.var((0, 0))
    b.var((0, 1))
    c = b.build(b.op("+", [x]), domain={"rows": 2, "cols": 2})
    d = pg.matrix_domain(2, 2)
    assert not cc.check_symmetric(c, pg.sym_x_sym(d))
    assert cc.check_symmetric(c, pg.Trivial(d))


def test_extension_unique_on_rigid():
    c = cc.build_ryser_circuit(3)
    d = pg.matrix_domain(3, 3)
    p = pg.Permutation.from_cycles(d, [(0, 1), (3, 5)])
    ext = cc.extend_automorphism(c, p)
    assert ext.status == "unique"
    img = ext.mapping
    m = [[1, 2, 0], [3, 1, 1], [0, 2, 5]]
    # the image circuit on the permuted input computes the same gate values
    vals = cc.evaluate_all(c, cc.matrix_inputs(m))
    q = p.inverse()
    pm = [[m[q(i)][q(3 + j) - 3] for j in range(3)] for i in range(3)]
    pvals = cc.evaluate_all(c, cc.matrix_inputs(pm))
    assert all(pvals[img[g]] == vals[g] for g in range(len(c.gates)))


def test_non_rigid_detected():
    gates = [cc.Gate("var", var=(0, 0)), cc.Gate("+", (0,)), cc.Gate("+", (0,)), cc.Gate("*", (1, 2))]
    c = cc.Circuit(gates, 3, {})
    assert not c.is_rigid()
    assert c.rigidity_report() == [[1, 2]]


def test_validation():
    with pytest.raises(cc.CircuitError):
        cc.Circuit([cc.Gate("+", (1,)), cc.Gate("var", var=(0, 0))], 0, {})
    with pytest.raises(cc.CircuitError):
        cc.Circuit([cc.Gate("var", var=(0, 0)), cc.Gate("not", (0, 0))], 1, {})


def test_json_roundtrip():
    c = cc.build_ryser_circuit(3)
    back = cc.loads(cc.dumps(c))
    assert back.to_json() == c.to_json()
    obj = json.loads(cc.dumps(c))
    assert set(obj) == {"gates", "output", "domain"}


def test_boolean_and_threshold():
    b = cc.Builder()
    xs = [b.var((0, j)) for j in range(3)]
    t = b.op("thr", xs, threshold=2)
    o = b.op("or", [b.op("not", [xs[0]]), t])
    c = b.build(o)
    assert cc.evaluate(c, {(0, 0): 1, (0, 1): 1, (0, 2): 0}) == 1
    assert cc.evaluate(c, {(0, 0): 1, (0, 1): 0, (0, 2): 0}) == 0


def test_supports_and_orbits_ryser3():
    c = cc.build_ryser_circuit(3)
    d = pg.matrix_domain(3, 3)
    st_ = cc.support_stat(c, pg.sym_x_sym(d), check_unique=True)
    assert st_.sp == 2
    assert st_.supports[c.output] == frozenset()
    # x_ij sits in an orbit of all 9 cells
    assert st_.orb == 9
    for g, s in st_.supports.items():
        gate = c.gates[g]
        if gate.op == "var":
            i, j = gate.var
            assert s == frozenset({i, 3 + j})


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6))
def test_random_circuits_symmetric(seed):
    d = pg.matrix_domain(3, 3)
    g = pg.Explicit(d, frozenset(pg.alt_x_alt(d).elements()), validate=False)
    c = cc.random_symmetric_circuit(random.Random(seed), 3, 3, g)
    assert c.is_rigid()
    assert cc.check_symmetric(c, g)
    orbits = cc.gate_orbits(c, g)
    assert sorted(x for o in orbits for x in o) == list(range(len(c.gates)))
    assert all(g.order() % len(o) == 0 for o in orbits)


def test_variable_gate_support_alt4():
    g = pg.Explicit(pg.matrix_domain(4, 4), frozenset(pg.alt_x_alt(pg.matrix_domain(4, 4)).elements()), validate=False)
    res = cc.variable_gate_support(4, 4, g, 2, 3)
    assert res.support == frozenset({2, 7}) and res.canonical
