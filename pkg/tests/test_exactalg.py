import random
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from symdet import exactalg


def det_fraction(m):
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return int(sign * out)


def inversions_sign(p):
    inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inv % 2 else 1


square = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(square)
def test_det_matches_fraction_elimination(m):
    assert exactalg.det(m) == det_fraction(m)


@given(square)
def test_cofactor_agrees(m):
    if len(m) <= 5:
        assert exactalg.det_cofactor(m) == exactalg.det(m)


@given(square)
def test_permanent_routes_agree(m):
    assert exactalg.permanent_ryser(m) == exactalg.permanent_bruteforce(m)


def test_permanent_of_zero_one_uses_matchings():
    rng = random.Random(4)
    for _ in range(30):
        n = rng.randint(1, 7)
        m = [[rng.randint(0, 1) for _ in range(n)] for _ in range(n)]
        assert exactalg.permanent(m) == exactalg.permanent_ryser(m)


@given(st.permutations(list(range(6))))
def test_perm_sign(p):
    assert exactalg.perm_sign(p) == inversions_sign(p)


def test_two_adic_valuation():
    assert exactalg.two_adic_valuation(-196608) == 16
    assert exactalg.two_adic_valuation(3) == 0
    with pytest.raises(ValueError):
        exactalg.two_adic_valuation(0)


@given(square, st.sampled_from([2, 3, 5, 7, 1_000_003]))
def test_det_mod(m, p):
    assert exactalg.det_mod(m, p) == exactalg.det(m) % p


def test_det_mod_rejects_composite():
    with pytest.raises(ValueError):
        exactalg.det_mod([[1]], 4)


def test_swap_columns_negates():
    m = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    assert exactalg.det(exactalg.swap_columns(m, 0, 2)) == -exactalg.det(m)
    assert exactalg.det(exactalg.identity(4)) == 1


def test_text_roundtrip():
    m = [[10, -2], [3, 4]]
    assert exactalg.loads(exactalg.dumps(m)) == m
    assert exactalg.loads("2 3\n101\n011\n") == [[1, 0, 1], [0, 1, 1]]


def test_matching_sign():
    # mu: x0->y1, x1->y0 is a transposition
    assert exactalg.matching_sign({0: 1, 1: 0}, {0: 0, 1: 1}, {0: 0, 1: 1}) == -1
    assert all(
        exactalg.matching_sign(dict(enumerate(p)), {i: i for i in range(4)}, {i: i for i in range(4)}) == inversions_sign(p)
        for p in permutations(range(4))
    )
