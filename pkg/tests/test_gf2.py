from itertools import combinations

from hypothesis import given, settings, strategies as st

from symdet import gf2


def span_brute(rows):
    out = {0}
    for r in rows:
        out |= {x ^ r for x in out}
    return out


matrices = st.integers(1, 7).flatmap(
    lambda nc: st.lists(st.integers(0, (1 << nc) - 1), min_size=1, max_size=8).map(
        lambda rows: gf2.GF2Matrix(len(rows), nc, tuple(rows))
    )
)


@given(matrices)
def test_rank_matches_span_size(m):
    size = len(span_brute(m.rows))
    assert 1 << gf2.rank(m) == size


@given(matrices)
def test_left_null_space(m):
    basis = gf2.left_null_space_basis(m)
    assert len(basis) == m.nrows - gf2.rank(m)
    for v in basis:
        assert v != 0
        assert gf2.row_sum(m, gf2.bit_indices(v)) == 0
    # basis vectors are independent
    assert len(span_brute(basis)) == 1 << len(basis)


@given(matrices, st.integers(0, 127))
def test_row_span_membership(m, v):
    v &= (1 << m.ncols) - 1
    assert gf2.in_row_span(m, v) == (v in span_brute(m.rows))


@given(matrices)
def test_zero_sum_set_sums_to_zero(m):
    s = gf2.find_zero_sum_set(m, m.nrows)
    if gf2.rank(m) == m.nrows:
        assert s is None
    else:
        assert s and gf2.row_sum(m, s) == 0


def test_zero_sum_set_prefers_smallest():
    m = gf2.GF2Matrix.from_lists([[1, 1, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert gf2.find_zero_sum_set(m, 4) == frozenset({0, 3})


def test_identity_full_rank_and_roundtrip():
    m = gf2.GF2Matrix.identity(5)
    assert gf2.rank(m) == 5
    assert gf2.loads(gf2.dumps(m)) == m
    assert gf2.dumps(gf2.GF2Matrix.from_lists([[1, 0], [1, 1]])) == "2 2\n10\n11\n"


@settings(max_examples=50)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=70))
def test_pack_unpack(bits):
    assert gf2.unpack_bits(gf2.pack_bits(bits), len(bits)) == bits


def test_ones_rank_one():
    assert gf2.rank(gf2.GF2Matrix.ones(4, 6)) == 1
    # all pairs of rows of the all-ones matrix sum to zero
    m = gf2.GF2Matrix.ones(4, 6)
    for a, b in combinations(range(4), 2):
        assert gf2.row_sum(m, [a, b]) == 0
