"""Exact integer and modular determinants, permanents and matching signs.

Matrices are plain lists of lists of Python ints.  Nothing in this module
touches floating point.
"""

from __future__ import annotations

from itertools import permutations
from math import prod
from typing import Mapping, Sequence

IntMatrix = list[list[int]]

RYSER_CAP = 30


def _square(m: Sequence[Sequence[int]]) -> int:
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ValueError("matrix is not square")
    return n


def det(m: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n = _square(m)
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                # exact division: Bareiss' invariant
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def det_cofactor(m: Sequence[Sequence[int]]) -> int:
    """Laplace expansion along the first row; only for tiny test matrices."""
    n = _square(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        if m[0][j]:
            minor = [row[:j] + row[j + 1:] for row in m[1:]]
            total += (-1) ** j * m[0][j] * det_cofactor(minor)
    return total


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def det_mod(m: Sequence[Sequence[int]], p: int) -> int:
    """``det(m) mod p`` by elimination over the prime field."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    n = _square(m)
    a = [[x % p for x in row] for row in m]
    result = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            result = -result
        result = result * a[k][k] % p
        inv = pow(a[k][k], p - 2, p)
        for i in range(k + 1, n):
            f = a[i][k] * inv % p
            if f:
                rowk = a[k]
                rowi = a[i]
                for j in range(k, n):
                    rowi[j] = (rowi[j] - f * rowk[j]) % p
    return result % p


def permanent_ryser(m: Sequence[Sequence[int]], cap: int = RYSER_CAP) -> int:
    """Permanent by Ryser's inclusion-exclusion over column subsets.

    Subsets are visited in Gray-code order so each step adds or removes a
    single column from the running row sums.
    """
    n = _square(m)
    if n > cap:
        raise ValueError(f"Ryser permanent capped at n={cap}, got n={n}")
    if n == 0:
        return 1
    row_sums = [0] * n
    total = 0
    in_set = [False] * n
    size = 0
    gray = 0
    for step in range(1, 1 << n):
        new_gray = step ^ (step >> 1)
        j = (gray ^ new_gray).bit_length() - 1
        gray = new_gray
        if in_set[j]:
            in_set[j] = False
            size -= 1
            for i in range(n):
                row_sums[i] -= m[i][j]
        else:
            in_set[j] = True
            size += 1
            for i in range(n):
                row_sums[i] += m[i][j]
        p = prod(row_sums)
        if p:
            total += -p if (n - size) & 1 else p
    return total


def permanent_bruteforce(m: Sequence[Sequence[int]]) -> int:
    n = _square(m)
    return sum(prod(m[i][s[i]] for i in range(n)) for s in permutations(range(n)))


def permanent(m: Sequence[Sequence[int]]) -> int:
    """Permanent with the cheaper of Ryser and matching-count DP.

    The DP path only applies to 0/1 matrices, where the permanent counts
    perfect matchings; its cost tracks the number of reachable frontier
    states, which stays small for sparse structured matrices.
    """
    n = _square(m)
    zero_one = all(x in (0, 1) for row in m for x in row)
    if zero_one and n > 0:
        density = sum(map(sum, m)) / (n * n)
        if n > 20 or density <= 0.6:
            from .graphs import BipartiteGraph, _count_dp

            edges = [(i, j) for i in range(n) for j in range(n) if m[i][j]]
            return _count_dp(BipartiteGraph.from_edges(n, n, edges))
    return permanent_ryser(m)


def perm_sign(p: Sequence[int]) -> int:
    """Sign of a permutation of ``range(len(p))`` via its cycle count."""
    n = len(p)
    seen = [False] * n
    parity = 0
    for i in range(n):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        parity ^= (length - 1) & 1
    return -1 if parity else 1


def matching_sign(mu: Mapping[int, int], row_of: Mapping[int, int], col_of: Mapping[int, int]) -> int:
    """Sign of the permutation ``i -> col_of[mu[x]]`` where ``row_of[x] = i``.

    ``mu`` maps left vertices to right vertices; ``row_of`` and ``col_of``
    are the row and column numberings of the two sides.
    """
    n = len(row_of)
    if len(mu) != n or len(set(mu.values())) != n:
        raise ValueError("matching is not perfect")
    perm = [0] * n
    for x, y in mu.items():
        perm[row_of[x]] = col_of[y]
    return perm_sign(perm)


def two_adic_valuation(x: int) -> int:
    if x == 0:
        raise ValueError("valuation of zero is infinite")
    x = abs(x)
    return (x & -x).bit_length() - 1


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def swap_columns(m: Sequence[Sequence[int]], a: int, b: int) -> IntMatrix:
    out = [list(row) for row in m]
    for row in out:
        row[a], row[b] = row[b], row[a]
    return out


def dumps(m: Sequence[Sequence[int]]) -> str:
    """Whitespace-separated text: ``rows cols`` header, then one row per line."""
    cols = len(m[0]) if m else 0
    lines = [f"{len(m)} {cols}"]
    lines += [" ".join(str(x) for x in row) for row in m]
    return "\n".join(lines) + "\n"


def loads(text: str) -> IntMatrix:
    """Parse the whitespace format, or the compact 0/1 format of :mod:`symdet.gf2`."""
    lines = [ln.split() for ln in text.strip().splitlines()]
    nrows, ncols = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != nrows:
        raise ValueError(f"header says {nrows} rows, found {len(body)}")
    out = []
    for toks in body:
        if len(toks) == 1 and len(toks[0]) == ncols and ncols > 1 and set(toks[0]) <= {"0", "1"}:
            row = [int(c) for c in toks[0]]
        else:
            row = [int(t) for t in toks]
        if len(row) != ncols:
            raise ValueError("row length does not match header")
        out.append(row)
    return out


__all__ = [
    "det",
    "det_cofactor",
    "det_mod",
    "permanent",
    "permanent_ryser",
    "permanent_bruteforce",
    "perm_sign",
    "matching_sign",
    "two_adic_valuation",
]
