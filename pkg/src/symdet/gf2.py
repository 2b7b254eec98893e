"""Dense linear algebra over GF(2) with rows packed into Python ints.

Bit ``j`` of a row integer is the entry in column ``j``.  Python ints are
arbitrary width, so a row of any length is a single word-parallel bitset and
XOR of two rows is one machine-level operation per 64 columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True)
class GF2Matrix:
    """An immutable ``nrows x ncols`` matrix over GF(2)."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise ValueError(f"expected {self.nrows} rows, got {len(self.rows)}")
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], ncols: Optional[int] = None) -> "GF2Matrix":
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        rows = []
        for line in entries:
            if len(line) != ncols:
                raise ValueError("ragged matrix")
            rows.append(pack_bits(line))
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "GF2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def ones(cls, nrows: int, ncols: int) -> "GF2Matrix":
        return cls(nrows, ncols, tuple((1 << ncols) - 1 for _ in range(nrows)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"entry {ij} outside {self.nrows}x{self.ncols}")
        return (self.rows[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [unpack_bits(r, self.ncols) for r in self.rows]

    def rank(self) -> int:
        return rank(self)


def pack_bits(bits: Iterable[int]) -> int:
    value = 0
    for j, b in enumerate(bits):
        if b & 1:
            value |= 1 << j
    return value


def unpack_bits(value: int, width: int) -> list[int]:
    return [(value >> j) & 1 for j in range(width)]


def _echelon(rows: Sequence[int]) -> dict[int, int]:
    """Reduce ``rows`` to a pivot map ``{pivot bit: row}``.

    Each pivot bit is set in its own stored row and in no other.
    """
    basis: dict[int, int] = {}
    for r in rows:
        for p, b in basis.items():
            if (r >> p) & 1:
                r ^= b
        if r:
            p = (r & -r).bit_length() - 1
            for q in basis:
                if (basis[q] >> p) & 1:
                    basis[q] ^= r
            basis[p] = r
    return basis


def rank(m: GF2Matrix) -> int:
    """Rank over GF(2) by in-place Gaussian elimination."""
    work = list(m.rows)
    r = 0
    for col in range(m.ncols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        pr = work[r]
        for i in range(r + 1, len(work)):
            if work[i] & bit:
                work[i] ^= pr
        r += 1
        if r == len(work):
            break
    return r


def left_null_space_basis(m: GF2Matrix) -> list[int]:
    """Basis of ``{x : x^T M = 0}`` as row-index bitsets.

    The basis is fully reduced, which keeps the vectors sparse: each one owns
    a pivot row index that no other basis vector contains.
    """
    # Augment every row with a tag recording which original rows were summed.
    shift = m.ncols
    work = [r | (1 << (shift + i)) for i, r in enumerate(m.rows)]
    mask = (1 << shift) - 1
    r = 0
    for col in range(m.ncols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        pr = work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= pr
        r += 1
    tags = [w >> shift for w in work[r:] if not (w & mask)]
    reduced = _echelon(tags)
    return [reduced[p] for p in sorted(reduced)]


def bit_indices(value: int) -> list[int]:
    out = []
    while value:
        low = value & -value
        out.append(low.bit_length() - 1)
        value ^= low
    return out


def row_sum(m: GF2Matrix, subset: Iterable[int]) -> int:
    acc = 0
    for i in subset:
        acc ^= m.rows[i]
    return acc


def find_zero_sum_set(m: GF2Matrix, max_size: int, depth: int = 2) -> Optional[frozenset[int]]:
    """Return a non-empty row set summing to zero with at most ``max_size`` rows.

    Candidates are sums of up to ``depth`` null-space basis vectors.  Among
    the admissible candidates the smallest wins, ties broken by the sorted
    tuple of row indices.  Returns ``None`` if no candidate fits.
    """
    basis = left_null_space_basis(m)
    best: Optional[tuple[int, tuple[int, ...]]] = None
    for d in range(1, depth + 1):
        for combo in combinations(basis, d):
            v = 0
            for b in combo:
                v ^= b
            size = v.bit_count()
            if size == 0 or size > max_size:
                continue
            key = (size, tuple(bit_indices(v)))
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return frozenset(best[1])


class RowSpan:
    """Membership oracle for the row span of a fixed matrix."""

    def __init__(self, m: GF2Matrix):
        self.ncols = m.ncols
        self._basis = _echelon(m.rows)

    @property
    def dimension(self) -> int:
        return len(self._basis)

    def __contains__(self, v: int) -> bool:
        for p, b in self._basis.items():
            if (v >> p) & 1:
                v ^= b
        return v == 0


def in_row_span(m: GF2Matrix, v: int | Sequence[int]) -> bool:
    """True iff ``v`` is a GF(2) sum of rows of ``m``."""
    if not isinstance(v, int):
        if len(v) != m.ncols:
            raise ValueError(f"vector has length {len(v)}, matrix has {m.ncols} columns")
        v = pack_bits(v)
    elif v >> m.ncols:
        raise ValueError("vector has bits outside the column range")
    return v in RowSpan(m)


def dumps(m: GF2Matrix) -> str:
    lines = [f"{m.nrows} {m.ncols}"]
    for r in m.rows:
        lines.append("".join(str(b) for b in unpack_bits(r, m.ncols)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> GF2Matrix:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    nrows, ncols = (int(t) for t in lines[0].split())
    body = lines[1:]
    if len(body) != nrows:
        raise ValueError(f"header says {nrows} rows, found {len(body)}")
    entries = []
    for ln in body:
        if len(ln) != ncols or set(ln) - {"0", "1"}:
            raise ValueError(f"bad matrix row {ln!r}")
        entries.append([int(c) for c in ln])
    return GF2Matrix.from_lists(entries, ncols)
