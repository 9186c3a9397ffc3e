"""Bit-packed matrices over GF(2) and the triangular factorizations used by the
synthesis code.

Rows are stored as Python integers: bit ``j`` of ``rows[i]`` is entry ``(i, j)``.
Every kernel below works on whole rows at a time (XOR of two ints), so the
cost of a row operation does not grow with the column count until the row no
longer fits in a machine word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DimensionMismatchError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


class NotSymmetricError(ValueError):
    pass


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return popcount(x) & 1


@dataclass(frozen=True)
class BinMatrix:
    """Immutable ``nrows x ncols`` matrix over GF(2)."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise DimensionMismatchError(
                f"expected {self.nrows} rows, got {len(self.rows)}"
            )
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} does not fit in {self.ncols} columns")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> "BinMatrix":
        ncols = nrows if ncols is None else ncols
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Iterable[int], ncols: int) -> "BinMatrix":
        rows = tuple(rows)
        return cls(len(rows), ncols, rows)

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]]) -> "BinMatrix":
        if not data:
            return cls(0, 0, ())
        ncols = len(data[0])
        rows = []
        for line in data:
            if len(line) != ncols:
                raise DimensionMismatchError("ragged row data")
            r = 0
            for j, v in enumerate(line):
                if v not in (0, 1):
                    raise ValueError(f"entry {v!r} is not a bit")
                if v:
                    r |= 1 << j
            rows.append(r)
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def diagonal(cls, bits: Sequence[int]) -> "BinMatrix":
        return cls(len(bits), len(bits), tuple((b & 1) << i for i, b in enumerate(bits)))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["BinMatrix"]]) -> "BinMatrix":
        """Assemble a matrix from a grid of blocks."""
        out: list[int] = []
        ncols = sum(b.ncols for b in blocks[0])
        for brow in blocks:
            height = brow[0].nrows
            if sum(b.ncols for b in brow) != ncols or any(b.nrows != height for b in brow):
                raise DimensionMismatchError("block grid does not line up")
            for i in range(height):
                r, shift = 0, 0
                for b in brow:
                    r |= b.rows[i] << shift
                    shift += b.ncols
                out.append(r)
        return cls(len(out), ncols, tuple(out))

    # -- access -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(ij)
        return (self.rows[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def column(self, j: int) -> int:
        """Column ``j`` packed as an int (bit ``i`` = entry ``(i, j)``)."""
        c = 0
        for i, r in enumerate(self.rows):
            c |= ((r >> j) & 1) << i
        return c

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "BinMatrix":
        out = []
        for i in row_idx:
            r = self.rows[i]
            v = 0
            for k, j in enumerate(col_idx):
                v |= ((r >> j) & 1) << k
            out.append(v)
        return BinMatrix(len(out), len(col_idx), tuple(out))

    def slice(self, r0: int, r1: int, c0: int, c1: int) -> "BinMatrix":
        mask = (1 << (c1 - c0)) - 1
        return BinMatrix(r1 - r0, c1 - c0, tuple((r >> c0) & mask for r in self.rows[r0:r1]))

    def is_zero(self) -> bool:
        return not any(self.rows)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def is_diagonal(self) -> bool:
        return self.is_square() and all(r & ~(1 << i) == 0 for i, r in enumerate(self.rows))

    def is_lower_triangular(self) -> bool:
        return all(r >> (i + 1) == 0 for i, r in enumerate(self.rows))

    def is_upper_triangular(self) -> bool:
        return all(r & ((1 << i) - 1) == 0 for i, r in enumerate(self.rows))

    def is_unitriangular(self, lower: bool = True) -> bool:
        tri = self.is_lower_triangular() if lower else self.is_upper_triangular()
        return self.is_square() and tri and all((r >> i) & 1 for i, r in enumerate(self.rows))

    def diag(self) -> list[int]:
        return [(self.rows[i] >> i) & 1 for i in range(min(self.nrows, self.ncols))]

    # -- arithmetic ----------------------------------------------------------

    @property
    def T(self) -> "BinMatrix":
        return transpose(self)

    def __matmul__(self, other: "BinMatrix") -> "BinMatrix":
        return mul(self, other)

    def __add__(self, other: "BinMatrix") -> "BinMatrix":
        return add(self, other)

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in row) for row in self.to_lists())


def add(a: BinMatrix, b: BinMatrix) -> BinMatrix:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot add {a.shape} and {b.shape}")
    return BinMatrix(a.nrows, a.ncols, tuple(x ^ y for x, y in zip(a.rows, b.rows)))


def mul(a: BinMatrix, b: BinMatrix) -> BinMatrix:
    """Matrix product mod 2."""
    if a.ncols != b.nrows:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    brows = b.rows
    out = []
    for r in a.rows:
        acc = 0
        j = 0
        while r:
            if r & 1:
                acc ^= brows[j]
            r >>= 1
            j += 1
        out.append(acc)
    return BinMatrix(a.nrows, b.ncols, tuple(out))


def mul_vec(a: BinMatrix, x: int) -> int:
    """``a @ x`` for a column vector packed into an int."""
    y = 0
    for i, r in enumerate(a.rows):
        y |= parity(r & x) << i
    return y


def transpose(a: BinMatrix) -> BinMatrix:
    out = [0] * a.ncols
    for i, r in enumerate(a.rows):
        j = 0
        while r:
            if r & 1:
                out[j] |= 1 << i
            r >>= 1
            j += 1
    return BinMatrix(a.ncols, a.nrows, tuple(out))


def rank(m: BinMatrix) -> int:
    rows = [r for r in m.rows if r]
    rk = 0
    while rows:
        pivot = rows.pop()
        if not pivot:
            continue
        rk += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
        rows = [r for r in rows if r]
    return rk


def invert(m: BinMatrix) -> BinMatrix:
    if not m.is_square():
        raise DimensionMismatchError(f"cannot invert non-square {m.shape}")
    n = m.nrows
    aug = [r | (1 << (n + i)) for i, r in enumerate(m.rows)]
    for col in range(n):
        bit = 1 << col
        piv = next((i for i in range(col, n) if aug[i] & bit), None)
        if piv is None:
            raise SingularMatrixError(f"matrix is singular (rank < {n})")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col]
        for i in range(n):
            if i != col and aug[i] & bit:
                aug[i] ^= p
    return BinMatrix(n, n, tuple(r >> n for r in aug))


def is_invertible(m: BinMatrix) -> bool:
    return m.is_square() and rank(m) == m.nrows


def permutation_matrix(perm: Sequence[int]) -> BinMatrix:
    """Matrix with a 1 at ``(i, perm[i])``; left-multiplying picks row ``perm[i]``."""
    return BinMatrix(len(perm), len(perm), tuple(1 << p for p in perm))


def matrix_to_permutation(m: BinMatrix) -> tuple[int, ...]:
    perm = []
    for r in m.rows:
        if popcount(r) != 1:
            raise ValueError("not a permutation matrix")
        perm.append(r.bit_length() - 1)
    if sorted(perm) != list(range(m.ncols)):
        raise ValueError("not a permutation matrix")
    return tuple(perm)


@dataclass(frozen=True)
class PermPattern:
    """A 0/1 matrix with at most one 1 in each row and each column."""

    nrows: int
    ncols: int
    entries: frozenset[tuple[int, int]]

    def __post_init__(self):
        rows = [i for i, _ in self.entries]
        cols = [j for _, j in self.entries]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("permutation pattern needs at most one entry per row and column")
        for i, j in self.entries:
            if not (0 <= i < self.nrows and 0 <= j < self.ncols):
                raise IndexError((i, j))

    @classmethod
    def from_matrix(cls, m: BinMatrix) -> "PermPattern":
        entries = set()
        for i, r in enumerate(m.rows):
            if popcount(r) > 1:
                raise ValueError(f"row {i} has more than one entry")
            if r:
                entries.add((i, r.bit_length() - 1))
        return cls(m.nrows, m.ncols, frozenset(entries))

    @property
    def rank(self) -> int:
        return len(self.entries)

    def to_matrix(self) -> BinMatrix:
        rows = [0] * self.nrows
        for i, j in self.entries:
            rows[i] = 1 << j
        return BinMatrix(self.nrows, self.ncols, tuple(rows))

    def row_map(self) -> dict[int, int]:
        return dict(self.entries)


def _apply_row_op(rows: list[int], src: int, dst: int) -> None:
    rows[dst] ^= rows[src]


def lpu_decompose(m: BinMatrix) -> tuple[BinMatrix, PermPattern, BinMatrix]:
    """Factor a square matrix as ``L @ P @ U``.

    ``L`` is invertible lower triangular, ``U`` invertible upper triangular and
    ``P`` a permutation pattern of the same rank as ``m``. Columns are scanned
    left to right; the pivot is the topmost row holding a 1.
    """
    if not m.is_square():
        raise DimensionMismatchError("lpu_decompose needs a square matrix")
    n = m.nrows
    work = list(m.rows)
    row_ops = list(BinMatrix.identity(n).rows)  # E with E @ m @ F = P
    col_ops = list(BinMatrix.identity(n).rows)
    for j in range(n):
        bit = 1 << j
        piv = next((i for i in range(n) if work[i] & bit), None)
        if piv is None:
            continue
        for i in range(piv + 1, n):
            if work[i] & bit:
                _apply_row_op(work, piv, i)
                _apply_row_op(row_ops, piv, i)
        # column j is now e_piv, so column ops only touch row piv
        rest = work[piv] & ~((bit << 1) - 1)
        if rest:
            work[piv] ^= rest
            for t in range(n):
                if col_ops[t] & bit:
                    col_ops[t] ^= rest
    pattern = PermPattern.from_matrix(BinMatrix(n, n, tuple(work)))
    lower = invert(BinMatrix(n, n, tuple(row_ops)))
    upper = invert(BinMatrix(n, n, tuple(col_ops)))
    return lower, pattern, upper


def lpl_decompose(m: BinMatrix) -> tuple[BinMatrix, PermPattern, BinMatrix]:
    """Factor a square matrix as ``L1 @ P @ L2`` with both outer factors lower
    triangular.

    Elimination starts in the upper right corner and moves down and left: each
    row pivots on its rightmost 1, the pivot column is cleared downwards with
    row operations and the rest of the pivot row leftwards with column
    operations.
    """
    if not m.is_square():
        raise DimensionMismatchError("lpl_decompose needs a square matrix")
    n = m.nrows
    work = list(m.rows)
    row_ops = list(BinMatrix.identity(n).rows)
    col_ops = list(BinMatrix.identity(n).rows)
    for i in range(n):
        r = work[i]
        if not r:
            continue
        j = r.bit_length() - 1
        bit = 1 << j
        for t in range(i + 1, n):
            if work[t] & bit:
                _apply_row_op(work, i, t)
                _apply_row_op(row_ops, i, t)
        rest = work[i] & (bit - 1)
        if rest:
            work[i] ^= rest
            for t in range(n):
                if col_ops[t] & bit:
                    col_ops[t] ^= rest
    pattern = PermPattern.from_matrix(BinMatrix(n, n, tuple(work)))
    l1 = invert(BinMatrix(n, n, tuple(row_ops)))
    l2 = invert(BinMatrix(n, n, tuple(col_ops)))
    return l1, pattern, l2


def symmetric_udu(a: BinMatrix) -> tuple[BinMatrix, BinMatrix]:
    """Write a symmetric matrix as ``U @ U.T + Lambda``.

    ``U`` is upper unitriangular and ``Lambda`` diagonal. Off-diagonal entries
    of ``U`` are solved column by column from the right: for ``i < j``,
    ``U[i,j] = a[i,j] + sum_{k>j} U[i,k] U[j,k]``. The diagonal of ``U U^t`` is
    the row weight parity, and ``Lambda`` absorbs the difference.
    """
    if not a.is_symmetric():
        raise NotSymmetricError("symmetric_udu needs a symmetric matrix")
    n = a.nrows
    u = [1 << i for i in range(n)]
    for j in range(n - 1, -1, -1):
        tail = ~((1 << (j + 1)) - 1)
        uj_tail = u[j] & tail
        for i in range(j):
            bit = a[i, j] ^ parity(u[i] & uj_tail)
            if bit:
                u[i] |= 1 << j
    lam = [a[i, i] ^ parity(u[i]) for i in range(n)]
    return BinMatrix(n, n, tuple(u)), BinMatrix.diagonal(lam)


def symmetric_ldl(a: BinMatrix) -> tuple[BinMatrix, BinMatrix]:
    """Lower-triangular counterpart of :func:`symmetric_udu`: ``a = L L^t + Lambda``.

    Obtained by conjugating with the order-reversing permutation.
    """
    if not a.is_symmetric():
        raise NotSymmetricError("symmetric_ldl needs a symmetric matrix")
    n = a.nrows
    rev = permutation_matrix(list(range(n - 1, -1, -1)))
    u, lam = symmetric_udu(rev @ a @ rev)
    return rev @ u @ rev, rev @ lam @ rev
