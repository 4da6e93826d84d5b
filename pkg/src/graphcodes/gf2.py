"""Linear algebra over GF(2) with rows packed into Python ints.

Bit ``j`` of a packed row is the coefficient of coordinate ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def popcount(x: int) -> int:
    return x.bit_count()


def pack(bits: Iterable[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b & 1:
            out |= 1 << j
    return out


def unpack(word: int, length: int) -> tuple[int, ...]:
    return tuple((word >> j) & 1 for j in range(length))


def support(word: int) -> list[int]:
    out = []
    j = 0
    while word:
        if word & 1:
            out.append(j)
        word >>= 1
        j += 1
    return out


def from_support(indices: Iterable[int]) -> int:
    out = 0
    for j in indices:
        out ^= 1 << j
    return out


def dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


@dataclass(frozen=True)
class BitVector:
    length: int
    word: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("negative length")
        if self.word >> self.length:
            raise ValueError("bits set beyond vector length")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitVector":
        return cls(len(bits), pack(bits))

    @classmethod
    def from_support(cls, length: int, indices: Iterable[int]) -> "BitVector":
        return cls(length, from_support(indices))

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length, 0)

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.length:
            raise IndexError(j)
        return (self.word >> j) & 1

    def __len__(self) -> int:
        return self.length

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._same_length(other)
        return BitVector(self.length, self.word ^ other.word)

    __add__ = __xor__

    def __and__(self, other: "BitVector") -> "BitVector":
        self._same_length(other)
        return BitVector(self.length, self.word & other.word)

    def dot(self, other: "BitVector") -> int:
        self._same_length(other)
        return dot(self.word, other.word)

    def weight(self) -> int:
        return self.word.bit_count()

    def support(self) -> list[int]:
        return support(self.word)

    def bits(self) -> tuple[int, ...]:
        return unpack(self.word, self.length)

    def is_zero(self) -> bool:
        return self.word == 0

    def _same_length(self, other: "BitVector") -> None:
        if self.length != other.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")

    def __repr__(self) -> str:
        return "BitVector(" + "".join(map(str, self.bits())) + ")"


@dataclass(frozen=True)
class BitMatrix:
    """Row-major matrix; each row is a packed int of ``cols`` bits."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise ValueError("row count mismatch")
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits beyond column count")

    @classmethod
    def from_rows(cls, rows: Sequence[int], ncols: int) -> "BitMatrix":
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]], ncols: int | None = None) -> "BitMatrix":
        if ncols is None:
            ncols = len(data[0]) if data else 0
        for row in data:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
        return cls(len(data), ncols, tuple(pack(r) for r in data))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << j for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(ij)
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.ncols, self.rows[i])

    def to_lists(self) -> list[list[int]]:
        return [list(unpack(r, self.ncols)) for r in self.rows]

    def transpose(self) -> "BitMatrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in support(r):
                cols[j] |= 1 << i
        return BitMatrix(self.ncols, self.nrows, tuple(cols))

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def apply(self, x: BitVector | int) -> BitVector:
        """Matrix-vector product ``self @ x``."""
        word = x.word if isinstance(x, BitVector) else x
        if isinstance(x, BitVector) and x.length != self.ncols:
            raise ValueError("dimension mismatch")
        out = 0
        for i, r in enumerate(self.rows):
            if (r & word).bit_count() & 1:
                out |= 1 << i
        return BitVector(self.nrows, out)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            for j in support(r):
                acc ^= other.rows[j]
            out.append(acc)
        return BitMatrix(self.nrows, other.ncols, tuple(out))

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.rows, other.rows)))

    def is_zero(self) -> bool:
        return not any(self.rows)

    def with_rows(self, extra: Sequence[int]) -> "BitMatrix":
        return BitMatrix(self.nrows + len(extra), self.ncols, self.rows + tuple(extra))


def _as_rows(m: BitMatrix | Sequence[int]) -> list[int]:
    return list(m.rows) if isinstance(m, BitMatrix) else list(m)


def echelon(rows: Sequence[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form by column-ordered pivoting.

    Returns the nonzero reduced rows and their pivot columns (lowest set
    bit of each pivot row).
    """
    basis: list[int] = []
    pivots: list[int] = []
    for r in rows:
        for b, pc in zip(basis, pivots):
            if (r >> pc) & 1:
                r ^= b
        if r:
            pc = (r & -r).bit_length() - 1
            for i, b in enumerate(basis):
                if (b >> pc) & 1:
                    basis[i] = b ^ r
            basis.append(r)
            pivots.append(pc)
    order = sorted(range(len(basis)), key=pivots.__getitem__)
    return [basis[i] for i in order], [pivots[i] for i in order]


def rank(m: BitMatrix | Sequence[int]) -> int:
    return len(echelon(_as_rows(m))[0])


def reduce(vec: int, basis: Sequence[int], pivots: Sequence[int]) -> int:
    """Reduce ``vec`` against an echelon basis; zero means it lies in the span."""
    for b, pc in zip(basis, pivots):
        if (vec >> pc) & 1:
            vec ^= b
    return vec


def in_span(vec: int, rows: Sequence[int]) -> bool:
    basis, pivots = echelon(rows)
    return reduce(vec, basis, pivots) == 0


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """Basis of the right null space {x : m x = 0}, one vector per free column."""
    basis, pivots = echelon(m.rows)
    pivot_set = set(pivots)
    out = []
    for free in range(m.ncols):
        if free in pivot_set:
            continue
        x = 1 << free
        for b, pc in zip(basis, pivots):
            if (b >> free) & 1:
                x |= 1 << pc
        out.append(BitVector(m.ncols, x))
    return out


def kernel_words(m: BitMatrix) -> list[int]:
    return [v.word for v in kernel_basis(m)]


def solve(m: BitMatrix, b: BitVector | int) -> BitVector | None:
    """Solve ``m x = b``, returning the solution with every free variable zero.

    Returns None when the system is inconsistent.
    """
    if isinstance(b, BitVector):
        if b.length != m.nrows:
            raise ValueError(f"right-hand side has length {b.length}, matrix has {m.nrows} rows")
        target = b.word
    else:
        target = b
        if target >> m.nrows:
            raise ValueError("right-hand side longer than row count")
    # Eliminate on [m | b] with the b bit stored above the column bits.
    tag = 1 << m.ncols
    aug = [r | (tag if (target >> i) & 1 else 0) for i, r in enumerate(m.rows)]
    mask = tag - 1
    basis: list[int] = []
    pivots: list[int] = []
    for r in aug:
        for bb, pc in zip(basis, pivots):
            if (r >> pc) & 1:
                r ^= bb
        if r & mask:
            pc = ((r & mask) & -(r & mask)).bit_length() - 1
            for i, bb in enumerate(basis):
                if (bb >> pc) & 1:
                    basis[i] = bb ^ r
            basis.append(r)
            pivots.append(pc)
        elif r:
            return None
    x = 0
    for bb, pc in zip(basis, pivots):
        if bb & tag:
            x |= 1 << pc
    return BitVector(m.ncols, x)


def rowspace_complement_basis(rows: Sequence[int], ncols: int) -> list[int]:
    """Unit vectors on the non-pivot columns: coset representatives of F2^n / span(rows)."""
    _, pivots = echelon(rows)
    ps = set(pivots)
    return [1 << j for j in range(ncols) if j not in ps]


def span_words(gens: Sequence[int]) -> list[int]:
    """All 2^k elements of the span of independent ``gens`` in Gray-code order."""
    out = [0]
    cur = 0
    for i in range(1, 1 << len(gens)):
        flip = (i & -i).bit_length() - 1
        cur ^= gens[flip]
        out.append(cur)
    return out
