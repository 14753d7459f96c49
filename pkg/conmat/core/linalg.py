#!/usr/bin/env python
"""Exact matrices over GF(p), the rationals and the integers.

Row convention throughout: a map V -> W is a dim(V) x dim(W) matrix acting as
x -> x @ M on row vectors.
"""

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
from sympy import isprime

from conmat.core.errors import DimensionMismatch, NotAField, RingMismatch


class RingKind(Enum):
    PRIME_FIELD = "prime-field"
    RATIONALS = "rationals"
    INTEGERS = "integers"


_GF_SPELLING = re.compile(r"^gf(\d+)$")


@dataclass(frozen=True)
class Ring:
    kind: RingKind
    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is RingKind.PRIME_FIELD:
            if self.p is None or not isprime(self.p):
                raise ValueError(f"GF(p) needs a prime p, got {self.p}")
        elif self.p is not None:
            raise ValueError(f"{self.kind.value} takes no characteristic")

    @classmethod
    def gf(cls, p: int) -> "Ring":
        return cls(RingKind.PRIME_FIELD, p)

    @classmethod
    def parse(cls, spelling: str) -> "Ring":
        text = spelling.strip().lower()
        if text in ("rational", "rationals", "q"):
            return cls(RingKind.RATIONALS)
        if text in ("integer", "integers", "z"):
            return cls(RingKind.INTEGERS)
        match = _GF_SPELLING.match(text)
        if match:
            return cls.gf(int(match.group(1)))
        raise ValueError(
            f"unknown ring '{spelling}': expected gf<p>, rational or integer"
        )

    @property
    def is_field(self) -> bool:
        return self.kind is not RingKind.INTEGERS

    @property
    def is_finite(self) -> bool:
        return self.kind is RingKind.PRIME_FIELD

    @property
    def spelling(self) -> str:
        if self.kind is RingKind.PRIME_FIELD:
            return f"gf{self.p}"
        return "rational" if self.kind is RingKind.RATIONALS else "integer"

    def __str__(self) -> str:
        if self.kind is RingKind.PRIME_FIELD:
            return f"GF({self.p})"
        return "Q" if self.kind is RingKind.RATIONALS else "Z"

    def fraction_field(self) -> "Ring":
        return Ring(RingKind.RATIONALS) if self.kind is RingKind.INTEGERS else self

    def elements(self) -> range:
        if not self.is_finite:
            raise NotAField(f"{self} has no finite element list")
        return range(self.p)

    def element(self, value: Any) -> Any:
        """Canonical form of a scalar: residue in [0, p), reduced Fraction or int."""
        if isinstance(value, str):
            value = Fraction(value.strip())
        if self.kind is RingKind.PRIME_FIELD:
            if isinstance(value, Fraction):
                if value.denominator % self.p == 0:
                    raise ValueError(f"{value} has no image in {self}")
                return value.numerator * pow(value.denominator, -1, self.p) % self.p
            return int(value) % self.p
        if self.kind is RingKind.RATIONALS:
            return Fraction(value)
        if isinstance(value, int):
            return value
        value = Fraction(value)
        if value.denominator != 1:
            raise ValueError(f"{value} is not an integer")
        return int(value)

    def inverse(self, value: Any) -> Any:
        if value == 0:
            raise ZeroDivisionError(f"0 is not invertible in {self}")
        if self.kind is RingKind.PRIME_FIELD:
            return pow(int(value), -1, self.p)
        if self.kind is RingKind.RATIONALS:
            return 1 / Fraction(value)
        if value in (1, -1):
            return int(value)
        raise NotAField(f"{value} is not a unit in {self}")


class Matrix:
    """Immutable exact matrix; entries live in a numpy object array."""

    __slots__ = ("ring", "_entries")

    def __init__(self, ring: Ring, entries: np.ndarray) -> None:
        self.ring = ring
        self._entries = entries
        self._entries.flags.writeable = False

    @classmethod
    def from_rows(
        cls, ring: Ring, rows: Sequence[Sequence[Any]], cols: Optional[int] = None
    ) -> "Matrix":
        width = len(rows[0]) if rows else (cols or 0)
        if cols is not None and rows and width != cols:
            raise DimensionMismatch(f"expected {cols} columns, got {width}")
        out = np.empty((len(rows), width), dtype=object)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise DimensionMismatch(f"ragged matrix: row {i} has {len(row)} entries")
            for j, value in enumerate(row):
                out[i, j] = ring.element(value)
        return cls(ring, out)

    @classmethod
    def from_array(cls, ring: Ring, array: np.ndarray) -> "Matrix":
        out = np.empty(array.shape, dtype=object)
        for index in np.ndindex(array.shape):
            out[index] = ring.element(array[index])
        return cls(ring, out)

    @classmethod
    def zeros(cls, ring: Ring, rows: int, cols: int) -> "Matrix":
        out = np.empty((rows, cols), dtype=object)
        out.fill(ring.element(0))
        return cls(ring, out)

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "Matrix":
        out = np.empty((n, n), dtype=object)
        out.fill(ring.element(0))
        for i in range(n):
            out[i, i] = ring.element(1)
        return cls(ring, out)

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> "Matrix":
        return transpose(self)

    def array(self) -> np.ndarray:
        """Writable copy of the entries."""
        return self._entries.copy()

    def tolist(self) -> list[list[Any]]:
        return [list(row) for row in self._entries]

    def entry(self, i: int, j: int) -> Any:
        return self._entries[i, j]

    def row(self, i: int) -> "Matrix":
        return Matrix(self.ring, self._entries[i : i + 1, :].copy())

    def is_zero(self) -> bool:
        return not any(x != 0 for x in self._entries.flat)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        picked = self._entries[np.ix_(list(rows), list(cols))]
        return Matrix(self.ring, picked.reshape(len(rows), len(cols)).copy())

    def change_ring(self, ring: Ring) -> "Matrix":
        return Matrix.from_array(ring, self._entries)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return multiply(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        return add(self, other)

    def __neg__(self) -> "Matrix":
        return scale(self, -1)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return add(self, -other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.shape == other.shape
            and all(a == b for a, b in zip(self._entries.flat, other._entries.flat))
        )

    def __hash__(self) -> int:
        return hash((self.ring, self.shape, tuple(self._entries.flat)))

    def __repr__(self) -> str:
        return f"Matrix({self.ring}, {self.tolist()})"


@dataclass(frozen=True)
class SmithForm:
    U: Matrix
    S: Matrix
    V: Matrix
    invariant_factors: tuple[int, ...]


def _reduced(ring: Ring, array: np.ndarray) -> Matrix:
    if ring.kind is RingKind.PRIME_FIELD:
        array = array % ring.p
    return Matrix(ring, array)


def _same_ring(a: Matrix, b: Matrix) -> None:
    if a.ring != b.ring:
        raise RingMismatch(f"cannot combine matrices over {a.ring} and {b.ring}")


def multiply(a: Matrix, b: Matrix) -> Matrix:
    _same_ring(a, b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if a.cols == 0 or a.rows == 0 or b.cols == 0:
        return Matrix.zeros(a.ring, a.rows, b.cols)
    return _reduced(a.ring, np.dot(a._entries, b._entries))


def add(a: Matrix, b: Matrix) -> Matrix:
    _same_ring(a, b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot add {a.shape} and {b.shape}")
    return _reduced(a.ring, a._entries + b._entries)


def scale(a: Matrix, factor: Any) -> Matrix:
    return _reduced(a.ring, a._entries * a.ring.element(factor))


def transpose(a: Matrix) -> Matrix:
    return Matrix(a.ring, a._entries.T.copy())


def stack(top: Matrix, bottom: Matrix) -> Matrix:
    _same_ring(top, bottom)
    if top.cols != bottom.cols:
        raise DimensionMismatch(f"cannot stack {top.shape} over {bottom.shape}")
    return Matrix(top.ring, np.vstack([top._entries, bottom._entries]))


def augment(left: Matrix, right: Matrix) -> Matrix:
    _same_ring(left, right)
    if left.rows != right.rows:
        raise DimensionMismatch(f"cannot place {left.shape} beside {right.shape}")
    return Matrix(left.ring, np.hstack([left._entries, right._entries]))


def rref(a: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form over a field; leftmost pivots, pivots scaled to 1."""
    ring = a.ring
    if not ring.is_field:
        raise NotAField(f"row reduction needs a field, got {ring}")
    work = a.array()
    rows, cols = work.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        found = next((i for i in range(r, rows) if work[i, c] != 0), None)
        if found is None:
            continue
        if found != r:
            work[[r, found]] = work[[found, r]]
        work[r] = work[r] * ring.inverse(work[r, c])
        if ring.kind is RingKind.PRIME_FIELD:
            work[r] = work[r] % ring.p
        for i in range(rows):
            if i != r and work[i, c] != 0:
                work[i] = work[i] - work[i, c] * work[r]
                if ring.kind is RingKind.PRIME_FIELD:
                    work[i] = work[i] % ring.p
        pivots.append(c)
        r += 1
    return Matrix(ring, work), tuple(pivots)


def rank(a: Matrix) -> int:
    """Rank over the fraction field of the ring."""
    if a.rows == 0 or a.cols == 0:
        return 0
    if not a.ring.is_field:
        a = a.change_ring(a.ring.fraction_field())
    return len(rref(a)[1])


def kernel_basis(a: Matrix) -> Matrix:
    """Rows form a basis of the left kernel {x : x @ a = 0}.

    Each row is scaled so that its first nonzero entry is 1.
    """
    if not a.ring.is_field:
        raise NotAField("kernel_basis needs a field; use smith_normal_form over Z")
    reduced, pivots = rref(transpose(a))
    free = [j for j in range(a.rows) if j not in pivots]
    basis = np.empty((len(free), a.rows), dtype=object)
    basis.fill(a.ring.element(0))
    for k, f in enumerate(free):
        basis[k, f] = a.ring.element(1)
        for i, c in enumerate(pivots):
            basis[k, c] = a.ring.element(-reduced.entry(i, f))
        lead = next(x for x in basis[k] if x != 0)
        factor = a.ring.inverse(lead)
        basis[k] = [a.ring.element(x * factor) for x in basis[k]]
    return Matrix(a.ring, basis)


def row_space_basis(a: Matrix) -> Matrix:
    if a.rows == 0:
        return a
    reduced, pivots = rref(a)
    return reduced.submatrix(range(len(pivots)), range(a.cols))


def solve_left(a: Matrix, b: Matrix) -> Optional[Matrix]:
    """A row vector x with x @ a = b (b a single row), or None."""
    if b.rows != 1 or b.cols != a.cols:
        raise DimensionMismatch(f"cannot solve x @ {a.shape} = {b.shape}")
    if a.rows == 0:
        return Matrix.zeros(a.ring, 1, 0) if b.is_zero() else None
    reduced, pivots = rref(augment(transpose(a), transpose(b)))
    if pivots and pivots[-1] == a.rows:
        return None
    x = np.empty((1, a.rows), dtype=object)
    x.fill(a.ring.element(0))
    for i, c in enumerate(pivots):
        x[0, c] = reduced.entry(i, a.rows)
    return Matrix(a.ring, x)


def determinant(a: Matrix) -> Any:
    if a.rows != a.cols:
        raise DimensionMismatch(f"determinant of non-square {a.shape}")
    ring = a.ring.fraction_field()
    work = a.change_ring(ring).array()
    n = a.rows
    det = ring.element(1)
    for c in range(n):
        found = next((i for i in range(c, n) if work[i, c] != 0), None)
        if found is None:
            return a.ring.element(0)
        if found != c:
            work[[c, found]] = work[[found, c]]
            det = -det
        det = det * work[c, c]
        inv = ring.inverse(work[c, c])
        for i in range(c + 1, n):
            if work[i, c] != 0:
                work[i] = work[i] - work[i, c] * inv * work[c]
                if ring.kind is RingKind.PRIME_FIELD:
                    work[i] = work[i] % ring.p
        if ring.kind is RingKind.PRIME_FIELD:
            det = det % ring.p
    return a.ring.element(det)


def is_invertible(a: Matrix) -> bool:
    if a.rows != a.cols:
        return False
    det = determinant(a)
    if a.ring.kind is RingKind.INTEGERS:
        return det in (1, -1)
    return det != 0


def inverse(a: Matrix) -> Matrix:
    if not is_invertible(a):
        raise ValueError(f"matrix is not invertible over {a.ring}")
    field = a.ring.fraction_field()
    reduced, _ = rref(augment(a.change_ring(field), Matrix.identity(field, a.rows)))
    right = reduced.submatrix(range(a.rows), range(a.rows, 2 * a.rows))
    return right.change_ring(a.ring)


def smith_normal_form(a: Matrix) -> SmithForm:
    """Pivot-and-reduce Smith form over Z with minimal-|entry| pivots; U @ a @ V = S."""
    if a.ring.kind is not RingKind.INTEGERS:
        raise RingMismatch(f"smith_normal_form works over Z, got {a.ring}")
    m, n = a.shape
    S = [[int(x) for x in row] for row in a.tolist()]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i: int, k: int) -> None:
        S[i], S[k] = S[k], S[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j: int, k: int) -> None:
        for row in S:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    def add_row(target: int, source: int, factor: int) -> None:
        S[target] = [x + factor * y for x, y in zip(S[target], S[source])]
        U[target] = [x + factor * y for x, y in zip(U[target], U[source])]

    def add_col(target: int, source: int, factor: int) -> None:
        for row in S:
            row[target] += factor * row[source]
        for row in V:
            row[target] += factor * row[source]

    t = 0
    while t < min(m, n):
        nonzero = [
            (abs(S[i][j]), i, j)
            for i in range(t, m)
            for j in range(t, n)
            if S[i][j] != 0
        ]
        if not nonzero:
            break
        _, i, j = min(nonzero)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            line = [(abs(S[i][t]), i, t) for i in range(t + 1, m) if S[i][t] != 0]
            line += [(abs(S[t][j]), t, j) for j in range(t + 1, n) if S[t][j] != 0]
            if not line:
                stray = next(
                    (
                        i
                        for i in range(t + 1, m)
                        for j in range(t + 1, n)
                        if S[i][j] % S[t][t] != 0
                    ),
                    None,
                )
                if stray is None:
                    break
                add_row(t, stray, 1)
                continue
            smallest, i, j = min(line)
            if smallest < abs(S[t][t]):
                if i != t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
            for i in range(t + 1, m):
                if S[i][t] != 0:
                    add_row(i, t, -(S[i][t] // S[t][t]))
            for j in range(t + 1, n):
                if S[t][j] != 0:
                    add_col(j, t, -(S[t][j] // S[t][t]))
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    ring = a.ring
    factors = tuple(S[k][k] for k in range(min(m, n)) if S[k][k] != 0)
    return SmithForm(
        U=Matrix.from_rows(ring, U, cols=m),
        S=Matrix.from_rows(ring, S, cols=n),
        V=Matrix.from_rows(ring, V, cols=n),
        invariant_factors=factors,
    )


def invariant_factors(a: Matrix) -> tuple[int, ...]:
    return smith_normal_form(a).invariant_factors
