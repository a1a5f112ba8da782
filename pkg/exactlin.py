"""
Exact Linear Algebra - rationals and integers only
Row reduction, kernels, Bareiss determinants and Smith normal form.
Every other module builds on these; nothing here ever rounds.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Rat = Fraction
Vector = Tuple[Fraction, ...]


class NonSquareMatrixError(ValueError):
    """Raised when an operation needs a square matrix."""


class DimensionMismatchError(ValueError):
    """Raised when shapes or vector lengths do not line up."""


def as_rat(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


def vec(values) -> Vector:
    return tuple(as_rat(v) for v in values)


def zero_vector(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def unit_vector(n: int, i: int) -> Vector:
    return tuple(Fraction(1 if k == i else 0) for k in range(n))


def vec_add(u: Sequence, v: Sequence) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"vector lengths differ: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"vector lengths differ: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u: Sequence, s) -> Vector:
    s = as_rat(s)
    return tuple(a * s for a in u)


def is_zero_vector(u: Sequence) -> bool:
    return all(a == 0 for a in u)


def is_integral_vector(u: Sequence) -> bool:
    return all(Fraction(a).denominator == 1 for a in u)


@dataclass(frozen=True)
class Mat:
    """Dense rational matrix, row-major, immutable."""

    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"entry count {len(self.entries)} does not match {self.rows}x{self.cols}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "Mat":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatchError("every row must have the same number of entries")
        return cls(len(rows), cols, tuple(as_rat(x) for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: Optional[int] = None) -> "Mat":
        columns = [list(c) for c in columns]
        if rows is None:
            rows = len(columns[0]) if columns else 0
        return cls.from_rows([[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls(n, n, tuple(Fraction(1 if i == j else 0) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Mat":
        return cls(rows, cols, tuple(Fraction(0) for _ in range(rows * cols)))

    @classmethod
    def diag(cls, values: Sequence) -> "Mat":
        n = len(values)
        return cls(n, n, tuple(as_rat(values[i]) if i == j else Fraction(0)
                               for i in range(n) for j in range(n)))

    def __getitem__(self, ij: Tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> List[Vector]:
        return [self.col(j) for j in range(self.cols)]

    def transpose(self) -> "Mat":
        return Mat.from_rows([self.col(j) for j in range(self.cols)], cols=self.rows)

    def apply(self, v: Sequence) -> Vector:
        if len(v) != self.cols:
            raise DimensionMismatchError(f"vector length {len(v)} does not match {self.cols} columns")
        out = []
        for i in range(self.rows):
            row = self.entries[i * self.cols:(i + 1) * self.cols]
            out.append(sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)))
        return tuple(out)

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise DimensionMismatchError(f"inner shapes differ: {self.shape} @ {other.shape}")
        other_cols = other.columns()
        out = []
        for i in range(self.rows):
            row = self.row(i)
            for c in other_cols:
                out.append(sum((a * b for a, b in zip(row, c) if a and b), Fraction(0)))
        return Mat(self.rows, other.cols, tuple(out))

    def __add__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise DimensionMismatchError(f"shapes differ: {self.shape} + {other.shape}")
        return Mat(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise DimensionMismatchError(f"shapes differ: {self.shape} - {other.shape}")
        return Mat(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "Mat":
        return self.scale(-1)

    def scale(self, s) -> "Mat":
        s = as_rat(s)
        return Mat(self.rows, self.cols, tuple(a * s for a in self.entries))

    def power(self, k: int) -> "Mat":
        if not self.is_square:
            raise NonSquareMatrixError("matrix powers need a square matrix")
        result = Mat.identity(self.rows)
        for _ in range(k):
            result = result @ self
        return result

    def trace(self) -> Fraction:
        if not self.is_square:
            raise NonSquareMatrixError("trace needs a square matrix")
        return sum((self[i, i] for i in range(self.rows)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.entries)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.entries)

    def flatten(self) -> Vector:
        return self.entries

    @classmethod
    def unflatten(cls, v: Sequence, rows: int, cols: int) -> "Mat":
        return cls(rows, cols, vec(v))

    def commutator(self, other: "Mat") -> "Mat":
        return self @ other - other @ self

    def __repr__(self):
        body = "; ".join(",".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Mat({self.rows}x{self.cols}: {body})"


def _rref_rows(rows: List[List[Fraction]], ncols: int) -> Tuple[List[List[Fraction]], List[int]]:
    """In-place Gauss-Jordan on a list of rows; returns the nonzero rows and pivots."""
    pivots: List[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        pivot_row = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            for j in range(c, ncols):
                if pr[j]:
                    pr[j] *= inv
        # only the nonzero part of the pivot row takes part in elimination
        support = [j for j in range(c, ncols) if pr[j]]
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            factor = row[c]
            if factor == 0:
                continue
            for j in support:
                row[j] -= factor * pr[j]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def rref(m: Mat) -> Tuple[Mat, int, List[int]]:
    """
    Reduced row echelon form over Q.

    Returns:
        (reduced, rank, pivot_columns) where reduced keeps the input shape
    """
    rows = m.to_rows()
    reduced, pivots = _rref_rows(rows, m.cols)
    rank = len(pivots)
    padded = reduced + [[Fraction(0)] * m.cols for _ in range(m.rows - rank)]
    return Mat.from_rows(padded, cols=m.cols) if m.rows else m, rank, pivots


def rank(m: Mat) -> int:
    return rref(m)[1]


def kernel_basis(m: Mat) -> List[Vector]:
    """
    Canonical null-space basis read off the RREF.

    Each free column in turn is set to 1 (all other free columns 0) and the
    pivot variables are solved for, so identical inputs give identical bases.
    """
    reduced, _, pivots = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -reduced[r, f]
        basis.append(tuple(v))
    return basis


def row_space_basis(vectors: Sequence[Sequence], ncols: int) -> List[Vector]:
    """RREF basis of the span of the given vectors (zero vectors dropped)."""
    rows = [list(vec(v)) for v in vectors]
    reduced, _ = _rref_rows(rows, ncols)
    return [tuple(r) for r in reduced]


def solve_in_span(basis_rref: Sequence[Vector], pivots: Sequence[int], v: Sequence) -> Optional[Vector]:
    """
    Coordinates of v in an RREF basis, or None when v is outside the span.

    The coordinate on the r-th basis row is simply v at that row's pivot.
    """
    coords = tuple(Fraction(v[p]) for p in pivots)
    residual = list(vec(v))
    for c, row in zip(coords, basis_rref):
        if c:
            for j, a in enumerate(row):
                if a:
                    residual[j] -= c * a
    if any(residual):
        return None
    return coords


def pivots_of(basis_rref: Sequence[Vector]) -> List[int]:
    return [next(j for j, a in enumerate(row) if a != 0) for row in basis_rref]


def _bareiss_det(rows: List[List[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    a = [list(r) for r in rows]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact division: integral inputs keep integral intermediates
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det_inv(m: Mat) -> Tuple[Fraction, Optional[Mat]]:
    """
    Exact determinant (Bareiss fraction-free elimination) and inverse.

    Returns:
        (determinant, inverse) with inverse None when the determinant is 0
    """
    if not m.is_square:
        raise NonSquareMatrixError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    det = _bareiss_det(m.to_rows())
    if det == 0:
        return det, None
    augmented = [row + [Fraction(1 if i == j else 0) for j in range(n)]
                 for i, row in enumerate(m.to_rows())]
    reduced, _ = _rref_rows(augmented, 2 * n)
    inverse = Mat.from_rows([r[n:] for r in reduced], cols=n)
    return det, inverse


def det(m: Mat) -> Fraction:
    if not m.is_square:
        raise NonSquareMatrixError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    return _bareiss_det(m.to_rows())


def _to_int_rows(m: Mat) -> List[List[int]]:
    if not m.is_integral():
        raise ValueError("Smith normal form needs an integral matrix")
    return [[int(x) for x in m.row(i)] for i in range(m.rows)]


def smith_normal_form(m: Mat) -> Tuple[List[int], Mat, Mat]:
    """
    Smith normal form by row/column gcd reduction.

    Pivots are chosen by minimal nonzero absolute value in the remaining
    block. Row operations are mirrored on `left`, column operations on
    `right`, so that left @ m @ right is diagonal.

    Returns:
        (d, left, right) with d[i] | d[i+1], d of length min(rows, cols)
    """
    a = _to_int_rows(m)
    nr, nc = m.rows, m.cols
    left = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    right = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        left[i], left[k] = left[k], left[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in right:
            row[j], row[k] = row[k], row[j]

    def add_row(target, source, q):
        # row[target] += q * row[source]
        a[target] = [x + q * y for x, y in zip(a[target], a[source])]
        left[target] = [x + q * y for x, y in zip(left[target], left[source])]

    def add_col(target, source, q):
        for row in a:
            row[target] += q * row[source]
        for row in right:
            row[target] += q * row[source]

    for s in range(min(nr, nc)):
        while True:
            candidates = [(abs(a[i][j]), i, j) for i in range(s, nr) for j in range(s, nc) if a[i][j]]
            if not candidates:
                break
            _, pi, pj = min(candidates)
            swap_rows(s, pi)
            swap_cols(s, pj)
            p = a[s][s]
            dirty = False
            for i in range(s + 1, nr):
                if a[i][s]:
                    add_row(i, s, -(a[i][s] // p))
                    dirty = dirty or a[i][s] != 0
            for j in range(s + 1, nc):
                if a[s][j]:
                    add_col(j, s, -(a[s][j] // p))
                    dirty = dirty or a[s][j] != 0
            if dirty:
                continue
            offender = next(((i, j) for i in range(s + 1, nr) for j in range(s + 1, nc)
                             if a[i][j] % p), None)
            if offender is None:
                break
            add_row(s, offender[0], 1)
        if s < nr and s < nc and a[s][s] < 0:
            a[s] = [-x for x in a[s]]
            left[s] = [-x for x in left[s]]

    d = [a[i][i] for i in range(min(nr, nc))]
    logger.debug("smith normal form of %sx%s matrix: %s", nr, nc, d)
    return d, Mat.from_rows(left, cols=nr), Mat.from_rows(right, cols=nc)


def lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b) if a and b else 0


def denominator_lcm(values) -> int:
    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out
