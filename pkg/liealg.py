"""
Nilpotent Lie Algebras - structure constants and subspace calculus
Brackets, lower central series, centers, direct sums and the invariant
report (rank, class, abelianization) for rational nilpotent Lie algebras.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from exactlin import (
    DimensionMismatchError,
    Mat,
    Vector,
    as_rat,
    is_zero_vector,
    kernel_basis,
    pivots_of,
    row_space_basis,
    solve_in_span,
    unit_vector,
    vec,
    zero_vector,
)

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


class NotNilpotentError(ValueError):
    """Raised when the lower central series stalls at a nonzero term."""


class ConsistencyError(AssertionError):
    """A consequence that must hold for valid input did not; this is a bug."""


@dataclass(frozen=True)
class StructureConstants:
    """
    A rational Lie algebra in a fixed basis e_0..e_{n-1} (0-based here,
    1-based in files and reports).

    Only pairs i < j with a nonzero bracket are stored; [e_j, e_i] is
    -[e_i, e_j] by construction.
    """

    dim: int
    table: Tuple[Tuple[Pair, Vector], ...]
    name: Optional[str] = field(default=None, compare=False)

    @classmethod
    def build(cls, dim: int, brackets: Dict[Pair, Sequence], name: Optional[str] = None) -> "StructureConstants":
        cleaned = []
        for (i, j), v in sorted(brackets.items()):
            if not (0 <= i < j < dim):
                raise DimensionMismatchError(f"bracket pair ({i + 1},{j + 1}) is not an ordered pair of basis indices")
            v = vec(v)
            if len(v) != dim:
                raise DimensionMismatchError(
                    f"bracket [e{i + 1},e{j + 1}] has {len(v)} coordinates, algebra has dim {dim}"
                )
            if not is_zero_vector(v):
                cleaned.append(((i, j), v))
        return cls(dim, tuple(cleaned), name)

    @cached_property
    def brackets(self) -> Dict[Pair, Vector]:
        return dict(self.table)

    def basis_bracket(self, i: int, j: int) -> Vector:
        if i == j:
            return zero_vector(self.dim)
        if i < j:
            return self.brackets.get((i, j), zero_vector(self.dim))
        return tuple(-a for a in self.brackets.get((j, i), zero_vector(self.dim)))

    def constant(self, i: int, j: int, k: int) -> Fraction:
        return self.basis_bracket(i, j)[k]

    def with_name(self, name: str) -> "StructureConstants":
        return StructureConstants(self.dim, self.table, name)

    def __str__(self):
        return self.name or f"algebra(dim {self.dim})"


def abelian(n: int) -> StructureConstants:
    return StructureConstants(n, (), f"abelian({n})")


def bracket(x: Sequence, y: Sequence, sc: StructureConstants) -> Vector:
    """Bilinear extension of the structure constant table."""
    if len(x) != sc.dim or len(y) != sc.dim:
        raise DimensionMismatchError(f"bracket needs vectors of length {sc.dim}, got {len(x)} and {len(y)}")
    out = [Fraction(0)] * sc.dim
    for (i, j), v in sc.table:
        coeff = x[i] * y[j] - x[j] * y[i]
        if coeff:
            for k, a in enumerate(v):
                if a:
                    out[k] += coeff * a
    return tuple(out)


def adjoint(x: Sequence, sc: StructureConstants) -> Mat:
    """Matrix of ad x; column j is [x, e_j]."""
    return Mat.from_columns([bracket(x, unit_vector(sc.dim, j), sc) for j in range(sc.dim)], rows=sc.dim)


@dataclass(frozen=True)
class Subspace:
    """A rational subspace stored as its RREF basis, so equal spaces compare equal."""

    ambient_dim: int
    basis: Tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Sequence[Sequence], ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, tuple(row_space_basis(vectors, ambient_dim)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, tuple(unit_vector(ambient_dim, i) for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError(f"vector of length {len(v)} in ambient dimension {self.ambient_dim}")
        return solve_in_span(self.basis, pivots_of(self.basis), v) is not None

    def is_subspace_of(self, other: "Subspace") -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatchError("subspaces live in different ambient spaces")
        return all(other.contains(v) for v in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatchError("subspaces live in different ambient spaces")
        return Subspace.span(self.basis + other.basis, self.ambient_dim)


def subspace_bracket(a: Subspace, b: Subspace, sc: StructureConstants) -> Subspace:
    if a.ambient_dim != sc.dim or b.ambient_dim != sc.dim:
        raise DimensionMismatchError(
            f"subspace ambient dimensions {a.ambient_dim}, {b.ambient_dim} do not match algebra dim {sc.dim}"
        )
    products = [bracket(x, y, sc) for x in a.basis for y in b.basis]
    return Subspace.span(products, sc.dim)


def derived_subalgebra(sc: StructureConstants) -> Subspace:
    return Subspace.span([v for _, v in sc.table], sc.dim)


def lower_central_series(sc: StructureConstants) -> Tuple[List[Subspace], int]:
    """
    L^1 = L, L^{k+1} = [L, L^k], down to the zero term.

    Returns:
        (terms, nilpotency_class); terms end with the zero subspace
    """
    full = Subspace.full(sc.dim)
    terms = [full]
    current = full
    while current.dim > 0:
        nxt = subspace_bracket(full, current, sc)
        if nxt.dim == current.dim:
            raise NotNilpotentError(
                f"{sc}: lower central series stabilizes at dimension {current.dim}, the algebra is not nilpotent"
            )
        terms.append(nxt)
        current = nxt
    nilpotency_class = len(terms) - 1
    logger.debug("%s: series dims %s", sc, [t.dim for t in terms])
    return terms, nilpotency_class


def center(sc: StructureConstants) -> Subspace:
    """Kernel of x -> ([x, e_0], ..., [x, e_{n-1}])."""
    n = sc.dim
    rows = []
    for i in range(n):
        # coordinate k of [x, e_i] = sum_a x_a c_{a i}^k
        columns = [sc.basis_bracket(a, i) for a in range(n)]
        for k in range(n):
            rows.append([columns[a][k] for a in range(n)])
    if not rows:
        return Subspace.full(n)
    return Subspace.span(kernel_basis(Mat.from_rows(rows, cols=n)), n)


def jacobi_residual(sc: StructureConstants, i: int, j: int, k: int) -> Vector:
    """[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]."""
    e = [unit_vector(sc.dim, t) for t in (i, j, k)]
    terms = [
        bracket(sc.basis_bracket(i, j), e[2], sc),
        bracket(sc.basis_bracket(j, k), e[0], sc),
        bracket(sc.basis_bracket(k, i), e[1], sc),
    ]
    return tuple(sum(parts, Fraction(0)) for parts in zip(*terms))


@dataclass(frozen=True)
class ValidationReport:
    accepted: bool
    jacobi_failures: Tuple[Tuple[Tuple[int, int, int], Vector], ...]
    nilpotent: bool
    series_dims: Tuple[int, ...]
    nilpotency_class: Optional[int]
    message: str


def validate(sc: StructureConstants) -> ValidationReport:
    """
    Check the Jacobi identity on every basis triple and nilpotency.

    Returns:
        ValidationReport listing every failed triple (1-based) with its residual
    """
    for (i, j), v in sc.table:
        if len(v) != sc.dim:
            raise DimensionMismatchError(f"bracket [e{i + 1},e{j + 1}] has {len(v)} coordinates, dim is {sc.dim}")
    failures = []
    n = sc.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                r = jacobi_residual(sc, i, j, k)
                if not is_zero_vector(r):
                    failures.append(((i + 1, j + 1, k + 1), r))

    nilpotent = True
    dims: Tuple[int, ...] = ()
    nil_class = None
    stalled_at = None
    try:
        terms, nil_class = lower_central_series(sc)
        dims = tuple(t.dim for t in terms)
    except NotNilpotentError:
        nilpotent = False
        stalled_at = _stalled_dims(sc)
        dims = stalled_at

    if failures:
        message = f"Jacobi identity fails on {len(failures)} triple(s), first {failures[0][0]}"
    elif not nilpotent:
        message = f"not nilpotent: series dims {list(dims)} stabilize above zero"
    else:
        message = f"Lie algebra accepted, class {nil_class}"
    return ValidationReport(
        accepted=not failures and nilpotent,
        jacobi_failures=tuple(failures),
        nilpotent=nilpotent,
        series_dims=dims,
        nilpotency_class=nil_class,
        message=message,
    )


def _stalled_dims(sc: StructureConstants) -> Tuple[int, ...]:
    full = Subspace.full(sc.dim)
    dims = [full.dim]
    current = full
    while True:
        nxt = subspace_bracket(full, current, sc)
        dims.append(nxt.dim)
        if nxt.dim == current.dim or nxt.dim == 0:
            return tuple(dims)
        current = nxt


def require_valid(sc: StructureConstants) -> ValidationReport:
    report = validate(sc)
    if report.jacobi_failures:
        raise ValueError(f"{sc}: {report.message}")
    if not report.nilpotent:
        raise NotNilpotentError(f"{sc}: {report.message}")
    return report


def direct_sum(a: StructureConstants, b: StructureConstants) -> StructureConstants:
    """Block structure constants on dim(a) + dim(b); cross brackets vanish."""
    n = a.dim + b.dim
    table = {}
    for (i, j), v in a.table:
        table[(i, j)] = tuple(v) + (Fraction(0),) * b.dim
    for (i, j), v in b.table:
        table[(i + a.dim, j + a.dim)] = (Fraction(0),) * a.dim + tuple(v)
    return StructureConstants.build(n, table, f"{a} + {b}")


def rescale(sc: StructureConstants, factor) -> StructureConstants:
    """
    Same algebra in the basis factor*e_i: every structure constant is
    multiplied by factor.
    """
    factor = as_rat(factor)
    if factor == 0:
        raise ValueError("rescale factor must be nonzero")
    table = {pair: tuple(factor * a for a in v) for pair, v in sc.table}
    return StructureConstants.build(sc.dim, table, f"{sc}*{factor}")


def depth_weights(sc: StructureConstants) -> Optional[List[int]]:
    """
    w_i = largest k with e_i in L^k, provided the basis is adapted to the
    lower central series (every L^k spanned by basis vectors); None otherwise.
    """
    terms, _ = lower_central_series(sc)
    weights = []
    for i in range(sc.dim):
        e = unit_vector(sc.dim, i)
        weights.append(max(k + 1 for k, t in enumerate(terms) if t.contains(e)))
    for k, t in enumerate(terms):
        spanned = Subspace.span([unit_vector(sc.dim, i) for i in range(sc.dim) if weights[i] >= k + 1], sc.dim)
        if spanned != t:
            return None
    return weights


@dataclass(frozen=True)
class InvariantReport:
    rank: int
    nilpotency_class: int
    series_dims: Tuple[int, ...]
    center_dim: int
    derived_dim: int
    abelianization_dim: int
    generator_count: int
    first_betti_number: int
    cohomological_dimension: int
    center_in_derived: bool

    def as_dict(self) -> Dict[str, object]:
        return {
            "rank": self.rank,
            "class": self.nilpotency_class,
            "series_dims": list(self.series_dims),
            "center_dim": self.center_dim,
            "derived_dim": self.derived_dim,
            "abelianization_dim": self.abelianization_dim,
            "generator_count": self.generator_count,
            "first_betti_number": self.first_betti_number,
            "cohomological_dimension": self.cohomological_dimension,
            "center_in_derived": self.center_in_derived,
        }


def invariant_report(sc: StructureConstants) -> InvariantReport:
    """
    Rank, class, series, center and abelianization of a validated algebra.

    dim L/[L,L] is both the minimal number of Lie generators and the first
    Betti number of the associated nilmanifold; rank equals its
    cohomological dimension.
    """
    terms, nil_class = lower_central_series(sc)
    derived = derived_subalgebra(sc)
    z = center(sc)
    abel = sc.dim - derived.dim
    if nil_class >= 2 and abel < 2:
        raise ConsistencyError(f"{sc}: non-abelian nilpotent algebra with dim L/[L,L] = {abel} < 2")
    return InvariantReport(
        rank=sc.dim,
        nilpotency_class=nil_class,
        series_dims=tuple(t.dim for t in terms),
        center_dim=z.dim,
        derived_dim=derived.dim,
        abelianization_dim=abel,
        generator_count=abel,
        first_betti_number=abel,
        cohomological_dimension=sc.dim,
        center_in_derived=z.is_subspace_of(derived),
    )
