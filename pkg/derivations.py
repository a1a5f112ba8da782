"""
Derivations - Der(L), characteristic nilpotency and Engel certificates
Solves the Leibniz system, decides whether every derivation is nilpotent by
a simultaneous-flag recursion, and emits certificates that can be
re-checked without rerunning the recursion.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from exactlin import (
    DimensionMismatchError,
    Mat,
    det_inv,
    kernel_basis,
    pivots_of,
    row_space_basis,
    solve_in_span,
    unit_vector,
)
from liealg import (
    ConsistencyError,
    StructureConstants,
    Subspace,
    bracket,
    center,
    depth_weights,
    derived_subalgebra,
)

logger = logging.getLogger(__name__)

# word enumeration in the trace oracle is only meant for desk-scale matrices
TRACE_ORACLE_MAX_DIM = 10


class NotALieAlgebraError(ValueError):
    """Raised when a span of matrices is not closed under commutators."""


class Verdict(str, Enum):
    ALL_NILPOTENT = "all-nilpotent"
    NOT_ALL_NILPOTENT = "not-all-nilpotent"


@dataclass(frozen=True)
class DerivationSpace:
    algebra: StructureConstants
    basis: Tuple[Mat, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, d: Mat) -> bool:
        span = row_space_basis([m.flatten() for m in self.basis], d.rows * d.cols)
        return solve_in_span(span, pivots_of(span), d.flatten()) is not None

    def combination(self, coefficients: Sequence) -> Mat:
        n = self.algebra.dim
        total = Mat.zeros(n, n)
        for c, d in zip(coefficients, self.basis):
            if c:
                total = total + d.scale(c)
        return total


@dataclass(frozen=True)
class NilpotencyCertificate:
    """
    Evidence for an Engel verdict.

    all-nilpotent: `flag` runs from the full space down to zero and every
    basis matrix maps flag[i] into flag[i+1].
    not-all-nilpotent: `failure_stage` is the recursion depth at which the
    common kernel vanished; `witness` (when found) is a span element with
    tr(witness^witness_power) != 0.
    """

    verdict: Verdict
    ambient_dim: int
    flag: Tuple[Subspace, ...] = ()
    failure_stage: Optional[int] = None
    witness: Optional[Mat] = None
    witness_power: Optional[int] = None

    @property
    def all_nilpotent(self) -> bool:
        return self.verdict == Verdict.ALL_NILPOTENT

    def check(self, basis: Sequence[Mat]) -> bool:
        """Re-verify the certificate against a basis, independently of the recursion."""
        if self.all_nilpotent:
            if not self.flag or self.flag[0].dim != self.ambient_dim or self.flag[-1].dim != 0:
                return False
            if any(a.dim <= b.dim for a, b in zip(self.flag, self.flag[1:])):
                return False
            for d in basis:
                for step, nxt in zip(self.flag, self.flag[1:]):
                    if not all(nxt.contains(d.apply(v)) for v in step.basis):
                        return False
            return True
        if self.witness is not None:
            return self.witness.power(self.witness_power).trace() != 0
        return self.failure_stage is not None


def leibniz_system(sc: StructureConstants) -> Mat:
    """
    Linear system in the n^2 unknowns D[a][b] (coefficient of e_a in D e_b,
    flattened as a*n + b) expressing D[e_i,e_j] = [De_i,e_j] + [e_i,De_j].
    """
    n = sc.dim
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            cij = sc.basis_bracket(i, j)
            # [e_a, e_j] and [e_i, e_a] for every a
            left = [sc.basis_bracket(a, j) for a in range(n)]
            right = [sc.basis_bracket(i, a) for a in range(n)]
            for k in range(n):
                row = [Fraction(0)] * (n * n)
                for m in range(n):
                    if cij[m]:
                        row[k * n + m] += cij[m]
                for a in range(n):
                    if left[a][k]:
                        row[a * n + i] -= left[a][k]
                    if right[a][k]:
                        row[a * n + j] -= right[a][k]
                if any(row):
                    rows.append(row)
    if not rows:
        return Mat.zeros(0, n * n)
    return Mat.from_rows(rows, cols=n * n)


def is_derivation(d: Mat, sc: StructureConstants) -> bool:
    n = sc.dim
    if d.shape != (n, n):
        raise DimensionMismatchError(f"derivation must be {n}x{n}, got {d.rows}x{d.cols}")
    images = d.columns()
    for i in range(n):
        for j in range(i + 1, n):
            lhs = d.apply(sc.basis_bracket(i, j))
            rhs = tuple(a + b for a, b in zip(bracket(images[i], unit_vector(n, j), sc),
                                              bracket(unit_vector(n, i), images[j], sc)))
            if lhs != rhs:
                return False
    return True


def _check_commutator_closed(basis: Sequence[Mat]) -> Optional[Tuple[int, int]]:
    """First pair (i, j) whose commutator leaves the span, or None."""
    if not basis:
        return None
    size = basis[0].rows * basis[0].cols
    span = row_space_basis([m.flatten() for m in basis], size)
    pivots = pivots_of(span)
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            c = basis[i].commutator(basis[j])
            if c.is_zero():
                continue
            if solve_in_span(span, pivots, c.flatten()) is None:
                return i, j
    return None


def derivation_space(sc: StructureConstants) -> DerivationSpace:
    """
    Basis of Der(L) from the Leibniz system.

    The basis is the canonical kernel basis of the system over the n^2
    coordinates, so it is reproducible run to run.
    """
    n = sc.dim
    system = leibniz_system(sc)
    if system.rows:
        solutions = kernel_basis(system)
    else:
        solutions = [unit_vector(n * n, k) for k in range(n * n)]
    basis = tuple(Mat.unflatten(v, n, n) for v in solutions)
    logger.debug("%s: Leibniz system %sx%s, dim Der = %s", sc, system.rows, system.cols, len(basis))
    bad = _check_commutator_closed(basis)
    if bad is not None:
        raise ConsistencyError(f"{sc}: commutator of derivations {bad} left the computed span")
    return DerivationSpace(sc, basis)


def _complete_basis(kernel: List[Tuple[Fraction, ...]], dim: int) -> List[Tuple[Fraction, ...]]:
    """Append standard vectors in index order, keeping the independent ones."""
    chosen = list(kernel)
    span = row_space_basis(chosen, dim)
    for i in range(dim):
        if len(chosen) == dim:
            break
        e = unit_vector(dim, i)
        if solve_in_span(span, pivots_of(span), e) is None:
            chosen.append(e)
            span = row_space_basis(chosen, dim)
    return chosen


def engel_all_nilpotent(basis: Sequence[Mat], check_closure: bool = True) -> NilpotencyCertificate:
    """
    Engel-style flag recursion over a commutator-closed span of matrices.

    At each stage take the common kernel K of the current matrices; if it is
    zero on a nonzero space, some span element is not nilpotent. Otherwise
    pass to V/K with the induced matrices and repeat.

    Args:
        basis: spanning matrices, all n x n
        check_closure: verify the commutator-closure precondition first

    Returns:
        NilpotencyCertificate (flag on success, failure stage otherwise)
    """
    basis = list(basis)
    if not basis:
        raise ValueError("engel_all_nilpotent needs at least one matrix to fix the ambient dimension")
    n = basis[0].rows
    for m in basis:
        if m.shape != (n, n):
            raise DimensionMismatchError("all matrices must share one square shape")
    if check_closure:
        bad = _check_commutator_closed(basis)
        if bad is not None:
            raise NotALieAlgebraError(
                f"span is not closed under commutators: [B{bad[0] + 1}, B{bad[1] + 1}] is outside it"
            )

    current = [m for m in basis if not m.is_zero()]
    lift = Mat.identity(n)  # columns: representatives in V of the current quotient basis
    accumulated: List[Tuple[Fraction, ...]] = []
    chain = [Subspace.zero(n)]
    stage = 0
    dim = n
    while dim > 0:
        if current:
            stacked = Mat.from_rows([row for m in current for row in m.to_rows()], cols=dim)
            kernel = kernel_basis(stacked)
        else:
            kernel = [unit_vector(dim, i) for i in range(dim)]
        if not kernel:
            logger.debug("common kernel vanished at stage %s (dim %s)", stage, dim)
            witness, power = _find_witness(basis)
            return NilpotencyCertificate(
                verdict=Verdict.NOT_ALL_NILPOTENT,
                ambient_dim=n,
                failure_stage=stage,
                witness=witness,
                witness_power=power,
            )
        accumulated.extend(lift.apply(v) for v in kernel)
        chain.append(Subspace.span(accumulated, n))
        if len(kernel) == dim:
            break
        full = _complete_basis(kernel, dim)
        p = Mat.from_columns(full, rows=dim)
        _, p_inv = _det_inv_checked(p)
        k = len(kernel)
        quotient = []
        for m in current:
            conj = p_inv @ m @ p
            block = Mat.from_rows([conj.row(i)[k:] for i in range(k, dim)], cols=dim - k)
            if not block.is_zero():
                quotient.append(block)
        lift = lift @ Mat.from_columns(full[k:], rows=dim)
        current = quotient
        dim -= k
        stage += 1
    flag = tuple(reversed(chain))
    return NilpotencyCertificate(verdict=Verdict.ALL_NILPOTENT, ambient_dim=n, flag=flag)


def _det_inv_checked(p: Mat):
    d, inv = det_inv(p)
    if inv is None:
        raise ConsistencyError("completed basis is singular")
    return d, inv


def _nonzero_trace_power(d: Mat) -> Optional[int]:
    power = d
    for k in range(1, d.rows + 1):
        if power.trace() != 0:
            return k
        power = power @ d
    return None


def _is_diagonal(m: Mat) -> bool:
    return all(m[i, j] == 0 for i in range(m.rows) for j in range(m.cols) if i != j)


def _find_witness(basis: Sequence[Mat]) -> Tuple[Optional[Mat], Optional[int]]:
    """
    Best-effort non-nilpotent span element. The sum of the diagonal basis
    elements comes first, then single elements (diagonal-heavy first), then
    pairwise sums and differences.
    """
    candidates = sorted(basis, key=lambda m: -sum(1 for i in range(m.rows) if m[i, i] != 0))
    diagonal = [m for m in basis if _is_diagonal(m)]
    if diagonal:
        total = diagonal[0]
        for m in diagonal[1:]:
            total = total + m
        candidates.insert(0, total)
    for m in candidates:
        k = _nonzero_trace_power(m)
        if k is not None:
            return m, k
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            for m in (candidates[i] + candidates[j], candidates[i] - candidates[j]):
                k = _nonzero_trace_power(m)
                if k is not None:
                    return m, k
    return None, None


def _grading_witness(sc: StructureConstants, ds: DerivationSpace) -> Optional[Mat]:
    """diag(depth weights) when the basis is adapted and the weights grade the bracket."""
    weights = depth_weights(sc)
    if weights is None:
        return None
    grading = Mat.diag(weights)
    return grading if ds.contains(grading) else None


def is_characteristically_nilpotent(
    sc: StructureConstants, ds: Optional[DerivationSpace] = None
) -> Tuple[bool, NilpotencyCertificate]:
    """
    True iff every derivation of L is nilpotent.

    On a positive verdict the two standard consequences are asserted as
    well: the center lies in [L, L] and Der(L) is a nilpotent Lie algebra.
    On a negative verdict the depth grading is preferred as the witness
    whenever it is a derivation. A precomputed `ds` is reused.
    """
    if ds is None:
        ds = derivation_space(sc)
    elif ds.algebra != sc:
        raise DimensionMismatchError(f"derivation space belongs to {ds.algebra}, not {sc}")
    if ds.dimension == 0:
        # only the zero algebra has Der(L) = 0
        cert = NilpotencyCertificate(
            verdict=Verdict.ALL_NILPOTENT,
            ambient_dim=sc.dim,
            flag=(Subspace.zero(sc.dim),),
        )
        return True, cert
    cert = engel_all_nilpotent(ds.basis, check_closure=False)
    if cert.all_nilpotent:
        if not center(sc).is_subspace_of(derived_subalgebra(sc)):
            raise ConsistencyError(f"{sc}: characteristically nilpotent but the center is not inside [L, L]")
        _, nilpotent = der_lie_lcs(ds)
        if not nilpotent:
            raise ConsistencyError(f"{sc}: characteristically nilpotent but Der(L) is not nilpotent")
    else:
        grading = _grading_witness(sc, ds)
        if grading is not None:
            cert = replace(cert, witness=grading, witness_power=_nonzero_trace_power(grading))
    logger.debug("%s: characteristically nilpotent = %s", sc, cert.all_nilpotent)
    return cert.all_nilpotent, cert


def _matrix_span(mats: Sequence[Mat], n: int) -> List[Mat]:
    rows = row_space_basis([m.flatten() for m in mats], n * n)
    return [Mat.unflatten(r, n, n) for r in rows]


def der_lie_lcs(ds: DerivationSpace) -> Tuple[List[int], bool]:
    """
    Lower central series of Der(L) under the commutator bracket.

    Returns:
        (dims, nilpotent_as_lie_algebra); dims end in 0 when nilpotent and
        repeat the stable dimension otherwise
    """
    return matrix_lie_lcs(ds.basis, ds.algebra.dim)


def matrix_lie_lcs(basis: Sequence[Mat], n: int) -> Tuple[List[int], bool]:
    g = _matrix_span(basis, n) if basis else []
    current = g
    dims = [len(g)]
    while current:
        nxt = _matrix_span([x.commutator(y) for x in g for y in current], n) if g else []
        dims.append(len(nxt))
        if len(nxt) == len(current):
            return dims, False
        current = nxt
    return dims, True


def lie_closure(mats: Sequence[Mat]) -> List[Mat]:
    """RREF basis of the smallest commutator-closed span containing mats."""
    if not mats:
        return []
    n = mats[0].rows
    span = _matrix_span(mats, n)
    while True:
        extended = _matrix_span(list(span) + [x.commutator(y) for x in span for y in span], n)
        if len(extended) == len(span):
            return span
        span = extended


def trace_power_oracle(basis: Sequence[Mat]) -> bool:
    """
    Independent all-nilpotency check for a commutator-closed span.

    Builds the span of all words of length k = 1..n in the basis matrices
    level by level (row-reduced, so it never exceeds n^2 dimensions) and
    requires every word to be traceless. For a matrix Lie algebra over Q this
    is equivalent to tr(X^k) vanishing identically for the generic element.
    """
    basis = [m for m in basis]
    if not basis:
        return True
    n = basis[0].rows
    if n > TRACE_ORACLE_MAX_DIM:
        raise DimensionMismatchError(
            f"trace oracle limited to dimension {TRACE_ORACLE_MAX_DIM}, got {n}"
        )
    level = _matrix_span(basis, n)
    for k in range(1, n + 1):
        if any(w.trace() != 0 for w in level):
            logger.debug("trace oracle: nonzero trace on words of length %s", k)
            return False
        if not level:
            return True
        level = _matrix_span([w @ d for w in level for d in basis], n)
    return True
