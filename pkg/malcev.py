"""
Mal'cev Coordinates - the lattice group Z^n under the BCH product
Endomorphism classification, Smith-normal-form index, an independent coset
oracle and the co-Hopfian verdicts built on the determinant criterion.
"""

import itertools
import logging
import os
from collections import defaultdict, deque
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import cache, lru_cache
from math import comb, factorial, prod
from typing import Dict, List, Optional, Sequence, Tuple

from derivations import NilpotencyCertificate, is_characteristically_nilpotent
from exactlin import (
    DimensionMismatchError,
    Mat,
    Vector,
    denominator_lcm,
    det,
    det_inv,
    is_integral_vector,
    is_zero_vector,
    rank,
    row_space_basis,
    smith_normal_form,
    unit_vector,
    vec,
)
from liealg import (
    ConsistencyError,
    StructureConstants,
    Subspace,
    abelian,
    adjoint,
    bracket,
    depth_weights,
    derived_subalgebra,
    direct_sum,
    lower_central_series,
    rescale,
)

logger = logging.getLogger(__name__)

SEARCH_BOUND = int(os.getenv("COHOPF_SEARCH_BOUND", "2"))
SEARCH_NODES = int(os.getenv("COHOPF_SEARCH_NODES", "200000"))
ORACLE_CAP = int(os.getenv("COHOPF_ORACLE_CAP", "4096"))
EXACT_GRID_CAP = int(os.getenv("COHOPF_EXACT_GRID_CAP", "250000"))
# algebras whose class and BCH polynomials stay memoised
ALGEBRA_CACHE_SIZE = 64

Word = Tuple[int, ...]  # letters: 0 = x, 1 = y
Poly = Dict[Tuple[int, ...], Fraction]


class NotLatticeAutomorphismError(ValueError):
    """Raised when a map is not an integral automorphism where one is required."""


class NotAHomomorphismError(ValueError):
    """Raised when a matrix does not respect brackets where it must."""


class LatticeNotClosedError(ValueError):
    """Raised when Z^n is not closed under the BCH product in the given basis."""


class OracleBoundExceededError(ValueError):
    """Raised when an enumeration passes its cap instead of truncating silently."""


# ---------------------------------------------------------------------------
# Dynkin form of the BCH series
# ---------------------------------------------------------------------------

def _is_block(segment: Word) -> bool:
    """x^r y^s: no y is ever followed by an x."""
    return all(not (a == 1 and b == 0) for a, b in zip(segment, segment[1:]))


@cache
def _split_weights(word: Word) -> Dict[int, Fraction]:
    """k -> sum over cuts of word into k blocks x^r y^s of prod 1/(r! s!)."""
    if not word:
        return {0: Fraction(1)}
    out: Dict[int, Fraction] = defaultdict(Fraction)
    for cut in range(1, len(word) + 1):
        head = word[:cut]
        if not _is_block(head):
            break
        r = head.count(0)
        weight = Fraction(1, factorial(r) * factorial(cut - r))
        for k, v in _split_weights(word[cut:]).items():
            out[k + 1] += weight * v
    return dict(out)


@cache
def dynkin_coefficient(word: Word) -> Fraction:
    """
    Coefficient of the right-nested bracket [w1,[w2,...[w_{m-1},w_m]]] in
    log(exp x exp y).
    """
    total = sum((Fraction((-1) ** (k - 1), k) * v for k, v in _split_weights(word).items()), Fraction(0))
    return total / len(word)


@cache
def dynkin_denominator(degree: int) -> int:
    """lcm of the word coefficient denominators up to the given degree."""
    words = (w for m in range(1, degree + 1) for w in itertools.product((0, 1), repeat=m))
    return denominator_lcm(dynkin_coefficient(w) for w in words)


@lru_cache(maxsize=ALGEBRA_CACHE_SIZE)
def _class_of(sc: StructureConstants) -> int:
    return lower_central_series(sc)[1]


def bch(x: Sequence, y: Sequence, sc: StructureConstants) -> Vector:
    """
    log(exp x exp y), truncated at the nilpotency class of sc.

    Right-nested brackets are built one letter at a time from their
    suffixes; a zero suffix prunes every word that extends it.
    """
    x, y = vec(x), vec(y)
    if len(x) != sc.dim or len(y) != sc.dim:
        raise DimensionMismatchError(f"bch needs vectors of length {sc.dim}, got {len(x)} and {len(y)}")
    letters = (x, y)
    total = [a + b for a, b in zip(x, y)]
    level: Dict[Word, Vector] = {(0,): x, (1,): y}
    for _ in range(2, _class_of(sc) + 1):
        nxt = {}
        for suffix, value in level.items():
            for a in (0, 1):
                v = bracket(letters[a], value, sc)
                if not is_zero_vector(v):
                    nxt[(a,) + suffix] = v
        for word, v in nxt.items():
            c = dynkin_coefficient(word)
            if c:
                for k, t in enumerate(v):
                    if t:
                        total[k] += c * t
        if not nxt:
            break
        level = nxt
    return tuple(total)


@dataclass(frozen=True)
class LatticePoint:
    """log g for g in the lattice group: an integral coordinate vector."""

    coords: Tuple[int, ...]

    @classmethod
    def of(cls, values: Sequence) -> "LatticePoint":
        values = vec(values)
        if not is_integral_vector(values):
            raise LatticeNotClosedError(f"{[str(v) for v in values]} is not an integral point")
        return cls(tuple(int(v) for v in values))

    @classmethod
    def identity(cls, n: int) -> "LatticePoint":
        return cls((0,) * n)

    def multiply(self, other: "LatticePoint", sc: StructureConstants) -> "LatticePoint":
        return LatticePoint.of(bch(self.coords, other.coords, sc))

    def inverse(self) -> "LatticePoint":
        return LatticePoint(tuple(-a for a in self.coords))

    def vector(self) -> Vector:
        return vec(self.coords)


# ---------------------------------------------------------------------------
# Lattice closure
# ---------------------------------------------------------------------------

def _poly_add_scaled(target: Poly, source: Poly, factor: Fraction):
    for mono, c in source.items():
        value = target.get(mono, Fraction(0)) + factor * c
        if value:
            target[mono] = value
        else:
            target.pop(mono, None)


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            mono = tuple(sorted(m1 + m2))
            value = out.get(mono, Fraction(0)) + c1 * c2
            if value:
                out[mono] = value
            else:
                out.pop(mono, None)
    return out


def _poly_bracket(p: List[Poly], q: List[Poly], sc: StructureConstants) -> List[Poly]:
    out: List[Poly] = [{} for _ in range(sc.dim)]
    for (i, j), v in sc.table:
        coeff = _poly_mul(p[i], q[j])
        _poly_add_scaled(coeff, _poly_mul(p[j], q[i]), Fraction(-1))
        if not coeff:
            continue
        for k, a in enumerate(v):
            if a:
                _poly_add_scaled(out[k], coeff, a)
    return out


@lru_cache(maxsize=ALGEBRA_CACHE_SIZE)
def bch_polynomials(sc: StructureConstants) -> Tuple[Tuple[Tuple[Tuple[int, ...], Fraction], ...], ...]:
    """
    The coordinates of bch(x, y) as polynomials in x_1..x_n, y_1..y_n.

    Monomials are sorted tuples of variable indices, 0..n-1 for x and
    n..2n-1 for y.
    """
    n = sc.dim
    letters = (
        [{(i,): Fraction(1)} for i in range(n)],
        [{(n + i,): Fraction(1)} for i in range(n)],
    )
    total: List[Poly] = [{} for _ in range(n)]
    for letter in letters:
        for k in range(n):
            _poly_add_scaled(total[k], letter[k], Fraction(1))
    level: Dict[Word, List[Poly]] = {(0,): letters[0], (1,): letters[1]}
    for degree in range(2, _class_of(sc) + 1):
        nxt = {}
        for suffix, value in level.items():
            for a in (0, 1):
                v = _poly_bracket(letters[a], value, sc)
                if any(v):
                    nxt[(a,) + suffix] = v
        for word, v in nxt.items():
            c = dynkin_coefficient(word)
            if c:
                for k in range(n):
                    _poly_add_scaled(total[k], v[k], c)
        logger.debug("%s: bch degree %s, %s nonzero words", sc, degree, len(nxt))
        if not nxt:
            break
        level = nxt
    return tuple(tuple(sorted(p.items())) for p in total)


def _monomial_name(mono: Tuple[int, ...], n: int) -> str:
    parts = []
    for var, group in itertools.groupby(mono):
        power = len(list(group))
        name = f"x{var + 1}" if var < n else f"y{var - n + 1}"
        parts.append(name if power == 1 else f"{name}^{power}")
    return "*".join(parts)


@dataclass(frozen=True)
class ClosureEvidence:
    method: str
    message: str
    coordinate: Optional[int] = None
    monomial: Optional[str] = None
    coefficient: Optional[Fraction] = None
    point: Optional[Tuple[Vector, Vector]] = None


def _simplex_points(length: int, total: int):
    """Nonnegative integer vectors of the given length with coordinate sum <= total."""
    if length == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _simplex_points(length - 1, total - first):
            yield (first,) + rest


def _grid_check(sc: StructureConstants, cap: int) -> Tuple[bool, ClosureEvidence]:
    """
    A polynomial of total degree <= c is integer-valued on Z^m iff it is
    integral at every nonnegative point with coordinate sum <= c.
    """
    n, c = sc.dim, _class_of(sc)
    count = comb(2 * n + c, c)
    if count > cap:
        raise OracleBoundExceededError(
            f"exact closure check needs {count} grid points, cap is {cap} (COHOPF_EXACT_GRID_CAP)"
        )
    for point in _simplex_points(2 * n, c):
        x, y = vec(point[:n]), vec(point[n:])
        z = bch(x, y, sc)
        if not is_integral_vector(z):
            k = next(i for i, a in enumerate(z) if a.denominator != 1)
            return False, ClosureEvidence(
                method="grid",
                message=f"bch at grid point has coordinate e{k + 1} = {z[k]}",
                coordinate=k + 1,
                coefficient=z[k],
                point=(x, y),
            )
    return True, ClosureEvidence(method="grid", message=f"integral on all {count} grid points")


def lattice_closure_check(sc: StructureConstants, exact: bool = False,
                          grid_cap: Optional[int] = None) -> Tuple[bool, ClosureEvidence]:
    """
    Is Z^n closed under bch in this basis?

    The default test is sufficient only: every coefficient of the BCH
    coordinate polynomials must be an integer. With exact=True a failed
    coefficient test falls back to the integer-valuedness grid.

    Returns:
        (closed, evidence) with the first offending coefficient or point
    """
    n = sc.dim
    for k, poly in enumerate(bch_polynomials(sc)):
        for mono, c in poly:
            if c.denominator != 1:
                evidence = ClosureEvidence(
                    method="coefficients",
                    message=f"coefficient {c} of {_monomial_name(mono, n)} in coordinate e{k + 1} is not an integer",
                    coordinate=k + 1,
                    monomial=_monomial_name(mono, n),
                    coefficient=c,
                )
                if exact:
                    logger.debug("%s: %s; falling back to the exact grid", sc, evidence.message)
                    return _grid_check(sc, EXACT_GRID_CAP if grid_cap is None else grid_cap)
                return False, evidence
    return True, ClosureEvidence(method="coefficients", message="all BCH coefficients are integers")


def lattice_scale_factor(sc: StructureConstants) -> int:
    """
    M such that rescale(sc, M) passes the coefficient test: the lcm of the
    structure constant denominators times the Dynkin denominator up to the
    class. A nested bracket of m letters picks up M^(m-1).
    """
    c = _class_of(sc)
    if c <= 1:
        return 1
    constants = denominator_lcm(a for _, v in sc.table for a in v)
    return constants * dynkin_denominator(c)


# ---------------------------------------------------------------------------
# Endomorphisms
# ---------------------------------------------------------------------------

def is_homomorphism(f: Mat, src: StructureConstants, dst: StructureConstants) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """F[e_i, e_j] == [F e_i, F e_j] on every basis pair; the first failing pair is 1-based."""
    if f.shape != (dst.dim, src.dim):
        raise DimensionMismatchError(f"map must be {dst.dim}x{src.dim}, got {f.rows}x{f.cols}")
    images = f.columns()
    for i in range(src.dim):
        for j in range(i + 1, src.dim):
            if f.apply(src.basis_bracket(i, j)) != bracket(images[i], images[j], dst):
                return False, (i + 1, j + 1)
    return True, None


@dataclass(frozen=True)
class LieEndomorphism:
    matrix: Mat
    algebra: StructureConstants
    is_hom: bool
    is_automorphism: bool
    is_lattice_preserving: bool
    determinant: Fraction
    evidence: str

    def __call__(self, v: Sequence) -> Vector:
        return self.matrix.apply(v)


def classify_endomorphism(f: Mat, sc: StructureConstants) -> LieEndomorphism:
    if f.shape != (sc.dim, sc.dim):
        raise DimensionMismatchError(f"endomorphism of a dim {sc.dim} algebra must be {sc.dim}x{sc.dim}, got {f.rows}x{f.cols}")
    is_hom, pair = is_homomorphism(f, sc, sc)
    d = det(f)
    integral = f.is_integral()
    if not is_hom:
        i, j = pair
        evidence = f"F[e{i},e{j}] != [F e{i}, F e{j}]"
    elif d == 0:
        evidence = "homomorphism with determinant 0"
    elif not integral:
        bad = next((i, j) for i in range(f.rows) for j in range(f.cols) if f[i, j].denominator != 1)
        evidence = f"automorphism, entry ({bad[0] + 1},{bad[1] + 1}) = {f[bad]} is not integral"
    else:
        evidence = f"lattice-preserving automorphism, det {d}"
    return LieEndomorphism(
        matrix=f,
        algebra=sc,
        is_hom=is_hom,
        is_automorphism=is_hom and d != 0,
        is_lattice_preserving=integral,
        determinant=d,
        evidence=evidence,
    )


def image_index(f: LieEndomorphism) -> int:
    """|Z^n : F(Z^n)| as the product of the Smith elementary divisors."""
    if not f.is_hom:
        raise NotLatticeAutomorphismError(f"index needs an automorphism: {f.evidence}")
    if not f.is_lattice_preserving:
        raise NotLatticeAutomorphismError(f"index needs an integral map: {f.evidence}")
    if f.determinant == 0:
        raise NotLatticeAutomorphismError("index needs a nonsingular map, determinant is 0")
    divisors, _, _ = smith_normal_form(f.matrix)
    index = abs(prod(divisors))
    if index != abs(f.determinant):
        raise ConsistencyError(f"Smith divisors {divisors} disagree with determinant {f.determinant}")
    return index


def degree_of_cover(f: LieEndomorphism) -> int:
    """Degree of the nilmanifold self-cover induced by F; it is the image index."""
    return image_index(f)


def coset_index_oracle(f: LieEndomorphism, sc: StructureConstants, bound: Optional[int] = None) -> int:
    """
    Count right cosets of H = F(Z^n) in (Z^n, bch) by breadth-first search.

    Representatives are multiplied on the right by the generators +-e_i; a
    new element g joins the coset of r when F^-1(bch(g, -r)) is integral.
    The generators reach every coset when the basis is adapted to the lower
    central series, which holds for every algebra the catalog ships.

    Raises:
        OracleBoundExceededError: more than `bound` cosets found
    """
    bound = ORACLE_CAP if bound is None else bound
    if not (f.is_automorphism and f.is_lattice_preserving):
        raise NotLatticeAutomorphismError(f"coset oracle needs a lattice-preserving automorphism: {f.evidence}")
    closed, evidence = lattice_closure_check(sc)
    if not closed:
        raise LatticeNotClosedError(f"{sc}: {evidence.message}")
    _, inverse = det_inv(f.matrix)
    n = sc.dim
    generators = [LatticePoint.of(unit_vector(n, i)) for i in range(n)]
    generators += [g.inverse() for g in generators]

    def same_coset(g: LatticePoint, r: LatticePoint) -> bool:
        return is_integral_vector(inverse.apply(bch(g.coords, r.inverse().coords, sc)))

    representatives = [LatticePoint.identity(n)]
    queue = deque(representatives)
    while queue:
        r = queue.popleft()
        for s in generators:
            g = r.multiply(s, sc)
            if any(same_coset(g, q) for q in representatives):
                continue
            representatives.append(g)
            if len(representatives) > bound:
                raise OracleBoundExceededError(f"more than {bound} cosets; raise --oracle-cap to continue")
            queue.append(g)
    logger.debug("%s: coset oracle found %s cosets", sc, len(representatives))
    return len(representatives)


def induced_abelianization_map(f: Mat, sc: StructureConstants) -> Mat:
    """Matrix of F on L/[L,L] in the complement of standard vectors completing [L,L]."""
    n = sc.dim
    derived = derived_subalgebra(sc)
    complement = []
    span = derived
    for i in range(n):
        e = unit_vector(n, i)
        if not span.contains(e):
            complement.append(e)
            span = span + Subspace.span([e], n)
    p = Mat.from_columns(list(derived.basis) + complement, rows=n)
    _, p_inv = det_inv(p)
    k = derived.dim
    columns = []
    for u in complement:
        columns.append(p_inv.apply(f.apply(u))[k:])
    return Mat.from_columns(columns, rows=n - k)


def exp_ad_automorphism(x: Sequence, sc: StructureConstants) -> LieEndomorphism:
    """
    exp(ad x), a finite sum since (ad x)^c = 0.

    Raises ConsistencyError unless the result is an automorphism that acts
    trivially on L/[L,L], is unipotent and has determinant 1.
    """
    n = sc.dim
    ad = adjoint(vec(x), sc)
    total = Mat.identity(n)
    term = Mat.identity(n)
    for k in range(1, _class_of(sc) + 1):
        term = (term @ ad).scale(Fraction(1, k))
        if term.is_zero():
            break
        total = total + term
    endo = classify_endomorphism(total, sc)
    if not endo.is_automorphism:
        raise ConsistencyError(f"exp(ad x) is not an automorphism: {endo.evidence}")
    induced = induced_abelianization_map(total, sc)
    if induced != Mat.identity(induced.rows):
        raise ConsistencyError("exp(ad x) moves L/[L,L]")
    if not (total - Mat.identity(n)).power(n).is_zero():
        raise ConsistencyError("exp(ad x) is not unipotent")
    if endo.determinant != 1:
        raise ConsistencyError(f"exp(ad x) has determinant {endo.determinant}")
    return endo


# ---------------------------------------------------------------------------
# Co-Hopfian verdicts
# ---------------------------------------------------------------------------

class VerdictKind(str, Enum):
    WITNESS_FOUND = "witness-found"
    CERTIFIED = "certified-co-hopfian"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CoHopfVerdict:
    kind: VerdictKind
    witness: Optional[LieEndomorphism] = None
    certificate: Optional[NilpotencyCertificate] = None
    index: Optional[int] = None
    lattice_scale: int = 1
    note: str = ""


def cohopf_witness_check(f: Mat, sc: StructureConstants) -> CoHopfVerdict:
    """
    A lattice-preserving automorphism with |det| > 1 embeds the lattice
    group as a proper subgroup of index |det|; |det| = 1 means F(G) = G.
    """
    endo = classify_endomorphism(f, sc)
    if not (endo.is_automorphism and endo.is_lattice_preserving):
        raise NotLatticeAutomorphismError(f"not a lattice-preserving automorphism: {endo.evidence}")
    closed, evidence = lattice_closure_check(sc)
    if not closed:
        raise LatticeNotClosedError(
            f"{sc}: {evidence.message}; rescale by {lattice_scale_factor(sc)} to get a lattice basis"
        )
    index = image_index(endo)
    if index > 1:
        return CoHopfVerdict(
            kind=VerdictKind.WITNESS_FOUND,
            witness=endo,
            index=index,
            note=f"proper self-embedding of index {index}",
        )
    return CoHopfVerdict(kind=VerdictKind.INCONCLUSIVE, index=1, note="unimodular: φ(G) = G, not a witness")


class _BudgetExhausted(Exception):
    pass


def _support_top(v: Sequence) -> int:
    return max((k for k, a in enumerate(v) if a), default=-1)


def _column_search(sc: StructureConstants, bound: int, budget: int) -> Optional[Mat]:
    """
    Depth-first search over integral columns F e_0, F e_1, ... in the order
    0, 1, -1, 2, -2, ... per entry.

    A column j is forced when e_j is the top term of [e_a, e_b] with a < b < j;
    forced columns may leave [-bound, bound]. Every bracket equation whose
    pair and support are already chosen is checked before descending.
    """
    n = sc.dim
    values = [0] + [s * v for v in range(1, bound + 1) for s in (1, -1)]
    weights = depth_weights(sc)
    forcing = {}
    checks = defaultdict(list)
    for a in range(n):
        for b in range(a + 1, n):
            v = sc.basis_bracket(a, b)
            top = _support_top(v)
            if top > b and top not in forcing:
                forcing[top] = (a, b, v)
            checks[max(b, top)].append((a, b, v))
    columns: List[Optional[Vector]] = [None] * n
    nodes = 0

    def candidates(j):
        if j in forcing:
            a, b, v = forcing[j]
            target = list(bracket(columns[a], columns[b], sc))
            for k in range(j):
                if v[k]:
                    target = [t - v[k] * c for t, c in zip(target, columns[k])]
            col = tuple(t / v[j] for t in target)
            if is_integral_vector(col):
                yield col
            return
        free = [k for k in range(n) if weights is None or weights[k] >= weights[j]]
        for choice in itertools.product(values, repeat=len(free)):
            col = [Fraction(0)] * n
            for k, c in zip(free, choice):
                col[k] = Fraction(c)
            yield tuple(col)

    def consistent(j) -> bool:
        for a, b, v in checks[j]:
            lhs = [Fraction(0)] * n
            for k, c in enumerate(v):
                if c:
                    lhs = [t + c * x for t, x in zip(lhs, columns[k])]
            if tuple(lhs) != bracket(columns[a], columns[b], sc):
                return False
        return True

    def extend(j) -> Optional[Mat]:
        nonlocal nodes
        if j == n:
            f = Mat.from_columns(columns, rows=n)
            return f if abs(det(f)) > 1 else None
        for col in candidates(j):
            nodes += 1
            if nodes > budget:
                raise _BudgetExhausted
            columns[j] = col
            if len(row_space_basis(columns[:j + 1], n)) <= j:
                continue
            if not consistent(j):
                continue
            found = extend(j + 1)
            if found is not None:
                return found
        columns[j] = None
        return None

    try:
        return extend(0)
    except _BudgetExhausted:
        logger.debug("%s: column search exhausted its budget of %s nodes", sc, budget)
        return None


def search_witness(sc: StructureConstants, bound: int, budget: Optional[int] = None) -> Optional[Mat]:
    """
    Bounded search for an integral automorphism with |det| > 1.

    Dilations diag(t^w_i) along the lower central series come first
    (t = 2..bound), then the column search.
    """
    budget = SEARCH_NODES if budget is None else budget
    weights = depth_weights(sc)
    if weights is not None:
        for t in range(2, bound + 1):
            f = Mat.diag([t ** w for w in weights])
            if classify_endomorphism(f, sc).is_automorphism:
                logger.debug("%s: dilation with t=%s is an automorphism", sc, t)
                return f
    return _column_search(sc, bound, budget)


def certify_cohopfian(sc: StructureConstants, search_bound: Optional[int] = None,
                      node_budget: Optional[int] = None) -> CoHopfVerdict:
    """
    Certify through characteristic nilpotency, else search for a witness.

    A witness found for an algebra that fails the closure test is reported
    against rescale(sc, M): uniform rescaling leaves the matrix an
    automorphism, and the rescaled basis spans a lattice group.
    """
    charnil, certificate = is_characteristically_nilpotent(sc)
    if charnil:
        return CoHopfVerdict(
            kind=VerdictKind.CERTIFIED,
            certificate=certificate,
            note="every derivation is nilpotent, so every lattice in the group is co-Hopfian",
        )
    bound = SEARCH_BOUND if search_bound is None else search_bound
    if bound <= 0:
        return CoHopfVerdict(kind=VerdictKind.INCONCLUSIVE, certificate=certificate,
                             note="not characteristically nilpotent; witness search disabled")
    witness = search_witness(sc, bound, node_budget)
    if witness is None:
        return CoHopfVerdict(kind=VerdictKind.INCONCLUSIVE, certificate=certificate,
                             note=f"not characteristically nilpotent; no witness with entries in [-{bound}, {bound}]")
    closed, _ = lattice_closure_check(sc)
    scale = 1 if closed else lattice_scale_factor(sc)
    target = sc if closed else rescale(sc, scale)
    verdict = cohopf_witness_check(witness, target)
    if scale != 1:
        verdict = replace(verdict, lattice_scale=scale,
                          note=f"{verdict.note} in the lattice basis scaled by {scale}")
    return verdict


def product_with_line_witness(sc: StructureConstants) -> Tuple[StructureConstants, Mat]:
    """L + Q with F = id + (2): G x Z contains G x 2Z with index 2."""
    total = direct_sum(sc, abelian(1))
    f = Mat.diag([1] * sc.dim + [2])
    endo = classify_endomorphism(f, total)
    if not (endo.is_automorphism and endo.is_lattice_preserving and endo.determinant == 2):
        raise ConsistencyError(f"{total}: id + (2) is not an index 2 witness ({endo.evidence})")
    return total, f


@dataclass(frozen=True)
class EpiVerdict:
    dimension: int
    rank: int
    surjective_over_q: bool
    injective: bool
    isomorphism: bool
    lattice_index: Optional[int]
    surjective_on_lattice: bool
    message: str

    @property
    def epimorphism(self) -> bool:
        return self.surjective_over_q


def same_rank_epi_check(f: Mat, src: StructureConstants, dst: StructureConstants) -> EpiVerdict:
    """
    A surjective homomorphism between algebras of the same dimension is an
    isomorphism; onto the lattice is reported separately via the SNF index.
    """
    if src.dim != dst.dim:
        raise DimensionMismatchError(f"same-rank check needs equal dimensions, got {src.dim} and {dst.dim}")
    ok, pair = is_homomorphism(f, src, dst)
    if not ok:
        raise NotAHomomorphismError(f"F[e{pair[0]},e{pair[1]}] != [F e{pair[0]}, F e{pair[1]}]")
    n = src.dim
    r = rank(f)
    d = det(f)
    surjective = r == n
    injective = d != 0
    if surjective and not injective:
        raise ConsistencyError(f"rank {r} map with determinant 0")
    index = None
    if injective and f.is_integral():
        divisors, _, _ = smith_normal_form(f)
        index = abs(prod(divisors))
    onto_lattice = index == 1
    if not surjective:
        message = f"rank {r} < {n}: not an epimorphism"
    elif onto_lattice:
        message = f"rank {n}: epimorphism and isomorphism, onto the lattice"
    elif index is None:
        message = f"rank {n}: epimorphism and isomorphism over Q; not integral"
    else:
        message = f"rank {n}: epimorphism and isomorphism over Q; image has index {index} in the lattice"
    return EpiVerdict(
        dimension=n,
        rank=r,
        surjective_over_q=surjective,
        injective=injective,
        isomorphism=surjective and injective,
        lattice_index=index,
        surjective_on_lattice=onto_lattice,
        message=message,
    )
