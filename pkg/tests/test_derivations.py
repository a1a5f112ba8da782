import pytest

from catalog import filiform, heisenberg_lattice
from conftest import catalog_algebra, random_vector, require_entry
from derivations import (
    NotALieAlgebraError,
    Verdict,
    der_lie_lcs,
    derivation_space,
    engel_all_nilpotent,
    is_characteristically_nilpotent,
    is_derivation,
    lie_closure,
    matrix_lie_lcs,
    trace_power_oracle,
)
from exactlin import DimensionMismatchError, Mat
from liealg import abelian, center, derived_subalgebra, direct_sum


def unit_matrix(n, i, j):
    rows = [[0] * n for _ in range(n)]
    rows[i][j] = 1
    return Mat.from_rows(rows)


def strictly_upper(n):
    return [unit_matrix(n, i, j) for i in range(n) for j in range(i + 1, n)]


def test_derivation_space_dimensions():
    assert derivation_space(heisenberg_lattice(1)).dimension == 6
    assert derivation_space(abelian(3)).dimension == 9
    ds = derivation_space(filiform(4))
    grading = Mat.diag([1, 1, 2, 3])
    assert is_derivation(grading, filiform(4))
    assert ds.contains(grading)


def test_derivations_satisfy_leibniz_on_random_span_elements(rng):
    for sc in (heisenberg_lattice(2), filiform(5)):
        ds = derivation_space(sc)
        for d in ds.basis:
            assert is_derivation(d, sc)
        for _ in range(10):
            d = ds.combination(random_vector(rng, ds.dimension))
            assert is_derivation(d, sc)
        a, b = ds.basis[0], ds.basis[-1]
        assert ds.contains(a.commutator(b))


def test_is_derivation_checks_shape():
    with pytest.raises(DimensionMismatchError):
        is_derivation(Mat.identity(2), heisenberg_lattice(1))


def test_engel_on_strictly_upper_triangular_basis():
    basis = strictly_upper(4)
    cert = engel_all_nilpotent(basis)
    assert cert.verdict == Verdict.ALL_NILPOTENT
    assert [s.dim for s in cert.flag] == [4, 3, 2, 1, 0]
    assert cert.check(basis)
    for d in basis:
        assert d.power(4).is_zero()


def test_engel_on_identity_fails_at_stage_zero():
    cert = engel_all_nilpotent([Mat.identity(3)])
    assert not cert.all_nilpotent
    assert cert.failure_stage == 0
    assert cert.witness == Mat.identity(3)
    assert cert.witness_power == 1
    assert cert.check([Mat.identity(3)])


def test_engel_rejects_span_not_closed():
    with pytest.raises(NotALieAlgebraError, match=r"\[B1, B2\]"):
        engel_all_nilpotent([unit_matrix(2, 0, 1), unit_matrix(2, 1, 0)])


def test_engel_detects_grading_derivation_of_filiform():
    ds = derivation_space(filiform(4))
    cert = engel_all_nilpotent(ds.basis)
    assert not cert.all_nilpotent
    assert cert.check(ds.basis)


def test_engel_agrees_with_trace_oracle_on_random_spans(rng):
    for trial in range(100):
        n = rng.randint(2, 5)
        with_diagonal = trial % 2 == 1
        gens = []
        for _ in range(2):
            rows = [[0] * n for _ in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    rows[i][j] = rng.randint(-1, 1)
                if with_diagonal:
                    rows[i][i] = rng.randint(-1, 1)
            gens.append(Mat.from_rows(rows))
        span = lie_closure(gens)
        if not span:
            continue
        cert = engel_all_nilpotent(span)
        assert cert.all_nilpotent == trace_power_oracle(span)
        assert cert.check(span)
        if cert.all_nilpotent:
            dims = [s.dim for s in cert.flag]
            assert all(a > b for a, b in zip(dims, dims[1:]))


def test_trace_oracle_examples():
    assert trace_power_oracle(strictly_upper(4))
    assert not trace_power_oracle([Mat.identity(3)])
    with pytest.raises(DimensionMismatchError):
        trace_power_oracle([Mat.zeros(11, 11)])


@pytest.mark.parametrize("name", ["cn7", "cn8", "cn9"])
def test_transcribed_algebras_are_characteristically_nilpotent(name):
    sc = require_entry(name)
    charnil, cert = is_characteristically_nilpotent(sc)
    assert charnil
    ds = derivation_space(sc)
    assert cert.check(ds.basis)
    assert trace_power_oracle(ds.basis)
    _, nilpotent = der_lie_lcs(ds)
    assert nilpotent
    assert center(sc).is_subspace_of(derived_subalgebra(sc))
    for d in ds.basis:
        assert d.power(sc.dim).is_zero()


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_abelian_algebras_are_not_characteristically_nilpotent(n):
    charnil, cert = is_characteristically_nilpotent(abelian(n))
    assert not charnil
    assert cert.failure_stage == 0
    assert cert.check(derivation_space(abelian(n)).basis)
    assert cert.witness == Mat.identity(n)
    assert cert.witness_power == 1


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_filiform_algebras_are_not_characteristically_nilpotent(n):
    charnil, cert = is_characteristically_nilpotent(filiform(n))
    assert not charnil
    assert cert.check(derivation_space(filiform(n)).basis)
    grading = Mat.diag([1] + list(range(1, n)))
    assert cert.witness == grading
    assert cert.witness.trace() != 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_identity_and_grading_are_non_nilpotent_derivations(n):
    identity = Mat.identity(n)
    assert is_derivation(identity, abelian(n))
    assert identity.trace() == n
    if n >= 3:
        grading = Mat.diag([1] + list(range(1, n)))
        assert is_derivation(grading, filiform(n))
        assert grading.trace() != 0
        assert not is_derivation(identity, filiform(n))


def test_engel_witness_prefers_the_diagonal_sum():
    basis = derivation_space(abelian(3)).basis
    cert = engel_all_nilpotent(basis)
    assert cert.witness == Mat.identity(3)
    assert cert.witness_power == 1


def test_precomputed_derivation_space_is_reused():
    ds = derivation_space(filiform(4))
    assert is_characteristically_nilpotent(filiform(4), ds) == is_characteristically_nilpotent(filiform(4))
    with pytest.raises(DimensionMismatchError):
        is_characteristically_nilpotent(filiform(5), ds)


@pytest.mark.parametrize(
    "name,params",
    [
        ("abelian", (1,)),
        ("abelian", (2,)),
        ("abelian", (3,)),
        ("heisenberg_lattice", (1,)),
        ("heisenberg_lattice", (2,)),
        ("filiform", (3,)),
        ("filiform", (4,)),
        ("filiform", (5,)),
        ("filiform", (6,)),
        ("cn7", ()),
        ("cn8", ()),
        ("cn9", ()),
    ],
)
def test_engel_agrees_with_trace_oracle_on_catalog(name, params):
    sc = catalog_algebra(name, params)
    basis = derivation_space(sc).basis
    cert = engel_all_nilpotent(basis)
    assert cert.all_nilpotent == trace_power_oracle(basis)
    assert cert.check(basis)


def test_der_lie_lcs():
    dims, nilpotent = der_lie_lcs(derivation_space(abelian(2)))
    assert dims == [4, 3, 3]
    assert not nilpotent
    gl2 = [unit_matrix(2, i, j) for i in range(2) for j in range(2)]
    assert matrix_lie_lcs(gl2, 2) == ([4, 3, 3], False)
    dims, nilpotent = matrix_lie_lcs(strictly_upper(3), 3)
    assert dims == [3, 1, 0]
    assert nilpotent


def test_zero_dimensional_algebra():
    ds = derivation_space(abelian(0))
    assert ds.dimension == 0
    charnil, cert = is_characteristically_nilpotent(abelian(0))
    assert charnil
    assert der_lie_lcs(ds) == ([0], True)


@pytest.mark.slow
def test_direct_sum_of_characteristically_nilpotent_algebras():
    sc = require_entry("cn7")
    charnil, _ = is_characteristically_nilpotent(direct_sum(sc, sc))
    assert charnil
