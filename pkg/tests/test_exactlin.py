from fractions import Fraction

import pytest
import sympy

from exactlin import (
    Mat,
    NonSquareMatrixError,
    as_rat,
    det,
    det_inv,
    kernel_basis,
    pivots_of,
    rank,
    row_space_basis,
    rref,
    smith_normal_form,
    solve_in_span,
)


def random_int_matrix(rng, rows, cols, low=-4, high=4):
    return Mat.from_rows([[rng.randint(low, high) for _ in range(cols)] for _ in range(rows)])


def to_sympy(m: Mat) -> sympy.Matrix:
    return sympy.Matrix(m.rows, m.cols, [sympy.Rational(x.numerator, x.denominator) for x in m.entries])


def test_as_rat_rejects_floats():
    assert as_rat("3/6") == Fraction(1, 2)
    assert as_rat(4) == Fraction(4)
    with pytest.raises(TypeError):
        as_rat(0.5)


def test_rref_and_rank():
    m = Mat.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    reduced, r, pivots = rref(m)
    assert r == 2
    assert pivots == [0, 1]
    assert reduced.row(0) == (1, 0, 1)
    assert reduced.row(1) == (0, 1, 1)
    assert reduced.row(2) == (0, 0, 0)
    assert rank(Mat.zeros(3, 4)) == 0


def test_kernel_basis_is_canonical():
    m = Mat.from_rows([[1, 2, 3], [2, 4, 6]])
    assert kernel_basis(m) == [(-2, 1, 0), (-3, 0, 1)]
    for v in kernel_basis(m):
        assert m.apply(v) == (0, 0)


def test_kernel_matches_sympy_nullity(rng):
    for _ in range(30):
        m = random_int_matrix(rng, rng.randint(1, 5), rng.randint(1, 6), -2, 2)
        basis = kernel_basis(m)
        assert len(basis) == m.cols - to_sympy(m).rank()
        for v in basis:
            assert all(x == 0 for x in m.apply(v))


def test_solve_in_span():
    span = row_space_basis([(1, 1, 0), (0, 1, 1)], 3)
    pivots = pivots_of(span)
    assert solve_in_span(span, pivots, (2, 3, 1)) is not None
    assert solve_in_span(span, pivots, (1, 0, 0)) is None


def test_det_and_inverse_agree_with_sympy(rng):
    for _ in range(40):
        n = rng.randint(1, 5)
        m = random_int_matrix(rng, n, n)
        d, inv = det_inv(m)
        assert d == int(to_sympy(m).det())
        if d:
            assert inv @ m == Mat.identity(n)
        else:
            assert inv is None


def test_det_of_rational_matrix():
    hilbert = Mat.from_rows([[Fraction(1, i + j + 1) for j in range(3)] for i in range(3)])
    assert det(hilbert) == Fraction(1, 2160)


def test_det_needs_square():
    with pytest.raises(NonSquareMatrixError):
        det(Mat.zeros(2, 3))


def _check_snf(m: Mat, d, left: Mat, right: Mat):
    diag = left @ m @ right
    for i in range(m.rows):
        for j in range(m.cols):
            expected = d[i] if i == j else 0
            assert diag[i, j] == expected
    assert abs(det(left)) == 1
    assert abs(det(right)) == 1
    nonzero = [x for x in d if x]
    assert all(x > 0 for x in nonzero)
    for a, b in zip(d, d[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)


def test_smith_normal_form_known_example():
    m = Mat.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    d, left, right = smith_normal_form(m)
    assert d == [2, 6, 12]
    _check_snf(m, d, left, right)


def test_smith_normal_form_diagonal_and_rectangular():
    d, left, right = smith_normal_form(Mat.diag([2, 3]))
    assert d == [1, 6]
    m = Mat.from_rows([[2, 4, 6], [4, 8, 12]])
    d, left, right = smith_normal_form(m)
    assert d == [2, 0]
    _check_snf(m, d, left, right)


def test_smith_normal_form_random(rng):
    for _ in range(40):
        n = rng.randint(1, 5)
        m = random_int_matrix(rng, n, n, -6, 6)
        d, left, right = smith_normal_form(m)
        _check_snf(m, d, left, right)
        product = 1
        for x in d:
            product *= x
        assert product == abs(int(to_sympy(m).det()))


def test_smith_normal_form_needs_integers():
    with pytest.raises(ValueError):
        smith_normal_form(Mat.from_rows([[Fraction(1, 2)]]))
