from fractions import Fraction

import pytest

from algebra_file import AlgebraParseError, emit_algebra, format_vector, parse_algebra, parse_vector
from catalog import filiform, heisenberg_lattice
from conftest import require_entry
from liealg import abelian


def test_parse_algebra():
    text = """
    # three-dimensional Heisenberg algebra on a lattice basis
    dim 3

    [1,2] = 2*e3   # the only bracket
    """
    sc = parse_algebra(text, "h3")
    assert sc == heisenberg_lattice(1)
    assert str(sc) == "h3"


def test_parse_fractions_and_signs():
    sc = parse_algebra("dim 5\n[1,3] = 1/2*e4 - e5\n[1,2] = -e3 + 3*e4\n")
    assert sc.basis_bracket(0, 2) == (0, 0, 0, Fraction(1, 2), -1)
    assert sc.basis_bracket(0, 1) == (0, 0, -1, 3, 0)


def test_repeated_terms_add_up():
    sc = parse_algebra("dim 3\n[1,2] = e3 + e3\n")
    assert sc == heisenberg_lattice(1)


def test_parse_vector():
    assert parse_vector("e1 + 2*e3", 3) == (1, 0, 2)
    assert parse_vector(" -1/3*e2 ", 2) == (0, Fraction(-1, 3))


@pytest.mark.parametrize(
    "text, line, column, reason",
    [
        ("dim 3\n[1,2] = 2*e3 + x\n", 2, 14, "expected a term like 2*e3, -e4 or 1/2*e5"),
        ("dim 3\n[2,1] = e3\n", 2, 2, "expected i < j, got [2,1]"),
        ("dim 3\n[1,4] = e3\n", 2, 2, "pair [1,4] out of range 1..3"),
        ("dim 3\n[1,2] = e4\n", 2, 9, "basis index e4 out of range 1..3"),
        ("dim 3\n[1,2] = e3\n[1,2] = e3\n", 3, 1, "pair [1,2] already given on line 2"),
        ("dim 3\n[1,2] = e3 e3\n", 2, 12, "expected '+' or '-' between terms"),
        ("dim 3\n[1,2] = 1/0*e3\n", 2, 9, "malformed fraction '1/0'"),
        ("dim 3\n[1,2] =\n", 2, 8, "bracket has no right-hand side"),
        ("[1,2] = e3\n", 1, 1, "expected header 'dim <n>'"),
        ("dim 3\ndim 4\n", 2, 1, "duplicate 'dim' header"),
        ("# nothing here\n", 1, 1, "missing header 'dim <n>'"),
    ],
)
def test_parse_errors(text, line, column, reason):
    with pytest.raises(AlgebraParseError) as excinfo:
        parse_algebra(text)
    err = excinfo.value
    assert (err.line, err.column, err.reason) == (line, column, reason)
    assert str(err).startswith(f"line {line}, column {column}: ")


def test_format_vector():
    assert format_vector((0, 0, 1, 0, Fraction(-1, 2))) == "e3 - 1/2*e5"
    assert format_vector((-1, 2, 0)) == "-e1 + 2*e2"
    assert format_vector((0, 0)) == "0"


def test_emit_then_parse_gives_the_same_algebra():
    cases = [abelian(2), heisenberg_lattice(2), filiform(6), require_entry("cn8")]
    for sc in cases:
        text = emit_algebra(sc)
        assert text.splitlines()[0] == f"# {sc}"
        assert parse_algebra(text) == sc
    assert emit_algebra(heisenberg_lattice(1), header=["note"]) == "# note\ndim 3\n[1,2] = 2*e3\n"
