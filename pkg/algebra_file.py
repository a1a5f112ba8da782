"""
Algebra Files - text format for structure constants
    dim 3
    [1,2] = 2*e3          # omitted pairs are zero
    [1,3] = 1/2*e4 - e5
Indices are 1-based, i < j, coefficients exact integers or p/q.
"""

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from liealg import StructureConstants

_HEADER = re.compile(r"dim\s+(\d+)\s*$")
_PAIR = re.compile(r"\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=\s*")
_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?e(\d+)\s*")


class AlgebraParseError(ValueError):
    """Syntax error in an algebra file; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def _parse_terms(text: str, offset: int, line_no: int, dim: int) -> Dict[int, Fraction]:
    coeffs: Dict[int, Fraction] = {}
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise AlgebraParseError("expected a term like 2*e3, -e4 or 1/2*e5", line_no, offset + pos + 1)
        sign, number, index = m.groups()
        if sign is None and not first:
            raise AlgebraParseError("expected '+' or '-' between terms", line_no, offset + m.start() + 1)
        try:
            c = Fraction(number) if number else Fraction(1)
        except ZeroDivisionError:
            raise AlgebraParseError(f"malformed fraction '{number}'", line_no, offset + m.start(2) + 1) from None
        if sign == "-":
            c = -c
        k = int(index)
        if not 1 <= k <= dim:
            raise AlgebraParseError(f"basis index e{k} out of range 1..{dim}", line_no, offset + m.start(3))
        coeffs[k - 1] = coeffs.get(k - 1, Fraction(0)) + c
        pos = m.end()
        first = False
    if first:
        raise AlgebraParseError("bracket has no right-hand side", line_no, offset + 1)
    return coeffs


def parse_vector(text: str, dim: int) -> Tuple[Fraction, ...]:
    """A single right-hand side such as 'e1 + 2*e3' as a coordinate vector."""
    coeffs = _parse_terms(text.strip(), 0, 1, dim)
    return tuple(coeffs.get(k, Fraction(0)) for k in range(dim))


def parse_algebra(text: str, name: Optional[str] = None) -> StructureConstants:
    """
    Parse an algebra file into StructureConstants.

    Only syntax is checked here (pair order, index ranges, fractions,
    duplicates); the Jacobi identity and nilpotency are left to validate.
    """
    dim = None
    brackets: Dict[Tuple[int, int], List[Fraction]] = {}
    seen_at: Dict[Tuple[int, int], int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        if dim is None:
            m = _HEADER.match(body)
            if not m:
                raise AlgebraParseError("expected header 'dim <n>'", line_no, indent + 1)
            dim = int(m.group(1))
            continue
        m = _PAIR.match(body)
        if not m:
            if _HEADER.match(body):
                raise AlgebraParseError("duplicate 'dim' header", line_no, indent + 1)
            raise AlgebraParseError("expected '[i,j] = ...'", line_no, indent + 1)
        i, j = int(m.group(1)), int(m.group(2))
        if i >= j:
            raise AlgebraParseError(f"expected i < j, got [{i},{j}]", line_no, indent + m.start(1) + 1)
        if not (1 <= i and j <= dim):
            raise AlgebraParseError(f"pair [{i},{j}] out of range 1..{dim}", line_no, indent + m.start(1) + 1)
        pair = (i - 1, j - 1)
        if pair in seen_at:
            raise AlgebraParseError(f"pair [{i},{j}] already given on line {seen_at[pair]}", line_no, indent + 1)
        seen_at[pair] = line_no
        coeffs = _parse_terms(body[m.end():], indent + m.end(), line_no, dim)
        v = [Fraction(0)] * dim
        for k, c in coeffs.items():
            v[k] = c
        brackets[pair] = v
    if dim is None:
        raise AlgebraParseError("missing header 'dim <n>'", 1, 1)
    return StructureConstants.build(dim, brackets, name)


def format_vector(v) -> str:
    """2*e3 - 1/2*e5 style; the zero vector is '0'."""
    out = []
    for k, c in enumerate(v):
        if not c:
            continue
        magnitude = abs(c)
        body = f"e{k + 1}" if magnitude == 1 else f"{magnitude}*e{k + 1}"
        if not out:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f"- {body}" if c < 0 else f"+ {body}")
    return " ".join(out) or "0"


def emit_algebra(sc: StructureConstants, header: Optional[List[str]] = None) -> str:
    """Inverse of parse_algebra; optional header lines are written as comments."""
    lines = [f"# {h}" for h in (header or ([str(sc)] if sc.name else []))]
    lines.append(f"dim {sc.dim}")
    for (i, j), v in sc.table:
        lines.append(f"[{i + 1},{j + 1}] = {format_vector(v)}")
    return "\n".join(lines) + "\n"
