"""
Algebra Catalog - built-in families and transcribed examples
abelian(n), heisenberg_lattice(k) and filiform(n) are generated in code;
cn7, cn8 and cn9 are read from algebra files in the catalog directory and
re-checked against their documented invariants when first loaded.
"""

import logging
import os
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Tuple

from algebra_file import parse_algebra
from derivations import is_characteristically_nilpotent
from liealg import StructureConstants, abelian, invariant_report, require_valid
from malcev import lattice_closure_check

logger = logging.getLogger(__name__)

CATALOG_DIR = Path(os.getenv("COHOPF_CATALOG_DIR") or Path(__file__).resolve().parent / "catalog_data")

TRANSCRIBED = ("cn7", "cn8", "cn9")
ENTRY_CACHE_SIZE = 128
FAMILIES = ("abelian", "heisenberg_lattice", "filiform")

_NAME = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\(\s*(\d+)\s*\))?\s*$")
_EXPECT = re.compile(r"^#\s*expect:\s*(.*)$", re.MULTILINE)
_ABSENT = re.compile(r"^#\s*status:\s*absent\s*$", re.MULTILINE)


class UnknownCatalogEntryError(ValueError):
    """Raised for names or parameters the catalog does not know."""


class AbsentCatalogEntryError(UnknownCatalogEntryError):
    """Raised when a transcription slot exists but has no structure constants."""


class CatalogInvariantError(ValueError):
    """Raised when a shipped entry does not match its documented invariants."""


@dataclass(frozen=True)
class Expected:
    rank: int
    nilpotency_class: int
    abelianization: int
    charnil: Optional[bool] = None
    lattice_closed: Optional[bool] = None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: Tuple[int, ...]
    status: str  # "family" | "transcribed" | "absent"
    expected: Expected
    description: str
    algebra: Optional[StructureConstants] = None

    @property
    def label(self) -> str:
        return f"{self.name}({','.join(map(str, self.params))})" if self.params else self.name

    @property
    def absent(self) -> bool:
        return self.status == "absent"


def parse_name(text: str) -> Tuple[str, Tuple[int, ...]]:
    """'filiform(5)' -> ('filiform', (5,))."""
    m = _NAME.match(text)
    if not m:
        raise UnknownCatalogEntryError(f"cannot read catalog name '{text}'")
    name, param = m.groups()
    return name, (int(param),) if param is not None else ()


def _single_param(name: str, params: Tuple[int, ...], minimum: int) -> int:
    if len(params) != 1:
        raise UnknownCatalogEntryError(f"{name} takes exactly one integer parameter, e.g. {name}({minimum})")
    (p,) = params
    if p < minimum:
        raise UnknownCatalogEntryError(f"{name}({p}) needs a parameter >= {minimum}")
    return p


def heisenberg_lattice(k: int) -> StructureConstants:
    """[e_{2i-1}, e_{2i}] = 2 e_{2k+1}; the 2 makes the BCH term 1/2[x,y] integral."""
    n = 2 * k + 1
    top = [0] * n
    top[n - 1] = 2
    return StructureConstants.build(n, {(2 * i, 2 * i + 1): top for i in range(k)}, f"heisenberg_lattice({k})")


def filiform(n: int) -> StructureConstants:
    """[e_1, e_i] = e_{i+1} for 2 <= i <= n-1."""
    brackets = {}
    for i in range(1, n - 1):
        v = [0] * n
        v[i + 1] = 1
        brackets[(0, i)] = v
    return StructureConstants.build(n, brackets, f"filiform({n})")


def _family(name: str, params: Tuple[int, ...]) -> CatalogEntry:
    if name == "abelian":
        n = _single_param(name, params, 1)
        sc = abelian(n)
        expected = Expected(n, 1, n, charnil=False, lattice_closed=True)
        description = "zero brackets"
    elif name == "heisenberg_lattice":
        k = _single_param(name, params, 1)
        sc = heisenberg_lattice(k)
        expected = Expected(2 * k + 1, 2, 2 * k, charnil=False, lattice_closed=True)
        description = "Heisenberg algebra scaled to a lattice basis"
    elif name == "filiform":
        n = _single_param(name, params, 3)
        sc = filiform(n)
        expected = Expected(n, n - 1, 2, charnil=False, lattice_closed=False)
        description = "standard graded filiform algebra"
    else:
        raise UnknownCatalogEntryError(f"unknown catalog family '{name}'")
    return CatalogEntry(name, params, "family", expected, description, sc)


def _parse_expect(text: str, source: Path) -> Expected:
    m = _EXPECT.search(text)
    if not m:
        raise CatalogInvariantError(f"{source}: missing '# expect:' line")
    fields: Dict[str, str] = dict(item.split("=", 1) for item in m.group(1).split())
    flags = {key: fields[key] == "true" for key in ("charnil", "lattice_closed") if key in fields}
    return Expected(
        rank=int(fields["rank"]),
        nilpotency_class=int(fields["class"]),
        abelianization=int(fields["abelianization"]),
        **flags,
    )


def _description(text: str, name: str) -> str:
    first = text.splitlines()[0] if text else ""
    return first.lstrip("# ").split(":", 1)[-1].strip() or name


def _transcribed(name: str) -> CatalogEntry:
    source = CATALOG_DIR / f"{name}.alg"
    if not source.exists():
        raise UnknownCatalogEntryError(f"catalog file {source} not found")
    text = source.read_text()
    expected = _parse_expect(text, source)
    if _ABSENT.search(text):
        return CatalogEntry(name, (), "absent", expected, _description(text, name))
    sc = parse_algebra(text, name)
    return CatalogEntry(name, (), "transcribed", expected, _description(text, name), sc)


def check_entry(item: CatalogEntry, deep: bool = False) -> CatalogEntry:
    """
    Recompute the documented invariants and raise on any mismatch.

    Rank, class and abelianization are always checked; deep also decides
    characteristic nilpotency and lattice closure.
    """
    if item.absent:
        return item
    sc = item.algebra
    try:
        require_valid(sc)
    except ValueError as e:
        raise CatalogInvariantError(f"{item.label}: {e}") from e
    report = invariant_report(sc)
    found = (report.rank, report.nilpotency_class, report.abelianization_dim)
    wanted = (item.expected.rank, item.expected.nilpotency_class, item.expected.abelianization)
    if found != wanted:
        raise CatalogInvariantError(
            f"{item.label}: (rank, class, abelianization) is {found}, documented {wanted}"
        )
    if deep:
        if item.expected.charnil is not None:
            charnil, _ = is_characteristically_nilpotent(sc)
            if charnil != item.expected.charnil:
                raise CatalogInvariantError(f"{item.label}: charnil is {charnil}, documented {item.expected.charnil}")
        if item.expected.lattice_closed is not None:
            closed, _ = lattice_closure_check(sc)
            if closed != item.expected.lattice_closed:
                raise CatalogInvariantError(
                    f"{item.label}: lattice closure is {closed}, documented {item.expected.lattice_closed}"
                )
    return item


@lru_cache(maxsize=ENTRY_CACHE_SIZE)
def entry(name: str, params: Tuple[int, ...] = ()) -> CatalogEntry:
    """Look up and revalidate one entry; transcribed entries get the deep check."""
    if name in TRANSCRIBED:
        if params:
            raise UnknownCatalogEntryError(f"{name} takes no parameters")
        e = check_entry(_transcribed(name), deep=True)
    else:
        e = check_entry(_family(name, params))
    logger.debug("catalog entry %s loaded (%s)", e.label, e.status)
    return e


def get(name: str, params: Tuple[int, ...] = ()) -> StructureConstants:
    """
    Structure constants of a catalog entry.

    name may carry its parameter inline: get("filiform(5)") == get("filiform", (5,)).

    Raises:
        UnknownCatalogEntryError: unknown name or bad parameters
        AbsentCatalogEntryError: the transcription slot is empty
    """
    if "(" in name:
        name, params = parse_name(name)
    e = entry(name, tuple(params))
    if e.absent:
        raise AbsentCatalogEntryError(f"{name} is an empty transcription slot in {CATALOG_DIR}")
    return e.algebra


DEFAULT_LISTING = (
    ("abelian", (3,)),
    ("heisenberg_lattice", (1,)),
    ("filiform", (4,)),
    ("cn7", ()),
    ("cn8", ()),
    ("cn9", ()),
)


@lru_cache(maxsize=1)
def list_entries() -> Tuple[CatalogEntry, ...]:
    """Stable listing: the three families at a default parameter, then the transcription slots."""
    return tuple(check_entry(entry(name, params), deep=True) for name, params in DEFAULT_LISTING)
