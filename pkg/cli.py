"""
Co-Hopf CLI - command-line frontend
Reads algebra files (or catalog:NAME), runs the library and prints a text
report with markdown tables, or a JSON document with --format=machine.

Usage:
    python cli.py charnil catalog:cn7
    python cli.py cohopf catalog:heisenberg_lattice(1) --search-bound 2
    python cli.py bch catalog:heisenberg_lattice(1) --x e1 --y e2
    python cli.py index my_algebra.alg --matrix "2,0,0;0,2,0;0,0,4" --oracle
"""

import argparse
import hashlib
import json
import logging
import os
import random
import re
import sys
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from dotenv import load_dotenv

# .env must be loaded before the library modules read their defaults
load_dotenv()

import catalog
import malcev
from algebra_file import AlgebraParseError, emit_algebra, format_vector, parse_algebra, parse_vector
from derivations import (
    NilpotencyCertificate,
    der_lie_lcs,
    derivation_space,
    is_characteristically_nilpotent,
    is_derivation,
)
from exactlin import DimensionMismatchError, Mat, as_rat
from liealg import (
    ConsistencyError,
    NotNilpotentError,
    StructureConstants,
    invariant_report,
    rescale,
    require_valid,
    validate,
)
from malcev import (
    LatticeNotClosedError,
    NotAHomomorphismError,
    NotLatticeAutomorphismError,
    OracleBoundExceededError,
    VerdictKind,
    bch,
    certify_cohopfian,
    classify_endomorphism,
    cohopf_witness_check,
    coset_index_oracle,
    image_index,
    lattice_closure_check,
    lattice_scale_factor,
    product_with_line_witness,
)

logger = logging.getLogger(__name__)

__all__ = ["run", "parse_algebra", "emit_algebra"]

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2


class CliInputError(ValueError):
    """Bad command-line input: unreadable file, malformed matrix or vector."""


@dataclass(frozen=True)
class Settings:
    search_bound: int
    search_nodes: int
    oracle_cap: int
    seed: int
    grid_cap: int
    catalog_dir: Path


def load_settings() -> Settings:
    """Defaults as the library read them from the environment; flags override."""
    return Settings(
        search_bound=malcev.SEARCH_BOUND,
        search_nodes=malcev.SEARCH_NODES,
        oracle_cap=malcev.ORACLE_CAP,
        seed=int(os.getenv("COHOPF_SEED", "20240607")),
        grid_cap=malcev.EXACT_GRID_CAP,
        catalog_dir=catalog.CATALOG_DIR,
    )


# ---------------------------------------------------------------------------
# Report envelope
# ---------------------------------------------------------------------------

def _plain(value: Any) -> Any:
    """JSON-ready copy: rationals as 'p/q' strings, matrices as row lists."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, "item"):
        # numpy scalars coming out of DataFrame.to_dict
        return _plain(value.item())
    if isinstance(value, Mat):
        return [[str(x) for x in value.row(i)] for i in range(value.rows)]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


@dataclass
class Report:
    command: List[str]
    input_sha256: Optional[str] = None
    lines: List[str] = field(default_factory=list)
    tables: List[Tuple[str, pd.DataFrame]] = field(default_factory=list)
    verdicts: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    numbers: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def say(self, line: str):
        self.lines.append(line)

    def table(self, title: str, df: pd.DataFrame):
        self.tables.append((title, df))
        self.numbers[title] = df.to_dict(orient="records")

    def to_text(self) -> str:
        out = list(self.lines)
        for title, df in self.tables:
            out.append("")
            out.append(f"📊 {title}")
            out.append(df.to_markdown(index=False))
        return "\n".join(out)

    def to_machine(self, elapsed: float) -> str:
        document = {
            "command": self.command,
            "input_sha256": self.input_sha256,
            "verdicts": _plain(self.verdicts),
            "certificates": _plain(self.certificates),
            "numbers": _plain(self.numbers),
            "elapsed_seconds": round(elapsed, 6),
        }
        return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------

def load_algebra(source: str) -> Tuple[StructureConstants, str]:
    """A path to an algebra file or catalog:NAME; returns the algebra and the sha256 of its text."""
    if source.startswith("catalog:"):
        sc = catalog.get(source[len("catalog:"):])
        text = emit_algebra(sc)
    else:
        path = Path(source)
        if not path.is_file():
            raise CliInputError(f"algebra file not found: {source}")
        text = path.read_text()
        sc = parse_algebra(text, path.stem)
    return sc, hashlib.sha256(text.encode()).hexdigest()


def parse_matrix(text: str, n: int) -> Mat:
    """Inline rows '2,0,0;0,2,0;0,0,4' or a file with one row per line."""
    path = Path(text)
    if "\n" not in text and path.is_file():
        text = path.read_text()
    rows = []
    for chunk in re.split(r"[;\n]", text):
        chunk = chunk.split("#", 1)[0].strip()
        if not chunk:
            continue
        try:
            rows.append([as_rat(x) for x in re.split(r"[,\s]+", chunk) if x])
        except (ValueError, ZeroDivisionError) as e:
            raise CliInputError(f"bad matrix entry in '{chunk}': {e}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise CliInputError(f"matrix must be {n}x{n}, got {len(rows)} rows of lengths {[len(r) for r in rows]}")
    return Mat.from_rows(rows, cols=n)


def parse_point(text: str, n: int) -> Tuple[Fraction, ...]:
    """'e1 + 2*e3' or '1,0,2'."""
    if "e" in text:
        return parse_vector(text, n)
    try:
        values = tuple(as_rat(x) for x in re.split(r"[,\s]+", text.strip()) if x)
    except (ValueError, ZeroDivisionError) as e:
        raise CliInputError(f"bad vector '{text}': {e}") from None
    if len(values) != n:
        raise CliInputError(f"vector must have {n} coordinates, got {len(values)}")
    return values


def _matrix_text(m: Mat) -> str:
    return "; ".join(",".join(str(x) for x in m.row(i)) for i in range(m.rows))


def _certificate_dict(cert: NilpotencyCertificate) -> Dict[str, Any]:
    return {
        "verdict": cert.verdict,
        "flag": [[list(v) for v in s.basis] for s in cert.flag],
        "flag_dims": [s.dim for s in cert.flag],
        "failure_stage": cert.failure_stage,
        "witness": cert.witness,
        "witness_power": cert.witness_power,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    result = validate(sc)
    report.say(f"{'✅' if result.accepted else '❌'} {sc}: {result.message}")
    report.verdicts.update(accepted=result.accepted, nilpotent=result.nilpotent)
    report.numbers.update(dim=sc.dim, series_dims=list(result.series_dims), nilpotency_class=result.nilpotency_class)
    if result.jacobi_failures:
        report.table("Jacobi failures", pd.DataFrame(
            [{"triple": str(t), "residual": format_vector(r)} for t, r in result.jacobi_failures]
        ))
    if not result.accepted:
        report.exit_code = EXIT_VERDICT


def cmd_invariants(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    inv = invariant_report(sc)
    closed, evidence = lattice_closure_check(sc, exact=args.exact, grid_cap=settings.grid_cap)
    report.say(f"📐 {sc}: rank {inv.rank}, class {inv.nilpotency_class}, "
               f"dim Z(L) = {inv.center_dim}, dim L/[L,L] = {inv.abelianization_dim}")
    report.say(f"{'✅' if closed else '⚠️'} lattice closure ({evidence.method}): {evidence.message}")
    if not closed:
        report.say(f"💡 rescale by {lattice_scale_factor(sc)} for a lattice basis")
    report.numbers.update(inv.as_dict())
    report.verdicts.update(lattice_closed=closed, center_in_derived=inv.center_in_derived)
    report.table("Lower central series", pd.DataFrame(
        {"k": range(1, len(inv.series_dims) + 1), "dim L^k": list(inv.series_dims)}
    ))


def cmd_derivations(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    ds = derivation_space(sc)
    rng = random.Random(args.seed if args.seed is not None else settings.seed)
    checks = 20 if ds.dimension else 0
    for _ in range(checks):
        d = ds.combination([rng.randint(-3, 3) for _ in ds.basis])
        if not is_derivation(d, sc):
            raise ConsistencyError(f"{sc}: random span element fails the Leibniz identity")
    report.say(f"🧮 {sc}: dim Der(L) = {ds.dimension} ({checks} random span elements re-checked)")
    report.numbers.update(dim=sc.dim, derivation_dim=ds.dimension, random_checks=checks)
    report.certificates["basis"] = list(ds.basis)
    report.table("Derivation basis", pd.DataFrame(
        [{"D": i + 1, "trace": str(d.trace()), "matrix": _matrix_text(d)} for i, d in enumerate(ds.basis)]
    ))


def cmd_charnil(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    ds = derivation_space(sc)
    verdict, cert = is_characteristically_nilpotent(sc, ds)
    report.verdicts["characteristically_nilpotent"] = verdict
    report.certificates["engel"] = _certificate_dict(cert)
    report.verdicts["certificate_checks"] = cert.check(ds.basis)
    report.numbers["derivation_dim"] = ds.dimension
    if verdict:
        dims, _ = der_lie_lcs(ds)
        report.say(f"✅ {sc} is characteristically nilpotent: every derivation is nilpotent")
        report.say(f"   Der(L) lower central series {dims}; center lies in [L,L]")
        report.numbers["der_series_dims"] = dims
        report.table("Engel flag", pd.DataFrame({"step": range(len(cert.flag)), "dim": [s.dim for s in cert.flag]}))
    else:
        report.say(f"❌ {sc} is not characteristically nilpotent (common kernel vanished at stage {cert.failure_stage})")
        if cert.witness is not None:
            report.say(f"   witness derivation {_matrix_text(cert.witness)} with tr(D^{cert.witness_power}) != 0")
            report.numbers["witness_power"] = cert.witness_power
        report.numbers["failure_stage"] = cert.failure_stage
        report.exit_code = EXIT_VERDICT


def _endomorphism_summary(endo, report: Report):
    report.verdicts.update(
        is_hom=endo.is_hom,
        is_automorphism=endo.is_automorphism,
        is_lattice_preserving=endo.is_lattice_preserving,
    )
    report.numbers["determinant"] = endo.determinant
    report.certificates["evidence"] = endo.evidence


def cmd_endo(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    endo = classify_endomorphism(parse_matrix(args.matrix, sc.dim), sc)
    _endomorphism_summary(endo, report)
    report.say(f"{'✅' if endo.is_automorphism else '⚠️'} {endo.evidence}")
    report.say(f"   det = {endo.determinant}")
    if endo.is_automorphism and endo.is_lattice_preserving:
        index = image_index(endo)
        report.numbers["index"] = index
        report.say(f"   index of F(Z^{sc.dim}) = {index}")


def cmd_cohopf(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    bound = settings.search_bound if args.search_bound is None else args.search_bound
    verdict = certify_cohopfian(sc, search_bound=bound, node_budget=settings.search_nodes)
    report.verdicts["kind"] = verdict.kind
    report.numbers.update(search_bound=bound, index=verdict.index, lattice_scale=verdict.lattice_scale)
    if verdict.certificate is not None:
        report.certificates["engel"] = _certificate_dict(verdict.certificate)
    if verdict.kind == VerdictKind.CERTIFIED:
        report.say(f"✅ {sc}: certified co-Hopfian. {verdict.note}")
    elif verdict.kind == VerdictKind.WITNESS_FOUND:
        report.certificates["witness"] = verdict.witness.matrix
        report.say(f"❌ {sc}: witness found, F = {_matrix_text(verdict.witness.matrix)}, index {verdict.index}")
        report.say(f"   {verdict.note}")
        report.exit_code = EXIT_VERDICT
    else:
        report.say(f"⚠️ {sc}: inconclusive. {verdict.note}")


def cmd_witness_gxz(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    if args.lattice_scale:
        factor = lattice_scale_factor(sc)
        sc = rescale(sc, factor)
        report.numbers["lattice_scale"] = factor
    total, f = product_with_line_witness(sc)
    verdict = cohopf_witness_check(f, total)
    report.verdicts["kind"] = verdict.kind
    report.numbers.update(dim=total.dim, index=verdict.index)
    report.certificates["witness"] = f
    report.say(f"🔧 {total}: F = id + (2) is a lattice-preserving automorphism of index {verdict.index}")
    if args.oracle:
        count = coset_index_oracle(verdict.witness, total, args.oracle_cap or settings.oracle_cap)
        report.numbers["oracle_cosets"] = count
        report.verdicts["oracle_agrees"] = count == verdict.index
        report.say(f"🔍 coset oracle: {count} cosets")
        if count != verdict.index:
            raise ConsistencyError(f"oracle found {count} cosets, determinant says {verdict.index}")


def cmd_bch(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    x, y = parse_point(args.x, sc.dim), parse_point(args.y, sc.dim)
    z = bch(x, y, sc)
    report.numbers.update(x=list(x), y=list(y), product=list(z))
    report.say(format_vector(z))


def cmd_index(args, settings: Settings, report: Report):
    sc, report.input_sha256 = load_algebra(args.file)
    require_valid(sc)
    if args.lattice_scale:
        factor = lattice_scale_factor(sc)
        sc = rescale(sc, factor)
        report.numbers["lattice_scale"] = factor
    endo = classify_endomorphism(parse_matrix(args.matrix, sc.dim), sc)
    _endomorphism_summary(endo, report)
    index = image_index(endo)
    report.numbers["index"] = index
    report.say(f"📏 |det F| = index of F(Z^{sc.dim}) = {index}")
    if args.oracle:
        count = coset_index_oracle(endo, sc, args.oracle_cap or settings.oracle_cap)
        report.numbers["oracle_cosets"] = count
        report.verdicts["oracle_agrees"] = count == index
        report.say(f"🔍 coset oracle: {count} cosets")
        if count != index:
            raise ConsistencyError(f"oracle found {count} cosets, Smith normal form says {index}")


def cmd_catalog(args, settings: Settings, report: Report):
    if args.name:
        sc = catalog.get(args.name)
        item = catalog.entry(*catalog.parse_name(args.name))
        text = emit_algebra(sc, header=[f"{item.label}: {item.description}"])
        report.input_sha256 = hashlib.sha256(text.encode()).hexdigest()
        report.certificates["algebra"] = text
        report.say(text.rstrip("\n"))
        return
    rows = []
    for item in catalog.list_entries():
        rows.append({
            "name": item.label,
            "rank": item.expected.rank,
            "class": item.expected.nilpotency_class,
            "abelianization": item.expected.abelianization,
            "charnil": item.expected.charnil,
            "lattice-closed": item.expected.lattice_closed,
            "status": item.status,
        })
    report.say(f"📚 {len(rows)} catalog entries (families at a default parameter)")
    report.table("Catalog", pd.DataFrame(rows))


COMMANDS = {
    "validate": cmd_validate,
    "invariants": cmd_invariants,
    "derivations": cmd_derivations,
    "charnil": cmd_charnil,
    "endo": cmd_endo,
    "cohopf": cmd_cohopf,
    "witness-gxz": cmd_witness_gxz,
    "bch": cmd_bch,
    "index": cmd_index,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "machine"], default="text", help="Report format")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized re-checks")
    common.add_argument("--verbose", action="store_true", help="DEBUG logging")

    parser = argparse.ArgumentParser(description="Exact co-Hopfian checks for rational nilpotent Lie algebras")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, file=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if file:
            p.add_argument("file", help="Algebra file or catalog:NAME")
        return p

    add("validate", "Jacobi identity and nilpotency")
    p = add("invariants", "Rank, class, series, center, abelianization")
    p.add_argument("--exact", action="store_true", help="Exact grid fallback for lattice closure")
    add("derivations", "Basis of Der(L)")
    add("charnil", "Characteristic nilpotency with Engel certificate")
    p = add("endo", "Classify an endomorphism")
    p.add_argument("--matrix", required=True, help="Rows '2,0,0;0,2,0;0,0,4' or a file")
    p = add("cohopf", "Certify co-Hopfian or search for a witness")
    p.add_argument("--search-bound", type=int, default=None, help="Entry bound B (0 disables search)")
    for name, help_text in (("witness-gxz", "G x Z witness of index 2"), ("index", "Image index |det F|")):
        p = add(name, help_text)
        if name == "index":
            p.add_argument("--matrix", required=True, help="Rows '2,0,0;0,2,0;0,0,4' or a file")
        p.add_argument("--oracle", action="store_true", help="Confirm the index by coset enumeration")
        p.add_argument("--oracle-cap", type=int, default=None, help="Maximum number of cosets")
        p.add_argument("--lattice-scale", action="store_true", help="Rescale the input to a lattice basis first")
    p = add("bch", "Exact BCH product")
    p.add_argument("--x", required=True, help="'e1 + 2*e3' or '1,0,2'")
    p.add_argument("--y", required=True, help="'e1 + 2*e3' or '1,0,2'")
    p = add("catalog", "List the catalog or emit one entry", file=False)
    p.add_argument("name", nargs="?", help="e.g. cn7 or filiform(5)")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute one command and print its report.

    Returns:
        0 on success, 1 when a certification request is answered negatively
        (rejected, not characteristically nilpotent, witness found), 2 on
        input errors
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    settings = load_settings()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    report = Report(command=argv)
    started = time.perf_counter()
    try:
        COMMANDS[args.command](args, settings, report)
    except AlgebraParseError as e:
        print(f"❌ parse error: {e}")
        return EXIT_INPUT
    except OracleBoundExceededError as e:
        print(f"❌ oracle bound exceeded: {e}")
        return EXIT_INPUT
    except catalog.UnknownCatalogEntryError as e:
        print(f"❌ catalog: {e}")
        return EXIT_INPUT
    except (CliInputError, DimensionMismatchError, NotNilpotentError, NotLatticeAutomorphismError,
            NotAHomomorphismError, LatticeNotClosedError, catalog.CatalogInvariantError) as e:
        print(f"❌ {e}")
        return EXIT_INPUT
    except ValueError as e:
        print(f"❌ invalid input: {e}")
        return EXIT_INPUT
    elapsed = time.perf_counter() - started

    if args.format == "machine":
        print(report.to_machine(elapsed))
    else:
        print(report.to_text())
        print(f"\n⏱️ {elapsed:.2f}s")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(run())
