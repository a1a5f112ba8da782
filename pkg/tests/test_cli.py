import json

import pytest

import catalog
import cli
import derivations
import malcev
from algebra_file import parse_algebra
from catalog import filiform
from cli import EXIT_INPUT, EXIT_OK, EXIT_VERDICT, load_settings, parse_matrix, run
from exactlin import Mat


def run_cli(capsys, *argv):
    code = run(list(argv))
    return code, capsys.readouterr().out


def test_bch(capsys):
    code, out = run_cli(capsys, "bch", "catalog:heisenberg_lattice(1)", "--x=e1", "--y=e2")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "e1 + e2 + e3"


def test_bch_with_coordinates(capsys):
    code, out = run_cli(capsys, "bch", "catalog:filiform(4)", "--x=1,0,0,0", "--y=0,1,0,0")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "e1 + e2 + 1/2*e3 + 1/12*e4"


def test_cohopf_finds_witness_on_heisenberg(capsys):
    code, out = run_cli(capsys, "cohopf", "catalog:heisenberg_lattice(1)", "--search-bound", "2")
    assert code == EXIT_VERDICT
    assert "witness found" in out
    assert "index 16" in out


def test_cohopf_certifies_cn7(capsys):
    code, out = run_cli(capsys, "cohopf", "catalog:cn7")
    assert code == EXIT_OK
    assert "certified co-Hopfian" in out


def test_cohopf_inconclusive_without_search(capsys):
    code, out = run_cli(capsys, "cohopf", "catalog:abelian(2)", "--search-bound", "0")
    assert code == EXIT_OK
    assert "inconclusive" in out


def test_charnil(capsys):
    code, out = run_cli(capsys, "charnil", "catalog:cn7")
    assert code == EXIT_OK
    assert "is characteristically nilpotent" in out
    code, out = run_cli(capsys, "charnil", "catalog:filiform(4)")
    assert code == EXIT_VERDICT
    assert "not characteristically nilpotent" in out


def test_charnil_computes_derivations_once(capsys, monkeypatch):
    calls = []
    original = derivations.derivation_space

    def counting(sc):
        calls.append(sc)
        return original(sc)

    monkeypatch.setattr(derivations, "derivation_space", counting)
    monkeypatch.setattr(cli, "derivation_space", counting)
    code, out = run_cli(capsys, "charnil", "catalog:filiform(4)")
    assert code == EXIT_VERDICT
    assert "witness derivation 1,0,0,0; 0,1,0,0; 0,0,2,0; 0,0,0,3 with tr(D^1) != 0" in out
    assert len(calls) == 1


def test_settings_follow_library_defaults(monkeypatch, tmp_path):
    monkeypatch.setattr(malcev, "SEARCH_BOUND", 3)
    monkeypatch.setattr(malcev, "SEARCH_NODES", 17)
    monkeypatch.setattr(malcev, "ORACLE_CAP", 99)
    monkeypatch.setattr(malcev, "EXACT_GRID_CAP", 1234)
    monkeypatch.setattr(catalog, "CATALOG_DIR", tmp_path)
    settings = load_settings()
    assert settings.search_bound == 3
    assert settings.search_nodes == 17
    assert settings.oracle_cap == 99
    assert settings.grid_cap == 1234
    assert settings.catalog_dir == tmp_path


def test_validate_reports_jacobi_failure(tmp_path, capsys):
    path = tmp_path / "bad.alg"
    path.write_text("dim 5\n[1,2] = e3\n[2,3] = e4\n[1,4] = e5\n")
    code, out = run_cli(capsys, "validate", str(path))
    assert code == EXIT_VERDICT
    assert "Jacobi identity fails" in out
    assert "(1, 2, 3)" in out


def test_parse_error_exits_with_input_code(tmp_path, capsys):
    path = tmp_path / "typo.alg"
    path.write_text("dim 3\n[1,2] = 2*e3 + x\n")
    code, out = run_cli(capsys, "validate", str(path))
    assert code == EXIT_INPUT
    assert "❌ parse error: line 2, column 14" in out


def test_missing_file(capsys):
    code, out = run_cli(capsys, "validate", "does/not/exist.alg")
    assert code == EXIT_INPUT
    assert "not found" in out


def test_index_machine_report(capsys):
    code, out = run_cli(
        capsys, "index", "catalog:heisenberg_lattice(1)", "--matrix=2,0,0;0,2,0;0,0,4", "--oracle",
        "--format", "machine",
    )
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["numbers"]["index"] == 16
    assert document["numbers"]["oracle_cosets"] == 16
    assert document["numbers"]["determinant"] == "16"
    assert document["verdicts"]["oracle_agrees"] is True
    assert document["verdicts"]["is_automorphism"] is True
    assert len(document["input_sha256"]) == 64
    assert document["command"][0] == "index"


def test_index_oracle_cap(capsys):
    code, out = run_cli(
        capsys, "index", "catalog:heisenberg_lattice(1)", "--matrix=2,0,0;0,2,0;0,0,4", "--oracle",
        "--oracle-cap", "4",
    )
    assert code == EXIT_INPUT
    assert "oracle bound exceeded" in out


def test_index_rejects_non_homomorphism(capsys):
    code, out = run_cli(capsys, "index", "catalog:heisenberg_lattice(1)", "--matrix=1,0,0;0,1,0;0,0,2")
    assert code == EXIT_INPUT


def test_endo(capsys):
    code, out = run_cli(capsys, "endo", "catalog:heisenberg_lattice(1)", "--matrix=2,0,0;0,2,0;0,0,4")
    assert code == EXIT_OK
    assert "lattice-preserving automorphism, det 16" in out


def test_endo_reports_non_homomorphism(capsys):
    code, out = run_cli(capsys, "endo", "catalog:heisenberg_lattice(1)", "--matrix=2,0,0;0,1,0;0,0,1")
    assert code == EXIT_OK
    assert "F[e1,e2] != [F e1, F e2]" in out
    assert "det = 2" in out
    assert "index of F" not in out


def test_witness_gxz(capsys):
    code, out = run_cli(capsys, "witness-gxz", "catalog:cn7", "--lattice-scale", "--oracle")
    assert code == EXIT_OK
    assert "index 2" in out
    assert "coset oracle: 2 cosets" in out
    code, out = run_cli(capsys, "witness-gxz", "catalog:cn7")
    assert code == EXIT_INPUT


def test_invariants(capsys):
    code, out = run_cli(capsys, "invariants", "catalog:filiform(4)", "--format", "machine")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["numbers"]["class"] == 3
    assert document["numbers"]["abelianization_dim"] == 2
    assert document["verdicts"]["lattice_closed"] is False


def test_derivations(capsys):
    code, out = run_cli(capsys, "derivations", "catalog:heisenberg_lattice(1)", "--seed", "7")
    assert code == EXIT_OK
    assert "dim Der(L) = 6" in out


def test_catalog_listing(capsys):
    code, out = run_cli(capsys, "catalog")
    assert code == EXIT_OK
    assert "6 catalog entries" in out
    for label in ("abelian(3)", "filiform(4)", "cn7", "cn8", "cn9"):
        assert label in out


def test_catalog_absent_entry(capsys):
    code, out = run_cli(capsys, "catalog", "cn9")
    assert code == EXIT_INPUT
    assert "❌ catalog:" in out


def test_catalog_entry_round_trips(capsys):
    code, out = run_cli(capsys, "catalog", "filiform(4)", "--format", "machine")
    assert code == EXIT_OK
    text = json.loads(out)["certificates"]["algebra"]
    assert text.startswith("# filiform(4): ")
    assert parse_algebra(text) == filiform(4)


@pytest.mark.parametrize(
    "argv",
    [
        ["cohopf"],
        ["frobnicate", "catalog:cn7"],
        ["cohopf", "catalog:cn7", "--search-bound", "many"],
        ["bch", "catalog:cn7", "--x=e1"],
    ],
)
def test_bad_arguments(argv, capsys):
    assert run(argv) == EXIT_INPUT


def test_parse_matrix():
    assert parse_matrix("2,0;0,1/2", 2) == Mat.from_rows([[2, 0], [0, "1/2"]])
    assert parse_matrix("1 2\n3 4\n", 2) == Mat.from_rows([[1, 2], [3, 4]])
