"""
Tests for the command-line entry point.
"""
import json

import pytest

from app.cli.commands import EXIT_INPUT, EXIT_OK
from app.cli.main import build_parser, main
from tests.conftest import FIXTURES, fixture_path

MECHANISM = """
func F(x : private real) returns (y : real);
budget eps;
adjacency x : scalar_differ;

e := Lap(1 / eps);
y := x + e;
"""


@pytest.fixture
def mechanism_files(tmp_path):
    mechanism = tmp_path / "mechanism.dp"
    mechanism.write_text(MECHANISM)
    sample = tmp_path / "input.json"
    sample.write_text(json.dumps({"publicInputs": {"eps": 1}, "privateInputs": {"x": 3}}))
    return str(mechanism), str(sample)


def test_parser_requires_command():
    """Test that a subcommand is required."""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_fixtures_listing(capsys):
    """Test that the shipped corpus loads."""
    assert main(["fixtures", FIXTURES, "--quiet"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "svt.dp\tT, N, size, q\tok" in lines
    assert any(line.startswith("noisymax_transformed.json") and line.endswith("pre-transformed") for line in lines)


def test_fixtures_with_broken_file(tmp_path, capsys):
    """Test that a broken program is reported with an input error."""
    (tmp_path / "broken.dp").write_text("func (")
    assert main(["fixtures", str(tmp_path), "--quiet"]) == EXIT_INPUT
    assert "broken.dp\t\terror:" in capsys.readouterr().out


def test_missing_file(capsys):
    """Test that a missing program is an input error."""
    assert main(["run", "missing.dp", "missing.json", "--quiet"]) == EXIT_INPUT
    assert "file not found" in capsys.readouterr().err


def test_negative_reps(mechanism_files, capsys):
    """Test that a negative repetition count is rejected."""
    mechanism, sample = mechanism_files
    assert main(["run", mechanism, sample, "--reps", "-1", "--quiet"]) == EXIT_INPUT
    assert "--reps" in capsys.readouterr().err


def test_run(mechanism_files, capsys):
    """Test one output line per repetition."""
    mechanism, sample = mechanism_files
    assert main(["run", mechanism, sample, "--reps", "3", "--seed", "5", "--quiet"]) == EXIT_OK
    first = capsys.readouterr().out.splitlines()
    assert len(first) == 3
    assert all(len(json.loads(line)) == 1 for line in first)
    main(["run", mechanism, sample, "--reps", "3", "--seed", "5", "--quiet"])
    assert capsys.readouterr().out.splitlines() == first


def test_run_without_reps(mechanism_files, capsys):
    """Test that zero repetitions print nothing."""
    mechanism, sample = mechanism_files
    assert main(["run", mechanism, sample, "--reps", "0", "--quiet"]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_run_stats(tmp_path, capsys):
    """Test the mean accuracy of a noise-free program against itself."""
    sample = tmp_path / "input.json"
    sample.write_text(json.dumps({"publicInputs": {"T": 0, "N": 1, "size": 3}, "privateInputs": {"q": [-1, 2, 3]}}))
    svt = fixture_path("svt.dp")
    argv = ["run", svt, str(sample), "--reps", "2", "--stats", "--source", svt, "--quiet"]
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["runs: 2", "mean utility: 1.0000"]


def test_stats_need_source(mechanism_files):
    """Test that --stats without the source program is an input error."""
    mechanism, sample = mechanism_files
    assert main(["run", mechanism, sample, "--stats", "--quiet"]) == EXIT_INPUT


def test_check_noisymax(tmp_path, capsys):
    """Test that the NoisyMax reference candidate is verified."""
    out = tmp_path / "check.json"
    argv = [
        "check", fixture_path("noisymax_transformed.json"), "--rounds", "1", "--trials", "20",
        "--iterations", "20", "--particles", "10", "--query-count", "5", "-o", str(out), "--quiet",
    ]
    assert main(argv) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["name"] == "NoisyMax"
    assert report["status"] == "verified"


def test_check_source_needs_proof(capsys):
    """Test that checking a source program without a proof is an input error."""
    assert main(["check", fixture_path("svt.dp"), "--quiet"]) == EXIT_INPUT
    assert "proof" in capsys.readouterr().err


def test_synth_invalid_source(tmp_path, capsys):
    """Test that synthesizing a program without adjacency fails early."""
    src = tmp_path / "bad.dp"
    src.write_text("func F(x : private real) returns (y : real);\nbudget eps;\ny := x;\n")
    assert main(["synth", str(src), "--quiet"]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error:")
