"""
Tests for building the synthesized mechanism from a verified candidate.
"""
import pytest

from app.align.transform import transform
from app.cegis.candidate import Candidate
from app.cegis.finalize import finalize, fold, proof
from app.exec.mechanism import run_mechanism
from app.lang.ast import Hole, LinOp, OtherOp, Var
from app.lang.parser import parse_file
from app.lang.pretty import pretty
from app.sketch.generator import enumerate_subsketches, generate_sketch
from tests.conftest import fixture_path


@pytest.fixture(scope="module")
def release_full(release):
    sk = enumerate_subsketches(release)[0]
    return sk, transform(sk)


def test_fold():
    """Test that holes are replaced and constants folded."""
    e = LinOp("+", Hole("theta", 0), OtherOp("*", Hole("theta", 1), Var("x")))
    assert pretty(fold(e, theta=(0.0, 1.0))) == "x"
    assert pretty(fold(e, theta=(2.0, 0.0))) == "2"
    assert pretty(fold(OtherOp("/", Hole("lambda", 0), Var("eps")), lam=(3.0,))) == "3 / eps"


def test_removes_zero_aligned_sample(release_full):
    """Test that a sample with a zero alignment is dropped and read as 0."""
    sk, t = release_full
    cand = Candidate((0.0, -1.0, 0.0, 0.0), (1.0, 5.0))
    assert cand.removed(t) == ("eta2",)
    m = finalize(sk, t, cand)
    text = pretty(m)
    assert "eta1 := Lap(1 / eps);" in text
    assert "eta2" not in text
    assert "out := q_noisy;" in text
    assert run_mechanism(m, {"q": 3.0, "eps": 1.0}, replay=[0.25]) == [3.25]


def test_keep_all(release_full):
    """Test that keep_all leaves every sample in place."""
    sk, t = release_full
    text = pretty(finalize(sk, t, Candidate((0.0, -1.0, 0.0, 0.0), (1.0, 5.0)), keep_all=True))
    assert "eta1 := Lap(1 / eps);" in text
    assert "eta2 := Lap(5 / eps);" in text


def test_everything_removed_returns_source(release, release_full):
    """Test that an all-zero alignment gives back the source program."""
    sk, t = release_full
    m = finalize(sk, t, Candidate((0.0,) * 4, (1.0, 1.0)))
    assert pretty(m) == pretty(release)
    assert "Lap(" not in pretty(m)


def test_proof(release_full):
    """Test the textual proof of the retained samples."""
    _, t = release_full
    cand = Candidate((0.0, -1.0, 0.0, 0.0), (1.0, 5.0))
    result = proof(t, cand)
    assert set(result["alignments"]) == {"eta1"}
    assert result["scales"] == {"eta1": "1/eps"}
    assert result["bounds"] == {}


def test_while_priv_guard():
    """Test that while-priv loops become budget-guarded while loops."""
    sk = generate_sketch(parse_file(fixture_path("svt_whilepriv.dp")))
    t = transform(sk)
    cand = Candidate((1.0,) * t.theta_count, (1.0,) * t.lambda_count, (1.0,) * t.gamma_count)
    text = pretty(finalize(sk, t, cand))
    assert "while-priv" not in text
    assert "_spent := 0;" in text
    assert "_spent <=" in text
    assert set(proof(t, cand)["bounds"]) == {"loop1"}
