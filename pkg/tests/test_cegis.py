"""
Tests for counterexample search, candidate checking and the synthesis loop.
"""
import logging
import math
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from app.align.transform import transform
from app.cegis import synthesis, verify
from app.cegis.candidate import Candidate, snap
from app.cegis.counterexample import (
    InputLayout, ViolationObjective, canonical_instantiation, find_counterexample, precondition_intervals,
)
from app.cegis.finalize import finalize
from app.cegis.generation import CandidateScore, generate_candidate, hole_space, total_violations
from app.cegis.synthesis import synthesize
from app.cegis.utility import UtilitySpec
from app.cegis.verify import REFUTED, VERIFIED, check_candidate
from app.core.exceptions import SampleExhaustedError, SynthesisFailed, ValidationFailed
from app.exec.paired import paired_check
from app.exec.transformed import Counterexample, run_transformed
from app.lang.ast import Sample, iter_commands
from app.lang.parser import parse, parse_file
from app.schemas.report import SynthesisReport
from app.schemas.run_config import RunConfig
from app.sketch.generator import enumerate_subsketches
from tests.conftest import fixture_path


@pytest.fixture(scope="module")
def release_sub(release):
    """Release sketch with the entry noise only, and its transformed program."""
    sk = enumerate_subsketches(release)[-1]
    return sk, transform(sk)


def test_precondition_intervals(svt):
    """Test the public parameter ranges implied by the sparse vector precondition."""
    intervals = precondition_intervals(svt.decl, 100)
    assert intervals["N"] == (1, 19)
    assert intervals["T"] == (-math.inf, math.inf)
    assert "size" not in intervals


def test_equality_precondition():
    """Test that an equality pins the parameter."""
    p = parse_file(fixture_path("svt_n1.dp"))
    assert precondition_intervals(p.decl, 100)["N"] == (1, 1)


def test_canonical_instantiation(svt):
    """Test the public values the default utility is evaluated at."""
    assert canonical_instantiation(svt.decl) == {"T": 2.0, "N": 10.0, "size": 100.0, "eps": 1.0}
    svt_all = parse_file(fixture_path("svt_all.dp"))
    assert canonical_instantiation(svt_all.decl)["N"] == 100.0


def test_layout_collapses_disjoint_box(small_config):
    """Test that a precondition outside the public box pins the parameter to its bound."""
    p = parse_file(fixture_path("svt_all.dp"))
    cfg = small_config.model_copy(update={"query_count": 20})
    layout = InputLayout.build(SimpleNamespace(decl=p.decl, sites=()), cfg)
    publics = {name: (lo, hi) for name, lo, hi in layout.publics}
    assert publics["size"] == (20.0, 20.0)
    assert publics["N"] == (20.0, 20.0)
    assert layout.samples == 0


def test_layout_of_svt(svt_transformed, small_config):
    """Test the dimensions of the sparse vector search space."""
    cfg = small_config.model_copy(update={"query_count": 10})
    layout = InputLayout.build(svt_transformed, cfg)
    assert layout.samples == 1 + 10 + 10
    assert layout.space().dims == 3 + 10 + 10 + 21
    cx = layout.random(np.random.default_rng(0))
    assert cx.public_inputs["N"] == 1.0
    assert cx.public_inputs["size"] == 10.0
    assert len(cx.private_inputs["q"]) == 10
    assert all(-1.0 <= d <= 1.0 for d in cx.distances["q"])
    assert layout.admits(cx)


def test_one_differ_decoding(small_config):
    """Test that a one_differ input changes exactly one position."""
    p = parse_file(fixture_path("smartsum.dp"))
    layout = InputLayout.build(SimpleNamespace(decl=p.decl, sites=()), small_config)
    assert [(name, lo, hi) for name, lo, hi in layout.publics] == [("M", 1, 5), ("T", 0, 4), ("size", 5.0, 5.0)]
    x = layout.space().lower.copy()
    publics = len(layout.publics)
    x[publics + 5] = 2.2
    x[publics + 6] = 0.75
    cx = layout.decode(x)
    assert cx.distances["q"] == [0.0, 0.0, 0.75, 0.0, 0.0]


def test_decode_release(release_sub, small_config):
    """Test the order of a decoded counterexample."""
    _, t = release_sub
    layout = InputLayout.build(t, small_config)
    assert layout.space().dims == 3
    cx = layout.decode(np.array([2.0, 0.5, 0.1]))
    assert cx == Counterexample({"eps": 1.0}, {"q": 2.0}, {"q": 0.5}, (0.1,))
    assert ViolationObjective(t, layout, Candidate.null(t))(np.array([2.0, 0.5, 0.1])) == -1.0


def test_counterexample_for_null_candidate(release_sub, small_config):
    """Test that the bootstrap candidate is refuted."""
    _, t = release_sub
    cx = find_counterexample(t, Candidate.null(t), small_config, seed=1)
    assert cx is not None
    assert total_violations(t, Candidate.null(t), [cx]) >= 1


def test_no_counterexample_for_private_candidate(release_sub, small_config):
    """Test that a correct alignment and scale survive the search."""
    _, t = release_sub
    assert find_counterexample(t, Candidate((0.0, -1.0), (1.0,)), small_config, seed=1) is None


def test_candidate_score(release_sub, small_config):
    """Test that valid candidates outscore invalid ones."""
    sk, t = release_sub
    cx = Counterexample({}, {"q": 1.0}, {"q": 0.5}, (0.0,))
    score = CandidateScore(sk, t, [cx], UtilitySpec(), small_config, seed=0)
    good = score.evaluate(Candidate((0.0, -1.0), (2.0,)))
    bad = score.evaluate(Candidate((0.0, 0.0), (2.0,)))
    assert good.valid and good.utility == pytest.approx(-8.0)
    assert not bad.valid
    assert bad.score < -small_config.invalid_score < good.score
    assert score(np.array([0.2, -0.9, 2.0])) == pytest.approx(8.0)
    assert hole_space(t, small_config).dims == 3


def test_snap():
    """Test snapping alignment coefficients to the grid."""
    assert list(snap(np.array([0.4, -0.6, 1.5]), 1.0)) == [0.0, -1.0, 2.0]
    assert list(snap(np.array([0.26]), 0.5)) == [0.5]
    assert Candidate((0.0,), (1.4, 2.5)).rounded("up").lam == (2.0, 3.0)


def test_check_reference_noisymax(noisymax, small_config):
    """Test that the NoisyMax reference candidate is verified."""
    cand = Candidate.reference(noisymax)
    result = check_candidate(noisymax, cand, noisymax.mechanism, small_config, rounds=1, trials=30)
    assert result.status == VERIFIED
    assert result.paired_trials == 30
    assert result.max_epsilon_hat <= 1.0 + 1e-6


def test_check_refutes_null(release_sub, small_config):
    """Test that checking the bootstrap candidate finds a counterexample."""
    sk, t = release_sub
    cand = Candidate.null(t)
    result = check_candidate(t, cand, finalize(sk, t, cand, keep_all=True), small_config, rounds=2, trials=5)
    assert result.status == REFUTED
    assert result.reason == "assertion"
    assert result.counterexample is not None


def test_synthesize_rejects_invalid_source(small_config):
    """Test that a malformed source is rejected before searching."""
    p = parse("func F(x : private real) returns (y : real);\nbudget eps;\ny := x;\n")
    with pytest.raises(ValidationFailed):
        synthesize(p, cfg=small_config)


@pytest.fixture(scope="module")
def synthesized(release):
    cfg = RunConfig(
        seed=7, particles=30, iterations=60, early_stop_patience=0, theta_box=(-1.0, 1.0), lambda_box=(0.0, 3.0),
        query_count=5, query_box=(-5.0, 5.0), sample_box=(-5.0, 5.0), max_rounds=8, max_expansions=1,
        refutation_rounds=2,
    )
    return synthesize(release, cfg=cfg)


def test_synthesized_release(synthesized):
    """Test the mechanism synthesized for a single noisy release."""
    samples = [c for _, c in iter_commands(synthesized.mechanism.body) if isinstance(c, Sample)]
    assert len(samples) == 1
    assert math.isfinite(synthesized.utility) and synthesized.utility < 0
    assert len(synthesized.proof["scales"]) == 1
    assert all(v.endswith("/eps") for v in synthesized.proof["scales"].values())
    assert synthesized.rounds >= 1


def test_synthesized_report(synthesized):
    """Test the report built from a synthesis result."""
    report = SynthesisReport.from_result(synthesized)
    data = report.model_dump(by_alias=True)
    assert data["name"] == "Release"
    assert data["schemaVersion"] == 1
    assert "Lap(" in data["mechanism"]
    assert data["config"]["maxRounds"] == 8
    assert data["candidate"]["locations"] is not None


def test_synthesis_failure(release):
    """Test that an exhausted search reports the best failing candidate."""
    cfg = RunConfig(
        seed=1, particles=4, iterations=2, early_stop_patience=0, lambda_box=(0.0, 0.5), query_count=5,
        max_rounds=1, max_expansions=0, refutation_rounds=1,
    )
    with pytest.raises(SynthesisFailed) as exc:
        synthesize(release, cfg=cfg)
    assert exc.value.best_candidate is not None
    assert exc.value.violations >= 1


@pytest.fixture(scope="module")
def svt_mandatory(svt):
    """Sparse vector sketch with the threshold and query noise only."""
    sk = enumerate_subsketches(svt)[-1]
    return sk, transform(sk)


def svt_candidate(t) -> Candidate:
    """Threshold shifted by 1, reported queries lifted over it; scales 3/eps and 3N/eps."""
    theta = np.zeros(t.theta_count)
    t.alignment("eta1").assign(theta, {"const": 1.0})
    t.alignment("eta2").assign(theta, {"const": 1.0, "q^[i]": -1.0}, {})
    lam = np.zeros(t.lambda_count)
    t.scale("eta1").assign(lam, 3.0)
    t.scale("eta2").assign(lam, 0.0, N=3.0)
    return Candidate(tuple(theta.tolist()), tuple(lam.tolist()))


def test_svt_mandatory_layout(svt_mandatory):
    """Test the sites and the branch-dependent query alignment of the mandatory sketch."""
    sk, t = svt_mandatory
    assert sk.label == "mandatory"
    assert [s.eta for s in t.sites] == ["eta1", "eta2"]
    assert t.alignment("eta1").cases[0].labels() == ("const",)
    assert t.alignment("eta2").is_conditional
    assert all("q^[i]" in case.labels() for case in t.alignment("eta2").cases)


def test_svt_one_alignment_per_draw(svt_mandatory):
    """Test that a run records exactly one alignment for every draw it reads."""
    _, t = svt_mandatory
    cand = svt_candidate(t)
    cx = Counterexample(
        {"T": 0.0, "N": 1.0, "size": 10.0, "eps": 1.0}, {"q": [-3.0] * 10}, {"q": [0.5] * 10}, (0.0,) * 11,
    )
    report = run_transformed(t, cx, cand.theta, cand.lam)
    assert report.violations == 0
    assert report.aligned == [1.0] + [0.0] * 10
    assert report.epsilon_hat == pytest.approx(1.0 / 3.0)


def test_svt_paired_trial(svt_mandatory):
    """Test that the aligned run of a reported query gives the same outputs."""
    sk, t = svt_mandatory
    cand = svt_candidate(t)
    cx = Counterexample(
        {"T": 0.0, "N": 1.0, "size": 10.0, "eps": 1.0},
        {"q": [-3.0, 2.0] + [-3.0] * 8},
        {"q": [0.5, -0.5] + [0.0] * 8},
        (0.0,) * 11,
    )
    result = paired_check(finalize(sk, t, cand, keep_all=True), t, cx, cand.theta, cand.lam)
    assert result.violations == 0
    assert result.ok
    assert result.original == [(True, False)]
    assert result.epsilon_hat == pytest.approx(1.0 / 3.0 + 1.5 / 3.0)


def test_check_svt_candidate(svt_mandatory, small_config):
    """Test that the hand-written sparse vector proof is verified."""
    sk, t = svt_mandatory
    cand = svt_candidate(t)
    cfg = small_config.model_copy(update={"query_count": 10})
    result = check_candidate(t, cand, finalize(sk, t, cand, keep_all=True), cfg, rounds=1, trials=100)
    assert result.status == VERIFIED
    assert result.paired_trials == 100
    assert result.exhausted_trials == 0
    assert result.max_epsilon_hat <= 1.0 + 1e-6


@pytest.fixture(scope="module")
def partialsum_full():
    """Partial sum sketch with the accumulator noise and the optional noise on the result."""
    sk = enumerate_subsketches(parse_file(fixture_path("partialsum.dp")))[0]
    return sk, transform(sk)


def test_partialsum_layout(partialsum_full):
    """Test that the result noise may cancel the accumulated distance."""
    sk, t = partialsum_full
    assert sk.label == "full"
    assert [s.in_loop for s in t.sites] == [False, True, False]
    assert sk.site("eta3").location.optional
    assert t.alignment("eta3").cases[0].labels() == ("const", "sum^")


def test_check_partialsum_candidate(partialsum_full, small_config):
    """Test that one draw cancelling the sum distance at scale 1/eps is verified."""
    sk, t = partialsum_full
    theta = t.alignment("eta3").assign(np.zeros(t.theta_count), {"sum^": -1.0})
    lam = t.scale("eta3").assign(np.zeros(t.lambda_count), 1.0)
    cand = Candidate(tuple(theta.tolist()), tuple(lam.tolist()))
    assert cand.removed(t) == ("eta1", "eta2")
    result = check_candidate(t, cand, finalize(sk, t, cand, keep_all=True), small_config, rounds=1, trials=100)
    assert result.status == VERIFIED
    assert result.max_epsilon_hat <= 1.0 + 1e-6
    samples = [c for _, c in iter_commands(finalize(sk, t, cand).body) if isinstance(c, Sample)]
    assert [s.name for s in samples] == ["eta3"]


def test_noisymax_paired_trial(noisymax):
    """Test that the reference NoisyMax proof aligns every loop draw and keeps the argmax."""
    cand = Candidate.reference(noisymax)
    cx = Counterexample(
        {"size": 4.0, "eps": 1.0}, {"q": [1.0, 3.0, 2.0, 0.0]}, {"q": [0.5, -1.0, 1.0, 0.0]}, (0.0,) * 4,
    )
    result = paired_check(noisymax.mechanism, noisymax, cx, cand.theta, cand.lam)
    report = run_transformed(noisymax, cx, cand.theta, cand.lam)
    assert report.aligned == [0.0, 2.0, 0.0, 0.0]
    assert result.violations == 0
    assert result.ok
    assert result.original == [1.0]


def test_generation_returns_valid_candidate(release_sub, small_config):
    """Test that generation ends on a candidate passing every stored counterexample."""
    sk, t = release_sub
    cx = Counterexample({"eps": 1.0}, {"q": 0.0}, {"q": 1.0}, (0.0,))
    result = generate_candidate(sk, t, [cx], UtilitySpec(), small_config, seed=3)
    assert result.valid
    assert total_violations(t, result.candidate, [cx]) == 0


def test_generation_without_valid_candidate(release_sub, small_config):
    """Test that generation raises once every swarm ends on a violating candidate."""
    sk, t = release_sub
    cfg = small_config.model_copy(
        update={"lambda_box": (0.0, 0.5), "particles": 4, "iterations": 3, "generation_retries": 1}
    )
    cx = Counterexample({"eps": 1.0}, {"q": 0.0}, {"q": 1.0}, (0.0,))
    with pytest.raises(SynthesisFailed) as exc:
        generate_candidate(sk, t, [cx], UtilitySpec(), cfg, seed=3)
    assert exc.value.violations >= 1
    assert total_violations(t, exc.value.best_candidate, [cx]) == exc.value.violations


def test_refutation_trials_add_up(release, small_config, monkeypatch):
    """Test that the reported refutation trials cover every expansion attempt."""
    search = synthesis._search
    per_attempt = []

    def first_attempt_unsolved(sketches, utility, cfg, seed):
        outcomes = search(sketches, utility, cfg, seed)
        if not per_attempt:
            outcomes = [replace(o, violations=1) for o in outcomes]
        per_attempt.append(sum(o.refutation_trials for o in outcomes))
        return outcomes

    monkeypatch.setattr(synthesis, "_search", first_attempt_unsolved)
    result = synthesize(release, cfg=small_config)
    assert len(per_attempt) == 2
    assert result.refutation_trials == sum(per_attempt)
    assert result.refutation_trials >= small_config.refutation_rounds


def test_check_counts_short_sample_arrays(noisymax, small_config, monkeypatch, caplog):
    """Test that paired trials running out of samples are counted and logged."""

    def exhausted(*args, **kwargs):
        raise SampleExhaustedError("replay holds 0 samples")

    monkeypatch.setattr(verify, "paired_check", exhausted)
    cand = Candidate.reference(noisymax)
    with caplog.at_level(logging.WARNING, logger="app.cegis.verify"):
        result = check_candidate(noisymax, cand, noisymax.mechanism, small_config, rounds=0, trials=5)
    assert result.status == VERIFIED
    assert result.paired_trials == 0
    assert result.exhausted_trials == 5
    assert "5 of 5 paired trials ran out of samples" in caplog.text
