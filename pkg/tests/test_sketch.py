"""
Tests for sketch generation and sub-sketch enumeration.
"""
from app.lang.ast import Sample, iter_commands
from app.lang.parser import parse
from app.lang.pretty import pretty
from app.sketch.generator import DEFINITION, USE, enumerate_subsketches, generate_sketch


def samples(p):
    return [c for _, c in iter_commands(p.body) if isinstance(c, Sample)]


def test_svt_noise_sites(svt_sketch):
    """Test the three sites of the full sparse vector sketch, mandatory ones first."""
    sites = svt_sketch.sites
    assert svt_sketch.etas == ("eta1", "eta2", "eta3")
    assert (sites[0].variable, sites[0].site, sites[0].location.optional) == ("T", DEFINITION, False)
    assert (sites[1].variable, sites[1].site, sites[1].location.optional) == ("q", USE, False)
    assert (sites[2].variable, sites[2].site, sites[2].location.optional) == ("T", USE, True)
    assert not sites[0].in_loop
    assert sites[1].in_loop and sites[2].in_loop


def test_svt_optional_location(svt_sketch):
    """Test that the threshold re-use is the only optional location."""
    assert [loc.key for loc in svt_sketch.optional] == ["2.0.0:T:use"]
    assert svt_sketch.is_full
    assert svt_sketch.label == "full"


def test_svt_scale_templates(svt_sketch):
    """Test the scale hole layout: one constant plus one hole per public real per site."""
    assert svt_sketch.template_vars == ("T", "N", "size")
    assert [s.lambdas for s in svt_sketch.sites] == [(0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11)]
    assert svt_sketch.scale_holes == 12
    text = pretty(svt_sketch.program)
    assert "eta1 := Lap((lambda[0] + lambda[1] * T + lambda[2] * N + lambda[3] * size) / eps);" in text


def test_svt_noisy_copies(svt_sketch):
    """Test that the branch reads the noisy threshold and the noisy query copy."""
    text = pretty(svt_sketch.program)
    assert "T_noisy := T + eta1;" in text
    assert "q_noisy1 := q[i] + eta2;" in text
    assert "T_noisy := T_noisy + eta3;" in text
    assert "if (q_noisy1 >= T_noisy) {" in text


def test_svt_subsketches(svt):
    """Test that the full sketch comes first, then the sketch without optional noise."""
    sketches = enumerate_subsketches(svt)
    assert [len(sk.sites) for sk in sketches] == [3, 2]
    assert sketches[1].label == "mandatory"
    assert sketches[1].etas == ("eta1", "eta2")
    assert len(samples(sketches[1].program)) == 2


def test_subsketch_cap(svt):
    """Test that only the full sketch is searched when the cap is too small."""
    assert len(enumerate_subsketches(svt, cap=1)) == 1


def test_release_sketch(release):
    """Test entry noise on a private scalar and its optional re-use."""
    sk = generate_sketch(release)
    assert sk.offending == frozenset({"q"})
    assert [s.location.key for s in sk.sites] == ["entry:q:def", "0:q:use"]
    assert sk.template_vars == ()
    text = pretty(sk.program)
    assert "q_noisy := q + eta1;" in text
    assert "out := q_noisy;" in text


def test_sketch_of_clean_program():
    """Test that sketching leaves the source untouched when nothing is offending."""

    p = parse(
        "func F(n : real, x : private real) returns (y : real);\n"
        "budget eps;\n"
        "adjacency x : scalar_differ;\n"
        "y := n;\n"
    )
    sk = generate_sketch(p)
    assert sk.sites == ()
    assert sk.program == p


def test_every_corpus_program_sketches(corpus):
    """Test that every corpus program gets at least one mandatory noise site."""
    for name, p in corpus.items():
        sk = generate_sketch(p)
        assert sk.sites, name
        assert any(not s.location.optional for s in sk.sites), name
        assert len(samples(sk.program)) == len(sk.sites), name
