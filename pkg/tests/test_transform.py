"""
Tests for the relational transformation and the templates it produces.
"""
import numpy as np
import pytest

from app.align.templates import AlignmentTemplate, BudgetBoundTemplate, LinearTemplate, ScaleTemplate
from app.align.transform import transform
from app.core.exceptions import SampleExhaustedError
from app.exec.transformed import Counterexample, run_transformed
from app.lang.ast import Var
from app.lang.parser import parse_file
from app.lang.pretty import pretty
from app.sketch.generator import enumerate_subsketches, generate_sketch
from tests.conftest import fixture_path


@pytest.fixture(scope="module")
def release_transformed(release):
    """The release sketch keeping only the entry noise."""
    return transform(enumerate_subsketches(release)[-1])


def test_release_layout(release_transformed):
    """Test the hole counts and the template of the single site."""
    t = release_transformed
    assert (t.theta_count, t.lambda_count, t.gamma_count) == (2, 1, 0)
    assert t.alignment("eta1").cases[0].labels() == ("const", "q^")
    assert not t.alignment("eta1").is_conditional
    assert [a.rule for a in t.assertions] == ["laplace", "cost", "return", "budget"]
    assert not t.has_while_priv


def test_release_body(release_transformed):
    """Test the sampling prologue and the accounting emitted for one sample."""
    text = pretty(release_transformed.body)
    assert "eta1 := _sample[_idx];" in text
    assert "_idx := _idx + 1;" in text
    assert "eta1^ := theta[0] + theta[1] * q^;" in text
    assert "_epshat := _epshat + cost(eta1^, lambda[0] / eps);" in text
    assert "assert(out^ = 0);" in text
    assert "assert(_epshat <= eps);" in text


def test_release_aligned_run(release_transformed):
    """Test that cancelling the input distance passes every assertion."""
    cx = Counterexample({}, {"q": 3.0}, {"q": 0.5}, (0.2,))
    report = run_transformed(release_transformed, cx, (0.0, -1.0), (1.0,))
    assert report.violations == 0
    assert report.epsilon_hat == pytest.approx(0.5)
    assert report.aligned == [pytest.approx(-0.5)]


def test_release_unaligned_run(release_transformed):
    """Test that the null alignment leaves the output distance non-zero."""
    cx = Counterexample({}, {"q": 3.0}, {"q": 0.5}, (0.2,))
    report = run_transformed(release_transformed, cx, (0.0, 0.0), (1.0,))
    assert report.violations == 1
    assert report.failed_ids == [3]


def test_release_budget_violation(release_transformed):
    """Test that a scale too small for the distance breaks the budget."""
    cx = Counterexample({}, {"q": 0.0}, {"q": 1.0}, (0.0,))
    report = run_transformed(release_transformed, cx, (0.0, -1.0), (0.5,))
    assert report.failed_ids == [4]


def test_short_sample_array(release_transformed):
    """Test that running out of samples is reported."""
    with pytest.raises(SampleExhaustedError):
        run_transformed(release_transformed, Counterexample({}, {"q": 0.0}, {}, ()), (0.0, 0.0), (1.0,))


def test_svt_transformed(svt_transformed):
    """Test the site and hole layout of the full sparse vector program."""
    t = svt_transformed
    assert [s.eta for s in t.sites] == ["eta1", "eta2", "eta3"]
    assert [s.in_loop for s in t.sites] == [False, True, True]
    assert t.lambda_count == 12
    assert t.theta_count == sum(len(a.indices) for a in t.alignments)
    rules = {a.rule for a in t.assertions}
    assert {"laplace", "cost", "if-then", "if-else", "budget"} <= rules
    assert "return" not in rules


def test_svt_query_template(svt_transformed):
    """Test that the query noise may depend on the query distance."""
    labels = {label for case in svt_transformed.alignment("eta2").cases for label in case.labels()}
    assert "q^[i]" in labels


def test_dump(svt_transformed):
    """Test the debug dump of a transformed program."""
    dump = svt_transformed.dump()
    assert dump["holes"]["lambda"] == 12
    assert dump["sites"][0] == {"eta": "eta1", "inLoop": False}
    assert len(dump["assertions"]) == len(svt_transformed.assertions)


def test_while_priv_program():
    """Test the budget-bound holes and the per-iteration assertion of a while-priv loop."""
    t = transform(generate_sketch(parse_file(fixture_path("svt_whilepriv.dp"))))
    assert t.has_while_priv
    assert t.gamma_count == 4
    rules = [a.rule for a in t.assertions]
    assert "while-priv-bound" in rules
    assert "spent-cost" in rules


def test_linear_template():
    """Test instantiation and zero checks of a linear template."""
    case = LinearTemplate(0, ((1, Var("x^")),))
    assert case.labels() == ("const", "x^")
    assert case.is_zero([0.0, 0.0])
    assert not case.is_zero([0.0, 2.0])
    assert pretty(case.instantiate([1.0, 2.0])) == "1 + 2 * x^"
    assert pretty(case.instantiate([0.0, 1.0])) == "x^"


def test_alignment_assign():
    """Test writing case coefficients by label."""
    template = AlignmentTemplate(
        "eta1",
        (LinearTemplate(0, ((1, Var("x^")),)), LinearTemplate(2, ((3, Var("x^")),))),
        (Var("b"),),
        (Var("b"),),
    )
    theta = template.assign(np.zeros(4), {"const": 1.0, "x^": 2.0}, {"const": 2.0})
    assert list(theta) == [1.0, 2.0, 2.0, 0.0]
    assert template.describe(theta) == "b ? 1 + 2 * x^ : 2"
    with pytest.raises(KeyError):
        template.assign(np.zeros(4), {"y^": 1.0})


def test_scale_describe():
    """Test the readable forms of scale and bound templates."""
    scale = ScaleTemplate("eta1", 0, ((1, "T"), (2, "N"), (3, "size")))
    assert scale.describe([0, 0, 3, 0]) == "3N/eps"
    assert scale.describe([6, 0, 4, 0]) == "(4N + 6)/eps"
    assert scale.describe([2, 0, 0, 0]) == "2/eps"
    assert scale.evaluate([6, 0, 4, 0], {"N": 10, "eps": 2}) == pytest.approx(23.0)
    assert scale.evaluate([0, 0, 3, 0], {"N": 2, "eps": 1}) == pytest.approx(6.0)
    lam = scale.assign(np.zeros(4), 1.0, N=2.0)
    assert list(lam) == [1.0, 0.0, 2.0, 0.0]
    bound = BudgetBoundTemplate(0, 0, ((1, "N"),))
    assert bound.describe([0, 1]) == "eps/N"
