"""
Tests for the run configuration and the JSON schemas.
"""
import json

import pytest
from pydantic import ValidationError

from app.cegis.candidate import Candidate
from app.cegis.utility import CUSTOM
from app.core.config import Settings
from app.exec.transformed import Counterexample
from app.schemas.candidate import CandidateModel, CounterexampleModel
from app.schemas.run_config import RunConfig
from app.schemas.utility import SampleInput, UtilitySpecModel
from tests.conftest import fixture_path


def test_run_config_from_settings():
    """Test that settings fill the configuration and overrides win."""
    source = Settings(PSO_PARTICLES=12, THETA_MIN=-3.0, THETA_MAX=3.0)
    cfg = RunConfig.from_settings(source, iterations=7, seed=None)
    assert cfg.particles == 12
    assert cfg.iterations == 7
    assert cfg.seed == source.SEED
    assert cfg.theta_box == (-3.0, 3.0)
    assert cfg.utility_instantiation["N"] == 10.0


def test_run_config_rejects_empty_box():
    """Test the box and utility validators."""
    with pytest.raises(ValidationError):
        RunConfig(theta_box=(1.0, 1.0))
    with pytest.raises(ValidationError):
        RunConfig(utility="fancy")
    with pytest.raises(ValidationError):
        RunConfig(particles=1)


def test_run_config_aliases():
    """Test that the configuration reads and writes camel-case keys."""
    cfg = RunConfig(**{"queryCount": 8, "lambdaBox": [0, 4]})
    assert cfg.query_count == 8
    assert cfg.lambda_box == (0.0, 4.0)
    data = cfg.model_dump(by_alias=True)
    assert data["queryCount"] == 8
    assert "maxRounds" in data


def test_expanded():
    """Test that expansion doubles the hole boxes and the query count."""
    cfg = RunConfig(theta_box=(-2.0, 2.0), lambda_box=(0.0, 5.0), query_count=10)
    wide = cfg.expanded()
    assert wide.theta_box == (-4.0, 4.0)
    assert wide.lambda_box == (0.0, 10.0)
    assert wide.query_count == 20
    assert cfg.query_count == 10


def test_swarm_settings():
    """Test the swarm configuration derived from a run configuration."""
    swarm = RunConfig(particles=5, iterations=3, early_stop_patience=2).swarm(seed=9)
    assert (swarm.particles, swarm.iterations, swarm.patience, swarm.seed) == (5, 3, 2, 9)


def test_candidate_model():
    """Test the `lambda` key of a candidate document."""
    model = CandidateModel.model_validate({"theta": [0, -1], "lambda": [2], "locations": ["0:q:use"]})
    assert model.to_candidate() == Candidate((0.0, -1.0), (2.0,), ())
    data = CandidateModel.from_candidate(Candidate((1.0,), (3.0,))).model_dump(by_alias=True)
    assert data["lambda"] == [3.0]
    assert data["locations"] is None


def test_counterexample_model():
    """Test the camel-case counterexample document."""
    cx = Counterexample({"N": 1.0}, {"q": [1.0, 2.0]}, {"q": [0.0, 1.0]}, (0.5,))
    data = CounterexampleModel.from_counterexample(cx).model_dump(by_alias=True)
    assert set(data) == {"publicInputs", "privateInputs", "distances", "samples"}
    assert CounterexampleModel.model_validate(data).to_counterexample() == cx


def test_sample_input():
    """Test that a sample input merges public and private values."""
    sample = SampleInput.model_validate({"publicInputs": {"N": 2}, "privateInputs": {"q": [1, 2]}})
    assert sample.inputs == {"N": 2, "q": [1, 2]}


def test_utility_spec_from_file():
    """Test the custom utility read from the adaptive sparse vector input."""
    with open(fixture_path("adaptivesvt_input.json")) as f:
        model = UtilitySpecModel.model_validate(json.load(f))
    spec = model.to_spec()
    assert spec.kind == CUSTOM
    assert spec.min_outputs == 20
    assert spec.repetitions == 2500
    assert len(spec.private_inputs["q"]) == 100


def test_min_outputs_defaults_to_n():
    """Test that the required report count falls back to the public N."""
    model = UtilitySpecModel.model_validate({"publicInputs": {"N": 4}, "privateInputs": {"q": [0]}})
    assert model.to_spec().min_outputs == 4
