"""
Shared fixtures: the program corpus, a small run configuration and the
sparse vector sketch.
"""
import os
from glob import glob

import pytest

from app.align.program import load_transformed
from app.align.transform import transform
from app.lang.parser import parse, parse_file
from app.schemas.run_config import RunConfig
from app.sketch.generator import generate_sketch

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")

RELEASE = """
func Release(q : private real) returns (out : real);
budget eps;
adjacency q : scalar_differ;

out := q;
"""


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture(scope="session")
def corpus():
    """Every source program shipped in fixtures/, by file name."""
    return {os.path.basename(path): parse_file(path) for path in sorted(glob(os.path.join(FIXTURES, "*.dp")))}


@pytest.fixture(scope="session")
def svt():
    return parse_file(fixture_path("svt.dp"))


@pytest.fixture(scope="session")
def svt_sketch(svt):
    return generate_sketch(svt)


@pytest.fixture(scope="session")
def svt_transformed(svt_sketch):
    return transform(svt_sketch)


@pytest.fixture(scope="session")
def release():
    """A single noisy release of one private value."""
    return parse(RELEASE)


@pytest.fixture(scope="session")
def noisymax():
    """Pre-transformed NoisyMax with its reference candidate."""
    return load_transformed(fixture_path("noisymax_transformed.json"))


@pytest.fixture
def small_config():
    """Run configuration small enough for unit tests."""
    return RunConfig(
        seed=7,
        particles=30,
        iterations=60,
        early_stop_patience=0,
        theta_box=(-1.0, 1.0),
        lambda_box=(0.0, 3.0),
        query_count=5,
        query_box=(-5.0, 5.0),
        sample_box=(-5.0, 5.0),
        max_rounds=8,
        max_expansions=1,
        refutation_rounds=2,
        paired_trials=50,
        custom_repetitions=20,
    )
