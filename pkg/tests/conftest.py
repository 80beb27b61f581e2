import pathlib

import pytest

from banditrec.dataio import assign_strategies, load_dataset, load_strategy_map
from banditrec.policies import default_arms

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def golden_dir():
    return GOLDEN


@pytest.fixture
def fixture_dataset():
    """The bundled miniature corpus with strategies already assigned."""
    ds = load_dataset(
        FIXTURES / "users.csv",
        FIXTURES / "posts.jsonl",
        FIXTURES / "interactions.csv",
    )
    arms = default_arms()
    mapping = load_strategy_map(FIXTURES / "strategy_map.csv")
    assign_strategies(ds, mapping, arms[1])  # default: Distraction
    return ds
