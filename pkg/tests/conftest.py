import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from kahlerlab.tensor_core import random_tensor, random_unitary

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def frozen():
    return json.loads((DATA / "frozen.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)


def tensor_from_seed(seed: int, n: int, scale: float = 1.0):
    return random_tensor(np.random.default_rng(seed), n, scale)


def unitary_from_seed(seed: int, n: int):
    return random_unitary(np.random.default_rng([seed, 1]), n)


def complex_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
