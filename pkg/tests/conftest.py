import numpy as np
import pytest

from pafriends import ModelParams, state_from_targets


@pytest.fixture
def params_c2():
    return ModelParams(2, 0.0)


@pytest.fixture
def tiny_graph(params_c2):
    # n=3: node 2 attached to {1,1}, node 3 attached to {1,2}
    return state_from_targets(params_c2, [[1, 1], [1, 2]])


@pytest.fixture
def star_graph(params_c2):
    # every arrival hits node 1 only
    return state_from_targets(params_c2, [[1, 1]] * 5)


def rng_from(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))
