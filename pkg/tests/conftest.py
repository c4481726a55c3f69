import numpy as np
import pytest

from seqsel.data import encode_labels
from seqsel.synth import synth_dataset


@pytest.fixture(scope="session")
def small_instance():
    """n=200, p=6, m=3 planted instance shared across test modules."""
    data, truth = synth_dataset(seed=1, n=200, p=6, m=3, n_true=3)
    return data, truth


@pytest.fixture(scope="session")
def small_encoding(small_instance):
    data, _ = small_instance
    return encode_labels(data, "forward")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
