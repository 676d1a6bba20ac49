import numpy as np
import pytest

from tandemfilm import dataset as ds
from tandemfilm.materials import builtin_materials


@pytest.fixture(scope="session")
def materials():
    return builtin_materials()


@pytest.fixture(scope="session")
def small_dataset():
    """60-sample 8-layer dataset shared by training/cli tests."""
    return ds.generate_dataset(ds.GenConfig(layer_count=8, sample_count=60, seed=42))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
