import numpy as np
import pytest

from tasterank import EngineConfig, generate_synthetic, train_bank


@pytest.fixture(scope="session")
def benchmark_catalog():
    """200-item, 16-dim, 8-attribute corpus used across the suite."""
    return generate_synthetic(n_items=200, dim=16, n_attribute_clusters=8, seed=20240501)


@pytest.fixture(scope="session")
def benchmark_bank(benchmark_catalog):
    return train_bank(benchmark_catalog, EngineConfig())


@pytest.fixture(scope="session")
def small_catalog():
    return generate_synthetic(n_items=60, dim=8, n_attribute_clusters=4, seed=7)


@pytest.fixture(scope="session")
def small_bank(small_catalog):
    return train_bank(small_catalog, EngineConfig())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
