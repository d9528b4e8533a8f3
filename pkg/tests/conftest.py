import numpy as np
import pytest

from tvising.models import ScenarioConfig, SolverOptions, SpinDataset, WeightMatrix
from tvising.sampler import generate_scenario


def random_model(p: int, rng: np.random.Generator, density: float = 0.6) -> WeightMatrix:
    """Symmetric couplings in [-1, 1] on a random subset of pairs."""
    w = np.triu(rng.uniform(-1.0, 1.0, size=(p, p)) * (rng.random((p, p)) < density), k=1)
    return WeightMatrix(p=p, w=w + w.T)


def random_dataset(p: int, n: int, per_timestamp: int, rng: np.random.Generator) -> SpinDataset:
    blocks = [rng.choice((-1, 1), size=(per_timestamp, p)) for _ in range(n)]
    return SpinDataset(n=n, p=p, blocks=blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fast_opts():
    return SolverOptions(tol_outer=1e-7, tol_inner=1e-7, max_outer_iter=3000)


@pytest.fixture
def tiny_dataset(rng):
    return random_dataset(p=4, n=6, per_timestamp=3, rng=rng)


@pytest.fixture(scope="session")
def small_config():
    return ScenarioConfig(
        p=6,
        n=12,
        change_points=[7],
        degree=2,
        obs_per_timestamp=4,
        holdout_per_timestamp=3,
        burn_in=50,
        lag=2,
        seed=3,
    )


@pytest.fixture(scope="session")
def small_scenario(small_config):
    return generate_scenario(small_config)
