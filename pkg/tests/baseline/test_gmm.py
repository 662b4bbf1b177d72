import numpy as np
import pytest
from fairmmd.baseline import gmm, oracle
from fairmmd.core import Dataset, diversity


@pytest.fixture()
def line():
    return Dataset(np.array([0.0, 1.0, 10.0]), np.array([0, 0, 1]), 2)


def test_gmm(line: Dataset):
    assert gmm.gmm(line, 2).tolist() == [0, 2]
    assert gmm.gmm(line, 3).tolist() == [0, 1, 2]
    assert gmm.gmm(line, 1, seed_index=1).tolist() == [1]
    assert gmm.gmm(line, 2, seed_index=2).tolist() == [0, 2]
    with pytest.raises(ValueError, match="exceeds"):
        gmm.gmm(line, 4)


def test_gmm_candidates(line: Dataset):
    assert gmm.gmm(line, 2, seed_index=1, candidates=[0, 1]).tolist() == [0, 1]


def test_gmm_per_color():
    data = Dataset(np.array([0.0, 1.0, 2.0, 9.0, 20.0]), np.array([0, 0, 0, 0, 1]), 2)
    assert gmm.gmm_per_color(data, 2).tolist() == [0, 3, 4]
    assert gmm.gmm_per_color(data, 10).tolist() == [0, 1, 2, 3, 4]


def test_half_approximation():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(2, 15))
        k = int(rng.integers(2, min(n, 6) + 1))
        data = Dataset(rng.uniform(0, 10, (n, 2)), np.zeros(n, dtype=int), 1)
        (opt, _) = oracle.exact_mmd(data, k)
        assert diversity(data, gmm.gmm(data, k)) >= opt / 2
