import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_blobs(n_per=20, sep=10.0, std=0.3, seed=0):
    r = np.random.default_rng(seed)
    a = r.normal(0.0, std, (n_per, 2))
    b = r.normal(0.0, std, (n_per, 2)) + [sep, 0.0]
    return np.vstack([a, b]), np.repeat([0, 1], n_per)


def random_connected_affinity(r, n_max=50, p_max=8):
    """Dense Gaussian point-landmark affinity (every point sees every
    landmark), so the bipartite graph is always connected."""
    p = int(r.integers(2, p_max + 1))
    n = int(r.integers(p, n_max + 1))
    d = int(r.integers(1, 4))
    X = r.normal(size=(n, d)) * r.uniform(0.5, 3.0)
    C = X[r.choice(n, p, replace=False)] + r.normal(scale=0.1, size=(p, d))
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)
    sigma = np.sqrt(d2.mean())
    return np.exp(-d2 / (2 * sigma**2))


def oracle_gap(gammas_all, k):
    """Smallest gap among the bottom k + 1 eigenvalues of the full
    bipartite problem (pass at least k + 1 of them)."""
    g = np.sort(gammas_all)[: k + 1]
    return float(np.min(np.diff(g)))
