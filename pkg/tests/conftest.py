"""공통 픽스처."""

import numpy as np
import pytest

from data_generator.synthetic import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def brute_sq_dists(X):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = sum((X[i, k] - X[j, k]) ** 2 for k in range(X.shape[1]))
    return out
