import numpy as np

from discomax.data import Dataset


def random_symmetric(rng, n):
    b = rng.standard_normal((n, n))
    return b + b.T


def random_psd(rng, n, rank=None):
    b = rng.standard_normal((n, rank or n))
    return b @ b.T


def centering(n):
    return np.eye(n) - np.ones((n, n)) / n


def brute_force_laplacian_trace(data, xhat):
    """1/2 sum_ij S_ij ||xhat_i - xhat_j||^2 with S = 1/2 J E J built by explicit loops."""
    n = data.shape[0]
    e = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            e[i, j] = sum((data[i, k] - data[j, k]) ** 2 for k in range(data.shape[1]))
    j_mat = centering(n)
    s = 0.5 * j_mat @ e @ j_mat
    total = 0.0
    for i in range(n):
        for j in range(n):
            d2 = sum((xhat[i, k] - xhat[j, k]) ** 2 for k in range(xhat.shape[1]))
            total += s[i, j] * d2
    return 0.5 * total


def synthetic(seed, n=150, p=10, noise=0.1):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = x[:, 0] ** 2 + x[:, 1] + noise * rng.standard_normal(n)
    return Dataset(x, y)
