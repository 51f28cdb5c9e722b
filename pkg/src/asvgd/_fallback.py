"""Pure numpy/scipy versions of the compiled interaction kernels.

Same call signatures as ``asvgd._core``. Results agree with the compiled
path to rounding, not bit-for-bit.
"""
import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform


def cross_sqdist(X, Y):
    return cdist(X, Y, "sqeuclidean")


def condensed_sqdist(X):
    return pdist(X, "sqeuclidean")


def rbf_gram(D2, n, h):
    K = squareform(np.exp(-D2 / h), checks=False)
    np.fill_diagonal(K, 1.0)
    return K


def svgd_forces(X, S, K, h, gamma, drive, repulse):
    n = X.shape[0]
    if n == 0:
        return
    drive[...] = (gamma / n) * (K @ S)
    repulse[...] = (2.0 / (h * n)) * (X * K.sum(axis=1)[:, None] - K @ X)


def kernel_sum(X, Y, h, skip_diagonal):
    K = np.exp(-cdist(X, Y, "sqeuclidean") / h)
    total = K.sum()
    if skip_diagonal:
        total -= np.trace(K)
    return float(total)
