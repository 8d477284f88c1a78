"""Numba-compiled implementations of the hot numeric kernels.

Same contracts as :mod:`windcurve._kernels.numpy_impl`; see there for
docstrings.
"""

import numpy as np
from numba import njit, prange

BACKEND_NAME = "numba"


@njit(cache=True)
def _interp_uniform(x0, dx, values, query, out):
    n = values.shape[0]
    for i in range(query.shape[0]):
        pos = (query[i] - x0) / dx
        if pos < 0.0 or pos > n - 1:
            out[i] = 0.0
        else:
            j = int(pos)
            if j > n - 2:
                j = n - 2
            frac = pos - j
            out[i] = values[j] * (1.0 - frac) + values[j + 1] * frac


def interp_uniform(x0, dx, values, query):
    values = np.ascontiguousarray(values, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    flat = np.ascontiguousarray(query.ravel())
    out = np.empty(flat.shape[0], dtype=np.float64)
    if values.shape[0] == 1:
        out[:] = 0.0
        out[flat == x0] = values[0]
    else:
        _interp_uniform(float(x0), float(dx), values, flat, out)
    return out.reshape(query.shape)


@njit(cache=True, parallel=True)
def _knn_search(train, query, k, exclude_self):
    m = query.shape[0]
    d = query.shape[1]
    n = train.shape[0]
    idx_out = np.empty((m, k), dtype=np.int64)
    dist_out = np.empty((m, k), dtype=np.float64)
    for i in prange(m):
        best_d = np.full(k, np.inf)
        best_i = np.full(k, -1, dtype=np.int64)
        for j in range(n):
            if exclude_self and j == i:
                continue
            acc = 0.0
            for c in range(d):
                diff = query[i, c] - train[j, c]
                acc += diff * diff
            if acc < best_d[k - 1]:
                # insertion into the sorted top-k buffer
                pos = k - 1
                while pos > 0 and best_d[pos - 1] > acc:
                    best_d[pos] = best_d[pos - 1]
                    best_i[pos] = best_i[pos - 1]
                    pos -= 1
                best_d[pos] = acc
                best_i[pos] = j
        for j in range(k):
            idx_out[i, j] = best_i[j]
            dist_out[i, j] = np.sqrt(best_d[j])
    return idx_out, dist_out


def knn_search(train, query, k, exclude_self=False):
    train = np.ascontiguousarray(train, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    return _knn_search(train, query, k, exclude_self)
