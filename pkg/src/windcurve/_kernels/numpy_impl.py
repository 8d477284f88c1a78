"""Pure-numpy implementations of the hot numeric kernels.

Used as the fallback backend when numba is unavailable or disabled via
``WINDCURVE_BACKEND=numpy``.
"""

import numpy as np

BACKEND_NAME = "numpy"

# Row chunk size for the pairwise-distance sweep; bounds peak memory at
# roughly CHUNK * n_train * 8 bytes.
_CHUNK = 2048


def interp_uniform(x0, dx, values, query):
    """Linear interpolation on a uniform grid, zero outside the support.

    ``values[i]`` sits at ``x0 + i*dx``.  Queries below ``x0`` or above the
    last node evaluate to 0 (cut-in / cut-out semantics).
    """
    values = np.asarray(values, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    n = values.shape[0]
    out = np.zeros(query.shape, dtype=np.float64)
    if n == 1:
        on_node = query == x0
        out[on_node] = values[0]
        return out
    pos = (query - x0) / dx
    inside = (pos >= 0.0) & (pos <= n - 1)
    p = pos[inside]
    idx = np.minimum(p.astype(np.int64), n - 2)
    frac = p - idx
    out[inside] = values[idx] * (1.0 - frac) + values[idx + 1] * frac
    return out


def knn_search(train, query, k, exclude_self=False):
    """k nearest training points per query row (Euclidean).

    Returns ``(indices, distances)`` of shape ``(len(query), k)`` with
    distances sorted ascending.  With ``exclude_self=True`` the i-th query is
    assumed to be the i-th training row and is excluded from its own
    neighborhood.
    """
    train = np.asarray(train, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    m = query.shape[0]
    idx_out = np.empty((m, k), dtype=np.int64)
    dist_out = np.empty((m, k), dtype=np.float64)
    train_sq = np.einsum("ij,ij->i", train, train)
    for start in range(0, m, _CHUNK):
        stop = min(start + _CHUNK, m)
        q = query[start:stop]
        d2 = train_sq[None, :] - 2.0 * (q @ train.T)
        d2 += np.einsum("ij,ij->i", q, q)[:, None]
        if exclude_self:
            rows = np.arange(start, stop)
            d2[np.arange(stop - start), rows] = np.inf
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        pd = np.take_along_axis(d2, part, axis=1)
        order = np.argsort(pd, axis=1, kind="stable")
        idx_out[start:stop] = np.take_along_axis(part, order, axis=1)
        dist_out[start:stop] = np.sqrt(
            np.maximum(np.take_along_axis(pd, order, axis=1), 0.0)
        )
    return idx_out, dist_out
