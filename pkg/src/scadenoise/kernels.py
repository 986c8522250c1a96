"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public functions dispatch on ``scadenoise._accel.BACKEND``; the
``*_numba`` / ``*_numpy`` variants stay importable so tests and the
benchmark can compare them directly.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._accel import BACKEND, njit, prange


# --------------------------------------------------------------------------
# smoothed-l0 over a batch of independent right-hand sides
# --------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _sl0_batch_numba(A, P, X, sigma_min, decrease, mu, inner):
    nrows = X.shape[0]
    m = A.shape[1]
    out = np.zeros((nrows, m))
    for b in prange(nrows):
        x = X[b].copy()
        w = P @ x
        sigma = 2.0 * np.max(np.abs(w))
        while sigma > sigma_min:
            two_s2 = 2.0 * sigma * sigma
            for _ in range(inner):
                for i in range(m):
                    w[i] -= mu * w[i] * np.exp(-w[i] * w[i] / two_s2)
                w -= P @ (A @ w - x)
            sigma *= decrease
        out[b] = w
    return out


def _sl0_batch_numpy(A, P, X, sigma_min, decrease, mu, inner):
    W = X @ P.T
    sigma = 2.0 * np.max(np.abs(W), axis=1)
    active = sigma > sigma_min
    while active.any():
        idx = np.flatnonzero(active)
        w = W[idx]
        x = X[idx]
        two_s2 = (2.0 * sigma[idx] ** 2)[:, None]
        for _ in range(inner):
            w = w - mu * w * np.exp(-(w * w) / two_s2)
            w = w - (w @ A.T - x) @ P.T
        W[idx] = w
        sigma[idx] *= decrease
        active = sigma > sigma_min
    return W


def sl0_batch(A, P, X, sigma_min, decrease, mu, inner, backend=None):
    """Run smoothed-l0 on every row of ``X``.

    Parameters
    ----------
    A : (r, m) ndarray
        Mixing matrix.
    P : (m, r) ndarray
        Right pseudo-inverse of ``A``; used both for the minimum-norm start
        and for projecting back onto ``{w : A w = x}``.
    X : (B, r) ndarray
        One observation vector per row.

    Returns
    -------
    (B, m) ndarray
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    P = np.ascontiguousarray(P, dtype=np.float64)
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    backend = backend or BACKEND
    args = (A, P, X, float(sigma_min), float(decrease), float(mu), int(inner))
    if backend == "numba":
        return _sl0_batch_numba(*args)
    return _sl0_batch_numpy(*args)


# --------------------------------------------------------------------------
# k x k median with replicate borders
# --------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _median_numba(padded, k, height, width):
    out = np.empty((height, width))
    mid = (k * k) // 2
    for r in prange(height):
        buf = np.empty(k * k)
        for c in range(width):
            t = 0
            for i in range(k):
                for j in range(k):
                    buf[t] = padded[r + i, c + j]
                    t += 1
            buf.sort()
            out[r, c] = buf[mid]
    return out


def _median_numpy(padded, k, height, width):
    windows = sliding_window_view(padded, (k, k)).reshape(height, width, k * k)
    return np.partition(windows, (k * k) // 2, axis=-1)[..., (k * k) // 2]


def median_kernel(img, k, backend=None):
    img = np.asarray(img, dtype=np.float64)
    r = k // 2
    padded = np.ascontiguousarray(np.pad(img, r, mode="edge"))
    backend = backend or BACKEND
    if backend == "numba":
        return _median_numba(padded, int(k), img.shape[0], img.shape[1])
    return _median_numpy(padded, int(k), img.shape[0], img.shape[1])
