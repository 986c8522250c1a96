"""Block DCT, zigzag ordering and the tail sensing matrices.

For an N x N block with m = N**2 pixels, ``G`` maps the zigzag-ordered pixel
vector to the zigzag-ordered DCT coefficients. Its last ``m - n`` rows ``H``
read the high-frequency tail, which is zero for a block compressible to ``n``
coefficients. Whatever the tail of a noisy block holds therefore comes from
the impulse errors alone.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class DctBasis:
    N: int
    T: np.ndarray
    alpha: np.ndarray

    @property
    def Tt(self):
        return self.T.T


def dct_basis(N):
    """Orthonormal DCT-II matrix, ``T[x, y] = alpha(x) cos((2y + 1) x pi / 2N)``."""
    if N < 1:
        raise ValueError(f"block side must be >= 1, got {N}")
    freq = np.arange(N)[:, None]
    pos = np.arange(N)[None, :]
    alpha = np.where(np.arange(N) == 0, np.sqrt(1.0 / N), np.sqrt(2.0 / N))
    T = alpha[:, None] * np.cos((2 * pos + 1) * freq * np.pi / (2 * N))
    T.setflags(write=False)
    alpha.setflags(write=False)
    return DctBasis(N, T, alpha)


def _check_block(a, N, what="block"):
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-2:] != (N, N):
        raise ValueError(f"{what} must be {N}x{N}, got {a.shape}")
    return a


def block_dct(block, basis):
    """``T @ block @ T.T``; also accepts a stack of blocks ``(..., N, N)``."""
    b = _check_block(block, basis.N)
    return basis.T @ b @ basis.T.T


def inverse_block_dct(coeffs, basis):
    c = _check_block(coeffs, basis.N, "coefficients")
    return basis.T.T @ c @ basis.T


@dataclass(frozen=True)
class ZigzagOrder:
    N: int
    forward: tuple
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)

    @property
    def m(self):
        return self.N * self.N

    @property
    def flat(self):
        """Row-major flat index of each scan position."""
        return self.rows * self.N + self.cols


def zigzag_order(N):
    """JPEG scan: (0,0), (0,1), (1,0), (2,0), (1,1), (0,2), ...

    Anti-diagonal ``d = u + v`` is walked with ``u`` increasing when ``d`` is
    odd and decreasing when ``d`` is even.
    """
    if N < 1:
        raise ValueError(f"block side must be >= 1, got {N}")
    cells = [(u, v) for u in range(N) for v in range(N)]
    cells.sort(key=lambda c: (c[0] + c[1], c[0] if (c[0] + c[1]) % 2 else -c[0]))
    rows = np.array([u for u, _ in cells], dtype=np.intp)
    cols = np.array([v for _, v in cells], dtype=np.intp)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return ZigzagOrder(N, tuple(cells), rows, cols)


def zigzag(matrix, order):
    """Scan ``(..., N, N)`` into ``(..., m)`` following ``order``."""
    a = _check_block(matrix, order.N, "matrix")
    return a[..., order.rows, order.cols]


def inverse_zigzag(vec, order):
    v = np.asarray(vec, dtype=np.float64)
    if v.shape[-1] != order.m:
        raise ValueError(f"vector length must be {order.m}, got {v.shape[-1]}")
    out = np.zeros(v.shape[:-1] + (order.N, order.N))
    out[..., order.rows, order.cols] = v
    return out


def retained_count(N, cr):
    """Number of low-frequency coefficients kept at compression ratio ``cr``."""
    if not cr > 1:
        raise ValueError(f"compression ratio must exceed 1, got {cr}")
    m = N * N
    if m < 2:
        raise ValueError("a 1x1 block has no room for a coefficient tail")
    return int(min(max(round(m / cr), 1), m - 1))


@dataclass(frozen=True, eq=False)
class SensingSystem:
    N: int
    n: int
    basis: DctBasis = field(repr=False)
    order: ZigzagOrder = field(repr=False)
    G: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)

    @property
    def m(self):
        return self.N * self.N

    @property
    def observations(self):
        return self.m - self.n


def _full_transform(N):
    basis = dct_basis(N)
    order = zigzag_order(N)
    u, v = order.rows, order.cols
    # row i = coefficient (u_i, v_i), column j = pixel (u_j, v_j); separable DCT
    G = basis.T[np.ix_(u, u)] * basis.T[np.ix_(v, v)]
    G.setflags(write=False)
    return basis, order, G


@lru_cache(maxsize=None)
def sensing_system(N, n):
    """Build ``G`` and its tail ``H = G[n:]`` for N x N blocks keeping n coefficients."""
    m = N * N
    if not 1 <= n < m:
        raise ValueError(f"retained count must satisfy 1 <= n < {m}, got {n}")
    basis, order, G = _full_transform(N)
    H = G[n:]
    return SensingSystem(N, n, basis, order, G, H)


def zigzag_dct_matrix(N):
    """The full m x m matrix ``G`` with ``zigzag(block_dct(E)) == G @ zigzag(E)``."""
    return _full_transform(N)[2]
