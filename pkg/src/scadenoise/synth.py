"""Synthetic images whose every block is exactly compressible.

Each N x N block is built in the DCT domain: random values for the first
``n`` zigzag coefficients, zeros for the tail, then an inverse DCT. Draws
whose pixels leave [1, 254] are discarded and redrawn with a smaller AC
spread. Nothing is rescaled afterwards, since rescaling would smear energy
back into the tail.
"""

import numpy as np

from .noise import make_rng
from .transforms import inverse_block_dct, inverse_zigzag, retained_count, sensing_system

MAX_REDRAWS = 200


class SynthesisError(RuntimeError):
    pass


def _zero_tail_block(rng, sys, ac_scale):
    N, n, m = sys.N, sys.n, sys.m
    coeffs = np.zeros(m)
    level = rng.uniform(70.0, 185.0)
    spread = ac_scale / np.sqrt(np.arange(1, n))
    for _ in range(MAX_REDRAWS):
        coeffs[0] = N * level
        coeffs[1:n] = rng.normal(0.0, spread)
        block = inverse_block_dct(inverse_zigzag(coeffs, sys.order), sys.basis)
        if block.min() >= 1.0 and block.max() <= 254.0:
            return block
        spread = spread * 0.8
    raise SynthesisError(f"no in-range block after {MAX_REDRAWS} redraws")


def zero_tail_image(size, N=8, cr=2.0, seed=0, ac_scale=60.0):
    """Interior-valued float image with an exactly zero DCT tail in every block.

    ``size`` is an int (square) or ``(height, width)``; both must be
    multiples of ``N``.
    """
    h, w = (size, size) if np.isscalar(size) else size
    if h % N or w % N:
        raise ValueError(f"image size {h}x{w} is not a multiple of the block size {N}")
    sys = sensing_system(N, retained_count(N, cr))
    rng = make_rng(seed)
    img = np.empty((h, w))
    for r in range(0, h, N):
        for c in range(0, w, N):
            img[r : r + N, c : c + N] = _zero_tail_block(rng, sys, ac_scale)
    return img
