"""Grayscale images as 2-D float arrays: PGM I/O, block tiling, median, PSNR.

Pixels stay ``float64`` through the whole pipeline and are quantized only
by :func:`write_pgm`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .kernels import median_kernel

#: returned by :func:`psnr` when the two images are identical
PSNR_INF = math.inf


class PgmFormatError(ValueError):
    """Malformed or unsupported PGM payload."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def as_image(img):
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {a.shape}")
    return a


# --------------------------------------------------------------------------
# PGM
# --------------------------------------------------------------------------


def _header_tokens(data, count, pos, what="header"):
    """Read ``count`` whitespace-separated integer tokens, skipping comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PgmFormatError(f"truncated {what}", pos)
        if data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise PgmFormatError(f"expected an integer, got {tok!r}", start)
        tokens.append((int(tok), start))
    return tokens, pos


def read_pgm(data):
    """Decode a P2 (ASCII) or P5 (binary) PGM with maxval <= 255."""
    if isinstance(data, str):
        data = data.encode("ascii")
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmFormatError(f"unsupported magic {magic!r}", 0)
    tokens, pos = _header_tokens(data, 3, 2)
    (w, w_at), (h, h_at), (maxval, mv_at) = tokens
    if w < 1:
        raise PgmFormatError("width must be positive", w_at)
    if h < 1:
        raise PgmFormatError("height must be positive", h_at)
    if not 0 < maxval <= 255:
        raise PgmFormatError(f"maxval {maxval} not in 1..255", mv_at)
    count = w * h

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PgmFormatError("missing whitespace after header", pos)
        pos += 1
        raster = data[pos : pos + count]
        if len(raster) < count:
            raise PgmFormatError(f"truncated raster: need {count} bytes, have {len(raster)}", pos + len(raster))
        pixels = np.frombuffer(raster, dtype=np.uint8)
        if np.any(pixels > maxval):
            at = pos + int(np.argmax(pixels > maxval))
            raise PgmFormatError(f"sample exceeds maxval {maxval}", at)
    else:
        values, pos = _header_tokens(data, count, pos, what="raster")
        for v, at in values:
            if v > maxval:
                raise PgmFormatError(f"sample {v} exceeds maxval {maxval}", at)
        pixels = np.array([v for v, _ in values], dtype=np.int64)
    return pixels.astype(np.float64).reshape(h, w)


def write_pgm(img):
    """Encode as binary P5, maxval 255, rounding and clamping each pixel."""
    a = as_image(img)
    raster = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    h, w = raster.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + raster.tobytes()


def load_pgm(path):
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


# --------------------------------------------------------------------------
# blocks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockGrid:
    block_size: int
    rows: int
    cols: int
    pad_bottom: int
    pad_right: int
    height: int
    width: int

    @property
    def count(self):
        return self.rows * self.cols


def partition_blocks(img, N):
    """Tile ``img`` into N x N blocks after reflection padding.

    Returns the grid and a ``(rows * cols, N, N)`` array in row-major block
    order.
    """
    if N < 1:
        raise ValueError("block size must be >= 1")
    a = as_image(img)
    h, w = a.shape
    pad_b = (-h) % N
    pad_r = (-w) % N
    if pad_b or pad_r:
        a = _reflect_pad(a, pad_b, pad_r)
    rows, cols = a.shape[0] // N, a.shape[1] // N
    blocks = a.reshape(rows, N, cols, N).swapaxes(1, 2).reshape(rows * cols, N, N)
    grid = BlockGrid(N, rows, cols, pad_b, pad_r, h, w)
    return grid, np.ascontiguousarray(blocks)


def _reflect_pad(a, pad_b, pad_r):
    # np.pad "reflect" mirrors without repeating the edge; a length-1 axis has
    # nothing to mirror, so it falls back to repetition there
    mode_b = "reflect" if a.shape[0] > 1 else "edge"
    a = np.pad(a, ((0, pad_b), (0, 0)), mode=mode_b)
    mode_r = "reflect" if a.shape[1] > 1 else "edge"
    return np.pad(a, ((0, 0), (0, pad_r)), mode=mode_r)


def assemble_blocks(grid, blocks):
    """Inverse of :func:`partition_blocks`; padding is stripped."""
    blocks = np.asarray(blocks, dtype=np.float64)
    N = grid.block_size
    if blocks.shape != (grid.count, N, N):
        raise ValueError(f"expected blocks of shape {(grid.count, N, N)}, got {blocks.shape}")
    full = blocks.reshape(grid.rows, grid.cols, N, N).swapaxes(1, 2).reshape(grid.rows * N, grid.cols * N)
    return full[: grid.height, : grid.width].copy()


# --------------------------------------------------------------------------
# filtering and metrics
# --------------------------------------------------------------------------


def median_filter(img, k=3, backend=None):
    """k x k median filter with replicate (edge) borders; ``k`` must be odd."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"median window must be odd and >= 1, got {k}")
    a = as_image(img)
    if k == 1:
        return a.copy()
    return median_kernel(a, k, backend=backend)


def psnr(reference, estimate):
    """Peak signal-to-noise ratio in dB for 8-bit gray levels.

    Identical inputs give :data:`PSNR_INF`.
    """
    s = as_image(reference)
    s_hat = as_image(estimate)
    if s.shape != s_hat.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {s_hat.shape}")
    mse = np.mean((s - s_hat) ** 2)
    if mse == 0:
        return PSNR_INF
    return 10.0 * math.log10(255.0**2 / mse)
