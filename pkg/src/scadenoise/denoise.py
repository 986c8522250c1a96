"""Blockwise impulse-noise removal pipelines.

``sca``      unknown error positions; smoothed-l0 on each block's DCT tail.
``sp_sca``   positions known from the pixel values (0/255 or 0); least squares.
``combined`` median -> sca -> median.
``median_only`` plain median filter, the usual baseline.
"""

from dataclasses import dataclass, field

import numpy as np

from .imaging import as_image, assemble_blocks, median_filter, partition_blocks
from .solvers import (
    CapacityExceededError,
    FEAS_TOL,
    Sl0Params,
    SolverError,
    least_squares_known_support,
    sl0_solve_batch,
)
from .transforms import block_dct, inverse_zigzag, retained_count, sensing_system, zigzag

METHODS = ("median_only", "sca", "sp_sca", "combined")
DETECTORS = ("salt_pepper", "missing")


@dataclass(frozen=True)
class DenoiseConfig:
    block_size: int = 8
    compression_ratio: float = 2.0
    sl0: Sl0Params = field(default_factory=Sl0Params)
    tau: float = 10.0
    median_window: int = 3
    method: str = "sca"
    # what marks a known-bad pixel for sp_sca: 0/255 extremes, or 0 only
    sp_detect: str = "salt_pepper"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.sp_detect not in DETECTORS:
            raise ValueError(f"unknown detector {self.sp_detect!r}; expected one of {DETECTORS}")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError("median_window must be odd and >= 1")
        self.system  # validates block_size / compression_ratio

    @property
    def n(self):
        return retained_count(self.block_size, self.compression_ratio)

    @property
    def system(self):
        return sensing_system(self.block_size, self.n)


@dataclass
class BlockStats:
    blocks_total: int = 0
    blocks_fallback: int = 0
    blocks_solver_failed: int = 0

    def __iadd__(self, other):
        self.blocks_total += other.blocks_total
        self.blocks_fallback += other.blocks_fallback
        self.blocks_solver_failed += other.blocks_solver_failed
        return self


# --------------------------------------------------------------------------
# single blocks
# --------------------------------------------------------------------------


def block_observation(block, sys):
    """The zigzag DCT tail of ``block``: coefficients ``n .. m-1`` (0-based)."""
    return zigzag(block_dct(block, sys.basis), sys.order)[..., sys.n :]


def _sca_blocks(blocks, sys, cfg, backend=None):
    """Vectorized core of the sca path. Returns ``(cleaned, errors, failed)``."""
    zz = zigzag(blocks, sys.order)
    X = zz @ sys.H.T
    out = blocks.copy()
    failed = np.zeros(len(blocks), dtype=bool)
    E = np.zeros_like(zz)
    finite = np.all(np.isfinite(X), axis=1)
    failed[~finite] = True
    if finite.any():
        try:
            Z = sl0_solve_batch(sys.H, X[finite], cfg.sl0, backend=backend)
        except SolverError:
            failed[finite] = True
        else:
            ok = np.all(np.isfinite(Z), axis=1)
            Z = np.where(np.abs(Z) > cfg.tau, Z, 0.0)
            idx = np.flatnonzero(finite)
            failed[idx[~ok]] = True
            E[idx[ok]] = Z[ok]
    out -= inverse_zigzag(E, sys.order)
    return out, E, failed


def denoise_block_sca(block, sys, cfg):
    """Estimate the sparse error image of one block and subtract it.

    On solver failure the block comes back unchanged.
    """
    block = np.asarray(block, dtype=np.float64)
    out, _, _ = _sca_blocks(block[None], sys, cfg)
    return out[0]


def _impute_from_neighbours(block, flags):
    """Replace each flagged pixel by the median of nearby unflagged pixels.

    The square window grows until it holds an unflagged pixel; if the whole
    block is flagged the block median is used.
    """
    out = block.copy()
    N = block.shape[0]
    good = ~flags
    if not good.any():
        out[flags] = np.median(block)
        return out
    for r, c in zip(*np.nonzero(flags)):
        rad = 1
        while True:
            r0, r1 = max(r - rad, 0), min(r + rad + 1, N)
            c0, c1 = max(c - rad, 0), min(c + rad + 1, N)
            vals = block[r0:r1, c0:c1][good[r0:r1, c0:c1]]
            if vals.size:
                out[r, c] = np.median(vals)
                break
            rad += 1
    return out


def _sp_block(block, flags, sys):
    """Returns ``(restored, status)``; status is "ok", "fallback" or "failed"."""
    support = np.flatnonzero(zigzag(flags.astype(np.float64), sys.order))
    if support.size == 0:
        return block.copy(), "ok"
    try:
        est = least_squares_known_support(sys.H, block_observation(block, sys), support)
    except CapacityExceededError:
        return _impute_from_neighbours(block, flags), "fallback"
    except SolverError:
        return _impute_from_neighbours(block, flags), "failed"
    return block - inverse_zigzag(est.values, sys.order), "ok"


def denoise_block_sp(block, known_support_2d, sys, cfg=None):
    """Recover the flagged pixels of a block by least squares on the DCT tail.

    With more flagged pixels than tail observations, or a singular truncated
    system, the flagged pixels are imputed from unflagged neighbours instead.
    """
    block = np.asarray(block, dtype=np.float64)
    flags = np.asarray(known_support_2d, dtype=bool)
    if flags.shape != block.shape:
        raise ValueError("support mask and block differ in shape")
    return _sp_block(block, flags, sys)[0]


# --------------------------------------------------------------------------
# detection
# --------------------------------------------------------------------------


def detect_salt_pepper(img):
    r = np.rint(as_image(img))
    return (r == 0) | (r == 255)


def detect_missing(img):
    return np.rint(as_image(img)) == 0


# --------------------------------------------------------------------------
# whole images
# --------------------------------------------------------------------------


def _sca_image(img, cfg, stats, backend=None):
    sys = cfg.system
    grid, blocks = partition_blocks(img, cfg.block_size)
    out, _, failed = _sca_blocks(blocks, sys, cfg, backend=backend)
    stats += BlockStats(grid.count, 0, int(failed.sum()))
    return assemble_blocks(grid, out)


def _sp_image(img, cfg, stats):
    sys = cfg.system
    mask = detect_missing(img) if cfg.sp_detect == "missing" else detect_salt_pepper(img)
    grid, blocks = partition_blocks(img, cfg.block_size)
    _, mblocks = partition_blocks(mask.astype(np.float64), cfg.block_size)
    out = np.empty_like(blocks)
    local = BlockStats(grid.count)
    for i in range(grid.count):
        out[i], status = _sp_block(blocks[i], mblocks[i] > 0.5, sys)
        if status == "fallback":
            local.blocks_fallback += 1
        elif status == "failed":
            local.blocks_solver_failed += 1
    stats += local
    return assemble_blocks(grid, out)


def denoise_image(img, cfg=None, return_stats=False, backend=None):
    """Run the pipeline selected by ``cfg.method``; the result is clamped to [0, 255].

    With ``return_stats=True`` a :class:`BlockStats` is returned alongside.
    """
    cfg = cfg or DenoiseConfig()
    a = as_image(img)
    stats = BlockStats()
    k = cfg.median_window
    if cfg.method == "median_only":
        out = median_filter(a, k, backend=backend)
    elif cfg.method == "sca":
        out = _sca_image(a, cfg, stats, backend=backend)
    elif cfg.method == "sp_sca":
        out = _sp_image(a, cfg, stats)
    else:
        pre = median_filter(a, k, backend=backend)
        mid = _sca_image(pre, cfg, stats, backend=backend)
        out = median_filter(mid, k, backend=backend)
    out = np.clip(out, 0.0, 255.0)
    return (out, stats) if return_stats else out


def feasibility_residual(H, z, x):
    """``||H z - x|| / (1 + ||x||)``, compared against ``FEAS_TOL``."""
    return np.linalg.norm(H @ z - x) / (1 + np.linalg.norm(x))


__all__ = [
    "BlockStats",
    "DenoiseConfig",
    "FEAS_TOL",
    "METHODS",
    "block_observation",
    "denoise_block_sca",
    "denoise_block_sp",
    "denoise_image",
    "detect_missing",
    "detect_salt_pepper",
    "feasibility_residual",
]
