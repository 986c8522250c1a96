"""Impulse-noise removal by sparse recovery in the block DCT domain."""

from ._accel import BACKEND
from .denoise import (
    BlockStats,
    DenoiseConfig,
    block_observation,
    denoise_block_sca,
    denoise_block_sp,
    denoise_image,
    detect_missing,
    detect_salt_pepper,
)
from .imaging import (
    PSNR_INF,
    BlockGrid,
    PgmFormatError,
    assemble_blocks,
    load_pgm,
    median_filter,
    partition_blocks,
    psnr,
    read_pgm,
    save_pgm,
    write_pgm,
)
from .noise import NoiseSpec, corrupt, remap_interior
from .solvers import (
    CapacityExceededError,
    ErrorEstimate,
    Sl0Params,
    SolverError,
    least_squares_known_support,
    sl0_solve,
    sl0_solve_batch,
    threshold_to_sparse,
)
from .synth import zero_tail_image
from .transforms import (
    DctBasis,
    SensingSystem,
    ZigzagOrder,
    block_dct,
    dct_basis,
    inverse_block_dct,
    inverse_zigzag,
    retained_count,
    sensing_system,
    zigzag,
    zigzag_dct_matrix,
    zigzag_order,
)

__version__ = "0.1.0"
