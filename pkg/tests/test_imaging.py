import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scadenoise.imaging import (
    PSNR_INF,
    PgmFormatError,
    assemble_blocks,
    median_filter,
    partition_blocks,
    psnr,
    read_pgm,
    write_pgm,
)


def brute_median(img, k):
    """Sort-based reference with replicate borders."""
    h, w = img.shape
    r = k // 2
    out = np.empty_like(img)
    for i in range(h):
        for j in range(w):
            vals = []
            for di in range(-r, r + 1):
                for dj in range(-r, r + 1):
                    ii = min(max(i + di, 0), h - 1)
                    jj = min(max(j + dj, 0), w - 1)
                    vals.append(img[ii, jj])
            out[i, j] = sorted(vals)[len(vals) // 2]
    return out


# ---- PGM -----------------------------------------------------------------


def test_read_ascii_pgm():
    img = read_pgm(b"P2 2 1 255 \n 0 255")
    assert img.shape == (1, 2)
    assert img.tolist() == [[0.0, 255.0]]


def test_read_binary_pgm():
    img = read_pgm(b"P5 1 1 255\n" + bytes([0x80]))
    assert img.tolist() == [[128.0]]


def test_read_pgm_with_comment():
    img = read_pgm(b"P2\n# made by hand\n2 2\n255\n1 2\n3 4\n")
    assert img.tolist() == [[1, 2], [3, 4]]


def test_reject_color_pgm():
    with pytest.raises(PgmFormatError, match="unsupported magic"):
        read_pgm(b"P6 1 1 255\n\x00\x00\x00")


@pytest.mark.parametrize(
    "payload, offset",
    [
        (b"P5 2 2 255\n\x01\x02\x03", 14),  # truncated raster
        (b"P5 1 1 65535\n\x00\x00", 7),  # maxval > 255
        (b"P2 2 1 255\n 7", 13),  # truncated ascii raster
        (b"P5 x 1 255\n\x00", 3),  # non-numeric header
        (b"P2 1 1 10\n 11", 11),  # sample above maxval
    ],
)
def test_malformed_pgm_names_offset(payload, offset):
    with pytest.raises(PgmFormatError) as info:
        read_pgm(payload)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


@pytest.mark.parametrize("value, byte", [(127.6, 128), (-3.0, 0), (300.0, 255)])
def test_write_pgm_rounds_and_clamps(value, byte):
    data = write_pgm(np.array([[value]]))
    assert data.startswith(b"P5")
    assert data[-1] == byte


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 9), st.integers(1, 9)), elements=st.floats(-500, 500)))
def test_pgm_round_trip(img):
    back = read_pgm(write_pgm(img))
    np.testing.assert_array_equal(back, np.clip(np.rint(img), 0, 255))


# ---- blocks --------------------------------------------------------------


def test_partition_exact_tiling(rng):
    img = rng.uniform(0, 255, (16, 16))
    grid, blocks = partition_blocks(img, 8)
    assert len(blocks) == 4 and grid.pad_bottom == 0 and grid.pad_right == 0
    np.testing.assert_array_equal(blocks[1], img[:8, 8:])


def test_partition_pads_by_reflection(rng):
    img = rng.uniform(0, 255, (10, 10))
    grid, blocks = partition_blocks(img, 8)
    assert (grid.rows, grid.cols, grid.pad_bottom, grid.pad_right) == (2, 2, 6, 6)
    # mirror without repeating the edge: padded row 10 equals row 8
    np.testing.assert_array_equal(blocks[2][2, :], img[8, :8])
    np.testing.assert_array_equal(assemble_blocks(grid, blocks), img)


def test_single_block_identity(rng):
    img = rng.uniform(0, 255, (8, 8))
    grid, blocks = partition_blocks(img, 8)
    assert len(blocks) == 1
    np.testing.assert_array_equal(blocks[0], img)
    np.testing.assert_array_equal(assemble_blocks(grid, blocks), img)


def test_assemble_rejects_wrong_count(rng):
    grid, blocks = partition_blocks(rng.uniform(0, 255, (16, 16)), 8)
    with pytest.raises(ValueError):
        assemble_blocks(grid, blocks[:3])


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 40),
    st.integers(1, 40),
    st.sampled_from([1, 4, 8, 16]),
    st.integers(0, 2**32 - 1),
)
def test_partition_round_trip(h, w, N, seed):
    img = np.random.default_rng(seed).uniform(0, 255, (h, w))
    grid, blocks = partition_blocks(img, N)
    assert blocks.shape == (grid.rows * grid.cols, N, N)
    np.testing.assert_array_equal(assemble_blocks(grid, blocks), img)


# ---- median --------------------------------------------------------------


def test_median_constant_image_unchanged():
    img = np.full((7, 9), 42.0)
    np.testing.assert_array_equal(median_filter(img, 3), img)
    np.testing.assert_array_equal(median_filter(median_filter(img, 5), 5), img)


def test_median_k1_is_identity(rng):
    img = rng.uniform(0, 255, (5, 6))
    np.testing.assert_array_equal(median_filter(img, 1), img)


def test_median_removes_isolated_spike():
    img = np.zeros((3, 3))
    img[1, 1] = 255
    assert median_filter(img, 3)[1, 1] == 0


def test_median_rejects_even_window():
    with pytest.raises(ValueError):
        median_filter(np.zeros((4, 4)), 2)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_median_matches_brute_force(rng, k):
    for _ in range(5):
        img = rng.integers(0, 256, (12, 12)).astype(float)
        np.testing.assert_array_equal(median_filter(img, k), brute_median(img, k))


# ---- PSNR ----------------------------------------------------------------


def test_psnr_identical_is_infinite(rng):
    img = rng.uniform(0, 255, (4, 4))
    assert psnr(img, img) == PSNR_INF
    assert math.isinf(PSNR_INF)


def test_psnr_full_scale_error_is_zero_db():
    assert psnr(np.zeros((4, 4)), np.full((4, 4), 255.0)) == pytest.approx(0.0, abs=1e-12)


def test_psnr_single_pixel_error():
    a = np.zeros((16, 16))
    b = a.copy()
    b[3, 7] = 255
    # MSE = 255^2 / 256, so PSNR = 10 log10(256)
    assert psnr(a, b) == pytest.approx(24.082399653118497, abs=1e-9)


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((2, 2)), np.zeros((2, 3)))


def test_psnr_symmetric_and_scaling(rng):
    a = rng.uniform(0, 255, (8, 8))
    b = a + rng.normal(0, 5, (8, 8))
    assert psnr(a, b) == pytest.approx(psnr(b, a), abs=1e-12)
    # doubling the error quadruples the squared-error field
    c = a + 2 * (b - a)
    assert psnr(a, b) - psnr(a, c) == pytest.approx(10 * math.log10(4), abs=1e-9)
