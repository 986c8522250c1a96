"""Seeded impulse-noise injection with ground-truth masks.

Every draw comes from ``numpy.random.Generator(PCG64(seed))`` in a fixed
order: one uniform per pixel for the Bernoulli mask (row-major), then the
replacement values for the masked pixels in row-major order.
"""

from dataclasses import dataclass

import numpy as np

from .imaging import as_image

KINDS = ("random_valued", "salt_pepper", "missing")
RNG_NAME = "numpy PCG64"


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    level: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= self.level <= 1:
            raise ValueError(f"noise level must be in [0, 1], got {self.level}")


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def is_interior(img):
    a = np.asarray(img)
    return bool(np.all((a >= 1) & (a <= 254)))


def corrupt(img, spec):
    """Return ``(noisy, mask)``; ``mask`` marks exactly the replaced pixels."""
    clean = as_image(img)
    if spec.kind != "random_valued" and not is_interior(clean):
        raise ValueError(f"{spec.kind} noise needs an interior-valued image (pixels in [1, 254])")
    rng = make_rng(spec.seed)
    mask = rng.random(clean.shape) < spec.level
    noisy = clean.copy()
    count = int(mask.sum())

    if spec.kind == "random_valued":
        orig = clean[mask]
        vals = rng.integers(0, 256, size=count).astype(np.float64)
        same = vals == orig
        while same.any():
            vals[same] = rng.integers(0, 256, size=int(same.sum()))
            same = vals == orig
        noisy[mask] = vals
    elif spec.kind == "salt_pepper":
        noisy[mask] = np.where(rng.integers(0, 2, size=count) == 1, 255.0, 0.0)
    else:
        noisy[mask] = 0.0
    return noisy, mask


def remap_interior(img):
    """Affinely squeeze [0, 255] into [1, 254] and round to integers."""
    a = np.clip(as_image(img), 0, 255)
    return np.rint(1.0 + a * 253.0 / 255.0)
