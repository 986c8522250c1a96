"""Time the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]

Each kernel is warmed up once (numba compiles on first call), then timed as
the best of ``--repeat`` runs. Outputs of both paths are compared too.
"""

import argparse
import time

import numpy as np

from scadenoise import kernels
from scadenoise._accel import HAVE_NUMBA
from scadenoise.denoise import DenoiseConfig, denoise_image
from scadenoise.noise import NoiseSpec, corrupt
from scadenoise.solvers import sl0_projector
from scadenoise.transforms import sensing_system


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]

    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (args.size, args.size)).astype(float)
    noisy, _ = corrupt(img, NoiseSpec("random_valued", 0.4, 1))

    sys8 = sensing_system(8, 32)
    A, P, _ = sl0_projector(sys8.H)
    X = rng.normal(0, 50, ((args.size // 8) ** 2, 32))

    cases = {
        f"sl0_batch ({len(X)} blocks)": lambda be: kernels.sl0_batch(A, P, X, 0.01, 0.5, 2.0, 3, backend=be),
        "median 3x3": lambda be: kernels.median_kernel(noisy, 3, backend=be),
        "median 5x5": lambda be: kernels.median_kernel(noisy, 5, backend=be),
        "combined pipeline": lambda be: denoise_image(noisy, DenoiseConfig(method="combined"), backend=be),
    }
    print(f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'max |diff|':>14}")
    for name, fn in cases.items():
        row = [best_of(lambda: fn(be), args.repeat) for be in backends]
        diff = np.max(np.abs(fn(backends[0]) - fn(backends[-1])))
        print(f"{name:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row) + f"{diff:>14.2e}")


if __name__ == "__main__":
    main()
