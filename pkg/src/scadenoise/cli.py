"""Command-line front end: ``scadenoise {denoise,experiment,synth}``."""

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .denoise import METHODS, DenoiseConfig, denoise_image
from .imaging import PgmFormatError, load_pgm, psnr, save_pgm
from .noise import KINDS, RNG_NAME, NoiseSpec, corrupt, remap_interior
from .solvers import Sl0Params
from .synth import SynthesisError, zero_tail_image

DEFAULT_LEVELS = {
    "random_valued": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6),
    "salt_pepper": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6),
    "missing": (0.1, 0.2, 0.3, 0.4),
}
DEFAULT_METHODS = {
    "random_valued": ("median_only", "sca", "combined"),
    "salt_pepper": ("median_only", "sp_sca", "combined"),
    "missing": ("median_only", "sp_sca", "combined"),
}


@dataclass
class RunRecord:
    method: str
    noise_kind: str
    noise_level: float
    seed: int
    psnr_noisy: float
    psnr_denoised: float
    blocks_total: int
    blocks_fallback: int
    blocks_solver_failed: int
    wall_time: float


CSV_FIELDS = tuple(f.name for f in fields(RunRecord))


def _fmt(value, name):
    if value is None:
        return ""
    if isinstance(value, float):
        if name == "noise_level":
            return f"{value:g}"
        if name == "wall_time":
            return f"{value:.4f}"
        return "inf" if value == float("inf") else f"{value:.6f}"
    return str(value)


def format_record(rec):
    return [_fmt(v, k) for k, v in zip(CSV_FIELDS, astuple(rec))]


def cell_seed(master_seed, level_index, method_index):
    """Noise seed for one sweep cell.

    Pure function of its arguments, so inserting a method or a level leaves
    every other cell's realization untouched.
    """
    ss = np.random.SeedSequence([master_seed, level_index, method_index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


# --------------------------------------------------------------------------
# I/O helpers
# --------------------------------------------------------------------------


def load_image(path):
    path = Path(path)
    if path.suffix.lower() == ".npy":
        img = np.load(path)
        if img.ndim != 2:
            raise ValueError(f"{path}: expected a 2-D array, got shape {img.shape}")
        return img.astype(np.float64)
    try:
        return load_pgm(path)
    except PgmFormatError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_image(path, img):
    path = Path(path)
    if path.suffix.lower() == ".npy":
        np.save(path, np.asarray(img, dtype=np.float64))
    else:
        save_pgm(path, img)


def config_from_args(args, method=None):
    sl0 = Sl0Params(
        sigma_min=args.sl0_sigma_min,
        sigma_decrease=args.sl0_decrease,
        mu=args.sl0_mu,
        inner_iterations=args.sl0_inner,
        normalize_columns=not args.sl0_no_normalize,
        refine=not args.sl0_no_refine,
    )
    return DenoiseConfig(
        block_size=args.block_size,
        compression_ratio=args.cr,
        sl0=sl0,
        tau=args.tau,
        median_window=args.median_window,
        method=method or args.method,
        sp_detect=args.sp_detect,
    )


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_denoise(args):
    img = load_image(args.input)
    cfg = config_from_args(args)
    t0 = time.perf_counter()
    out, stats = denoise_image(img, cfg, return_stats=True)
    wall = time.perf_counter() - t0
    save_image(args.output, out)

    parts = [f"method={cfg.method}"]
    if args.reference:
        ref = load_image(args.reference)
        parts += [f"psnr_noisy={_fmt(psnr(ref, img), '')}", f"psnr_denoised={_fmt(psnr(ref, out), '')}"]
    parts += [
        f"blocks_total={stats.blocks_total}",
        f"blocks_fallback={stats.blocks_fallback}",
        f"blocks_solver_failed={stats.blocks_solver_failed}",
        f"wall_time={wall:.4f}",
    ]
    print(" ".join(parts))
    return 0


def _run_cell(clean, kind, level, li, method, mi, args, save_dir):
    seed = cell_seed(args.seed, li, mi)
    noisy, _ = corrupt(clean, NoiseSpec(kind, level, seed))
    cfg = config_from_args(args, method=method)
    if kind != "random_valued":
        cfg = replace(cfg, sp_detect=kind)
    t0 = time.perf_counter()
    out, stats = denoise_image(noisy, cfg, return_stats=True)
    wall = time.perf_counter() - t0
    if save_dir is not None:
        stem = f"{kind}_p{level:.2f}_{method}"
        save_pgm(save_dir / f"{stem}_noisy.pgm", noisy)
        save_pgm(save_dir / f"{stem}_denoised.pgm", out)
    return RunRecord(
        method, kind, float(level), seed, psnr(clean, noisy), psnr(clean, out),
        stats.blocks_total, stats.blocks_fallback, stats.blocks_solver_failed, wall,
    )


def run_experiment(clean, kind, levels, methods, args, save_dir=None, jobs=1):
    """Denoise every (level, method) cell; records come back in sweep order."""
    if kind != "random_valued":
        clean = remap_interior(clean)
    cells = [(lv, li, me, mi) for li, lv in enumerate(levels) for mi, me in enumerate(methods)]

    def run(c):
        return _run_cell(clean, kind, c[0], c[1], c[2], c[3], args, save_dir)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(run, cells))
    return [run(c) for c in cells]


def write_csv(records, fh):
    fh.write(f"# generator: {RNG_NAME}; cell seed = SeedSequence([seed, level_index, method_index])\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        w.writerow(format_record(rec))


def cmd_experiment(args):
    clean = load_image(args.input)
    kind = args.noise
    levels = _floats(args.levels) if args.levels else DEFAULT_LEVELS[kind]
    methods = _names(args.methods) if args.methods else DEFAULT_METHODS[kind]
    for me in methods:
        if me not in METHODS:
            raise ValueError(f"unknown method {me!r}; expected one of {METHODS}")
    save_dir = None
    if args.save_images:
        save_dir = Path(args.save_images)
        save_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(clean, kind, levels, methods, args, save_dir, jobs=args.jobs)

    buf = io.StringIO()
    write_csv(records, buf)
    if args.csv:
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_synth(args):
    img = zero_tail_image(args.size, N=args.block_size, cr=args.cr, seed=args.seed)
    save_image(args.output, img)
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _names(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _add_config_flags(p, with_method=True):
    if with_method:
        p.add_argument("--method", choices=METHODS, default="sca")
    p.add_argument("--block-size", type=int, default=8)
    p.add_argument("--cr", type=float, default=2.0, help="compression ratio; n = round(N*N / cr)")
    p.add_argument("--tau", type=float, default=10.0, help="impulse amplitude threshold (gray levels)")
    p.add_argument("--median-window", type=int, default=3)
    p.add_argument("--sp-detect", choices=("salt_pepper", "missing"), default="salt_pepper")
    p.add_argument("--sl0-sigma-min", type=float, default=0.01)
    p.add_argument("--sl0-decrease", type=float, default=0.5)
    p.add_argument("--sl0-mu", type=float, default=2.0)
    p.add_argument("--sl0-inner", type=int, default=3)
    p.add_argument("--sl0-no-normalize", action="store_true", help="run SL0 on the raw tail matrix")
    p.add_argument("--sl0-no-refine", action="store_true", help="skip the least-squares refit")


def build_parser():
    parser = argparse.ArgumentParser(prog="scadenoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise one image")
    p.add_argument("input")
    p.add_argument("output", help=".pgm (quantized) or .npy (exact floats)")
    p.add_argument("--reference", help="clean image for PSNR reporting")
    _add_config_flags(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("experiment", help="seeded noise-level sweep, one CSV row per cell")
    p.add_argument("input")
    p.add_argument("--noise", choices=KINDS, default="random_valued")
    p.add_argument("--levels", help="comma-separated probabilities, e.g. 0.1,0.2")
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="output path (default: stdout)")
    p.add_argument("--save-images", metavar="DIR")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p, with_method=False)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="write a zero-tail synthetic image")
    p.add_argument("output", help=".pgm (quantized) or .npy (exact floats)")
    p.add_argument("--kind", choices=("zero_tail",), default="zero_tail")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--block-size", type=int, default=8)
    p.add_argument("--cr", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"error: {name}: {exc.strerror or exc}", file=sys.stderr)
    except (PgmFormatError, SynthesisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
