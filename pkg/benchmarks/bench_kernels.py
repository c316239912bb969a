"""Benchmark the numba kernels against their pure-numpy twins.

Runs both implementations of the GLCM accumulator and the 12-channel color
statistics on a synthetic tongue-sized image and prints per-call timings.
The package itself binds one path at import via SELNET_BACKEND; this script
imports both directly.

Usage: python benchmarks/bench_kernels.py [--size 768] [--repeats 5]
"""

import argparse
import time

import numpy as np

from selnet import backend
from selnet.features import kernels
from selnet.features.glcm import GlcmConfig, gray_levels


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=768, help="image side length")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    image = rng.integers(0, 256, (args.size, args.size, 3), dtype=np.uint8)
    yy, xx = np.mgrid[: args.size, : args.size]
    c = args.size / 2
    mask = ((yy - c) ** 2 / (0.45 * args.size) ** 2
            + (xx - c) ** 2 / (0.35 * args.size) ** 2) <= 1.0
    levels = gray_levels(image, 64)
    offsets = GlcmConfig().offsets()
    pixels = np.ascontiguousarray(image[mask])

    print(f"backend selected by env: {backend.BACKEND} "
          f"(numba available: {backend.HAVE_NUMBA})")
    print(f"image {args.size}x{args.size}, {int(mask.sum())} masked pixels\n")

    cases = [
        ("glcm_counts", lambda: kernels.glcm_counts_numpy(levels, mask, offsets, 64),
         lambda: kernels.glcm_counts_numba(levels, mask, offsets, 64)),
        ("color_channel_sums", lambda: kernels.color_channel_sums_numpy(pixels),
         lambda: kernels.color_channel_sums_numba(pixels)),
    ]
    print(f"{'kernel':22s} {'numpy':>12s} {'numba':>12s} {'speedup':>9s}")
    for name, numpy_fn, numba_fn in cases:
        if backend.HAVE_NUMBA:
            numba_fn()  # compile outside the timed region
        t_numpy = _time(numpy_fn, args.repeats)
        t_numba = _time(numba_fn, args.repeats)
        ref = numpy_fn()
        alt = numba_fn()
        assert np.allclose(ref, alt, rtol=1e-9, atol=1e-9), f"{name}: paths disagree"
        print(f"{name:22s} {t_numpy*1e3:10.2f}ms {t_numba*1e3:10.2f}ms "
              f"{t_numpy / t_numba:8.2f}x")


if __name__ == "__main__":
    main()
