"""Time the numba kernels against their pure-numpy counterparts.

Both builds are imported directly, so the CGEBD_NUMBA flag does not matter
here. Every pair is first checked for agreement on the benchmark inputs.

    python3 benchmarks/bench_kernels.py [--size 64] [--repeats 5]
"""
import argparse
import time

import numpy as np

from cgebd.codec import candidate_offsets
from cgebd.kernels import _numba, _numpy


def best_of(fn, args, repeats):
    fn(*args)  # warm-up, includes jit compile for numba
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(size, rng):
    mb = 16
    g = -(-size // mb)
    ref = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    cur = np.roll(ref, (2, -3), axis=(0, 1))
    mv = rng.integers(-7, 8, (g, g, 2)).astype(np.int64)
    posy, posx = (a.astype(np.int32) for a in np.mgrid[0:size, 0:size])
    acc = rng.integers(-50, 50, (3, size, size)).astype(np.int32)
    res = rng.integers(-50, 50, (3, size, size)).astype(np.int32)
    x = rng.standard_normal((4, 8, size // 2, size // 2))
    w = rng.standard_normal((16, 8, 3, 3))
    b = rng.standard_normal(16)
    return {
        "block_search": (cur, ref, mb, candidate_offsets(7)),
        "motion_compensate": (ref, mv, mb),
        "backtrace_step": (posx, posy, acc, mv, res, mb),
        "conv2d": (x, w, b, 1),
    }


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(u, v) for u, v in zip(a, b))
    if np.issubdtype(np.asarray(a).dtype, np.floating):
        return np.allclose(a, b, rtol=1e-12, atol=1e-12)
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, inputs in cases(args.size, rng).items():
        f_np, f_nb = getattr(_numpy, name), getattr(_numba, name)
        if not agree(f_np(*inputs), f_nb(*inputs)):
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(f_np, inputs, args.repeats)
        t_nb = best_of(f_nb, inputs, args.repeats)
        print(f"{name:<18} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
