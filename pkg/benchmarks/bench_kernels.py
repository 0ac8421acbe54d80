"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the batched LFSR expansion, the cumulative likelihood gather, and one
full attack trial at the toy sizes used by the scaling sweep.
"""

import argparse
import time

import numpy as np

from alphaeta import _kernels_py
from alphaeta.attack import AttackConfig, run_trial
from alphaeta.channel import ChannelParams
from alphaeta.keystream import PRIMITIVE_TAPS, tap_mask

try:
    from alphaeta import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def trial_with(impl, repeat):
    import alphaeta.kernels as k

    saved = k._impl
    k._impl = impl
    try:
        cfg = AttackConfig(ChannelParams.from_sigma(16, 1.5), 12, trials=1)
        return best_of(lambda: run_trial(cfg, 0, 0), repeat)
    finally:
        k._impl = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    L, n = 12, 131
    seeds = np.arange(1, 1 << L, dtype=np.uint64)
    mask = tap_mask(PRIMITIVE_TAPS[L])
    rng = np.random.default_rng(0)
    table = rng.normal(size=(n, 8))
    idx = rng.integers(0, 8, size=(seeds.size, n))

    cases = {
        f"lfsr_basis {seeds.size}x{n}": lambda m: m.lfsr_basis(seeds, mask, L, n, 3),
        f"cumulative_gather {seeds.size}x{n}": lambda m: m.cumulative_gather(table, idx),
    }
    print(f"{'case':32s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        tp = best_of(lambda: fn(_kernels_py), args.repeat)
        tc = best_of(lambda: fn(_kernels), args.repeat) if _kernels else float("nan")
        print(f"{name:32s} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms {tp / tc:7.1f}x")
    tp = trial_with(_kernels_py, args.repeat)
    tc = trial_with(_kernels, args.repeat) if _kernels else float("nan")
    print(f"{'attack trial g=12':32s} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms {tp / tc:7.1f}x")
    if _kernels is None:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
