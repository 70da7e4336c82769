#!/usr/bin/env python3
"""Benchmark the RRR iteration backends (numba @njit vs pure numpy).

Runs the same seeded solves through both kernels and reports wall time and
per-iteration cost.  The numpy path is what you get with
PHASELESS_STFT_NO_NUMBA=1.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phaseless_stft import _kernels
from phaseless_stft.core import derive_seed, make_params, random_pair, spawn_rng
from phaseless_stft.rrr import RrrConfig, rrr_solve
from phaseless_stft.stft import forward, magnitudes, random_mask


def run(backend_fn, name: str, params, trials: int, seed: int) -> None:
    cfg = RrrConfig(real_signal=True)
    total_iters = 0
    successes = 0
    t0 = time.perf_counter()
    for trial in range(trials):
        rng = spawn_rng(derive_seed(seed, trial))
        pair = random_pair(params, "real-gaussian", rng)
        mask = random_mask(params, 8 * params.N, rng)
        meas = magnitudes(forward(params, pair), mask)
        out = rrr_solve(params, pair.w, mask, meas.magnitudes, cfg, rng, truth=pair.x)
        total_iters += out.iterations
        successes += bool(out.success)
    elapsed = time.perf_counter() - t0
    per_iter = elapsed / max(total_iters, 1) * 1e6
    print(
        f"{name:>6}: {elapsed:7.2f} s for {trials} solves "
        f"({total_iters} iterations, {per_iter:6.1f} us/iter, {successes}/{trials} recovered)"
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=11)
    ap.add_argument("--W", type=int, default=8)
    ap.add_argument("--L", type=int, default=3)
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = make_params(args.N, args.W, args.L)
    print(f"geometry N={args.N} W={args.W} L={args.L} (grid {params.grid_size}), K=8 masks")

    if _kernels.HAS_NUMBA:
        # warm the JIT outside the timed region
        run(_kernels.rrr_iterate_numba, "warmup", params, 1, args.seed)

    import os

    os.environ.pop("PHASELESS_STFT_NO_NUMBA", None)
    if _kernels.numba_enabled():
        run(_kernels.rrr_iterate_numba, "numba", params, args.trials, args.seed)
    else:
        print(" numba: unavailable")
    os.environ["PHASELESS_STFT_NO_NUMBA"] = "1"
    try:
        run(_kernels.rrr_iterate_numpy, "numpy", params, args.trials, args.seed)
    finally:
        del os.environ["PHASELESS_STFT_NO_NUMBA"]


if __name__ == "__main__":
    main()
