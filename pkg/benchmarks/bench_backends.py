"""Benchmark the compiled LSTM sequence kernels against the numpy fallback.

Usage: python3 benchmarks/bench_backends.py [--repeats N]

Times one forward + backward pass over a batch for several sequence shapes
and reports the per-call wall time of each backend plus the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from braindec.backends import available_backends, get_kernels

SHAPES = (
    # (T, B, H) sequence length, batch, hidden size
    (100, 32, 128),
    (150, 32, 128),
    (500, 32, 128),
    (500, 8, 128),
)


def bench_one(backend: str, T: int, B: int, H: int, repeats: int) -> float:
    forward, backward = get_kernels(backend)
    rng = np.random.default_rng(0)
    x_proj = rng.normal(size=(T, B, 4 * H))
    wh = (rng.normal(size=(H, 4 * H)) / np.sqrt(H)).copy()
    h0 = np.zeros((B, H))
    c0 = np.zeros((B, H))
    dh_out = rng.normal(size=(T, B, H))

    h_all, c_all, gates = forward(x_proj, wh, h0, c0)  # warmup
    backward(dh_out, wh, gates, h_all, c_all, h0, c0)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        h_all, c_all, gates = forward(x_proj, wh, h0, c0)
        backward(dh_out, wh, gates, h_all, c_all, h0, c0)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per shape (best is reported)")
    args = parser.parse_args()

    backends = available_backends()
    if "native" not in backends:
        print("compiled kernels not built; benchmarking python backend only")

    header = f"{'shape (T,B,H)':>16}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for T, B, H in SHAPES:
        times = [bench_one(b, T, B, H, args.repeats) for b in backends]
        row = f"{f'({T},{B},{H})':>16}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
