"""Time every hot kernel under the numpy and numba backends.

Shapes follow the default training configuration (batch 128, pad 32, embed 128,
100 filters, hidden 128, 250k hash buckets).  Each kernel is called once to
trigger JIT compilation, then timed as the best of ``--repeat`` rounds.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeat 10 --kernels lstm_forward lstm_backward
"""
import argparse
import sys
import timeit

import numpy as np

from textclf import kernels

B, T, E, C, K, H, BUCKETS = 128, 32, 128, 100, 3, 128, 250_000


def workloads(rng):
    f32 = lambda *shape: rng.standard_normal(shape).astype(np.float32)
    x, w, b = f32(B, T, E), f32(K, E, C), f32(C)
    conv_out = f32(B, T - K + 1, C)
    _, idx = kernels.get_backend("numpy").max_time_forward(conv_out)
    ids = rng.integers(2, 4000, (B, T))
    bag_w = np.full((B, T), 1.0 / T, dtype=np.float32)
    xw, w_hh = f32(T, B, 4 * H) * 0.1, f32(H, 4 * H) * 0.1
    hs, cs, gates = kernels.get_backend("numpy").lstm_forward(xw, w_hh, False)
    table = f32(BUCKETS // 10, E)
    rows = np.unique(rng.integers(0, table.shape[0], B * T))
    state = {"m": np.zeros_like(table), "v": np.zeros_like(table)}
    return {
        "conv1d_forward": lambda k: k.conv1d_forward(x, w, b),
        "conv1d_backward": lambda k: k.conv1d_backward(x, w, conv_out),
        "max_time_forward": lambda k: k.max_time_forward(conv_out),
        "max_time_backward": lambda k: k.max_time_backward(f32(B, C), idx, T - K + 1),
        "bag_forward": lambda k: k.bag_forward(table, ids, bag_w),
        "bag_backward": lambda k: k.bag_backward(f32(B, E), ids, bag_w, np.zeros_like(table)),
        "lstm_forward": lambda k: k.lstm_forward(xw, w_hh, False),
        "lstm_backward": lambda k: k.lstm_backward(f32(T, B, H), hs, cs, gates, w_hh, False),
        "adam_update": lambda k: k.adam_update(table, table, state["m"], state["v"], rows,
                                               1e-3, 0.9, 0.999, 1e-8, 1),
        "fnv1a_ngrams": lambda k: k.fnv1a_ngrams(ids, 3, BUCKETS),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--kernels", nargs="*", help="subset of kernels to time")
    args = parser.parse_args(argv)
    if not kernels.numba_available():
        print("numba is not installed; only the numpy backend can be timed", file=sys.stderr)
    backends = {"numpy": kernels.get_backend("numpy")}
    if kernels.numba_available():
        backends["numba"] = kernels.get_backend("numba")
    work = workloads(np.random.default_rng(0))
    names = args.kernels or list(work)
    unknown = sorted(set(names) - set(work))
    if unknown:
        parser.error(f"unknown kernels {unknown}; choose from {list(work)}")

    header = f"{'kernel':<20}" + "".join(f"{name + ' ms':>12}" for name in backends)
    print(header + (f"{'speedup':>10}" if len(backends) == 2 else ""))
    for name in names:
        times = {}
        for label, backend in backends.items():
            fn = work[name]
            fn(backend)  # compile / warm caches
            times[label] = 1e3 * min(timeit.repeat(lambda: fn(backend), number=1,
                                                   repeat=args.repeat))
        line = f"{name:<20}" + "".join(f"{t:>12.3f}" for t in times.values())
        if len(times) == 2:
            line += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
