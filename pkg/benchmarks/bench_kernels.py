"""Benchmark the jitted LSTM kernels against the pure-numpy fallback.

The training loops spend nearly all their time in small sequential LSTM
steps, which numpy alone handles poorly (per-timestep Python overhead
dominates at hidden sizes of 16-32).  Both code paths share one source
implementation; this script reports the speedup so the tradeoff stays
visible.

Run:  python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from soccersum.neural import kernels


def bench(fn, args, repeat=2000):
    fn(*args)  # warmup (and numba compilation)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def make_case(T, D, H, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(T, D))
    W = rng.normal(scale=0.2, size=(4 * H, D))
    U = rng.normal(scale=0.2, size=(4 * H, H))
    b = np.zeros(4 * H)
    return x, W, U, b


def main():
    cases = [
        ("proposal bags (T=10, D=45, H=16)", make_case(10, 45, 16, 0)),
        ("fusion windows (T=5, D=45, H=32)", make_case(5, 45, 32, 1)),
        ("long sequences (T=50, D=45, H=16)", make_case(50, 45, 16, 2)),
    ]
    print("forward pass, mean seconds per call")
    print("%-38s %12s %12s %8s" % ("case", "numpy", "numba", "speedup"))
    for name, args in cases:
        t_np = bench(kernels.lstm_forward_numpy, args)
        if kernels.HAS_NUMBA:
            t_nb = bench(kernels.lstm_forward_numba, args)
            print("%-38s %12.2e %12.2e %7.1fx" % (name, t_np, t_nb, t_np / t_nb))
        else:
            print("%-38s %12.2e %12s %8s" % (name, t_np, "n/a", "n/a"))

    print("\nforward+backward, mean seconds per call")
    print("%-38s %12s %12s %8s" % ("case", "numpy", "numba", "speedup"))
    for name, args in cases:
        x, W, U, b = args

        def roundtrip(fwd, bwd):
            h, c, gates = fwd(x, W, U, b)
            dh = np.ones_like(h)
            bwd(x, h, c, gates, W, U, dh)

        t_np = bench(lambda: roundtrip(kernels.lstm_forward_numpy,
                                       kernels.lstm_backward_numpy), (), repeat=500)
        if kernels.HAS_NUMBA:
            t_nb = bench(lambda: roundtrip(kernels.lstm_forward_numba,
                                           kernels.lstm_backward_numba), (), repeat=500)
            print("%-38s %12.2e %12.2e %7.1fx" % (name, t_np, t_nb, t_np / t_nb))
        else:
            print("%-38s %12.2e %12s %8s" % (name, t_np, "n/a", "n/a"))


if __name__ == "__main__":
    main()
