"""Compare the compiled Monte Carlo kernel with the NumPy fallback.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]

Both backends consume the same random stream; the script also reports the
largest relative difference between their outputs.
"""

import argparse
import time

import numpy as np

from cpcsim import _kernels_py
from cpcsim.distributions import parse_distribution
from cpcsim.rng import Rng

try:
    from cpcsim import _kernels as compiled
except ImportError:
    compiled = None

CASES = [
    ("exp:1", 100),
    ("erlang:3:1", 100),
    ("erlang:10:1", 100),
    ("hyper:5:1", 100),
    ("uniform:0:2", 100),
    ("exp:1", 2),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = [("numpy", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    header = f"{'distribution':<14}{'cores':>6}" + "".join(f"{name + ' [s]':>14}" for name, _ in backends)
    if compiled:
        header += f"{'speedup':>10}{'max rel diff':>14}"
    print(header)
    for spec, cores in CASES:
        d = parse_distribution(spec)
        params = d.kernel_params()
        row, outs = [], []
        for _, mod in backends:
            elapsed, out = best_of(lambda: mod.sample_minima(Rng(1).bit_generator, *params, args.steps, cores),
                                   args.repeat)
            row.append(elapsed)
            outs.append(out[0])
        line = f"{spec:<14}{cores:>6}" + "".join(f"{t:>14.4f}" for t in row)
        if compiled:
            diff = float(np.max(np.abs(outs[0] - outs[1]) / np.abs(outs[1])))
            line += f"{row[0] / row[1]:>9.1f}x{diff:>14.1e}"
        print(line)


if __name__ == "__main__":
    main()
