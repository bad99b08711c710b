"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 2000]
"""
import argparse
import math
import timeit

import numpy as np

from gmn import kernels


def cases(rng):
    alphas3 = rng.uniform(0.3, math.pi - 0.3, 3)
    alphas6 = rng.uniform(1.0, 2.0, 6)
    z = rng.normal(size=8)
    return {
        "family_score N=3": lambda k: k.family_score(0.1, alphas3, 0.2),
        "family_score N=6": lambda k: k.family_score(0.01, alphas6, 0.2),
        "qubit_terms N=3": lambda k: k.qubit_terms(z, np.zeros(8), alphas3),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=2000)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}" + "".join(f"{b + ' [us]':>16}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(rng).items():
        times = []
        for b in backends:
            mod = kernels.get_backend(b)
            t = timeit.timeit(lambda: fn(mod), number=args.repeat) / args.repeat
            times.append(t * 1e6)
        speed = f"{times[0] / times[1]:.1f}x" if len(times) == 2 else "-"
        print(f"{name:<20}" + "".join(f"{t:>16.2f}" for t in times) + f"{speed:>10}")


if __name__ == "__main__":
    main()
