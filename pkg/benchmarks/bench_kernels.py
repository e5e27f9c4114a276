"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from jchnet import _pykernels
from jchnet.graphs import erdos_renyi, scale_free

try:
    from jchnet import _kernels
except ImportError:
    _kernels = None


def cases():
    g = scale_free(20_000, 2.2, k_min=3, seed=1)
    ptr, idx = g.csr
    x0 = g.degrees.astype(float)
    yield "power iteration, scale-free N=2e4", lambda k: k.power_iteration(ptr, idx, x0, 1.0, 1e-10, 100_000)

    a = erdos_renyi(150, 6.0, seed=2).dense_adjacency()
    yield "cyclic Jacobi, dense 150x150", lambda k: k.jacobi_eigenvalues(a, 1e-12, 100)

    rng = np.random.default_rng(3)
    x = rng.uniform(0.1, 2.0, 2000)
    f = rng.uniform(0.0, 0.1, 2000)
    yield "cavity ground states, 2000 points", lambda k: k.local_ground_states(x, f, 0.0, 1.0, 12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return
    print(f"{'kernel':38s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases():
        t_c = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        t_p = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:38s} {t_c:12.2f} {t_p:12.2f} {t_p / t_c:7.1f}x")


if __name__ == "__main__":
    main()
