"""Time the numba and numpy backends of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once per backend before timing so numba compilation
is excluded.  Outputs from the two backends are compared as a sanity check.
"""

import argparse
import timeit

import numpy as np

from poptq import _accel, _jacobi, _product
from poptq.randomx import as_rng, ginibre, random_hermitian


def jacobi_case(n, batch, rng):
    a = np.array([random_hermitian(n, rng) for _ in range(batch)])
    return lambda backend: _jacobi.eigh_stack(a, backend=backend)


def seesaw_case(d, restarts, iters, rng):
    w4 = random_hermitian(d * d, rng).reshape(d, d, d, d)
    beta0 = ginibre(d, restarts, rng).T.copy()
    beta0 /= np.linalg.norm(beta0, axis=1, keepdims=True)
    return lambda backend: _product.seesaw(w4, beta0, iters, backend=backend)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    rng = as_rng(0)
    cases = [
        ("eigh_stack n=4 batch=256", jacobi_case(4, 256, rng)),
        ("eigh_stack n=16 batch=64", jacobi_case(16, 64, rng)),
        ("product see-saw d=2 r=64 it=50", seesaw_case(2, 64, 50, rng)),
        ("product see-saw d=4 r=64 it=50", seesaw_case(4, 64, 50, rng)),
    ]
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases:
        outs = {b: fn(b) for b in backends}  # warm-up, compiles numba
        times = {b: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) for b in backends}
        row = f"{name:34s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times['numpy'] / times['numba']:11.1f}x"
            a, b = outs["numpy"][0], outs["numba"][0]
            row += f"   (max diff {np.abs(a - b).max():.1e})"
        print(row)


if __name__ == "__main__":
    main()
