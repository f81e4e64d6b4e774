"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 7]

Prints best-of-``repeat`` microseconds per call for each kernel and the
speed-up of the compiled backend over the fallback.
"""

import argparse
import timeit

import numpy as np

from pipriv._backend import get_kernels
from pipriv.dist import random_joint
from pipriv.nn import ACTIVATIONS


def _time(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number * 1e6


def _cases(rng):
    for shape in [(500, 32), (100_000, 16)]:
        z = rng.standard_normal(shape)
        number = max(5, 400_000 // z.size)
        for code, name in enumerate(ACTIVATIONS):
            a = get_kernels("python").act_forward(code, z, np.empty_like(z))
            delta = rng.standard_normal(shape)
            yield f"act_forward[{name}]{shape}", number, lambda K, c=code, z=z: K.act_forward(c, z, np.empty_like(z))
            yield (f"act_backward[{name}]{shape}", number,
                   lambda K, c=code, z=z, a=a, d=delta: K.act_backward(c, z, a, d.copy()))
    joints = [random_joint(seed, 8, 8, 0.5) for seed in range(20)]
    eps = np.linspace(0.1, 3.0, 30)

    def tails(K):
        for j in joints:
            d = j.matrix / np.outer(j.matrix.sum(1), j.matrix.sum(0))
            K.tail_delta_grid(d, j.matrix, np.ones(8, np.uint8), eps)

    def dp(K):
        for j in joints:
            K.dp_delta(j.matrix / j.matrix.sum(1, keepdims=True), 0.5)

    def svd(K):
        for j in joints:
            K.singular_values(j.matrix)

    def zeta(K):
        for e in eps:
            K.zeta(0.1, e)
            K.zeta(0.1, -e)

    yield "tail_delta_grid x20 joints", 20, tails
    yield "dp_delta x20 joints", 20, dp
    yield "singular_values x20 joints", 5, svd
    yield "zeta x60", 20, zeta


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args(argv)
    py = get_kernels("python")
    try:
        cy = get_kernels("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':48s} {'python us':>12s} {'cython us':>12s} {'speed-up':>9s}")
    for label, number, fn in _cases(rng):
        t_py = _time(lambda: fn(py), number, args.repeat)
        t_cy = _time(lambda: fn(cy), number, args.repeat)
        print(f"{label:48s} {t_py:12.1f} {t_cy:12.1f} {t_py / t_cy:8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
