"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each row
reports the best-of-N wall time per call for both backends on shapes typical
of the desk-scale network (batch 16, 20x20 inputs).
"""
import argparse
import timeit

import numpy as np

from tmkt import kernels
from tmkt.kernels import _fallback


def cases(rng):
    x = rng.random((16, 2, 20, 20), dtype=np.float32)
    h = rng.random((16, 16, 10, 10), dtype=np.float32)
    cols_x = _fallback.im2col(x, 3, 3, 1, 1)
    cols_h = _fallback.im2col(h, 3, 3, 1, 1)
    prev = rng.normal(size=(16, 16, 20, 20)).astype(np.float32)
    cur = rng.normal(size=prev.shape).astype(np.float32)
    s, post, u = _fallback.lif_forward(prev, cur, 0.5, 1.0)
    g = rng.normal(size=prev.shape).astype(np.float32)
    return {
        "im2col 16x2x20x20 k3": lambda k: k.im2col(x, 3, 3, 1, 1),
        "im2col 16x16x10x10 k3": lambda k: k.im2col(h, 3, 3, 1, 1),
        "col2im 16x2x20x20 k3": lambda k: k.col2im(cols_x, x.shape, 3, 3, 1, 1),
        "col2im 16x16x10x10 k3": lambda k: k.col2im(cols_h, h.shape, 3, 3, 1, 1),
        "lif_forward 16x16x20x20": lambda k: k.lif_forward(prev, cur, 0.5, 1.0),
        "lif_backward 16x16x20x20": lambda k: k.lif_backward(u, s, g, g, 0.5, 1.0, 1.0),
    }


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=20)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is available")
    mods = {name: kernels._BACKENDS[name] for name in backends}
    print(f"{'kernel':28s}" + "".join(f"{name:>14s}" for name in mods) + ("   speedup" if len(mods) > 1 else ""))
    for label, call in cases(np.random.default_rng(0)).items():
        times = {name: best(lambda m=m: call(m), args.repeat, args.number) for name, m in mods.items()}
        row = f"{label:28s}" + "".join(f"{t * 1e3:11.3f} ms" for t in times.values())
        if len(times) > 1:
            row += f"   {times['python'] / times['compiled']:6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
