"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N wall time of each backend and
the largest difference between their results.
"""

import argparse
import time

import numpy as np

from phbiarc import _kernels
from phbiarc.phcurve import _GL_NODES, _GL_WEIGHTS


def best_time(fn, repeat):
    fn()  # warm up (and compile, for numba)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def flat(result):
    parts = result if isinstance(result, tuple) else (result,)
    return np.concatenate([np.ravel(p) for p in parts])


def cases(rng):
    pts = rng.normal(size=8) + 1j * rng.normal(size=8)
    w = rng.normal(size=4) + 1j * rng.normal(size=4) + 2.0
    ts = np.linspace(0.0, 1.0, 4097)
    edges = np.linspace(0.0, 1.0, 257)
    return {
        "decasteljau (8 coeffs, 4097 t)": lambda impl: impl.decasteljau(pts, ts),
        "preimage_and_derivative (4097 t)": lambda impl: impl.preimage_and_derivative(w, ts),
        "energy_panels (256 panels)": lambda impl: impl.energy_panels(w, edges[:-1], edges[1:],
                                                                     _GL_NODES, _GL_WEIGHTS, 4),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba path unavailable (not installed or PHBIARC_NUMBA=0); timing numpy only")
    impls = [("numpy", _kernels.numpy_impl)]
    if _kernels.HAVE_NUMBA:
        impls.append(("numba", _kernels.numba_impl))
    print(f"{'kernel':36s} " + " ".join(f"{name:>12s}" for name, _ in impls) + "   max |diff|")
    for label, call in cases(np.random.default_rng(7)).items():
        times = [best_time(lambda impl=impl: call(impl), args.repeat) for _, impl in impls]
        outs = [flat(call(impl)) for _, impl in impls]
        diff = max(float(np.max(np.abs(o - outs[0]))) for o in outs)
        print(f"{label:36s} " + " ".join(f"{t * 1e6:10.1f}us" for t in times) + f"   {diff:.2e}")


if __name__ == "__main__":
    main()
