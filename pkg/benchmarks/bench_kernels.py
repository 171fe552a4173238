"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times the three hot kernels on representative inputs, then a full
convex-roof minimization in each backend (the backend is chosen at import
time, so the full-roof comparison runs in subprocesses with
RTANGLE_BACKEND set).

Run:  python benchmarks/bench_kernels.py
"""
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from rtangle import _kernels_py

try:
    from rtangle import _kernels_c
except ImportError:
    _kernels_c = None

ROOF_SNIPPET = """
import time
import numpy as np
import rtangle as rt

mix = rt.GhzWMixture(a=2 ** -0.5, b=2 ** -0.5, c=3 ** -0.5, d=3 ** -0.5, f=3 ** -0.5, p=0.8)
rho = mix.density()
t0 = time.perf_counter()
res = rt.roof_minimize(rho, "sqrt_tau", rt.RoofOptions(restarts=25))
dt = time.perf_counter() - t0
print(f"{rt.BACKEND} backend: value={res.value:.9f} in {dt:.2f}s")
"""


def bench_micro(name, fn, *args, repeat=5, number=2000):
    best = min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number))
    per_call = best / number * 1e6
    print(f"  {name:<24} {per_call:9.2f} us/call")
    return per_call


def main():
    rng = np.random.default_rng(0)
    W = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    A = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("compiled", _kernels_c))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    results = {}
    for label, impl in backends:
        print(f"{label} backend:")
        results[label, "hyperdet_rows"] = bench_micro("hyperdet_rows", impl.hyperdet_rows, W)
        results[label, "roof_value_grad"] = bench_micro(
            "roof_value_grad", impl.roof_value_grad, W, True, 1e-6)
        results[label, "polar_retract"] = bench_micro("polar_retract", impl.polar_retract, A)

    if _kernels_c is not None:
        print("speedup (python / compiled):")
        for kernel in ("hyperdet_rows", "roof_value_grad", "polar_retract"):
            ratio = results["python", kernel] / results["compiled", kernel]
            print(f"  {kernel:<24} {ratio:8.1f}x")

    print("\nfull roof_minimize (25 restarts, subprocess per backend):")
    sys.stdout.flush()
    for backend in ("python", "compiled") if _kernels_c is not None else ("python",):
        env = dict(os.environ, RTANGLE_BACKEND=backend)
        subprocess.run([sys.executable, "-c", ROOF_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    main()
