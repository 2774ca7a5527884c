"""Time the RK4 mean-field kernel: compiled extension vs pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from kerrspt import _fallback, kernels
from kerrspt import langevin as lv
from kerrspt.params import SystemParams, enforce_constraint


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=40_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    p = enforce_constraint(SystemParams(g=0.3, alpha=0.5, omega_m=3.0, K=-0.5, g_m=0.4,
                                        kappa=0.2, kappa_m=4.0))
    flow = lv.full_flow(p, lv.SpinDrive(0.5))
    y0 = np.zeros(4)
    dt = lv.default_dt(p)

    impls = {"python": _fallback.rk4_affine}
    if kernels.BACKEND == "cython":
        impls["cython"] = kernels.rk4_affine
    else:
        print("compiled extension not available; timing the fallback only")

    results = {}
    for name, fn in impls.items():
        t = min(timeit.repeat(lambda: fn(flow.M, flow.b, y0, dt, args.steps, 1e12, 100),
                              number=1, repeat=args.repeat))
        results[name] = (t, fn(flow.M, flow.b, y0, dt, args.steps, 1e12, 100)[0])
        print(f"{name:>7}: {t * 1e3:9.2f} ms for {args.steps} steps")

    if len(results) == 2:
        (tp, yp), (tc, yc) = results["python"], results["cython"]
        print(f"speed-up: {tp / tc:.1f}x, max |difference| = {np.max(np.abs(yp - yc)):.2e}")


if __name__ == "__main__":
    main()
