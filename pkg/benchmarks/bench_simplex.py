"""Benchmark the compiled pivot kernels against the numpy fallback.

Times cold solves of complete-graph relaxations, a warm branch-and-bound run,
and the pattern estimator with each kernel, and reports the speedup.  Both
kernels make identical pivot decisions, so iteration counts must agree.

Run:  python benchmarks/bench_simplex.py [--trials 5] [--n 12]
"""

import argparse
import time

import numpy as np

from mapbnb import _simplex_py
from mapbnb import lp as lpmod
from mapbnb.bnb import solve_map
from mapbnb.model import build_local_lp, random_instance
from mapbnb.svf import estimate_svc

try:
    from mapbnb import _simplex_c
except ImportError:
    _simplex_c = None


def time_case(label, fn, kernels, trials):
    results = {}
    for kname, kernel in kernels.items():
        best = np.inf
        value = None
        for _ in range(trials):
            t0 = time.perf_counter()
            value = fn(kernel)
            best = min(best, time.perf_counter() - t0)
        results[kname] = (best, value)
    vals = {v for _, v in results.values()}
    agree = "ok" if len(vals) == 1 else "MISMATCH"
    line = f"{label:<34}"
    for kname, (sec, _) in results.items():
        line += f"  {kname}: {sec * 1e3:9.2f} ms"
    if len(results) == 2:
        py, cy = results["python"][0], results["compiled"][0]
        line += f"  speedup: {py / cy:5.2f}x"
    print(line + f"  [{agree}]")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kernels = {"python": _simplex_py}
    if _simplex_c is not None:
        kernels["compiled"] = _simplex_c
    else:
        print("compiled kernel not built; timing the fallback only")

    models = [random_instance(args.n, w, args.seed + k) for k, w in enumerate((0.3, 0.8, 2.0))]
    probs = [build_local_lp(m) for m in models]

    def cold_solves(kernel):
        total = 0.0
        for prob in probs:
            total += lpmod.solve(prob, kernel=kernel).value
        return round(total, 9)

    def warm_tree(kernel):
        total = 0
        for m in models:
            _, _, stats = solve_map(m, kernel=kernel)
            total += stats.lp_calls
        return total

    def estimator(kernel):
        m = random_instance(args.n, 0.5, args.seed + 99)
        return estimate_svc(m, kernel=kernel).lp_calls

    time_case(f"cold relaxation solves (n={args.n})", cold_solves, kernels, args.trials)
    time_case("branch-and-bound (3 instances)", warm_tree, kernels, args.trials)
    time_case("pattern estimator (1 instance)", estimator, kernels, args.trials)


if __name__ == "__main__":
    main()
