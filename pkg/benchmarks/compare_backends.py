"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter (the backend is fixed at import
time).  Two measurements per backend:

* per-call ATTS of the closed-form layer and the QP baseline (as ``cbfsafe bench``)
* batch throughput of the composite barrier + closed form over 1e5 states

Usage:  python benchmarks/compare_backends.py [--reps 2000] [--batch 100000] [--csv out.csv]
"""
import argparse
import csv
import json
import os
import subprocess
import sys
import time

BACKENDS = ("numba", "numpy")


def worker(reps, batch):
    import numpy as np

    from cbfsafe import BACKEND
    from cbfsafe.bench import BenchSpec, run_bench
    from cbfsafe.checks import default_barriers
    from cbfsafe.dynamics import SingleIntegrator2D
    from cbfsafe.safety_filter import filter_batch

    rows = run_bench(BenchSpec(repetitions=reps))
    out = [{"measure": f"atts_{r.method}", "I": r.constraint_count, "seconds": r.atts_seconds} for r in rows]

    bset, system = default_barriers(), SingleIntegrator2D()
    rng = np.random.default_rng(0)
    X = rng.uniform(-5, 5, size=(batch, 2))
    U = rng.uniform(-3, 3, size=(batch, 2))
    filter_batch(bset, 2.0, system, 5.0, X[:10], U[:10])  # compile / warm
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter_ns()
        filter_batch(bset, 2.0, system, 5.0, X, U)
        best = min(best, (time.perf_counter_ns() - t0) * 1e-9)
    out.append({"measure": "batch_filter_per_state", "I": len(bset), "seconds": best / batch})
    print(json.dumps({"backend": BACKEND, "rows": out}))


def run_backend(name, reps, batch):
    env = dict(os.environ, CBFSAFE_BACKEND=name)
    proc = subprocess.run([sys.executable, __file__, "--worker", "--reps", str(reps), "--batch", str(batch)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=100_000)
    ap.add_argument("--csv")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.reps, args.batch)
        return 0

    results = {}
    for name in BACKENDS:
        res = run_backend(name, args.reps, args.batch)
        if res["backend"] != name:
            print(f"warning: asked for {name}, got {res['backend']} (numba missing?)", file=sys.stderr)
        results[name] = {(r["measure"], r["I"]): r["seconds"] for r in res["rows"]}

    keys = list(results["numba"])
    table = []
    print(f"{'measure':<26s} {'I':>3s} {'numba':>12s} {'numpy':>12s} {'numpy/numba':>12s}")
    for key in keys:
        a, b = results["numba"][key], results["numpy"][key]
        table.append({"measure": key[0], "I": key[1], "numba_s": a, "numpy_s": b, "ratio": b / a})
        print(f"{key[0]:<26s} {key[1]:>3d} {a * 1e6:10.3f}us {b * 1e6:10.3f}us {b / a:11.2f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(table[0]))
            w.writeheader()
            w.writerows(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
