#!/usr/bin/env python3
"""Time the compiled gate kernel against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each workload runs on identically seeded generators; the script also checks
that both backends returned the same hits.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from rti_sim import kernels
from rti_sim.engine import run_ensemble
from rti_sim.gate import builtin

WORKLOADS = {
    # name: (counts, probs, segment starts, ticks, calls)
    "single absorber, long window": ([1], [0.007], [0, 1], 100_000, 200),
    "two channels, tick by tick": ([1, 2], [0.007, 0.007], [0, 2], 1, 20_000),
    "1000 absorbers, short window": ([1000], [0.007], [0, 1], 20, 2_000),
    "3e5-constituent block": ([300_000], [1e-6], [0, 1], 50, 50),
}


def _time_kernel(fn, counts, probs, seg, ticks, calls, seed) -> tuple[float, list]:
    rng = np.random.Generator(np.random.PCG64(seed))
    c = np.asarray(counts, np.int64)
    p = np.asarray(probs, np.float64)
    s = np.asarray(seg, np.int64)
    seen = []
    t0 = time.perf_counter()
    for _ in range(calls):
        t, g, hb, hi = fn(rng, c, p, s, ticks)
        seen.append((t, g, hb.size))
    return time.perf_counter() - t0, seen


def _time_ensemble(backend: str, runs: int) -> float:
    kernels.use_backend(backend)
    sc = builtin("maudlin-photon-analog", seed=1)
    t0 = time.perf_counter()
    run_ensemble(sc, runs)
    return time.perf_counter() - t0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--runs", type=int, default=20_000, help="ensemble size for the end-to-end row")
    args = ap.parse_args(argv)

    if kernels.compiled_first_fire is None:
        print("compiled kernel not built; only the fallback is available")
        return 1
    impls = {"python": kernels.python_first_fire, "cython": kernels.compiled_first_fire}
    print(f"{'workload':34s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, (counts, probs, seg, ticks, calls) in WORKLOADS.items():
        best, outputs = {}, {}
        for label, fn in impls.items():
            times = []
            for rep in range(args.repeat):
                dt, seen = _time_kernel(fn, counts, probs, seg, ticks, calls, seed=rep)
                times.append(dt)
                outputs.setdefault(label, seen)
            best[label] = min(times)
        if outputs["python"] != outputs["cython"]:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:34s} {best['python']:9.3f}s {best['cython']:9.3f}s {best['python'] / best['cython']:7.1f}x")

    before = kernels.BACKEND
    try:
        rows = {b: statistics.median(_time_ensemble(b, args.runs) for _ in range(args.repeat)) for b in impls}
    finally:
        kernels.use_backend(before)
    label = f"ensemble, {args.runs} runs"
    print(f"{label:34s} {rows['python']:9.3f}s {rows['cython']:9.3f}s {rows['python'] / rows['cython']:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
