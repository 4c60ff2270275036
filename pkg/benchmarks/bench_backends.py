#!/usr/bin/env python3
"""Timing comparison of the compiled core against the pure-Python fallback.

Each workload runs on both backends with the same seed; simulation outputs
are checked to be identical and fluid outputs to agree to roundoff before
the timings are reported.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from localmatch import backend, cm, fluid
from localmatch.criteria import CriterionKind
from localmatch.degrees import parse_model_spec, pmf_truncated, sample_degree_vector
from localmatch.rng import RandomSource


def timed(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return result, best


def bench_cm(n, quick):
    model = parse_model_spec("regular:d=3")
    dv = sample_degree_vector(model, n, RandomSource(1))
    rows = []
    outputs = {}
    for name in ("pure", "compiled"):
        def work(name=name):
            return cm.run(dv, CriterionKind.UNI_MIN, RandomSource(2), backend=name)
        traj, secs = timed(work, repeats=1 if (name == "pure" and not quick) else 3)
        outputs[name] = traj
        rows.append((f"cm run n={n} uni-min", name, secs))
    a, b = outputs["pure"], outputs["compiled"]
    assert (a.matched, a.isolated, a.blocked, a.selfloops) == \
        (b.matched, b.isolated, b.blocked, b.selfloops), "backend outputs differ"
    return rows


def bench_fluid(quick):
    model = parse_model_spec("uniform:a=1,b=20")
    init = pmf_truncated(model, 20, 1e-12).weights
    h = 1e-3 if quick else 1e-4
    system = fluid.FluidSystem(kind=CriterionKind.UNI_MIN, initial=init)
    rows = []
    outputs = {}
    for name in ("pure", "compiled"):
        sol, secs = timed(lambda name=name: fluid.solve(system, h, backend=name),
                          repeats=1 if name == "pure" else 3)
        outputs[name] = sol
        rows.append((f"fluid uni-min N=20 h={h:g}", name, secs))
    diff = np.abs(outputs["pure"].states - outputs["compiled"].states).max()
    assert diff < 1e-11, f"fluid backends disagree by {diff}"
    return rows


def bench_poisson(quick):
    h = 1e-4 if quick else 1e-5
    rows = []
    outputs = {}
    for name in ("pure", "compiled"):
        sol, secs = timed(lambda name=name: fluid.solve_poisson_greedy(2.0, h, backend=name),
                          repeats=1 if name == "pure" else 3)
        outputs[name] = sol
        rows.append((f"poisson scalar h={h:g}", name, secs))
    assert abs(outputs["pure"].coverage - outputs["compiled"].coverage) < 1e-12
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    if not backend.compiled_available():
        raise SystemExit("compiled core not built; nothing to compare")

    rows = []
    rows += bench_cm(20_000 if args.quick else 100_000, args.quick)
    rows += bench_fluid(args.quick)
    rows += bench_poisson(args.quick)

    print(f"{'workload':36s} {'backend':9s} {'seconds':>10s}")
    by_work = {}
    for work, name, secs in rows:
        print(f"{work:36s} {name:9s} {secs:10.4f}")
        by_work.setdefault(work, {})[name] = secs
    print()
    for work, t in by_work.items():
        print(f"{work:36s} speedup x{t['pure'] / t['compiled']:.1f}")


if __name__ == "__main__":
    main()
