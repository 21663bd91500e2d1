#!/usr/bin/env python3
"""Benchmark: compiled clique kernel vs the pure-Python fallback.

Runs the same searches through both backends on the workloads that matter
here (random sphere graphs, pulled-back color classes, random color
classes), checks the results are identical, and prints the speedups.

Usage: python benchmarks/bench_clique.py [--quick]
"""

import argparse
import time

from ramsphere import _cliquepy, cliques, coloring, graphs, model

try:
    from ramsphere import _cliquecore
except ImportError:
    _cliquecore = None


def run_backend(core, rows, n, cap, complement):
    order = cliques.degeneracy_order(rows, n, complement)
    pos = {v: i for i, v in enumerate(order)}
    reordered = []
    for ni in range(n):
        row = rows[order[ni]]
        nr = 0
        while row:
            bit = row & -row
            nr |= 1 << pos[bit.bit_length() - 1]
            row ^= bit
        reordered.append(nr)
    cap_arg = 0 if cap is None else cap
    t0 = time.perf_counter()
    if core is _cliquepy:
        size, wit = core.solve(reordered, n, cap_arg, complement)
    else:
        size, wit = core.solve(cliques.pack_rows(reordered, n), n, cap_arg, complement)
    dt = time.perf_counter() - t0
    return size, sorted(order[v] for v in wit), dt


def workloads(quick: bool):
    consts = model.limit_constants()
    mp400 = model.solve_threshold(400, consts.p_star)

    g = graphs.sample_graph(90 if quick else 140, mp400, seed=1)
    yield "sphere graph, exact max clique", g.adjacency_rows, g.n, None, False
    yield "sphere graph, exact independence", g.adjacency_rows, g.n, None, True

    base = None
    for seed in range(50):
        cand = graphs.sample_graph(12, mp400, seed=seed)
        ok, _ = coloring.certify_kt_free(cand, 5)
        if ok:
            base = cand
            break
    n = 120 if quick else 250
    col = coloring.construct_coloring(base, n, 3, seed=3)
    yield "pullback color class, cap=5 (proves absence)", col.color_class_rows(1), n, 5, False
    yield "random color class, cap=5 (finds clique)", col.color_class_rows(2), n, 5, False


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller instances")
    args = parser.parse_args()

    if _cliquecore is None:
        print("compiled kernel not built; nothing to compare")
        return 1

    print(f"{'workload':<48} {'compiled':>10} {'pure':>10} {'speedup':>9}")
    for name, rows, n, cap, complement in workloads(args.quick):
        size_c, wit_c, dt_c = run_backend(_cliquecore, rows, n, cap, complement)
        size_p, wit_p, dt_p = run_backend(_cliquepy, rows, n, cap, complement)
        assert (size_c, wit_c) == (size_p, wit_p), f"backend mismatch on {name}"
        print(f"{name:<48} {dt_c * 1e3:>8.1f}ms {dt_p * 1e3:>8.1f}ms {dt_p / dt_c:>8.1f}x")
    print("results identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
