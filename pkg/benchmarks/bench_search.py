"""Compare the compiled and pure-Python search kernels.

    python benchmarks/bench_search.py [--repeat N] [--loads 6 9 12 ...]

Times the full two-pass exact solve on the 4-room scenario and the
exhaustive enumeration on a 3-room reduced instance, per kernel.
"""

from __future__ import annotations

import argparse
import statistics
import time

from fogalloc.catalog import Layout, make_scenario, scenario_with_loads
from fogalloc.opt import formulate, kernels, solve_exact
from fogalloc.opt.brute import pair_tables
from fogalloc.topology import Architecture, build_topology


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--loads", type=float, nargs="+", default=[6, 9, 10, 12, 16, 20])
    args = ap.parse_args(argv)
    impls = kernels.available()
    if "cython" not in impls:
        print("compiled kernels not built; only the Python kernel is timed")

    print(f"{'case':<28}" + "".join(f"{i + ' s':>14}" for i in impls) + f"{'speedup':>10}  nodes")
    for arch in (Architecture.PON, Architecture.SPINE_LEAF):
        for load in args.loads:
            problem = formulate(build_topology(make_scenario(load), arch))
            row, nodes = {}, None
            for impl in impls:
                t, _, sol = best_of(lambda: solve_exact(problem, kernel=impl), args.repeat)
                row[impl] = t
                nodes = sol.stats["nodes"]
            _print(f"solve {arch.value} {load:g}", row, impls, nodes)

    topo = build_topology(scenario_with_loads([7, 3, 12], layout=Layout(3, 8, 1)), Architecture.PON)
    tables = pair_tables(topo, topo.scenario)
    row = {}
    for impl in impls:
        K = kernels.get(impl)
        t, _, out = best_of(lambda: K.enumerate_assignments(*tables, float("inf"), 0.0), args.repeat)
        row[impl] = t
    _print(f"enumerate {len(tables[0][0])}^3 hosts", row, impls, out[3])


def _print(name, row, impls, nodes):
    speed = row["python"] / row["cython"] if "cython" in row else float("nan")
    print(f"{name:<28}" + "".join(f"{row[i]:>14.4f}" for i in impls) + f"{speed:>9.1f}x  {nodes}")


if __name__ == "__main__":
    main()
