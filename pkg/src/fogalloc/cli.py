"""Command-line entry point: ``fogalloc {solve,sweep,compare,topology}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .catalog import CatalogError, make_scenario
from .config import ConfigError, RunConfig, load_config
from .opt import Infeasible, TimeLimit, formulate, solve_exact
from .topology import Architecture, build_topology, dump

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_TIME_LIMIT = 4
EXIT_FILESYSTEM = 5


def _arch(value: str) -> Architecture:
    try:
        return Architecture.parse(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown architecture {value!r} (use pon, sl or cloud)") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fogalloc", description="Energy-optimal placement of processing demands.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, arch=True):
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        if arch:
            sp.add_argument("--arch", type=_arch, help="PonBased|SpineLeaf|CloudOnly (or pon, sl, cloud)")
        sp.add_argument("--out", help="output directory")

    s = sub.add_parser("solve", help="solve one load point and print the allocation")
    common(s)
    s.add_argument("--load", type=float, required=True, help="per-task load in GFLOPs")
    s.add_argument("--lp", action="store_true", help="print the MILP in LP format instead of solving")

    s = sub.add_parser("sweep", help="solve every load point of one architecture and export CSV/JSON")
    common(s)
    s.add_argument("--workers", type=int)

    s = sub.add_parser("compare", help="sweep all three architectures and export savings")
    common(s, arch=False)
    s.add_argument("--workers", type=int)

    s = sub.add_parser("topology", help="print the device graph as tab-separated lines")
    common(s)
    s.add_argument("--load", type=float, default=6.0)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    kw = {}
    if getattr(args, "arch", None) is not None:
        kw["architecture"] = args.arch
    if args.out is not None:
        kw["output_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        kw["workers"] = args.workers
    return cfg.with_overrides(**kw)


def _check_load(load: float):
    if not load > 0:
        raise ConfigError(f"load must be positive, got {load:g}")


def cmd_solve(cfg: RunConfig, load: float, lp: bool = False, out=None) -> int:
    out = out or sys.stdout
    _check_load(load)
    scenario = make_scenario(load, cfg.device_catalog(), cfg.layout)
    topo = build_topology(scenario, cfg.architecture, cfg.catalog.n_core, cfg.catalog.allow_self_processing)
    try:
        problem = formulate(topo)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if lp:
        from .opt import to_lp

        out.write(to_lp(problem))
        return EXIT_OK
    code = EXIT_OK
    try:
        sol = solve_exact(problem, time_limit=cfg.solver.time_seconds, tolerance=cfg.solver.tolerance)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TimeLimit as exc:
        print(f"time limit: {exc}", file=sys.stderr)
        if exc.incumbent is None:
            return EXIT_TIME_LIMIT
        sol, code = exc.incumbent, EXIT_TIME_LIMIT

    print(f"architecture  {cfg.architecture.value}", file=out)
    print(f"per-task load {load:g} GFLOPs x {len(scenario.demands)} demands", file=out)
    print("", file=out)
    print(f"{'demand':<10}{'host':<10}{'tier':<14}{'GFLOPs':>8}", file=out)
    for d in scenario.demands:
        h = sol.allocation[d.id]
        print(f"{d.id:<10}{h:<10}{topo.host(h).spec.tier.value:<14}{d.load:>8g}", file=out)
    print("", file=out)
    print(f"{'active host':<12}{'tier':<14}{'GFLOPs':>10}{'W':>12}", file=out)
    for h, load_h in sol.node_loads.items():
        print(f"{h:<12}{topo.host(h).spec.tier.value:<14}{load_h:>10g}{sol.breakdown.per_node[h]:>12.4f}", file=out)
    b = sol.breakdown
    print("", file=out)
    print(f"processing {b.processing_w:.4f} W", file=out)
    print(f"network    {b.network_w:.4f} W", file=out)
    print(f"total      {b.total_w:.4f} W", file=out)
    o = sol.optimality
    print(f"status     {o.status} (bound {o.bound:.6f} W, gap {o.gap:.3g} W)", file=out)
    return code


def _sweep_code(all_rows) -> int:
    statuses = {r.status for r in all_rows}
    if harness.STATUS_TIME_LIMIT in statuses:
        return EXIT_TIME_LIMIT
    if harness.STATUS_INFEASIBLE in statuses:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    result = harness.sweep(cfg.architecture, config=cfg)
    dest = Path(cfg.output_dir)
    paths = harness.export_csv(result, dest)
    paths.append(harness.export_json(result, dest / f"{cfg.architecture.value}_sweep.json"))
    for r in result.rows:
        total = "-" if r.total_w is None else f"{r.total_w:.4f}"
        active = ",".join(r.node_loads) or "-"
        print(f"{r.per_task_load:>6g} GFLOPs  {total:>12} W  {r.status:<11} {active}", file=out)
    for p in paths:
        print(f"wrote {p}", file=out)
    return _sweep_code(result.rows)


def cmd_compare(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    configs = {a: cfg.with_overrides(load_range=cfg.load_range_for(a)) for a in harness.ARCHS}
    result = harness.compare(configs)
    dest = Path(cfg.output_dir)
    paths = harness.export_csv(result, dest)
    paths.append(harness.export_json(result, dest / "comparison.json"))
    print(f"{'GFLOPs':>7}{'PON W':>12}{'SL W':>12}{'cloud W':>12}{'vs SL':>8}{'vs cloud':>10}", file=out)
    for r in result.rows:
        def w(v):
            return "-" if v is None else f"{v:.2f}"

        def pct(v):
            return "-" if v is None else f"{100 * v:.1f}%"

        print(f"{r.per_task_load:>7g}{w(r.pon_total_w):>12}{w(r.sl_total_w):>12}{w(r.cloud_total_w):>12}"
              f"{pct(r.savings_vs_sl):>8}{pct(r.savings_vs_cloud):>10}", file=out)
    m = result.max_savings()
    print("", file=out)
    for key in ("savings_vs_sl", "savings_vs_cloud", "network_savings_vs_sl", "network_savings_vs_cloud"):
        v = m[key]
        print(f"max {key:<26} {'-' if v is None else f'{100 * v:.1f}%'}", file=out)
    for p in paths:
        print(f"wrote {p}", file=out)
    return _sweep_code([r for s in result.sweeps.values() for r in s.rows])


def cmd_topology(cfg: RunConfig, load: float, out=None) -> int:
    out = out or sys.stdout
    _check_load(load)
    scenario = make_scenario(load, cfg.device_catalog(), cfg.layout)
    topo = build_topology(scenario, cfg.architecture, cfg.catalog.n_core, cfg.catalog.allow_self_processing)
    out.write(dump(topo))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "solve":
            return cmd_solve(cfg, args.load, args.lp)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        return cmd_topology(cfg, args.load)
    except (ConfigError, CatalogError, harness.GridMismatch) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"filesystem error: {exc}", file=sys.stderr)
        return EXIT_FILESYSTEM


if __name__ == "__main__":
    sys.exit(main())
