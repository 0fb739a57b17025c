"""Load sweeps, architecture comparison and CSV/JSON export."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

from .catalog import make_scenario
from .config import LoadRange, RunConfig, from_dict
from .opt import Infeasible, TimeLimit, formulate, solve_exact
from .topology import Architecture, build_topology

STATUS_OPTIMAL = "optimal"
STATUS_TIME_LIMIT = "time_limit"
STATUS_INFEASIBLE = "infeasible"

ALLOCATION_COLUMNS = ("load_gflops", "node_id", "tier", "assigned_gflops")
POWER_COLUMNS = ("load_gflops", "architecture", "processing_w", "network_w", "total_w", "status")
ARCHS = (Architecture.PON, Architecture.SPINE_LEAF, Architecture.CLOUD)


class ExportError(OSError):
    pass


class GridMismatch(ValueError):
    pass


@dataclass
class SweepRow:
    per_task_load: float
    status: str
    processing_w: float | None = None
    network_w: float | None = None
    total_w: float | None = None
    gap: float | None = None
    node_loads: dict[str, float] = field(default_factory=dict)  # host id -> GFLOPs
    node_tiers: dict[str, str] = field(default_factory=dict)  # host id -> tier
    allocation: dict[str, str] = field(default_factory=dict)  # demand id -> host id
    message: str = ""

    @property
    def tier_loads(self) -> dict[str, float]:
        out: dict[str, float] = defaultdict(float)
        for h, load in self.node_loads.items():
            out[self.node_tiers[h]] += load
        return dict(out)

    @property
    def solved(self) -> bool:
        return self.total_w is not None


@dataclass
class SweepResult:
    architecture: Architecture
    rows: list[SweepRow]
    config: dict = field(default_factory=dict)

    @property
    def loads(self) -> list[float]:
        return [r.per_task_load for r in self.rows]

    @property
    def all_optimal(self) -> bool:
        return all(r.status == STATUS_OPTIMAL for r in self.rows)


@dataclass
class ComparisonRow:
    per_task_load: float
    pon_total_w: float | None
    sl_total_w: float | None
    cloud_total_w: float | None
    pon_processing_w: float | None
    sl_processing_w: float | None
    cloud_processing_w: float | None
    pon_network_w: float | None
    sl_network_w: float | None
    cloud_network_w: float | None
    savings_vs_sl: float | None
    savings_vs_cloud: float | None
    processing_savings_vs_sl: float | None
    processing_savings_vs_cloud: float | None
    network_savings_vs_sl: float | None
    network_savings_vs_cloud: float | None


@dataclass
class ComparisonResult:
    rows: list[ComparisonRow]
    sweeps: dict[Architecture, SweepResult]
    config: dict = field(default_factory=dict)

    def max_savings(self) -> dict[str, float | None]:
        keys = [f.name for f in ComparisonRow.__dataclass_fields__.values() if "savings" in f.name]
        out = {}
        for k in keys:
            vals = [getattr(r, k) for r in self.rows if getattr(r, k) is not None]
            out[k] = max(vals) if vals else None
        return out

    @property
    def all_optimal(self) -> bool:
        return all(s.all_optimal for s in self.sweeps.values())


def solve_point(config: RunConfig, architecture: Architecture, load: float) -> SweepRow:
    """Build and solve one load point; never raises for solver outcomes."""
    scenario = make_scenario(load, config.device_catalog(), config.layout)
    topo = build_topology(
        scenario,
        architecture,
        n_core=config.catalog.n_core,
        allow_self_processing=config.catalog.allow_self_processing,
    )
    try:
        problem = formulate(topo)
        sol = solve_exact(problem, time_limit=config.solver.time_seconds, tolerance=config.solver.tolerance)
        status, message = STATUS_OPTIMAL, ""
    except Infeasible as exc:
        return SweepRow(load, STATUS_INFEASIBLE, message=str(exc))
    except TimeLimit as exc:
        if exc.incumbent is None:
            return SweepRow(load, STATUS_TIME_LIMIT, message=str(exc))
        sol, status, message = exc.incumbent, STATUS_TIME_LIMIT, str(exc)
    b = sol.breakdown
    return SweepRow(
        per_task_load=load,
        status=status,
        processing_w=b.processing_w,
        network_w=b.network_w,
        total_w=b.total_w,
        gap=sol.optimality.gap,
        node_loads=dict(sorted(sol.node_loads.items(), key=lambda t: problem.host_ids.index(t[0]))),
        node_tiers={h: topo.host(h).spec.tier.value for h in sol.node_loads},
        allocation=dict(sol.allocation),
        message=message,
    )


def _solve_star(args):
    return solve_point(*args)


def sweep(
    architecture: Architecture | str,
    load_range: LoadRange | None = None,
    config: RunConfig | None = None,
    workers: int | None = None,
) -> SweepResult:
    config = config or RunConfig()
    arch = Architecture.parse(architecture)
    load_range = load_range or config.load_range_for(arch)
    workers = workers or config.workers
    jobs = [(config, arch, load) for load in load_range.points()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_solve_star, jobs))
    else:
        rows = [_solve_star(j) for j in jobs]
    echo = config.to_dict()
    echo["architecture"] = arch.value
    echo["load_range"] = {"min": load_range.min, "max": load_range.max, "step": load_range.step}
    return SweepResult(arch, rows, echo)


def _saving(pon, other):
    if pon is None or other is None or other == 0:
        return None
    return 1.0 - pon / other


def compare_sweeps(pon: SweepResult, sl: SweepResult, cloud: SweepResult) -> list[ComparisonRow]:
    if not (pon.loads == sl.loads == cloud.loads):
        raise GridMismatch(
            f"load grids differ: PonBased {pon.loads}, SpineLeaf {sl.loads}, CloudOnly {cloud.loads}"
        )
    layouts = {json.dumps(s.config.get("layout"), sort_keys=True) for s in (pon, sl, cloud)}
    if len(layouts) > 1:
        raise GridMismatch("scenario layouts differ between architectures")
    out = []
    for p, s, c in zip(pon.rows, sl.rows, cloud.rows):
        out.append(ComparisonRow(
            per_task_load=p.per_task_load,
            pon_total_w=p.total_w,
            sl_total_w=s.total_w,
            cloud_total_w=c.total_w,
            pon_processing_w=p.processing_w,
            sl_processing_w=s.processing_w,
            cloud_processing_w=c.processing_w,
            pon_network_w=p.network_w,
            sl_network_w=s.network_w,
            cloud_network_w=c.network_w,
            savings_vs_sl=_saving(p.total_w, s.total_w),
            savings_vs_cloud=_saving(p.total_w, c.total_w),
            processing_savings_vs_sl=_saving(p.processing_w, s.processing_w),
            processing_savings_vs_cloud=_saving(p.processing_w, c.processing_w),
            network_savings_vs_sl=_saving(p.network_w, s.network_w),
            network_savings_vs_cloud=_saving(p.network_w, c.network_w),
        ))
    return out


def compare(
    configs: RunConfig | Mapping[Architecture, RunConfig] | None = None,
    load_range: LoadRange | None = None,
    workers: int | None = None,
) -> ComparisonResult:
    if configs is None or isinstance(configs, RunConfig):
        base = configs or RunConfig()
        configs = {a: base for a in ARCHS}
    sweeps = {a: sweep(a, load_range, configs[a], workers) for a in ARCHS}
    # refuse before reporting anything if the grids disagree
    rows = compare_sweeps(sweeps[Architecture.PON], sweeps[Architecture.SPINE_LEAF], sweeps[Architecture.CLOUD])
    echo = dict(configs[Architecture.PON].to_dict())
    echo.pop("architecture", None)
    return ComparisonResult(rows, sweeps, echo)


# ---------------------------------------------------------------- export

def fmt(x) -> str:
    """Numbers as the shortest decimal that reads back to the same double."""
    if x is None:
        return ""
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"cannot export non-finite value {x}")
    return repr(float(x))


def _parse_num(s: str) -> float | None:
    return None if s == "" else float(s)


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise ExportError(exc.errno, f"cannot write {path}: {exc.strerror or exc}") from None


def _write_csv(path: Path, header, rows):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def csv_paths(architecture: Architecture | str, destination: str | Path) -> tuple[Path, Path]:
    arch = Architecture.parse(architecture).value
    d = Path(destination)
    return d / f"{arch}_allocation.csv", d / f"{arch}_power.csv"


def export_csv(result: SweepResult | ComparisonResult, destination: str | Path) -> list[Path]:
    """Write CSVs under ``destination`` (a directory); returns the paths written."""
    if isinstance(result, ComparisonResult):
        paths = []
        for s in result.sweeps.values():
            paths += export_csv(s, destination)
        cols = list(ComparisonRow.__dataclass_fields__)
        rows = [[fmt(getattr(r, c)) for c in cols] for r in result.rows]
        paths.append(_write_csv(Path(destination) / "comparison.csv", cols, rows))
        return paths
    alloc_path, power_path = csv_paths(result.architecture, destination)
    alloc_rows, power_rows = [], []
    for r in result.rows:
        for h, load in r.node_loads.items():
            alloc_rows.append([fmt(r.per_task_load), h, r.node_tiers[h], fmt(load)])
        power_rows.append([
            fmt(r.per_task_load), result.architecture.value,
            fmt(r.processing_w), fmt(r.network_w), fmt(r.total_w), r.status,
        ])
    return [
        _write_csv(alloc_path, ALLOCATION_COLUMNS, alloc_rows),
        _write_csv(power_path, POWER_COLUMNS, power_rows),
    ]


def read_power_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            out.append({
                "load_gflops": float(row["load_gflops"]),
                "architecture": row["architecture"],
                "processing_w": _parse_num(row["processing_w"]),
                "network_w": _parse_num(row["network_w"]),
                "total_w": _parse_num(row["total_w"]),
                "status": row["status"],
            })
        return out


def read_allocation_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {
                "load_gflops": float(r["load_gflops"]),
                "node_id": r["node_id"],
                "tier": r["tier"],
                "assigned_gflops": float(r["assigned_gflops"]),
            }
            for r in csv.DictReader(fh)
        ]


def read_comparison_csv(path: str | Path) -> list[ComparisonRow]:
    with open(path, newline="") as fh:
        return [ComparisonRow(**{k: _parse_num(v) for k, v in r.items()}) for r in csv.DictReader(fh)]


def _sweep_to_dict(s: SweepResult) -> dict:
    return {"kind": "sweep", "architecture": s.architecture.value, "config": s.config,
            "rows": [asdict(r) for r in s.rows]}


def _sweep_from_dict(d: dict) -> SweepResult:
    return SweepResult(Architecture(d["architecture"]), [SweepRow(**r) for r in d["rows"]], d["config"])


def to_json_dict(result: SweepResult | ComparisonResult) -> dict:
    if isinstance(result, SweepResult):
        return _sweep_to_dict(result)
    return {
        "kind": "comparison",
        "config": result.config,
        "max_savings": result.max_savings(),
        "rows": [asdict(r) for r in result.rows],
        "sweeps": {a.value: _sweep_to_dict(s) for a, s in result.sweeps.items()},
    }


def from_json_dict(d: dict) -> SweepResult | ComparisonResult:
    if d.get("kind") == "sweep":
        return _sweep_from_dict(d)
    if d.get("kind") == "comparison":
        return ComparisonResult(
            [ComparisonRow(**r) for r in d["rows"]],
            {Architecture(a): _sweep_from_dict(s) for a, s in d["sweeps"].items()},
            d["config"],
        )
    raise ValueError(f"unrecognised result kind {d.get('kind')!r}")


def export_json(result: SweepResult | ComparisonResult, destination: str | Path) -> Path:
    """Write ``result`` to the file ``destination``."""
    path = Path(destination)
    with _open(path) as fh:
        json.dump(to_json_dict(result), fh, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def load_json(path: str | Path) -> SweepResult | ComparisonResult:
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def config_from_echo(echo: dict) -> RunConfig:
    """Rebuild the RunConfig recorded in an export."""
    return from_dict(echo)
