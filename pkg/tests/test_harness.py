import csv
import dataclasses

import pytest

from fogalloc import harness
from fogalloc.config import LoadRange, RunConfig
from fogalloc.harness import (
    ComparisonResult,
    GridMismatch,
    SweepResult,
    SweepRow,
    compare_sweeps,
    export_csv,
    export_json,
    load_json,
    read_allocation_csv,
    read_comparison_csv,
    read_power_csv,
    sweep,
)
from fogalloc.topology import Architecture


def test_sweep_rows(default_comparison):
    pon = default_comparison.sweeps[Architecture.PON]
    assert len(pon.rows) == 15
    loads = pon.loads
    assert all(a < b for a, b in zip(loads, loads[1:]))
    for r in pon.rows:
        assert r.status == "optimal"
        assert r.total_w == pytest.approx(r.processing_w + r.network_w, rel=1e-9)


def test_pon_six_row(default_comparison):
    row = default_comparison.sweeps[Architecture.PON].rows[0]
    assert row.per_task_load == 6.0
    assert row.node_loads == {"r1RF": 48.0}
    assert row.tier_loads == {"RoomFog": 48.0}


def test_cloud_rows_all_on_cc(default_comparison):
    for r in default_comparison.sweeps[Architecture.CLOUD].rows:
        assert r.node_loads == {"CC": 8 * r.per_task_load}


def test_gflops_conservation(default_comparison):
    for s in default_comparison.sweeps.values():
        for r in s.rows:
            assert sum(r.node_loads.values()) == pytest.approx(8 * r.per_task_load, rel=1e-12)


def test_step_two_gives_eight_rows():
    result = sweep("cloud", LoadRange(6, 20, 2))
    assert result.loads == [6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0]


def test_worker_count_does_not_change_results(default_comparison):
    par = sweep(Architecture.PON, workers=3)
    assert par.rows == default_comparison.sweeps[Architecture.PON].rows


def test_savings_formula(default_comparison):
    for r in default_comparison.rows:
        assert r.savings_vs_sl == pytest.approx(1 - r.pon_total_w / r.sl_total_w, rel=1e-12)
        assert r.savings_vs_cloud == pytest.approx(1 - r.pon_total_w / r.cloud_total_w, rel=1e-12)
        assert r.network_savings_vs_sl == pytest.approx(1 - r.pon_network_w / r.sl_network_w, rel=1e-12)
        assert r.savings_vs_sl < 1 and r.savings_vs_cloud < 1


def test_dominance(default_comparison):
    for r in default_comparison.rows:
        assert r.pon_total_w <= r.sl_total_w <= r.cloud_total_w


def test_max_savings_are_maxima(default_comparison):
    m = default_comparison.max_savings()
    assert m["savings_vs_cloud"] == max(r.savings_vs_cloud for r in default_comparison.rows)


def test_mismatched_grids_refused():
    a = sweep("cloud", LoadRange(6, 8, 1))
    b = sweep("cloud", LoadRange(6, 8, 2))
    with pytest.raises(GridMismatch):
        compare_sweeps(a, a, b)


def test_empty_sweep_writes_headers(tmp_path):
    paths = export_csv(SweepResult(Architecture.PON, []), tmp_path)
    assert [p.name for p in paths] == ["PonBased_allocation.csv", "PonBased_power.csv"]
    assert paths[0].read_text() == "load_gflops,node_id,tier,assigned_gflops\n"
    assert paths[1].read_text() == "load_gflops,architecture,processing_w,network_w,total_w,status\n"


def test_power_csv_round_trip(default_comparison, tmp_path):
    pon = default_comparison.sweeps[Architecture.PON]
    export_csv(pon, tmp_path)
    rows = read_power_csv(tmp_path / "PonBased_power.csv")
    assert len(rows) == 15
    for parsed, r in zip(rows, pon.rows):
        assert parsed["load_gflops"] == r.per_task_load
        assert parsed["processing_w"] == r.processing_w
        assert parsed["network_w"] == r.network_w
        assert parsed["total_w"] == r.total_w
        assert parsed["architecture"] == "PonBased"


def test_allocation_csv_conservation(default_comparison, tmp_path):
    for s in default_comparison.sweeps.values():
        alloc_path, _ = export_csv(s, tmp_path)
        totals = {}
        for row in read_allocation_csv(alloc_path):
            totals[row["load_gflops"]] = totals.get(row["load_gflops"], 0.0) + row["assigned_gflops"]
        assert totals == pytest.approx({x: 8 * x for x in s.loads}, rel=1e-12)


def test_comparison_csv(default_comparison, tmp_path):
    export_csv(default_comparison, tmp_path)
    with open(tmp_path / "comparison.csv") as fh:
        header = next(csv.reader(fh))
    assert "savings_vs_sl" in header and "savings_vs_cloud" in header
    assert read_comparison_csv(tmp_path / "comparison.csv") == default_comparison.rows


def test_json_round_trip(default_comparison, tmp_path):
    p = export_json(default_comparison, tmp_path / "c.json")
    back = load_json(p)
    assert isinstance(back, ComparisonResult)
    assert back == default_comparison
    s = default_comparison.sweeps[Architecture.SPINE_LEAF]
    assert load_json(export_json(s, tmp_path / "s.json")) == s


def test_json_config_echo(default_comparison):
    echo = default_comparison.sweeps[Architecture.PON].config
    assert echo["catalog"]["idle_fraction_processing"] == 0.6
    assert echo["catalog"]["n_core"] == 1


def test_timed_out_status_preserved(tmp_path):
    rows = [SweepRow(6.0, "time_limit", message="time limit reached"), SweepRow(7.0, "infeasible")]
    result = SweepResult(Architecture.PON, rows, RunConfig().to_dict())
    back = load_json(export_json(result, tmp_path / "t.json"))
    assert [r.status for r in back.rows] == ["time_limit", "infeasible"]
    _, power = export_csv(result, tmp_path)
    parsed = read_power_csv(power)
    assert parsed[0]["status"] == "time_limit" and parsed[0]["total_w"] is None


def test_time_limited_point_is_recorded():
    cfg = dataclasses.replace(RunConfig(), solver=dataclasses.replace(RunConfig().solver, time_seconds=1e-9))
    row = harness.solve_point(cfg, Architecture.PON, 12.0)
    assert row.status == "time_limit"


def test_unwritable_destination(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError) as exc:
        export_csv(SweepResult(Architecture.PON, []), blocker / "sub")
    assert str(blocker) in str(exc.value)


def test_config_echo_reproduces_csv_bytes(tmp_path):
    cfg = RunConfig(load_range=LoadRange(8, 12, 2))
    first = sweep(Architecture.SPINE_LEAF, config=cfg)
    export_csv(first, tmp_path / "a")
    replay_cfg = harness.config_from_echo(first.config)
    second = sweep(replay_cfg.architecture, config=replay_cfg)
    export_csv(second, tmp_path / "b")
    for name in ("SpineLeaf_allocation.csv", "SpineLeaf_power.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
