import json
import subprocess
import sys

import pytest

from fogalloc import cli
from fogalloc.harness import read_comparison_csv, read_power_csv


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_default_pon(capsys):
    code, out, _ = run(capsys, "solve", "--load", "6")
    assert code == cli.EXIT_OK
    active = [line for line in out.splitlines() if line.startswith("r1RF ")]
    assert len(active) == 1 and "48" in active[0]
    assert "status     optimal" in out


def test_solve_zero_load_is_config_error(capsys):
    code, _, err = run(capsys, "solve", "--load", "0")
    assert code == cli.EXIT_CONFIG and "positive" in err


def test_solve_cloud(capsys):
    code, out, _ = run(capsys, "solve", "--load", "20", "--arch", "cloud")
    assert code == cli.EXIT_OK
    rows = [line.split() for line in out.splitlines() if line.startswith("d") and not line.startswith("demand")]
    assert rows and all(r[1] == "CC" for r in rows)


def test_solve_infeasible(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"catalog": {"processing": {"Cloud": {"capacity": 100}}}}))
    code, _, err = run(capsys, "solve", "--load", "20", "--arch", "cloud", "--config", str(cfg))
    assert code == cli.EXIT_INFEASIBLE and "infeasible" in err


def test_solve_time_limit(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solver": {"time_seconds": 1e-9}}))
    code, _, _ = run(capsys, "solve", "--load", "12", "--config", str(cfg))
    assert code == cli.EXIT_TIME_LIMIT


def test_solve_lp_dump(capsys):
    code, out, _ = run(capsys, "solve", "--load", "6", "--arch", "cloud", "--lp")
    assert code == 0 and out.startswith("\\") and "Binaries" in out


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"speed": 3}))
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == cli.EXIT_CONFIG and "speed" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--config", str(tmp_path / "nope.json"))
    assert code == cli.EXIT_CONFIG


def test_flag_beats_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"architecture": "sl", "output_dir": str(tmp_path / "file_out"),
                               "load_range": {"min": 6, "max": 7}}))
    code, _, _ = run(capsys, "sweep", "--config", str(cfg), "--arch", "cloud", "--out", str(tmp_path / "flag_out"))
    assert code == 0
    assert (tmp_path / "flag_out" / "CloudOnly_power.csv").exists()
    assert not (tmp_path / "file_out").exists()


def test_sweep_defaults_write_fifteen_rows(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--arch", "pon", "--out", str(tmp_path))
    assert code == 0
    assert len(read_power_csv(tmp_path / "PonBased_power.csv")) == 15
    assert (tmp_path / "PonBased_allocation.csv").exists()
    assert (tmp_path / "PonBased_sweep.json").exists()


def test_sweep_step_two(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"load_range": {"min": 6, "max": 20, "step": 2}}))
    code, _, _ = run(capsys, "sweep", "--arch", "cloud", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 0
    assert len(read_power_csv(tmp_path / "CloudOnly_power.csv")) == 8


def test_sweep_unreachable_output(capsys, tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    code, _, err = run(capsys, "sweep", "--arch", "cloud", "--out", str(blocker / "x"))
    assert code == cli.EXIT_FILESYSTEM and str(blocker) in err


def test_sweep_time_limit_writes_partial_output(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solver": {"time_seconds": 1e-9}, "load_range": {"min": 11, "max": 12}}))
    code, _, _ = run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path))
    assert code == cli.EXIT_TIME_LIMIT
    statuses = {r["status"] for r in read_power_csv(tmp_path / "PonBased_power.csv")}
    assert "time_limit" in statuses


def test_compare(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--out", str(tmp_path))
    assert code == 0
    rows = read_comparison_csv(tmp_path / "comparison.csv")
    assert len(rows) == 15
    assert "max savings_vs_sl" in out and "max savings_vs_cloud" in out


def test_compare_mismatched_grids(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"architecture_load_ranges": {"sl": {"min": 6, "max": 20, "step": 2}}}))
    code, _, err = run(capsys, "compare", "--config", str(cfg), "--out", str(tmp_path))
    assert code == cli.EXIT_CONFIG and "load grids differ" in err


def test_topology_dump(capsys):
    code, out, _ = run(capsys, "topology", "--arch", "sl")
    assert code == 0
    assert any(line.startswith("SPINE1\tSpineSwitch\t") for line in out.splitlines())


def test_bad_arch_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--load", "6", "--arch", "mesh"])
    assert exc.value.code == cli.EXIT_CONFIG


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fogalloc", "solve", "--load", "6", "--arch", "cloud"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "CC" in out.stdout
