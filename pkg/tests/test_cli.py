import csv
import io
import json

import pytest

from helpers import small_spec
from worksteal import bench
from worksteal.bench import Machine, Placement, run, sweep
from worksteal.classic import SchedulerConfig
from worksteal.cli import EXIT_ERROR, EXIT_ORACLE, main
from worksteal.config import env_overrides, load_config, parse_kv, parse_partition_map
from worksteal.topology import ANY, make_topology

SMALL_FLAGS = ["--bench", "cilksort", "--n", "4096", "--base-case", "256", "--workers", "8"]


def cli(*argv, environ=None):
    out = io.StringIO()
    code = main(list(argv), out=out, environ=environ or {})
    return code, out.getvalue()


# -- harness ---------------------------------------------------------------

def test_simulator_reports_are_byte_identical():
    spec = small_spec("heat", hints="top-level-quarters")
    topo = make_topology(4, 8, 16)
    a = run(spec, topo, SchedulerConfig("numaws"), seed=5, placement=Placement("partitioned"))
    bench._T1_CACHE.clear()
    b = run(spec, topo, SchedulerConfig("numaws"), seed=5, placement=Placement("partitioned"))
    assert json.dumps(a.report.to_dict(), sort_keys=True) == json.dumps(b.report.to_dict(), sort_keys=True)


def test_single_point_sweep_equals_run():
    spec = small_spec("scan")
    entries = sweep(spec, {"P": [8]}, Machine(), SchedulerConfig("numaws"))
    assert len(entries) == 1 and entries[0].ok
    direct = run(spec, make_topology(4, 8, 8), SchedulerConfig("numaws"), seed=0)
    assert entries[0].result.report.to_dict() == direct.report.to_dict()


def test_sweep_records_errors_and_continues():
    entries = sweep(small_spec("scan"), {"P": [4, 64, 8]})
    assert [e.ok for e in entries] == [True, False, True]
    assert "TopologyError" in entries[1].error
    with pytest.raises(ValueError):
        sweep(small_spec("scan"), {})
    with pytest.raises(ValueError):
        sweep(small_spec("scan"), {"colour": [1]})


def test_sweep_views():
    entries = sweep(small_spec("scan"), {"P": [1, 8], "placement": ["packed", "spread"],
                                         "seed": [0, 1]})
    curves = bench.scalability_curves(entries)
    assert set(curves) == {("classic", "packed"), ("classic", "spread")}
    assert [p for p, _, _ in curves[("classic", "packed")]] == [1, 8]
    rows = bench.aggregate(entries)
    assert len(rows) == 4 and all(r["runs"] == 2 for r in rows)
    sens = sweep(small_spec("scan"), {"scheduler": ["numaws"], "local_bias": [0.5, 0.7],
                                      "push_threshold": [2, 4]})
    table = bench.sensitivity_table(sens)
    base = [r for r in table if (r["local_bias"], r["push_threshold"]) == (0.7, 4)]
    assert base[0]["normalized"] == pytest.approx(1.0)
    assert "normalized" in bench.rows_to_table(table)
    assert bench.rows_to_csv(table).startswith("scheduler,")


def test_oracle_mismatch_is_distinct(monkeypatch):
    from worksteal.benchmarks import base
    monkeypatch.setattr(base.BenchInstance, "check", lambda self: False)
    with pytest.raises(bench.OracleMismatch) as info:
        run(small_spec("scan"), make_topology(4, 8, 4))
    assert info.value.result.checksum
    code, out = cli("run", "--bench", "scan", "--n", "4096", "--base-case", "256", "--workers", "4")
    assert code == EXIT_ORACLE and "MISMATCH" in out


def test_invalid_mode():
    with pytest.raises(ValueError):
        run(small_spec("scan"), make_topology(4, 8, 4), mode="gpu")


# -- configuration ----------------------------------------------------------

def test_config_parsing(tmp_path):
    assert parse_kv("# comment\nlocal-bias = 0.9\nworkers=4\n") == {"local_bias": "0.9", "workers": "4"}
    with pytest.raises(ValueError):
        parse_kv("nonsense")
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"scheduler": {"local_bias": 0.5}, "workers": 2}))
    assert load_config(p) == {"local_bias": 0.5, "workers": 2}
    assert env_overrides({"WORKSTEAL_PUSH_THRESHOLD": "8", "HOME": "/"}) == {"push_threshold": "8"}
    assert parse_partition_map("0:4:1, 4:8:ANY") == [(0, 4, 1), (4, 8, ANY)]
    with pytest.raises(ValueError):
        parse_partition_map("0:4")


def test_settings_priority(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("scheduler = numaws\nlocal_bias = 0.5\npush_threshold = 2\nseed = 4\n")
    env = {"WORKSTEAL_LOCAL_BIAS": "0.9", "WORKSTEAL_PUSH_THRESHOLD": "8"}
    code, out = cli("run", *SMALL_FLAGS, "--config", str(cfg), "--push-threshold", "3",
                    "--out", "json", environ=env)
    assert code == 0
    doc = json.loads(out)
    c = doc["config"]
    assert (c["scheduler"], c["local_bias"], c["push_threshold"], c["seed"]) == ("numaws", 0.9, 3, 4)
    assert doc["correct"] is True


# -- CLI ------------------------------------------------------------------

def test_run_table_and_trace(tmp_path):
    trace = tmp_path / "t.csv"
    code, out = cli("run", *SMALL_FLAGS, "--trace", str(trace))
    assert code == 0 and "oracle ok" in out and "T1/TP" in out
    rows = list(csv.DictReader(trace.open()))
    assert rows and {r["category"] for r in rows} <= {"work", "scheduling", "idle"}
    code, out = cli("analyze", "--trace-in", str(trace))
    assert code == 0 and "all" in out


def test_run_csv_cost_model_off():
    code, out = cli("run", *SMALL_FLAGS, "--out", "csv", "--cost-model", "off")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["cfg_cost_model"] == "False"
    assert float(rows[0]["W_P"]) == float(rows[0]["work"])


def test_run_threads_mode():
    code, out = cli("run", *SMALL_FLAGS, "--mode", "threads", "--workers", "4", "--out", "json")
    assert code == 0 and json.loads(out)["config"]["mode"] == "threads"


def test_sweep_cli_outputs():
    code, out = cli("sweep", *SMALL_FLAGS, "--grid-P", "1,8", "--grid-placement", "packed,spread",
                    "--table", "scalability")
    assert code == 0 and "T1/TP" in out
    code, out = cli("sweep", *SMALL_FLAGS, "--scheduler", "numaws", "--grid-local-bias", "0.5,0.7",
                    "--grid-push-threshold", "4", "--seeds", "2", "--out", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["runs"]) == 4 and doc["sensitivity"]
    code, out = cli("sweep", *SMALL_FLAGS, "--grid-P", "8,99", "--table", "runs", "--out", "csv")
    assert code == EXIT_ERROR and out.count("\n") == 2


def test_analyze_round_trip(tmp_path):
    dag_file = tmp_path / "scan.dag"
    code, out = cli("analyze", "--bench", "scan", "--n", "4096", "--base-case", "256",
                    "--dag-out", str(dag_file), "--out", "json")
    first = json.loads(out)
    code2, out2 = cli("analyze", "--dag-in", str(dag_file), "--out", "json")
    second = json.loads(out2)
    assert code == code2 == 0
    assert (first["work"], first["span"]) == (second["work"], second["span"])
    assert first["parallelism"] > 1
    code, out = cli("analyze", "--bench", "heat", "--n", "64", "--base-case", "8")
    assert code == 0 and "parallelism" in out


def test_bad_settings_exit_with_error():
    assert cli("run", *SMALL_FLAGS, "--workers", "33")[0] == EXIT_ERROR
    assert cli("run", *SMALL_FLAGS, environ={"WORKSTEAL_SCHEDULER": "fifo"})[0] == EXIT_ERROR
    with pytest.raises(SystemExit):
        cli("run", "--scheduler", "fifo")


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "worksteal", "analyze", "--bench", "scan",
                           "--n", "4096", "--base-case", "256"], capture_output=True, text=True)
    assert proc.returncode == 0 and "span" in proc.stdout
