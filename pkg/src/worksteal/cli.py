"""Command-line harness: ``worksteal run | sweep | analyze``.

Settings come from, in increasing priority: built-in defaults, a config file
(``--config``), ``WORKSTEAL_*`` environment variables, and explicit flags.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, Optional, Sequence

from . import bench
from .benchmarks import BUILDERS, build, default_spec
from .classic import SchedulerConfig
from .config import env_overrides, load_config, normalize_key, parse_partition_map
from .dag import dump_dag, load_dag, work_span
from .metrics import breakdown, format_csv, format_json, format_table, write_trace
from .topology import CostModel, make_topology

EXIT_ORACLE = 3
EXIT_ERROR = 2

# flag name -> (type, default); defaults None mean "benchmark default"
SETTINGS = {
    "bench": (str, "cilksort"),
    "n": (int, None),
    "base_case": (int, None),
    "mode": (str, "sim"),
    "scheduler": (str, "classic"),
    "workers": (int, 32),
    "sockets": (int, 4),
    "cores_per_socket": (int, 8),
    "placement": (str, "packed"),
    "local_bias": (float, 0.7),
    "push_threshold": (int, 4),
    "placement_policy": (str, "first-touch"),
    "layout": (str, "blocked"),
    "hints": (str, "none"),
    "hint_places": (str, None),
    "partition": (str, None),
    "seed": (int, 0),
    "reps": (int, 1),
    "out": (str, "table"),
    "trace": (str, None),
    "cost_model": (str, "on"),
    "spawn_cost": (int, 0),
    "steal_cost": (int, 1),
    "promote_cost": (int, 10),
    "llc_local": (int, 40),
    "llc_remote": (int, 140),
    "dram_local": (int, 140),
    "dram_remote": (int, 300),
    "llc_capacity": (int, 256),
    "steps": (int, None),
    "iterations": (int, None),
    "top8": (str, None),
    "check_invariants": (str, "off"),
}

CHOICES = {
    "bench": sorted(BUILDERS), "mode": list(bench.MODES), "scheduler": ["classic", "numaws"],
    "placement": ["packed", "spread"], "placement_policy": ["first-touch", "interleave", "partitioned"],
    "layout": ["row-major", "morton", "blocked"], "hints": ["none", "top-level-quarters", "custom"],
    "out": ["json", "csv", "table"], "cost_model": ["on", "off"], "check_invariants": ["on", "off"],
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value or JSON file with default settings")
    for name, (typ, _) in SETTINGS.items():
        flag = "--" + name.replace("_", "-")
        kwargs = {"dest": name, "default": None}
        if name in CHOICES:
            kwargs["choices"] = CHOICES[name]
        else:
            kwargs["type"] = typ
        p.add_argument(flag, **kwargs)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="worksteal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one benchmark configuration")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a grid of configurations")
    _add_common(p_sweep)
    p_sweep.add_argument("--grid-P", dest="grid_P", help="comma-separated worker counts")
    p_sweep.add_argument("--grid-placement", dest="grid_placement")
    p_sweep.add_argument("--grid-scheduler", dest="grid_scheduler")
    p_sweep.add_argument("--grid-local-bias", dest="grid_local_bias")
    p_sweep.add_argument("--grid-push-threshold", dest="grid_push_threshold")
    p_sweep.add_argument("--grid-placement-policy", dest="grid_placement_policy")
    p_sweep.add_argument("--seeds", type=int, help="number of seeds starting at --seed")
    p_sweep.add_argument("--table", choices=["runs", "aggregate", "scalability", "sensitivity"],
                         default="aggregate", help="which view to print in table/csv output")

    p_an = sub.add_parser("analyze", help="work/span analysis of a benchmark DAG or an exported trace")
    _add_common(p_an)
    p_an.add_argument("--dag-in", help="analyze a DAG text file instead of a benchmark")
    p_an.add_argument("--dag-out", help="export the analyzed DAG in text format")
    p_an.add_argument("--trace-in", help="summarize an exported trace CSV")
    return parser


def resolve_settings(args: argparse.Namespace, environ=None) -> Dict[str, object]:
    values = {name: default for name, (_, default) in SETTINGS.items()}
    layers = []
    if getattr(args, "config", None):
        layers.append(load_config(args.config))
    layers.append(env_overrides(environ))
    for layer in layers:
        for key, raw in layer.items():
            key = normalize_key(key)
            if key in SETTINGS and raw is not None:
                values[key] = _coerce(key, raw)
    for key in SETTINGS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    return values


def _coerce(key, raw):
    typ = SETTINGS[key][0]
    if key == "partition" and not isinstance(raw, str):
        return ",".join(":".join(str(x) for x in item) for item in raw)
    value = typ(raw) if not isinstance(raw, typ) else raw
    if key in CHOICES and value not in CHOICES[key]:
        raise ValueError(f"{key} must be one of {CHOICES[key]}, got {value!r}")
    return value


def _spec(s) -> "bench.BenchmarkSpec":
    params = {}
    for key in ("steps", "iterations", "hint_places"):
        if s[key] is not None:
            params[key] = s[key]
    if s["top8"] is not None:
        params["top8"] = str(s["top8"]).lower() in ("1", "true", "yes", "on")
    spec = default_spec(s["bench"], n=s["n"], base_case=s["base_case"], hints=s["hints"],
                        layout=s["layout"], reps=s["reps"])
    return spec.with_params(**params) if params else spec


def _sched_config(s) -> SchedulerConfig:
    return SchedulerConfig(kind=s["scheduler"], local_bias=s["local_bias"], push_threshold=s["push_threshold"],
                           spawn_cost=s["spawn_cost"], steal_cost=s["steal_cost"],
                           promote_cost=s["promote_cost"])


def _cost_model(s) -> Optional[CostModel]:
    if s["cost_model"] == "off":
        return None
    return CostModel(s["llc_local"], s["llc_remote"], s["dram_local"], s["dram_remote"], s["llc_capacity"])


def _placement(s) -> bench.Placement:
    ranges = tuple(parse_partition_map(s["partition"])) if s["partition"] else ()
    return bench.Placement(s["placement_policy"], ranges)


def _emit_reports(reports, fmt: str) -> str:
    if fmt == "json":
        return format_json(reports)
    if fmt == "csv":
        return format_csv(reports)
    return format_table(reports)


def cmd_run(s, out) -> int:
    spec = _spec(s)
    topo = make_topology(s["sockets"], s["cores_per_socket"], s["workers"], s["placement"])
    status = 0
    try:
        result = bench.run(spec, topo, _sched_config(s), mode=s["mode"], seed=s["seed"],
                           cost_model=_cost_model(s), placement=_placement(s),
                           check_invariants=s["check_invariants"] == "on",
                           keep_events=bool(s["trace"]))
    except bench.OracleMismatch as exc:
        result = exc.result
        print(f"ORACLE MISMATCH: {exc}", file=sys.stderr)
        status = EXIT_ORACLE
    if s["trace"]:
        with open(s["trace"], "w", newline="") as fp:
            write_trace(result.events, fp)
    if s["out"] == "json":
        doc = json.loads(format_json([result.report]))[0]
        doc["checksum"] = result.checksum
        doc["correct"] = result.correct
        out.write(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    else:
        out.write(_emit_reports([result.report], s["out"]) + "\n")
        if s["out"] == "table":
            out.write(f"checksum {result.checksum}  oracle {'ok' if result.correct else 'MISMATCH'}\n")
    return status


def _axis(text, typ):
    return [typ(v.strip()) for v in text.split(",") if v.strip()]


def cmd_sweep(s, args, out) -> int:
    spec = _spec(s)
    grid = {}
    for axis, typ in (("P", int), ("placement", str), ("scheduler", str), ("local_bias", float),
                      ("push_threshold", int), ("placement_policy", str)):
        raw = getattr(args, f"grid_{axis}")
        if raw:
            grid[axis] = _axis(raw, typ)
    grid["seed"] = list(range(s["seed"], s["seed"] + (args.seeds or 1)))
    defaults = {"P": s["workers"], "placement": s["placement"], "scheduler": s["scheduler"],
                "local_bias": s["local_bias"], "push_threshold": s["push_threshold"],
                "placement_policy": s["placement_policy"]}
    entries = bench.sweep(spec, grid, bench.Machine(s["sockets"], s["cores_per_socket"]),
                          _sched_config(s), mode=s["mode"], cost_model=_cost_model(s),
                          placement=_placement(s), defaults=defaults)
    failed = [e for e in entries if not e.ok]
    for e in failed:
        print(f"point {e.point} failed: {e.error}", file=sys.stderr)
    if s["out"] == "json":
        doc = {
            "runs": [dict(point=e.point, error=e.error,
                          report=e.result.report.to_dict() if e.result else None,
                          checksum=e.result.checksum if e.result else None) for e in entries],
            "aggregate": bench.aggregate(entries),
            "scalability": {f"{k[0]}/{k[1]}": v for k, v in bench.scalability_curves(entries).items()},
            "sensitivity": bench.sensitivity_table(entries),
        }
        out.write(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    else:
        if args.table == "runs":
            reports = [e.result.report for e in entries if e.result]
            text = _emit_reports(reports, s["out"])
        else:
            if args.table == "aggregate":
                rows = bench.aggregate(entries)
            elif args.table == "sensitivity":
                rows = bench.sensitivity_table(entries)
            else:
                rows = [{"scheduler": k[0], "placement": k[1], "P": p, "T1/TP": m, "std": sd}
                        for k, pts in bench.scalability_curves(entries).items() for p, m, sd in pts]
            text = bench.rows_to_csv(rows) if s["out"] == "csv" else bench.rows_to_table(rows)
        out.write(text.rstrip("\n") + "\n")
    if any(e.error and e.error.startswith("OracleMismatch") for e in entries):
        return EXIT_ORACLE
    return EXIT_ERROR if failed else 0


def cmd_analyze(s, args, out) -> int:
    if args.trace_in:
        import csv
        with open(args.trace_in, newline="") as fp:
            rows = list(csv.DictReader(fp))
        events = [(float(r["time"]), int(r["worker"]), r["kind"], float(r["cost"]), json.loads(r["detail"]))
                  for r in rows]
        workers = 1 + max((e[1] for e in events), default=0)
        per_worker, rep = breakdown(events, workers)
        summary = [{"worker": t.worker, "work": t.work, "scheduling": t.scheduling, "idle": t.idle}
                   for t in per_worker]
        summary.append({"worker": "all", "work": rep.W_P, "scheduling": rep.S_P, "idle": rep.I_P})
        out.write(bench.rows_to_table(summary) + "\n")
        return 0
    if args.dag_in:
        with open(args.dag_in) as fp:
            dag = load_dag(fp)
        name = args.dag_in
    else:
        spec = _spec(s)
        dag = build(spec, s["sockets"]).dag
        name = spec.name
    dag.validate()
    ws = work_span(dag, s["spawn_cost"])
    if args.dag_out:
        with open(args.dag_out, "w") as fp:
            dump_dag(dag, fp)
    doc = {"dag": name, "frames": len(dag.frames), "strands": len(dag.strands), "spawns": dag.n_spawns,
           "work": ws.work, "span": ws.span, "parallelism": ws.parallelism,
           "suggested_max_P": int(ws.parallelism // 10)}
    if s["out"] == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    elif s["out"] == "csv":
        out.write(bench.rows_to_csv([doc]))
    else:
        width = max(len(k) for k in doc)
        for k, v in doc.items():
            out.write(f"{k.ljust(width)}  {v:.2f}\n" if isinstance(v, float) else f"{k.ljust(width)}  {v}\n")
    return 0


def main(argv: Optional[Sequence[str]] = None, out=None, environ=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        s = resolve_settings(args, environ)
        if args.command == "run":
            return cmd_run(s, out)
        if args.command == "sweep":
            return cmd_sweep(s, args, out)
        return cmd_analyze(s, args, out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
