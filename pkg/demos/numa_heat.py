"""Work inflation on a NUMA machine: the heat stencil with and without locality hints.

The grid is split into four quarters whose data lives on the four sockets.
Without hints, stolen tiles run wherever the thief happens to be and pull
their data across sockets.  With hints, numaws pushes such work back to the
socket that owns the data, so W_P stays close to T_1.

    python demos/numa_heat.py
"""
from worksteal import CostModel, default_spec, format_table, make_topology, run
from worksteal.bench import Placement
from worksteal.classic import SchedulerConfig

if __name__ == "__main__":
    topo = make_topology(4, 8, 32)
    hinted = default_spec("heat", hints="top-level-quarters")
    plain = default_spec("heat")
    placement = Placement("partitioned")

    reports = []
    for spec, kind in ((plain, "classic"), (plain, "numaws"), (hinted, "numaws")):
        res = run(spec, topo, SchedulerConfig(kind), seed=0, cost_model=CostModel(), placement=placement)
        res.report.config["scheduler"] = f"{kind}{'+hints' if spec.hints != 'none' else ''}"
        reports.append(res.report)
        print(f"{res.report.config['scheduler']:>14}: checksum {res.checksum}, "
              f"{res.report.remote_accesses} remote / {res.report.local_accesses} local block accesses")
    print()
    print(format_table(reports))
    print("\nW/T1 is the work inflation; the same numeric output is produced every time.")
