"""Scalability curves for packed and spread worker placement, then a small
sensitivity table over the local-steal bias.

The same sweeps are available as ``worksteal sweep ... --table scalability``.

    python demos/sweep_scalability.py
"""
from worksteal import default_spec
from worksteal.bench import Machine, Placement, rows_to_table, scalability_curves, sensitivity_table, sweep
from worksteal.classic import SchedulerConfig

if __name__ == "__main__":
    spec = default_spec("cg_lite", n=4096, base_case=128, hints="top-level-quarters")
    entries = sweep(spec, {"P": [1, 8, 16, 24, 32], "placement": ["packed", "spread"]},
                    Machine(), SchedulerConfig("numaws"), placement=Placement("partitioned"))
    for (sched, placement), points in scalability_curves(entries).items():
        curve = "  ".join(f"P={p}: {m:.1f}x" for p, m, _ in points)
        print(f"{sched:>8} {placement:>6}  {curve}")

    print("\nsensitivity to the local bias (T_P normalized to bias 0.7, threshold 4):")
    entries = sweep(spec, {"local_bias": [0.5, 0.7, 0.9, 0.98, 1.0], "push_threshold": [4]},
                    Machine(), SchedulerConfig("numaws"), placement=Placement("partitioned"))
    print(rows_to_table(sensitivity_table(entries),
                        ["local_bias", "push_threshold", "T_P_mean", "normalized"]))
