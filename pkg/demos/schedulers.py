"""Run the classic and NUMA-aware schedulers on the same random computation.

The simulator is deterministic per seed.  Both schedulers do exactly the same
work (W_P = T1 when memory costs are off); they differ in how they steal.

    python demos/schedulers.py
"""
from worksteal import SchedulerConfig, breakdown, make_topology, simulate, work_span
from worksteal.numaws import victim_distribution
from worksteal.randdag import random_fork_join

if __name__ == "__main__":
    dag = random_fork_join(seed=7)
    ws = work_span(dag)
    print(f"random fork-join program: T1={ws.work} Tinf={ws.span} parallelism={ws.parallelism:.0f}\n")

    topo = make_topology(socket_count=4, cores_per_socket=8, workers=32)
    print(f"{'scheduler':>9} {'T_P':>6} {'T1/TP':>6} {'W_P':>7} {'S_P':>6} {'I_P':>6} {'steals':>6} {'attempts':>8}")
    for kind in ("classic", "numaws"):
        res = simulate(dag, topo, SchedulerConfig(kind), seed=1)
        _, rep = breakdown(res.events, topo.workers)
        print(f"{kind:>9} {res.makespan:>6} {ws.work / res.makespan:>6.1f} {rep.W_P:>7} {rep.S_P:>6} "
              f"{rep.I_P:>6} {rep.successful_steals:>6} {rep.steal_attempts:>8}")
        print(f"{'':>9} steal attempts / (P Tinf) = {rep.steal_attempts / (32 * ws.span):.2f}, "
              f"(T_P - T1/P) / Tinf = {(res.makespan - ws.work / 32) / ws.span:.2f}")

    # The biased victim distribution and its analysis constant.
    pol = victim_distribution(0, topo, local_bias=0.7)
    probs = pol.as_dict()
    print(f"\nworker 0 steals from a same-socket worker with p={probs[1]:.4f} "
          f"and from a remote one with p={probs[8]:.4f}; c = {pol.c_constant(32):.1f}")
