"""Write a fork-join program, measure its work and span, and elide it serially.

    python demos/work_and_span.py
"""
import io

from worksteal.dag import build_dag, dump_dag, serial_elide, work_span


def fib(b, n):
    if n < 2:
        b.work(1, label=f"fib({n})")
        return
    b.spawn(fib, n - 1)
    b.spawn(fib, n - 2)
    b.sync()
    b.work(1, label=f"add({n})")


if __name__ == "__main__":
    dag = build_dag(fib, 12)
    ws = work_span(dag)
    print(f"fib(12): {len(dag.frames)} frames, {len(dag.strands)} strands")
    print(f"work T1 = {ws.work}, span Tinf = {ws.span}, parallelism = {ws.parallelism:.1f}")
    print(f"enough slack for about {int(ws.parallelism // 10)} workers at 10x parallelism per worker")

    # Serial elision runs children before continuations: the one-worker order.
    small = build_dag(fib, 3)
    trace = serial_elide(small).trace
    print("serial order of fib(3):", [small.strands[s].label for s in trace])

    # Spawn overhead shows up as extra work and span per spawn.
    print("with 2 units per spawn:", work_span(dag, spawn_cost=2))

    buf = io.StringIO()
    dump_dag(small, buf)
    print("\ntext format of fib(3):")
    print(buf.getvalue())
