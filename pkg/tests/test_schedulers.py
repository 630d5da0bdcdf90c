from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from worksteal.classic import ClassicScheduler, InvariantError, SchedulerConfig
from worksteal.dag import build_dag, serial_elide, work_span
from worksteal.metrics import breakdown
from worksteal.numaws import NumaScheduler, victim_distribution
from worksteal.randdag import random_fork_join
from worksteal.simulator import simulate
from worksteal.threads import run_threads
from worksteal.topology import ANY, make_topology

CLASSIC = SchedulerConfig("classic")
NUMA = SchedulerConfig("numaws")


def leaf(b, d=1):
    b.work(d)


def fork2(b, child_work=5):
    b.work(1)
    b.spawn(leaf, child_work)
    b.work(1)
    b.sync()
    b.work(1)


def chain(b, depth):
    if depth == 0:
        b.work(1)
        return
    b.spawn(chain, depth - 1)
    b.work(1)


def kinds(w):
    return [e[2] for e in w.events]


# -- classic ---------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SchedulerConfig("fifo")
    with pytest.raises(ValueError):
        SchedulerConfig(local_bias=1.5)
    with pytest.raises(ValueError):
        SchedulerConfig(push_threshold=0)
    with pytest.raises(ValueError):
        SchedulerConfig(steal_cost=0)


@pytest.mark.parametrize("config", [CLASSIC, NUMA])
def test_single_worker_matches_serial_elision(config):
    dag = random_fork_join(5, target_work=3000)
    res = simulate(dag, make_topology(4, 8, 1), config, check_invariants=True)
    assert res.strand_order == serial_elide(dag).trace
    assert res.makespan == work_span(dag).work
    _, rep = breakdown(res.events, 1)
    assert rep.nontrivial_syncs == rep.push_events == rep.mailbox_ops == 0
    assert rep.I_P == 0 and rep.S_P == 0


def test_spawn_chain_keeps_ancestors_oldest_on_top():
    dag = build_dag(chain, 3)
    s = ClassicScheduler(dag, make_topology(1, 1, 1), CLASSIC)
    w = s.workers[0]
    for _ in range(3):
        s.step(w)
    assert [f.fid for f in w.deque.snapshot()] == [0, 1, 2]
    assert w.frame.fid == 3


def test_forced_steal_suspend_and_resume_by_returning_child():
    dag = build_dag(fork2)
    s = ClassicScheduler(dag, make_topology(1, 2, 2), CLASSIC)
    w0, w1 = s.workers
    s.step(w0)                  # prefix strand
    s.step(w0)                  # spawn: root continuation queued
    s.step(w1)                  # steal it
    root = s.frames[0]
    assert kinds(w1) == ["steal", "promote", "resume"]
    assert root.full and root.stolen and root.outstanding == 1
    s.step(w1)                  # continuation strand
    s.step(w1)                  # sync with the child outstanding
    assert root.suspended and w1.frame is None
    s.step(w0)                  # child strand
    s.step(w0)                  # child return finds the parent gone
    assert kinds(w0)[-1] == "return_stolen"
    s.step(w0)                  # check parent: last child, parent resumes here
    assert kinds(w0)[-2:] == ["check_parent", "resume"] and w0.frame is root
    assert not root.suspended and not root.stolen
    s.step(w0)
    s.step(w0)
    assert s.done
    assert Counter(kinds(w0) + kinds(w1))["resume"] == 2
    s.verify_invariants()


def test_stolen_frame_with_no_outstanding_children_syncs_through():
    dag = build_dag(fork2, 1)
    s = ClassicScheduler(dag, make_topology(1, 2, 2), CLASSIC)
    w0, w1 = s.workers
    s.step(w0); s.step(w0); s.step(w1)
    s.step(w0); s.step(w0)      # child runs and returns before the sync
    assert kinds(w0)[-1] == "return_stolen"
    s.step(w0)                  # check parent: parent is not suspended yet
    assert w0.events[-1][4] == (0, False) and w0.frame is None
    s.step(w1); s.step(w1)      # continuation strand, then sync
    assert kinds(w1)[-1] == "sync_ok" and w1.frame is s.frames[0]


def test_trivial_sync_costs_nothing():
    dag = build_dag(fork2)
    res = simulate(dag, make_topology(1, 1, 1), CLASSIC)
    syncs = [e for e in res.events if e[2] == "sync"]
    assert syncs and all(e[3] == 0 for e in syncs)


def test_promote_rejects_shadow_parent():
    dag = build_dag(chain, 2)
    s = ClassicScheduler(dag, make_topology(1, 1, 1), CLASSIC)
    with pytest.raises(InvariantError):
        s.promote(s.frames[1])


def test_empty_deques_mean_failed_steals():
    dag = build_dag(leaf, 100)
    s = ClassicScheduler(dag, make_topology(1, 4, 4), CLASSIC, seed=3)
    assert s.random_steal(s.workers[1]) is None
    assert kinds(s.workers[1]) == ["steal_fail"]


def test_uniform_victims_chi_square():
    dag = build_dag(leaf, 100)
    s = ClassicScheduler(dag, make_topology(1, 4, 4), CLASSIC, seed=11)
    w = s.workers[1]
    for _ in range(100_000):
        s.random_steal(w)
    counts = Counter(e[4] for e in w.events)
    assert set(counts) == {0, 2, 3}
    obs = [counts[v] for v in (0, 2, 3)]
    assert all(abs(c / 100_000 - 1 / 3) < 0.02 for c in obs)
    assert chisquare(obs).pvalue > 0.01


@pytest.mark.parametrize("config", [CLASSIC, NUMA])
def test_simulation_is_deterministic_per_seed(config):
    dag = random_fork_join(2, target_work=5000)
    topo = make_topology(4, 8, 16)
    a = simulate(dag, topo, config, seed=9)
    b = simulate(dag, topo, config, seed=9)
    assert a.events == b.events and a.makespan == b.makespan
    assert a.makespan >= work_span(dag).span


@pytest.mark.parametrize("config", [CLASSIC, NUMA])
def test_thread_mode_runs_every_strand_once(config):
    dag = random_fork_join(4, target_work=4000)
    res = run_threads(dag, make_topology(2, 2, 4, "spread"), config, seed=1, timeout=60)
    assert sorted(res.strand_order) == list(range(len(dag.strands)))
    assert res.makespan > 0
    res.scheduler.verify_invariants()


# -- numaws ---------------------------------------------------------------

def test_victim_distribution_biased_example():
    pol = victim_distribution(0, make_topology(4, 8, 32), 0.7)
    probs = pol.as_dict()
    assert len(probs) == 31 and 0 not in probs
    assert all(probs[v] == pytest.approx(0.1) for v in range(1, 8))
    assert all(probs[v] == pytest.approx(0.0125) for v in range(8, 32))
    assert sum(pol.probabilities) == pytest.approx(1.0)
    assert pol.min_probability == pytest.approx(1 / 80)
    assert pol.c_constant(32) == pytest.approx(2.5)


def test_victim_distribution_uniform_bias():
    pol = victim_distribution(5, make_topology(4, 8, 32), 7 / 31)
    assert all(p == pytest.approx(1 / 31) for p in pol.probabilities)


def test_victim_distribution_full_local_bias_is_unbounded():
    pol = victim_distribution(0, make_topology(4, 8, 32), 1.0)
    assert pol.c_constant(32) == float("inf")


def test_lonely_thief_sends_everything_remote():
    topo = make_topology(4, 8, 4, "spread")
    pol = victim_distribution(0, topo, 0.7)
    assert pol.as_dict() == pytest.approx({1: 1 / 3, 2: 1 / 3, 3: 1 / 3})
    with pytest.raises(ValueError):
        victim_distribution(0, make_topology(1, 1, 1), 0.7)


def numa_with_frame(P=16, sockets=2, place=1, k=4):
    dag = build_dag(lambda b: b.spawn(leaf), place=place)
    topo = make_topology(sockets, P // sockets, P)
    s = NumaScheduler(dag, topo, SchedulerConfig("numaws", push_threshold=k), seed=0)
    frame = s.frames[0]
    frame.full = True
    return s, frame


def test_push_back_hypergeometric_success_rate():
    s, frame = numa_with_frame()
    targets = s.topology.workers_on(1)
    trials, wins = 20_000, 0
    rng = np.random.default_rng(0)
    for _ in range(trials):
        free = targets[rng.integers(len(targets))]
        for t in targets:
            s.workers[t].mailbox.slot = None if t == free else "occupied"
        if s.push_back(s.workers[0], frame, "steal"):
            wins += 1
            assert sum(s.workers[t].mailbox.slot is frame for t in targets) == 1
    expected = 1 - (7 / 8) * (6 / 7) * (5 / 6) * (4 / 5)
    assert expected == pytest.approx(0.5)
    assert abs(wins / trials - expected) < 0.02


def test_push_back_saturated_and_first_free():
    s, frame = numa_with_frame()
    w = s.workers[0]
    for t in s.topology.workers_on(1):
        s.workers[t].mailbox.slot = "occupied"
    assert not s.push_back(w, frame, "sync")
    assert Counter(kinds(w))["push_attempt"] == 4
    for t in s.topology.workers_on(1):
        s.workers[t].mailbox.slot = None
    assert s.push_back(w, frame, "sync")
    assert sum(s.workers[t].mailbox.slot is frame for t in range(16)) == 1


def test_push_back_precondition():
    s, frame = numa_with_frame(place=0)
    with pytest.raises(ValueError):
        s.push_back(s.workers[0], frame, "steal")


def test_remote_steal_is_pushed_into_a_home_mailbox():
    dag = build_dag(fork2, place=1)
    topo = make_topology(2, 2, 4, "packed")
    s = NumaScheduler(dag, topo, NUMA, seed=0)
    w0, w1 = s.workers[0], s.workers[1]
    s.step(w0); s.step(w0)          # root continuation queued on socket 0
    for _ in range(200):            # w1 keeps trying until the coin and victim line up
        s.step(w1)
        if "push_success" in kinds(w1):
            break
    assert kinds(w1)[-4:] == ["promote", "push_event", "push_attempt", "push_success"]
    assert w1.frame is None
    homes = [w for w in s.workers if w.mailbox.slot is s.frames[0]]
    assert len(homes) == 1 and homes[0].place == 1
    s.step(homes[0])
    assert kinds(homes[0])[-2:] == ["mailbox_pop", "resume"]


def test_local_steal_resumes_without_push():
    dag = build_dag(fork2, place=0)
    s = NumaScheduler(dag, make_topology(2, 2, 4, "packed"), NUMA, seed=0)
    w0, w1 = s.workers[0], s.workers[1]
    s.step(w0); s.step(w0)
    for _ in range(200):
        s.step(w1)
        if w1.frame is not None:
            break
    assert "push_event" not in kinds(w1) and w1.frame is s.frames[0]


def test_thief_takes_victims_mailbox_frame():
    s, frame = numa_with_frame(P=4, sockets=1, place=0)
    s.workers[2].mailbox.slot = frame
    thief = s.workers[1]
    for _ in range(400):
        s.workers[2].mailbox.slot = frame
        f = s.biased_steal_with_push(thief)
        if f is frame:
            break
    assert kinds(thief)[-1] == "mailbox_steal" and s.workers[2].mailbox.slot is None


def test_hint_free_runs_never_push():
    dag = random_fork_join(8, target_work=20_000)
    res = simulate(dag, make_topology(4, 8, 32), NUMA, seed=1, check_invariants=True)
    _, rep = breakdown(res.events, 32)
    assert rep.push_events == rep.push_attempts == rep.mailbox_pops == 0


def placed_program(b, depth, place_of):
    if depth == 0:
        b.work(40)
        return
    for q in range(4):
        b.set_locality(place_of(q, depth))
        b.spawn(placed_program, depth - 1, place_of)
    b.sync()
    b.work(1)


@pytest.mark.parametrize("seed", range(4))
def test_pushes_fire_only_at_the_three_triggers(seed):
    dag = build_dag(placed_program, 4, lambda q, d: (q + d) % 4, place=0)
    res = simulate(dag, make_topology(4, 8, 32), NUMA, seed=seed, check_invariants=True)
    sched = res.scheduler
    triggers = Counter()
    for w in sched.workers:
        ks = kinds(w)
        for i, e in enumerate(w.events):
            if e[2] != "push_event":
                continue
            trigger = e[4][0]
            triggers[trigger] += 1
            prev = w.events[i - 1]
            if trigger == "steal":
                assert prev[2] == "promote"
            elif trigger == "sync":
                assert prev[2] == "sync_ok"
            else:
                assert trigger == "return" and prev[2] == "check_parent" and prev[4][1]
        assert ks.count("push_attempt") <= 4 * ks.count("push_event")
    assert triggers["steal"] > 0
    _, rep = breakdown(res.events, 32)
    assert rep.push_events <= 3 * rep.successful_steals
    assert rep.mailbox_deliveries <= rep.push_events


def test_coin_is_fair():
    s, _ = numa_with_frame(P=32, sockets=4, place=0)
    thief = s.workers[5]
    for _ in range(20_000):
        s.biased_steal_with_push(thief)
    _, rep = breakdown(thief.events, 32)
    assert rep.coin_flips == 20_000
    assert abs(rep.mailbox_first_flips / rep.coin_flips - 0.5) < 0.02


def test_any_place_disables_pushes_on_placed_program():
    dag = build_dag(placed_program, 3, lambda q, d: ANY)
    res = simulate(dag, make_topology(4, 8, 32), NUMA, seed=0)
    assert not any(e[2] == "push_event" for e in res.events)
