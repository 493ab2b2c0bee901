import math

import numpy as np
import pytest
from scipy import stats

from manetwalk.core import Clock, SimConfig, rng_stream, validate_config
from manetwalk.graphs import CompleteGraph, CycleGraph, DiskGraph, PathGraph
from manetwalk.harness import build_run, run_single
from manetwalk.walk import (VisitTable, World, choose_next_pure_random,
                            choose_next_self_repelling, hop_pure_random,
                            hop_self_repelling, introduce_token, run_walk,
                            static_world, walk_graph)


def test_introduce_requires_nodes_and_clean_table():
    with pytest.raises(ValueError):
        introduce_token(CompleteGraph(1), 0, VisitTable(0), rng_stream(0, "walk"))
    visits = VisitTable(3)
    visits.counts[1] = 1
    with pytest.raises(ValueError):
        introduce_token(CompleteGraph(3), 3, visits, rng_stream(0, "walk"))


def test_introduce_single_node_is_full_coverage():
    token, visits = walk_graph(CompleteGraph(1), rng_stream(5, "walk"))
    assert token.current_node == 0
    assert token.hops == 0
    assert token.unique_visited == 1
    assert visits.total() == 1


def test_introduce_counts_one_visit():
    visits = VisitTable(10)
    token = introduce_token(CompleteGraph(10), 10, visits, rng_stream(7, "walk"))
    assert visits.total() == 1
    assert visits.counts[token.current_node] == 1
    assert token.aggregate.count == 1
    assert token.aggregate.sum == float(token.current_node)


def test_introduce_start_node_uniform():
    n = 1000
    counts = np.zeros(n, dtype=np.int64)
    provider = CompleteGraph(n)
    for seed in range(100000):
        visits = VisitTable(n)
        token = introduce_token(provider, n, visits, rng_stream(seed, "walk"))
        counts[token.current_node] += 1
    _, p = stats.chisquare(counts)
    assert p > 0.01


def test_tie_break_uniform():
    ids = np.array([1, 2, 3])
    visit_counts = np.array([2, 1, 1])
    rng = rng_stream(3, "walk")
    picks = np.array([choose_next_self_repelling(ids, visit_counts, rng)
                      for _ in range(10000)])
    assert not (picks == 1).any()  # node 1 has strictly more visits
    frac = (picks == 2).mean()
    assert abs(frac - 0.5) < 0.02


def test_complete_graph_cover_is_exact():
    for n in (2, 3, 17, 50):
        for seed in range(10):
            token, _ = walk_graph(CompleteGraph(n), rng_stream(seed, "walk"))
            assert token.hops == n - 1
            assert token.unique_visited == n


def test_cycle_cover_is_exact_and_unidirectional():
    n = 6
    for seed in range(25):
        provider = CycleGraph(n)
        visits = VisitTable(n)
        rng = rng_stream(seed, "walk")
        token = introduce_token(provider, n, visits, rng)
        path = [token.current_node]
        while token.unique_visited < n:
            assert hop_self_repelling(token, provider, visits, rng)
            path.append(token.current_node)
        assert token.hops == n - 1
        # after the first (tie-broken) hop the direction never changes
        steps = {(b - a) % n for a, b in zip(path, path[1:])}
        assert steps == {1} or steps == {n - 1}


def test_pure_random_single_neighbor():
    provider = PathGraph(2)
    visits = VisitTable(2)
    rng = rng_stream(0, "walk")
    token = introduce_token(provider, 2, visits, rng)
    assert hop_pure_random(token, provider, visits, rng)
    assert token.unique_visited == 2


def test_pure_random_uniform_over_neighbors():
    ids = np.array([1, 3])
    visit_counts = np.array([50, 0])  # ignored by the pure rule
    rng = rng_stream(11, "walk")
    picks = np.array([choose_next_pure_random(ids, visit_counts, rng)
                      for _ in range(10000)])
    assert abs((picks == 1).mean() - 0.5) < 0.02


def test_pure_random_cycle_transitions_balanced():
    provider = CycleGraph(4)
    visits = VisitTable(4)
    rng = rng_stream(9, "walk")
    token = introduce_token(provider, 4, visits, rng)
    forward = 0
    for _ in range(10000):
        prev = token.current_node
        hop_pure_random(token, provider, visits, rng)
        forward += (token.current_node - prev) % 4 == 1
    assert abs(forward / 10000 - 0.5) < 0.02


def test_pure_random_coupon_collector_sanity():
    n = 5
    expected = (n - 1) * sum(1.0 / k for k in range(1, n))
    hops = [walk_graph(CompleteGraph(n), rng_stream(seed, "walk"),
                       strategy="pure_random")[0].hops
            for seed in range(500)]
    assert abs(np.mean(hops) - expected) / expected < 0.10


def test_stranded_changes_nothing():
    positions = np.array([[0.0, 0.0], [100.0, 0.0]])
    provider = DiskGraph(positions, 1.0)
    visits = VisitTable(2)
    rng = rng_stream(1, "walk")
    token = introduce_token(provider, 2, visits, rng)
    before = (token.current_node, token.hops, token.unique_visited,
              token.aggregate.count, visits.total())
    for _ in range(5):
        assert not hop_self_repelling(token, provider, visits, rng)
    after = (token.current_node, token.hops, token.unique_visited,
             token.aggregate.count, visits.total())
    assert before == after


def test_run_walk_times_out_when_disconnected():
    cfg = validate_config(SimConfig(
        n_nodes=2, mobility_model="static", comm_range=0.5, density=0.0002,
        max_sim_time=5.0, milestones=(0.5, 1.0), seed=2))
    _, provider, world, rng = build_run(cfg)
    record = run_walk(cfg, provider, world, rng)
    assert record.timed_out
    assert [s.target_coverage for s in record.milestones] == [0.5]
    assert record.waiting_ticks == 50  # every attempt stranded


def test_run_walk_static_complete_graph():
    cfg = validate_config(SimConfig(n_nodes=100, seed=8))
    provider = CompleteGraph(100)
    world = static_world(cfg, 100)
    record = run_walk(cfg, provider, world, rng_stream(8, "walk"))
    final = record.milestones[-1]
    assert final.hops == 99
    assert final.overhead == 1.0
    assert not record.timed_out
    assert record.churn_rate == 0.0
    assert [s.target_coverage for s in record.milestones] == [0.5, 0.75, 0.85, 1.0]


def test_run_walk_single_node():
    cfg = validate_config(SimConfig(n_nodes=1, comm_range=1.0, seed=3))
    provider = CompleteGraph(1)
    world = static_world(cfg, 1)
    record = run_walk(cfg, provider, world, rng_stream(3, "walk"))
    assert not record.timed_out
    assert record.milestones[-1].hops == 0
    assert record.milestones[-1].sim_time == 0.0


def test_visit_sum_and_unique_invariants():
    cfg = validate_config(SimConfig(n_nodes=80, seed=21))
    _, provider, world, rng = build_run(cfg)
    record = run_walk(cfg, provider, world, rng)
    token = world.token
    assert world.visits.total() == token.hops + 1
    assert world.visits.visited_count() == token.unique_visited
    assert token.unique_visited <= token.hops + 1
    hops = [s.hops for s in record.milestones]
    uniques = [s.unique_visited for s in record.milestones]
    assert hops == sorted(hops)
    assert uniques == sorted(uniques)


def test_aggregates_match_brute_force():
    attrs = np.array([17.0, -3.0, 42.0, 8.0, 8.0, 0.5, 99.0, -20.0])
    token, _ = walk_graph(CompleteGraph(8), rng_stream(13, "walk"), attributes=attrs)
    assert token.aggregate.count == 8
    assert token.aggregate.sum == attrs.sum()
    assert token.aggregate.max == attrs.max()


def test_aggregates_default_node_ids():
    cfg = validate_config(SimConfig(n_nodes=60, seed=14))
    _, provider, world, rng = build_run(cfg)
    record = run_walk(cfg, provider, world, rng)
    assert not record.timed_out
    agg = world.token.aggregate
    assert agg.count == 60
    assert agg.sum == 60 * 59 / 2
    assert agg.max == 59


def test_identical_configs_give_identical_records():
    cfg = SimConfig(n_nodes=70, seed=33)
    assert run_single(cfg) == run_single(cfg)  # wall clock excluded from equality


def test_memoryless_decision_replay():
    cfg = SimConfig(n_nodes=50, seed=11)
    trace = []
    run_single(cfg, trace=trace)
    assert any(e.moved for e in trace)
    # replay: same stream, same neighbor sets and counts => same decisions
    rng = rng_stream(11, "walk")
    int(rng.integers(50))  # the introduction draw
    for entry in trace:
        if not entry.moved:
            assert entry.neighbor_ids == ()
            continue
        decision = choose_next_self_repelling(
            np.array(entry.neighbor_ids), np.array(entry.visit_counts), rng)
        assert decision == entry.decision


def test_run_walk_hop_interval_paces_hops():
    cfg = validate_config(SimConfig(n_nodes=10, hop_interval=0.3, tick=0.1, seed=5))
    provider = CompleteGraph(10)
    world = static_world(cfg, 10)
    record = run_walk(cfg, provider, world, rng_stream(5, "walk"))
    final = record.milestones[-1]
    assert final.hops == 9
    assert math.isclose(final.sim_time, 9 * 0.3, rel_tol=1e-9)


def test_default_config_covers_before_timeout():
    # Monte-Carlo check that the connectivity-threshold regime completes
    done = sum(not run_single(SimConfig(n_nodes=100, seed=seed)).timed_out
               for seed in range(50))
    assert done >= 48  # >= 95% of 50 seeds


def test_lattice_walk_variance_desk_scale():
    from manetwalk.graphs import TorusLattice
    from manetwalk.metrics import visit_variance
    lattice = TorusLattice(16, 16)
    n = lattice.n_nodes
    for seed in range(3):
        _, visits = walk_graph(lattice, rng_stream(seed, "walk"),
                               max_hops=10 * n, stop_at_coverage=False)
        assert visit_variance(visits) < 1.0
