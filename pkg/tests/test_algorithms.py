import math
import random

import pytest

from pathlab.algorithms import (
    AlgorithmKind,
    AlgorithmSpec,
    EventKind,
    brute_force_shortest,
    export_trace,
    reconstruct_path,
    run_algorithm,
    run_parallel,
    shortest_cost,
)
from pathlab.errors import ArgumentError, OracleError, StateError
from pathlab.graph import Heuristic, WeightTable, build_region, node_at
from pathlab.terrain import WorldModel

from .support import dyadic_table, enumerate_min_cost, random_endpoints, random_world

SQRT2 = math.sqrt(2.0)

DIJKSTRA = AlgorithmSpec(AlgorithmKind.DIJKSTRA)
ASTAR = AlgorithmSpec(AlgorithmKind.ASTAR, Heuristic.OCTILE)
BFS = AlgorithmSpec(AlgorithmKind.BFS)


def detour_world():
    """5x5 dirt field with a water wall at x=2, gaps at z=0 and z=4."""
    world = WorldModel.flat(5, 5, "dirt")
    for z in (1, 2, 3):
        world.set_block((2, z, 0), "water")
    return world


def assert_same_run(a, b):
    assert a.events == b.events
    assert a.path == b.path
    ma, mb = a.metrics, b.metrics
    assert (ma.visited_nodes, ma.expansions, ma.path_cost, ma.path_steps) == (
        mb.visited_nodes,
        mb.expansions,
        mb.path_cost,
        mb.path_steps,
    )


# -- run_algorithm -----------------------------------------------------------


@pytest.mark.parametrize("spec", [BFS, DIJKSTRA, ASTAR])
def test_start_equals_goal_single_event(spec):
    snap = WorldModel.flat(3, 3).scan_surface()
    trace = run_algorithm(spec, snap, WeightTable(), (1, 1), (1, 1))
    assert len(trace.events) == 1
    e = trace.events[0]
    assert e.kind == EventKind.FINISH_FOUND
    assert e.g_cost == 0.0
    assert e.visited_count == 1
    assert [n.cell() for n in trace.path] == [(1, 1)]
    assert trace.metrics.path_cost == 0.0
    assert trace.metrics.path_steps == 0


def test_diagonal_path_on_3x3_costs_two_sqrt2():
    snap = WorldModel.flat(3, 3).scan_surface()
    table = WeightTable(diagonal_multiplier=SQRT2)
    trace = run_algorithm(DIJKSTRA, snap, table, (0, 0), (2, 2))
    expected = enumerate_min_cost(snap, table, (0, 0), (2, 2), trace.region)
    assert expected == 2 * SQRT2  # exhaustive enumeration at this size
    assert trace.metrics.path_cost == expected
    assert trace.metrics.path_cost == 2.8284271247461903
    assert [n.cell() for n in trace.path] == [(0, 0), (1, 1), (2, 2)]


def test_dijkstra_takes_dry_detour_around_water():
    snap = detour_world().scan_surface()
    table = dyadic_table()
    trace = run_algorithm(DIJKSTRA, snap, table, (0, 2), (4, 2))
    assert trace.metrics.path_cost == 6.0  # four diagonal moves around the wall
    assert trace.metrics.path_cost == enumerate_min_cost(
        snap, table, (0, 2), (4, 2), trace.region
    )
    assert trace.metrics.path_cost == brute_force_shortest(snap, table, (0, 2), (4, 2))
    for n in trace.path:
        assert snap.surface_block(n.x, n.z) != "water"


def test_astar_zero_heuristic_replays_dijkstra_exactly():
    rng = random.Random(7)
    world = random_world(rng, 6, 6)
    snap = world.scan_surface()
    table = dyadic_table()
    d = run_algorithm(AlgorithmSpec(AlgorithmKind.DIJKSTRA, label="x"), snap, table, (0, 0), (5, 5))
    a = run_algorithm(
        AlgorithmSpec(AlgorithmKind.ASTAR, Heuristic.ZERO, label="x"), snap, table, (0, 0), (5, 5)
    )
    assert d.events == a.events


def test_unreachable_goal_yields_empty_path():
    world = WorldModel(2, 1, [["dirt"], ["dirt", "dirt", "dirt"]])
    snap = world.scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, WeightTable(max_step_height=1), (0, 0), (1, 0))
    assert trace.events[-1].kind == EventKind.FINISH_UNREACHABLE
    assert trace.path == ()
    assert math.isinf(trace.metrics.path_cost)
    assert brute_force_shortest(snap, WeightTable(max_step_height=1), (0, 0), (1, 0)) == math.inf


def test_improve_frontier_event_updates_parent():
    snap = WorldModel.flat(3, 3).scan_surface()
    table = WeightTable(diagonal_multiplier=2.5, step_up_penalty=0.0)
    trace = run_algorithm(DIJKSTRA, snap, table, (0, 0), (2, 2))
    improves = [e for e in trace.events if e.kind == EventKind.IMPROVE_FRONTIER]
    assert improves, "expected at least one frontier improvement"
    assert trace.metrics.path_cost == brute_force_shortest(snap, table, (0, 0), (2, 2))


def test_first_event_is_expanding_the_start():
    snap = WorldModel.flat(4, 4).scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, WeightTable(), (0, 0), (3, 3))
    first = trace.events[0]
    assert first.kind == EventKind.EXPAND_CURRENT
    assert first.node.cell() == (0, 0)
    assert first.visited_count == 1
    assert first.g_cost == 0.0


def test_expansions_never_repeat_and_visited_monotone():
    rng = random.Random(3)
    snap = random_world(rng, 7, 7).scan_surface()
    trace = run_algorithm(ASTAR, snap, dyadic_table(), (0, 0), (6, 6))
    seen = set()
    last_count = 0
    for e in trace.events:
        assert e.visited_count >= last_count
        last_count = e.visited_count
        if e.kind == EventKind.EXPAND_CURRENT:
            assert e.node.cell() not in seen
            seen.add(e.node.cell())
    assert [e.step for e in trace.events] == list(range(len(trace.events)))


def test_all_events_stay_inside_region():
    rng = random.Random(11)
    for seed in range(10):
        world = random_world(random.Random(seed), 8, 8)
        snap = world.scan_surface()
        a, b = random_endpoints(rng, 8, 8)
        for spec in (BFS, DIJKSTRA, ASTAR):
            trace = run_algorithm(spec, snap, dyadic_table(), a, b)
            for e in trace.events:
                assert trace.region.contains(e.node.x, e.node.z)


def test_trace_replay_is_complete():
    # replaying events reconstructs visited-set sizes and the frontier
    rng = random.Random(5)
    snap = random_world(rng, 6, 6).scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, dyadic_table(), (0, 0), (5, 4))
    expanded: set = set()
    frontier: set = set()
    for e in trace.events:
        cell = e.node.cell()
        if e.kind == EventKind.EXPAND_CURRENT:
            assert cell in frontier or e.step == 0
            frontier.discard(cell)
            expanded.add(cell)
        elif e.kind == EventKind.DISCOVER_FRONTIER:
            assert cell not in expanded and cell not in frontier
            frontier.add(cell)
        elif e.kind == EventKind.IMPROVE_FRONTIER:
            assert cell in frontier
        if e.kind != EventKind.FINISH_UNREACHABLE:
            assert len(expanded | ({cell} if e.kind == EventKind.FINISH_FOUND else set())) == e.visited_count
        assert not (frontier & expanded)


# -- BFS ---------------------------------------------------------------------


def test_bfs_is_hop_minimal_but_cost_naive():
    snap = detour_world().scan_surface()
    table = dyadic_table()
    bfs = run_algorithm(BFS, snap, table, (0, 2), (4, 2))
    dijkstra = run_algorithm(DIJKSTRA, snap, table, (0, 2), (4, 2))
    assert bfs.metrics.path_steps <= dijkstra.metrics.path_steps
    assert bfs.metrics.path_steps == 4
    # the metrics still price the hop-minimal path by the weight table
    from pathlab.graph import edge_weight

    recomputed = sum(
        edge_weight(snap, table, a, b) for a, b in zip(bfs.path, bfs.path[1:])
    )
    assert bfs.metrics.path_cost == recomputed
    assert bfs.metrics.path_cost >= dijkstra.metrics.path_cost


def test_bfs_refuses_absent_edges():
    world = WorldModel(2, 1, [["dirt"], ["dirt", "dirt", "dirt"]])
    snap = world.scan_surface()
    trace = run_algorithm(BFS, snap, WeightTable(max_step_height=1), (0, 0), (1, 0))
    assert trace.events[-1].kind == EventKind.FINISH_UNREACHABLE


# -- run_parallel ------------------------------------------------------------


def test_parallel_traces_equal_solo_runs():
    rng = random.Random(2)
    snap = random_world(rng, 8, 8).scan_surface()
    table = dyadic_table()
    traces, report = run_parallel([DIJKSTRA, ASTAR], snap, table, (0, 0), (7, 7))
    assert_same_run(traces[0], run_algorithm(DIJKSTRA, snap, table, (0, 0), (7, 7)))
    assert_same_run(traces[1], run_algorithm(ASTAR, snap, table, (0, 0), (7, 7)))
    assert traces[0].metrics.path_cost == traces[1].metrics.path_cost
    assert report.labels == ("dijkstra", "astar")
    assert ("dijkstra", "astar") in report.visited_ratios


def test_parallel_single_spec():
    snap = WorldModel.flat(4, 4).scan_surface()
    traces, report = run_parallel([DIJKSTRA], snap, WeightTable(), (0, 0), (3, 3))
    assert len(traces) == 1
    assert report.labels == ("dijkstra",)
    assert report.visited_ratios == {}
    assert "dijkstra" in report.table()


def test_parallel_duplicate_labels_rejected():
    snap = WorldModel.flat(3, 3).scan_surface()
    with pytest.raises(ArgumentError):
        run_parallel([DIJKSTRA, AlgorithmSpec(AlgorithmKind.DIJKSTRA)], snap, WeightTable(), (0, 0), (1, 1))


def test_astar_dominates_dijkstra_expansions():
    for seed in range(25):
        rng = random.Random(seed)
        world = random_world(rng, 10, 10)
        snap = world.scan_surface()
        a, b = random_endpoints(rng, 10, 10)
        table = dyadic_table()
        d = run_algorithm(DIJKSTRA, snap, table, a, b)
        s = run_algorithm(ASTAR, snap, table, a, b)
        assert s.metrics.expansions <= d.metrics.expansions
        assert s.metrics.path_cost == d.metrics.path_cost


# -- reconstruct_path --------------------------------------------------------


def test_reconstruct_path_matches_trace():
    rng = random.Random(9)
    snap = random_world(rng, 7, 7).scan_surface()
    trace = run_algorithm(ASTAR, snap, dyadic_table(), (0, 0), (6, 3))
    if trace.found:
        assert reconstruct_path(trace) == trace.path
        for a, b in zip(trace.path, trace.path[1:]):
            assert max(abs(a.x - b.x), abs(a.z - b.z)) == 1


def test_reconstruct_path_single_node():
    snap = WorldModel.flat(2, 2).scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, WeightTable(), (0, 0), (0, 0))
    assert reconstruct_path(trace) == trace.path == (node_at(snap, 0, 0),)


def test_reconstruct_path_requires_found():
    world = WorldModel(2, 1, [["dirt"], ["dirt", "dirt", "dirt"]])
    snap = world.scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, WeightTable(), (0, 0), (1, 0))
    with pytest.raises(StateError):
        reconstruct_path(trace)


# -- brute force oracle ------------------------------------------------------


def test_brute_force_start_equals_goal():
    snap = WorldModel.flat(3, 3).scan_surface()
    assert brute_force_shortest(snap, WeightTable(), (1, 1), (1, 1)) == 0.0


def test_brute_force_agrees_with_enumeration_on_3x3():
    snap = WorldModel.flat(3, 3).scan_surface()
    table = WeightTable(diagonal_multiplier=SQRT2)
    region = build_region(node_at(snap, 0, 0), node_at(snap, 2, 2), Heuristic.OCTILE, table)
    assert brute_force_shortest(snap, table, (0, 0), (2, 2)) == enumerate_min_cost(
        snap, table, (0, 0), (2, 2), region
    )


def test_brute_force_region_cap():
    snap = WorldModel.flat(20, 20).scan_surface()
    with pytest.raises(OracleError):
        brute_force_shortest(snap, WeightTable(), (0, 0), (19, 19), cap=16)


def test_dijkstra_equals_brute_force_on_random_maps():
    for seed in range(40):
        rng = random.Random(seed)
        world = random_world(rng, rng.randint(2, 8), rng.randint(2, 8))
        snap = world.scan_surface()
        a, b = random_endpoints(rng, world.width, world.depth)
        table = dyadic_table()
        trace = run_algorithm(DIJKSTRA, snap, table, a, b)
        assert trace.metrics.path_cost == brute_force_shortest(snap, table, a, b)
        assert shortest_cost(snap, table, a, b) == trace.metrics.path_cost


# -- determinism and export --------------------------------------------------


def test_runs_are_deterministic():
    rng = random.Random(21)
    world = random_world(rng, 9, 9)
    snap1 = world.scan_surface()
    snap2 = world.scan_surface()
    t1 = run_algorithm(ASTAR, snap1, dyadic_table(), (0, 0), (8, 8))
    t2 = run_algorithm(ASTAR, snap2, dyadic_table(), (0, 0), (8, 8))
    assert t1.events == t2.events
    assert export_trace(t1) == export_trace(t2)


def test_export_contains_events_path_metrics():
    snap = WorldModel.flat(3, 3).scan_surface()
    trace = run_algorithm(DIJKSTRA, snap, WeightTable(diagonal_multiplier=SQRT2), (0, 0), (2, 2))
    text = export_trace(trace)
    lines = text.splitlines()
    assert lines[0].startswith("trace v1 algo=dijkstra")
    assert sum(1 for l in lines if l.startswith("event ")) == len(trace.events)
    assert any(l.startswith("path 0,0,1 1,1,1 2,2,1") for l in lines)
    assert lines[-1].startswith("metrics ")
    assert "path_cost=2.8284271247461903" in lines[-1]
    assert "wall_time" not in text
