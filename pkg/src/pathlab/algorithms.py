"""Traced executions of BFS, Dijkstra, and A* over the grid graph.

Every run is recorded as an append-only list of events rich enough to
rebuild the full visited/frontier/current picture at any step, which is
what the time-travel debugger replays. Runs are deterministic: the
priority queue breaks ties by (f, h, discovery order) and neighbors are
always iterated in the fixed N..NW order.

BFS is deliberately defined as hop-count search that still refuses
missing edges; its metrics report the weighted cost of the hop-minimal
path so the contrast with Dijkstra/A* is visible in the numbers.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from enum import Enum

from .errors import ArgumentError, OracleError, StateError
from .graph import (
    DIRECTIONS,
    GridNode,
    Heuristic,
    SearchRegion,
    WeightTable,
    build_region,
    edge_weight,
    heuristic_value,
    neighbors,
    node_at,
)
from .terrain import TerrainSnapshot


class AlgorithmKind(str, Enum):
    BFS = "bfs"
    DIJKSTRA = "dijkstra"
    ASTAR = "astar"


_DEFAULT_COLORS = {
    AlgorithmKind.BFS: "#2e86de",
    AlgorithmKind.DIJKSTRA: "#222222",
    AlgorithmKind.ASTAR: "#c0392b",
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """What to run and how to tag it visually.

    BFS and Dijkstra ignore ``heuristic``; it only steers A*.
    """

    kind: AlgorithmKind
    heuristic: Heuristic = Heuristic.OCTILE
    label: str = ""
    color: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.kind.value)
        if not self.color:
            object.__setattr__(self, "color", _DEFAULT_COLORS[self.kind])


class EventKind(str, Enum):
    EXPAND_CURRENT = "expand_current"
    DISCOVER_FRONTIER = "discover_frontier"
    IMPROVE_FRONTIER = "improve_frontier"
    FINISH_FOUND = "finish_found"
    FINISH_UNREACHABLE = "finish_unreachable"



@dataclass(frozen=True)
class TraceEvent:
    step: int
    algo: str
    kind: EventKind
    node: GridNode
    g_cost: float
    h_value: float
    visited_count: int
    parent: GridNode | None


@dataclass(frozen=True)
class RunMetrics:
    visited_nodes: int
    expansions: int
    path_cost: float  # math.inf when no path exists
    path_steps: int
    wall_time: float  # measured, never asserted on or exported


@dataclass(frozen=True)
class ExecutionTrace:
    spec: AlgorithmSpec
    region: SearchRegion
    events: tuple[TraceEvent, ...]
    path: tuple[GridNode, ...]
    metrics: RunMetrics

    @property
    def found(self) -> bool:
        return self.events[-1].kind == EventKind.FINISH_FOUND


def _resolve(snapshot: TerrainSnapshot, p) -> GridNode:
    if isinstance(p, GridNode):
        return p
    x, z = p
    return node_at(snapshot, x, z)


def run_algorithm(
    spec: AlgorithmSpec,
    snapshot: TerrainSnapshot,
    table: WeightTable,
    start,
    goal,
    region: SearchRegion | None = None,
) -> ExecutionTrace:
    """Execute one algorithm and record its full trace.

    The search region defaults to the octile-based circle regardless of
    the spec's heuristic, so traces of different algorithms over the
    same endpoints stay comparable.
    """
    t0 = time.perf_counter()
    start = _resolve(snapshot, start)
    goal = _resolve(snapshot, goal)
    if region is None:
        region = build_region(start, goal, Heuristic.OCTILE, table)
    elif not region.contains(goal.x, goal.z):
        raise ArgumentError("goal is outside the search region")

    label = spec.label
    events: list[TraceEvent] = []

    def emit(kind, node, g, h, visited, parent):
        events.append(TraceEvent(len(events), label, kind, node, g, h, visited, parent))

    if start.cell() == goal.cell():
        emit(EventKind.FINISH_FOUND, start, 0.0, 0.0, 1, None)
        metrics = RunMetrics(1, 0, 0.0, 0, time.perf_counter() - t0)
        return ExecutionTrace(spec, region, tuple(events), (start,), metrics)

    weighted = spec.kind != AlgorithmKind.BFS

    def h_of(node: GridNode) -> float:
        if spec.kind == AlgorithmKind.ASTAR:
            return heuristic_value(spec.heuristic, node, goal, table)
        return 0.0

    g: dict[tuple[int, int], float] = {start.cell(): 0.0}
    parent: dict[tuple[int, int], GridNode | None] = {start.cell(): None}
    node_of: dict[tuple[int, int], GridNode] = {start.cell(): start}
    discovery: dict[tuple[int, int], int] = {start.cell(): 0}
    expanded: set[tuple[int, int]] = set()
    push_seq = 0
    h_start = h_of(start)
    # heap entries: (f, h, discovery index, push sequence, g at push, node)
    heap: list[tuple[float, float, int, int, float, GridNode]] = [
        (h_start, h_start, 0, 0, 0.0, start)
    ]
    visited_count = 0
    goal_found = False

    while heap:
        _, h_cur, _, _, g_entry, node = heapq.heappop(heap)
        cell = node.cell()
        if cell in expanded or g_entry > g[cell]:
            continue  # stale queue entry, skipped silently
        expanded.add(cell)
        visited_count += 1
        emit(EventKind.EXPAND_CURRENT, node, g[cell], h_cur, visited_count, parent[cell])
        if cell == goal.cell():
            goal_found = True
            break
        for nb, w in neighbors(snapshot, table, region, node):
            nb_cell = nb.cell()
            if nb_cell in expanded:
                continue
            step_cost = w if weighted else 1.0
            ng = g[cell] + step_cost
            if nb_cell not in g:
                g[nb_cell] = ng
                parent[nb_cell] = node
                node_of[nb_cell] = nb
                disc = len(discovery)
                discovery[nb_cell] = disc
                nh = h_of(nb)
                emit(EventKind.DISCOVER_FRONTIER, nb, ng, nh, visited_count, node)
                push_seq += 1
                heapq.heappush(heap, (ng + nh, nh, disc, push_seq, ng, nb))
            elif ng < g[nb_cell]:
                g[nb_cell] = ng
                parent[nb_cell] = node
                nh = h_of(nb)
                emit(EventKind.IMPROVE_FRONTIER, nb, ng, nh, visited_count, node)
                push_seq += 1
                heapq.heappush(heap, (ng + nh, nh, discovery[nb_cell], push_seq, ng, nb))

    if not goal_found:
        emit(EventKind.FINISH_UNREACHABLE, start, math.inf, 0.0, visited_count, None)
        metrics = RunMetrics(
            visited_count, visited_count, math.inf, 0, time.perf_counter() - t0
        )
        return ExecutionTrace(spec, region, tuple(events), (), metrics)

    path_nodes: list[GridNode] = []
    cell = goal.cell()
    while cell is not None:
        path_nodes.append(node_of[cell])
        prev = parent[cell]
        cell = prev.cell() if prev is not None else None
    path_nodes.reverse()
    path = tuple(path_nodes)

    if weighted:
        path_cost = g[goal.cell()]
    else:
        path_cost = 0.0
        for a, b in zip(path, path[1:]):
            w = edge_weight(snapshot, table, a, b)
            assert w is not None
            path_cost += w
    emit(
        EventKind.FINISH_FOUND,
        goal,
        path_cost,
        h_of(goal),
        visited_count,
        parent[goal.cell()],
    )
    metrics = RunMetrics(
        visited_count,
        visited_count,
        path_cost,
        len(path) - 1,
        time.perf_counter() - t0,
    )
    return ExecutionTrace(spec, region, tuple(events), path, metrics)


def shortest_cost(
    snapshot: TerrainSnapshot,
    table: WeightTable,
    start,
    goal,
    region: SearchRegion | None = None,
) -> float:
    """Region-confined optimal cost without trace recording.

    Same graph semantics as a Dijkstra run (and therefore the same
    result), kept lean for bulk queries like endpoint scans.
    """
    start = _resolve(snapshot, start)
    goal = _resolve(snapshot, goal)
    if region is None:
        region = build_region(start, goal, Heuristic.OCTILE, table)
    if start.cell() == goal.cell():
        return 0.0
    g = {start.cell(): 0.0}
    heap: list[tuple[float, int, GridNode]] = [(0.0, 0, start)]
    seq = 0
    done: set[tuple[int, int]] = set()
    while heap:
        d, _, node = heapq.heappop(heap)
        cell = node.cell()
        if cell in done or d > g[cell]:
            continue
        done.add(cell)
        if cell == goal.cell():
            return d
        for nb, w in neighbors(snapshot, table, region, node):
            nb_cell = nb.cell()
            nd = d + w
            if nb_cell not in g or nd < g[nb_cell]:
                g[nb_cell] = nd
                seq += 1
                heapq.heappush(heap, (nd, seq, nb))
    return math.inf


@dataclass(frozen=True)
class ComparisonReport:
    """Per-label metrics plus pairwise visited-count ratios."""

    labels: tuple[str, ...]
    metrics: dict[str, RunMetrics]
    visited_ratios: dict[tuple[str, str], float]

    def table(self) -> str:
        header = f"{'algorithm':<14} {'visited':>8} {'expansions':>11} {'path_cost':>12} {'steps':>6}"
        lines = [header, "-" * len(header)]
        for label in self.labels:
            m = self.metrics[label]
            cost = "unreachable" if math.isinf(m.path_cost) else f"{m.path_cost:.4f}"
            lines.append(
                f"{label:<14} {m.visited_nodes:>8} {m.expansions:>11} {cost:>12} {m.path_steps:>6}"
            )
        for (a, b), r in sorted(self.visited_ratios.items()):
            lines.append(f"visited({a}) / visited({b}) = {r:.3f}")
        return "\n".join(lines)


def run_parallel(
    specs: list[AlgorithmSpec],
    snapshot: TerrainSnapshot,
    table: WeightTable,
    start,
    goal,
) -> tuple[list[ExecutionTrace], ComparisonReport]:
    """Run several algorithms over the same endpoints for comparison.

    Execution is sequential under the hood; the contract is only that
    each trace is identical to its solo run.
    """
    if not specs:
        raise ArgumentError("at least one algorithm spec is required")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ArgumentError(f"duplicate algorithm labels: {labels}")
    traces = [run_algorithm(s, snapshot, table, start, goal) for s in specs]
    metrics = {t.spec.label: t.metrics for t in traces}
    ratios = {
        (a, b): metrics[a].visited_nodes / metrics[b].visited_nodes
        for a in labels
        for b in labels
        if a != b
    }
    return traces, ComparisonReport(tuple(labels), metrics, ratios)


def reconstruct_path(trace: ExecutionTrace) -> tuple[GridNode, ...]:
    """Walk parent links recorded in the events back from the goal."""
    last = trace.events[-1]
    if last.kind != EventKind.FINISH_FOUND:
        raise StateError("cannot reconstruct a path from an unreachable run")
    parents: dict[tuple[int, int], GridNode | None] = {}
    nodes: dict[tuple[int, int], GridNode] = {}
    for e in trace.events:
        if e.kind in (EventKind.EXPAND_CURRENT, EventKind.FINISH_FOUND):
            parents[e.node.cell()] = e.parent
            nodes[e.node.cell()] = e.node
    out: list[GridNode] = []
    cell: tuple[int, int] | None = last.node.cell()
    while cell is not None:
        out.append(nodes[cell])
        prev = parents[cell]
        cell = prev.cell() if prev is not None else None
    out.reverse()
    return tuple(out)


def brute_force_shortest(
    snapshot: TerrainSnapshot,
    table: WeightTable,
    start,
    goal,
    region: SearchRegion | None = None,
    cap: int = 4096,
) -> float:
    """Exact region-confined shortest-path cost by relaxation to fixpoint.

    Test oracle only: label-correcting Bellman-Ford sweeps, no queue, no
    heuristics, nothing shared with the traced search loop. Returns
    ``math.inf`` when the goal cannot be reached inside the region.
    """
    start = _resolve(snapshot, start)
    goal = _resolve(snapshot, goal)
    if region is None:
        region = build_region(start, goal, Heuristic.OCTILE, table)
    cells = list(dict.fromkeys(region.cells(snapshot.bounds)))
    if len(cells) > cap:
        raise OracleError(f"region has {len(cells)} cells, oracle cap is {cap}")
    index = {c: i for i, c in enumerate(cells)}
    edges: list[tuple[int, int, float]] = []
    for cell_u in cells:
        u = node_at(snapshot, *cell_u)
        for dx, dz in DIRECTIONS:
            cell_v = (cell_u[0] + dx, cell_u[1] + dz)
            if cell_v not in index or not snapshot.bounds.contains(*cell_v):
                continue
            w = edge_weight(snapshot, table, u, node_at(snapshot, *cell_v))
            if w is not None:
                edges.append((index[cell_u], index[cell_v], w))
    dist = [math.inf] * len(cells)
    dist[index[start.cell()]] = 0.0
    changed = True
    while changed:
        changed = False
        for ui, vi, w in edges:
            if dist[ui] + w < dist[vi]:
                dist[vi] = dist[ui] + w
                changed = True
    return dist[index[goal.cell()]]


# ---------------------------------------------------------------------------
# Trace export: line-delimited text, one line per event plus path and
# metrics footers. wall_time is deliberately absent so identical runs
# export byte-identically.
# ---------------------------------------------------------------------------


def _fmt_cost(c: float) -> str:
    return "inf" if math.isinf(c) else repr(c)


def _fmt_node(n: GridNode | None) -> str:
    return "-" if n is None else f"{n.x},{n.z},{n.height}"


def export_trace(trace: ExecutionTrace) -> str:
    spec = trace.spec
    lines = [
        f"trace v1 algo={spec.label} kind={spec.kind.value} heuristic={spec.heuristic.value}"
    ]
    for e in trace.events:
        lines.append(
            f"event {e.step} {e.kind.value} {_fmt_node(e.node)} "
            f"g={_fmt_cost(e.g_cost)} h={_fmt_cost(e.h_value)} "
            f"visited={e.visited_count} parent={_fmt_node(e.parent)}"
        )
    lines.append("path " + (" ".join(_fmt_node(n) for n in trace.path) or "-"))
    m = trace.metrics
    lines.append(
        f"metrics visited={m.visited_nodes} expansions={m.expansions} "
        f"path_cost={_fmt_cost(m.path_cost)} path_steps={m.path_steps}"
    )
    return "\n".join(lines) + "\n"
