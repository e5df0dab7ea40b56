"""Abstract graphs with 3D layouts plus topology puzzles over them.

Graphs are immutable values: every edit returns a new graph, which keeps
puzzle budget accounting and round-trip tests trivial. Puzzles pair an
initial graph with a machine-checkable goal predicate and an optional
edit budget; generators always stash a known solution (the witness) so
solvability is testable without ever showing it to the student.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import ArgumentError, ConstraintError, ParseError

Position = tuple[float, float, float]
Edge = tuple[str, str]

GRAPH_HEADER = "skygraph v1"


def _canon(directed: bool, a: str, b: str) -> Edge:
    if directed:
        return (a, b)
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class SkyGraph:
    """Directed or undirected graph whose nodes carry 3D positions."""

    directed: bool
    nodes: tuple[tuple[str, Position], ...]  # sorted by id
    edges: frozenset[Edge]  # canonical: sorted pair when undirected

    @classmethod
    def build(
        cls,
        directed: bool,
        nodes: Mapping[str, Position] | Iterable[tuple[str, Position]],
        edges: Iterable[Edge] = (),
    ) -> "SkyGraph":
        node_map = dict(nodes.items() if isinstance(nodes, Mapping) else nodes)
        edge_set: set[Edge] = set()
        for a, b in edges:
            if a == b:
                raise ConstraintError(f"self-loop on {a!r} is not allowed")
            if a not in node_map or b not in node_map:
                raise ConstraintError(f"edge ({a!r}, {b!r}) references a missing node")
            e = _canon(directed, a, b)
            if e in edge_set:
                raise ConstraintError(f"duplicate edge ({a!r}, {b!r})")
            edge_set.add(e)
        return cls(
            directed,
            tuple(sorted(node_map.items())),
            frozenset(edge_set),
        )

    # -- queries ---------------------------------------------------------

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.nodes)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def position(self, node_id: str) -> Position:
        for n, pos in self.nodes:
            if n == node_id:
                return pos
        raise ArgumentError(f"unknown node {node_id!r}")

    def has_node(self, node_id: str) -> bool:
        return any(n == node_id for n, _ in self.nodes)

    def has_edge(self, a: str, b: str) -> bool:
        return _canon(self.directed, a, b) in self.edges

    def undirected_adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n, _ in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for lst in adj.values():
            lst.sort()
        return adj

    def successors(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n, _ in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
        for lst in adj.values():
            lst.sort()
        return adj

    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    # -- value edits -----------------------------------------------------

    def with_node(self, node_id: str, pos: Position) -> "SkyGraph":
        if self.has_node(node_id):
            raise ConstraintError(f"node {node_id!r} already exists")
        return SkyGraph.build(self.directed, dict(self.nodes) | {node_id: pos}, self.edges)

    def without_node(self, node_id: str) -> "SkyGraph":
        if not self.has_node(node_id):
            raise ConstraintError(f"node {node_id!r} does not exist")
        keep = {n: p for n, p in self.nodes if n != node_id}
        edges = [e for e in self.edges if node_id not in e]
        return SkyGraph.build(self.directed, keep, edges)

    def with_edge(self, a: str, b: str) -> "SkyGraph":
        if a == b:
            raise ConstraintError(f"self-loop on {a!r} is not allowed")
        if not (self.has_node(a) and self.has_node(b)):
            raise ConstraintError(f"edge ({a!r}, {b!r}) references a missing node")
        if self.has_edge(a, b):
            raise ConstraintError(f"edge ({a!r}, {b!r}) already exists")
        return SkyGraph(self.directed, self.nodes, self.edges | {_canon(self.directed, a, b)})

    def without_edge(self, a: str, b: str) -> "SkyGraph":
        e = _canon(self.directed, a, b)
        if e not in self.edges:
            raise ConstraintError(f"edge ({a!r}, {b!r}) does not exist")
        return SkyGraph(self.directed, self.nodes, self.edges - {e})


class EditAction(str, Enum):
    ADD_EDGE = "add_edge"
    REMOVE_EDGE = "remove_edge"
    ADD_NODE = "add_node"
    REMOVE_NODE = "remove_node"


def edit(g: SkyGraph, action: EditAction | str, payload: Mapping) -> SkyGraph:
    """Apply one student edit; violations raise ConstraintError."""
    action = EditAction(action)
    if action == EditAction.ADD_EDGE:
        return g.with_edge(payload["from"], payload["to"])
    if action == EditAction.REMOVE_EDGE:
        return g.without_edge(payload["from"], payload["to"])
    if action == EditAction.ADD_NODE:
        pos = payload.get("pos", (0.0, 0.0, 0.0))
        return g.with_node(payload["id"], (float(pos[0]), float(pos[1]), float(pos[2])))
    return g.without_node(payload["id"])


# ---------------------------------------------------------------------------
# Structure queries
# ---------------------------------------------------------------------------


def connected_components(g: SkyGraph) -> list[frozenset[str]]:
    """Components ignoring edge direction."""
    adj = g.undirected_adjacency()
    seen: set[str] = set()
    comps = []
    for start in g.node_ids:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(frozenset(comp))
    return comps


def is_connected(g: SkyGraph) -> bool:
    return len(connected_components(g)) <= 1


def is_acyclic(g: SkyGraph) -> bool:
    if g.directed:
        # Kahn: acyclic iff a full topological order exists
        succ = g.successors()
        indeg = {n: 0 for n in g.node_ids}
        for a, b in g.edges:
            indeg[b] += 1
        queue = [n for n in g.node_ids if indeg[n] == 0]
        removed = 0
        while queue:
            u = queue.pop()
            removed += 1
            for v in succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        return removed == g.node_count
    # undirected: a forest has exactly n - c edges
    return g.edge_count == g.node_count - len(connected_components(g))


def _lowlink(g: SkyGraph) -> tuple[set[Edge], set[str]]:
    """One iterative DFS computing both bridges and articulation points."""
    adj = g.undirected_adjacency()
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[Edge] = set()
    arts: set[str] = set()
    timer = 0
    for root in g.node_ids:
        if root in disc:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        stack = [(root, None, iter(adj[root]))]
        while stack:
            u, parent, it = stack[-1]
            pushed = False
            for v in it:
                if v == parent:
                    continue
                if v in disc:
                    if disc[v] < low[u]:
                        low[u] = disc[v]
                else:
                    disc[v] = low[v] = timer
                    timer += 1
                    if u == root:
                        root_children += 1
                    stack.append((v, u, iter(adj[v])))
                    pushed = True
                    break
            if not pushed:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    if low[u] < low[p]:
                        low[p] = low[u]
                    if low[u] > disc[p]:
                        bridges.add(_canon(False, p, u))
                    if p != root and low[u] >= disc[p]:
                        arts.add(p)
        if root_children >= 2:
            arts.add(root)
    return bridges, arts


def find_bridges(g: SkyGraph) -> frozenset[Edge]:
    if g.directed:
        raise ArgumentError("bridges are defined for undirected graphs only")
    return frozenset(_lowlink(g)[0])


def find_articulation_points(g: SkyGraph) -> frozenset[str]:
    if g.directed:
        raise ArgumentError("articulation points are defined for undirected graphs only")
    return frozenset(_lowlink(g)[1])


def _path_exists(g: SkyGraph, a: str, b: str) -> bool:
    if not (g.has_node(a) and g.has_node(b)):
        return False
    adj = g.successors() if g.directed else g.undirected_adjacency()
    seen = {a}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            return True
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


# ---------------------------------------------------------------------------
# Puzzles
# ---------------------------------------------------------------------------


class PuzzleKind(str, Enum):
    CYCLE_BREAKER = "cycle_breaker"
    CRITICAL_EDGES = "critical_edges"
    CRITICAL_NODES = "critical_nodes"
    BUILD_TO_SPEC = "build_to_spec"


class VerdictStatus(str, Enum):
    SOLVED = "solved"
    NOT_SOLVED = "not_solved"
    OVER_BUDGET = "over_budget"


@dataclass(frozen=True)
class PuzzleVerdict:
    status: VerdictStatus
    reason: str | None = None


_CLAUSE_WORDS = {
    "connected": "the graph must be connected",
    "acyclic": "the graph must be acyclic",
    "node_count": "the graph must have exactly {0} nodes",
    "edge_count": "the graph must have exactly {0} edges",
    "min_degree": "every node needs degree at least {0}",
    "contains_path": "a path from {0} to {1} must exist",
}


def _check_clause(clause: tuple, g: SkyGraph) -> bool:
    name = clause[0]
    if name == "connected":
        return is_connected(g)
    if name == "acyclic":
        return is_acyclic(g)
    if name == "node_count":
        return g.node_count == clause[1]
    if name == "edge_count":
        return g.edge_count == clause[1]
    if name == "min_degree":
        adj = g.undirected_adjacency()
        return all(len(adj[n]) >= clause[1] for n in g.node_ids) if g.node_ids else True
    if name == "contains_path":
        return _path_exists(g, clause[1], clause[2])
    raise ArgumentError(f"unknown clause {name!r}")


def describe_clause(clause: tuple) -> str:
    return _CLAUSE_WORDS[clause[0]].format(*clause[1:])


@dataclass(frozen=True)
class GoalPredicate:
    """Named, machine-checkable goal over (initial graph, submitted graph)."""

    name: str
    clauses: tuple[tuple, ...] = ()

    def evaluate(self, initial: SkyGraph, g: SkyGraph) -> tuple[bool, str | None]:
        if self.name == "acyclic":
            if is_acyclic(g):
                return True, None
            return False, "graph contains a cycle"
        if self.name == "removed_edges_are_bridges":
            if set(g.node_ids) != set(initial.node_ids):
                return False, "only edge removals are allowed"
            if not g.edges <= initial.edges:
                return False, "only edge removals are allowed"
            removed = initial.edges - g.edges
            if removed != find_bridges(initial):
                return False, "removed edges are not exactly the critical edges"
            return True, None
        if self.name == "removed_nodes_are_articulation_points":
            if not set(g.node_ids) <= set(initial.node_ids):
                return False, "only node removals are allowed"
            kept = set(g.node_ids)
            induced = {e for e in initial.edges if e[0] in kept and e[1] in kept}
            if g.edges != induced:
                return False, "only node removals are allowed"
            removed = set(initial.node_ids) - kept
            if removed != find_articulation_points(initial):
                return False, "removed nodes are not exactly the critical nodes"
            return True, None
        if self.name == "satisfies_clauses":
            for clause in self.clauses:
                if not _check_clause(clause, g):
                    return False, describe_clause(clause)
            return True, None
        raise ArgumentError(f"unknown goal predicate {self.name!r}")

    def describe(self) -> str:
        if self.name == "acyclic":
            return "make the graph acyclic"
        if self.name == "removed_edges_are_bridges":
            return "remove exactly the edges whose loss disconnects the graph"
        if self.name == "removed_nodes_are_articulation_points":
            return "remove exactly the nodes whose loss disconnects the graph"
        return "; ".join(describe_clause(c) for c in self.clauses)


@dataclass(frozen=True)
class Puzzle:
    kind: PuzzleKind
    initial: SkyGraph
    goal: GoalPredicate
    budget: int | None
    witness: SkyGraph
    prompt: str


def check_solution(
    puzzle: Puzzle, g: SkyGraph, edits: int | None = None
) -> PuzzleVerdict:
    ok, reason = puzzle.goal.evaluate(puzzle.initial, g)
    if not ok:
        return PuzzleVerdict(VerdictStatus.NOT_SOLVED, reason)
    if puzzle.budget is not None and edits is not None and edits > puzzle.budget:
        return PuzzleVerdict(
            VerdictStatus.OVER_BUDGET,
            f"used {edits} edits, budget is {puzzle.budget}",
        )
    return PuzzleVerdict(VerdictStatus.SOLVED)


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def _sphere_layout(
    rng: random.Random, ids: list[str], min_dist: float = 1.5
) -> dict[str, Position]:
    """Random shell positions pushed apart until pairwise distances clear."""
    n = len(ids)
    radius = max(3.0, min_dist * math.sqrt(n))
    while True:
        pts = []
        for _ in ids:
            v = (rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
            norm = math.sqrt(sum(c * c for c in v)) or 1.0
            pts.append([c / norm * radius for c in v])
        ok = False
        for _ in range(300):
            ok = True
            for i in range(n):
                for j in range(i + 1, n):
                    d = math.dist(pts[i], pts[j])
                    if d < min_dist:
                        ok = False
                        push = (min_dist - d) / 2 + 1e-3
                        if d < 1e-9:
                            delta = [push, 0.0, 0.0]
                        else:
                            delta = [(pts[i][k] - pts[j][k]) / d * push for k in range(3)]
                        for k in range(3):
                            pts[i][k] += delta[k]
                            pts[j][k] -= delta[k]
            if ok:
                break
        if ok:
            return {
                node_id: (round(p[0], 3), round(p[1], 3), round(p[2], 3))
                for node_id, p in zip(ids, pts)
            }
        radius *= 1.4  # shell too tight for this many nodes; widen and retry


def _random_tree_edges(rng: random.Random, ids: list[str]) -> list[Edge]:
    return [(ids[rng.randrange(i)], ids[i]) for i in range(1, len(ids))]


def _rng_extra_edge(rng: random.Random, g: SkyGraph) -> Edge:
    ids = g.node_ids
    candidates = [
        (a, b)
        for i, a in enumerate(ids)
        for b in ids[i + 1 :]
        if not g.has_edge(a, b)
    ]
    if not candidates:
        raise ArgumentError("graph is complete; no edge can be added")
    return candidates[rng.randrange(len(candidates))]


def _cycle_edges(ids: list[str]) -> list[Edge]:
    return [(ids[i], ids[(i + 1) % len(ids)]) for i in range(len(ids))]


def generate_puzzle(kind: PuzzleKind | str, size: int, seed: int) -> Puzzle:
    """Deterministic-in-seed puzzle generation with a stored solution."""
    kind = PuzzleKind(kind)
    rng = random.Random(seed)
    if kind == PuzzleKind.CYCLE_BREAKER:
        if size < 3:
            raise ArgumentError("cycle breaker needs at least 3 nodes")
        ids = [f"n{i}" for i in range(size)]
        layout = _sphere_layout(rng, ids)
        tree = SkyGraph.build(False, layout, _random_tree_edges(rng, ids))
        extra = _rng_extra_edge(rng, tree)
        initial = tree.with_edge(*extra)
        witness = initial.without_edge(*extra)
        return Puzzle(
            kind,
            initial,
            GoalPredicate("acyclic"),
            budget=1,
            witness=witness,
            prompt="One loop hides in this web. Break a single chain to make the graph acyclic.",
        )
    if kind == PuzzleKind.CRITICAL_EDGES:
        if size < 2:
            raise ArgumentError("critical edges needs at least 2 nodes")
        ids = [f"n{i}" for i in range(size)]
        layout = _sphere_layout(rng, ids)
        half = size // 2
        blob_a, blob_b = ids[:half], ids[half:]
        edges: list[Edge] = []
        for blob in (blob_a, blob_b):
            if len(blob) >= 3:
                edges.extend(_cycle_edges(blob))
            elif len(blob) == 2:
                edges.append((blob[0], blob[1]))
        if blob_a and blob_b:
            edges.append((blob_a[rng.randrange(len(blob_a))], blob_b[rng.randrange(len(blob_b))]))
        initial = SkyGraph.build(False, layout, edges)
        bridges = find_bridges(initial)
        witness = initial
        for a, b in sorted(bridges):
            witness = witness.without_edge(a, b)
        return Puzzle(
            kind,
            initial,
            GoalPredicate("removed_edges_are_bridges"),
            budget=len(bridges),
            witness=witness,
            prompt="Remove exactly the chains that hold the graph together (the critical edges).",
        )
    if kind == PuzzleKind.CRITICAL_NODES:
        if size < 3:
            raise ArgumentError("critical nodes needs at least 3 nodes")
        ids = [f"n{i}" for i in range(size)]
        layout = _sphere_layout(rng, ids)
        half = max(2, (size + 1) // 2)
        blob_a = ids[:half]  # shares ids[0] with blob_b
        blob_b = [ids[0]] + ids[half:]
        edges = []
        for blob in (blob_a, blob_b):
            if len(blob) >= 3:
                edges.extend(_cycle_edges(blob))
            elif len(blob) == 2:
                edges.append((blob[0], blob[1]))
        initial = SkyGraph.build(False, layout, edges)
        arts = find_articulation_points(initial)
        witness = initial
        for node_id in sorted(arts):
            witness = witness.without_node(node_id)
        return Puzzle(
            kind,
            initial,
            GoalPredicate("removed_nodes_are_articulation_points"),
            budget=len(arts),
            witness=witness,
            prompt="Remove exactly the blocks whose loss splits the graph (the critical nodes).",
        )
    if kind == PuzzleKind.BUILD_TO_SPEC:
        if size < 2:
            raise ArgumentError("build-to-spec needs at least 2 nodes")
        ids = [f"n{i}" for i in range(size)]
        layout = _sphere_layout(rng, ids)
        witness = SkyGraph.build(False, layout, _random_tree_edges(rng, ids))
        extra_count = rng.randint(0, size // 2)
        for _ in range(extra_count):
            try:
                witness = witness.with_edge(*_rng_extra_edge(rng, witness))
            except ArgumentError:
                break
        clauses: list[tuple] = [
            ("connected",),
            ("node_count", size),
            ("edge_count", witness.edge_count),
        ]
        if witness.edge_count == size - 1:
            clauses.append(("acyclic",))
        goal = GoalPredicate("satisfies_clauses", tuple(clauses))
        initial = SkyGraph.build(False, {})
        return Puzzle(
            kind,
            initial,
            goal,
            budget=size + witness.edge_count,
            witness=witness,
            prompt="Craft a graph from scratch: " + goal.describe() + ".",
        )
    raise ArgumentError(f"unknown puzzle kind {kind!r}")


# ---------------------------------------------------------------------------
# Graph documents (see docs/formats.md):
#
#   skygraph v1
#   directed false
#   node <id> <x> <y> <z>
#   edge <from> <to>
#
# Canonical save: nodes sorted by id, edges sorted; floats use repr.
# ---------------------------------------------------------------------------


def save_graph(g: SkyGraph) -> str:
    lines = [GRAPH_HEADER, f"directed {'true' if g.directed else 'false'}"]
    for node_id, (x, y, z) in g.nodes:
        lines.append(f"node {node_id} {x!r} {y!r} {z!r}")
    for a, b in g.sorted_edges():
        lines.append(f"edge {a} {b}")
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> SkyGraph:
    lines = [l for l in text.splitlines()]
    directed: bool | None = None
    nodes: dict[str, Position] = {}
    edges: list[Edge] = []
    seen_header = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_header:
            if line != GRAPH_HEADER:
                raise ParseError(f"expected {GRAPH_HEADER!r} header", line_no)
            seen_header = True
            continue
        parts = line.split()
        if parts[0] == "directed":
            if len(parts) != 2 or parts[1] not in ("true", "false"):
                raise ParseError("expected 'directed true|false'", line_no)
            directed = parts[1] == "true"
        elif parts[0] == "node":
            if len(parts) != 5:
                raise ParseError("expected 'node <id> <x> <y> <z>'", line_no)
            if parts[1] in nodes:
                raise ParseError(f"duplicate node {parts[1]!r}", line_no)
            try:
                nodes[parts[1]] = (float(parts[2]), float(parts[3]), float(parts[4]))
            except ValueError:
                raise ParseError("node coordinates must be numbers", line_no) from None
        elif parts[0] == "edge":
            if len(parts) != 3:
                raise ParseError("expected 'edge <from> <to>'", line_no)
            edges.append((parts[1], parts[2]))
        else:
            raise ParseError(f"unknown directive {parts[0]!r}", line_no)
    if not seen_header:
        raise ParseError("empty graph document", 1)
    if directed is None:
        raise ParseError("missing 'directed' header")
    try:
        return SkyGraph.build(directed, nodes, edges)
    except ConstraintError as exc:
        raise ParseError(str(exc)) from exc
