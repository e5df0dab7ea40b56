"""Shared test helpers: random worlds, exact independent oracles.

The oracles here deliberately avoid the engine's search/lowlink code
paths: path enumeration is plain DFS over simple paths, cycle checks use
back-edge DFS or boolean reachability, and criticality uses
remove-and-recount. They exist to catch the engine lying.
"""

from __future__ import annotations

import itertools
import math
import random

from pathlab.graph import DIRECTIONS, GridNode, WeightTable, edge_weight, node_at
from pathlab.skygraph import SkyGraph
from pathlab.terrain import TerrainSnapshot, WorldModel

ACCEPTANCE_BLOCKS = ("dirt", "grass", "stone", "water")


def dyadic_table(**overrides) -> WeightTable:
    """All-dyadic costs so float path sums are exact and order-free."""
    params = dict(
        pair_cost={("dirt", "dirt"): 1.0, ("dirt", "water"): 4.0, ("water", "dirt"): 4.0},
        default_cost=1.0,
        step_up_penalty=0.5,
        step_down_penalty=0.25,
        diagonal_multiplier=1.5,
        max_step_height=1,
    )
    params.update(overrides)
    return WeightTable(**params)


def random_world(
    rng: random.Random,
    width: int,
    depth: int,
    blocks: tuple[str, ...] = ACCEPTANCE_BLOCKS,
    extra_height: int = 2,
) -> WorldModel:
    """Random block types and surface heights 1 .. 1+extra_height."""
    columns = []
    for _ in range(width * depth):
        block = blocks[rng.randrange(len(blocks))]
        height = 1 + rng.randint(0, extra_height)
        columns.append([block] * height)
    return WorldModel(width, depth, columns)


def random_endpoints(rng: random.Random, width: int, depth: int) -> tuple[tuple[int, int], tuple[int, int]]:
    while True:
        a = (rng.randrange(width), rng.randrange(depth))
        b = (rng.randrange(width), rng.randrange(depth))
        if a != b:
            return a, b


def enumerate_min_cost(
    snapshot: TerrainSnapshot,
    table: WeightTable,
    start: tuple[int, int],
    goal: tuple[int, int],
    region=None,
) -> float:
    """Exhaustive simple-path enumeration; only sensible for tiny maps."""
    best = math.inf
    su = node_at(snapshot, *start)

    def walk(u: GridNode, cost: float, seen: set[tuple[int, int]]):
        nonlocal best
        if cost >= best:
            return
        if u.cell() == goal:
            best = cost
            return
        for dx, dz in DIRECTIONS:
            cell = (u.x + dx, u.z + dz)
            if cell in seen or not snapshot.bounds.contains(*cell):
                continue
            if region is not None and not region.contains(*cell):
                continue
            v = node_at(snapshot, *cell)
            w = edge_weight(snapshot, table, u, v)
            if w is None:
                continue
            seen.add(cell)
            walk(v, cost + w, seen)
            seen.remove(cell)

    walk(su, 0.0, {start})
    return best


# -- sky-graph oracles -------------------------------------------------------


def oracle_cyclic_undirected(g: SkyGraph) -> bool:
    """Back-edge DFS, independent of the edge-counting formula."""
    adj = g.undirected_adjacency()
    seen: set[str] = set()
    for root in g.node_ids:
        if root in seen:
            continue
        stack = [(root, None)]
        seen.add(root)
        while stack:
            u, parent = stack.pop()
            skipped_parent = False
            for v in adj[u]:
                if v == parent and not skipped_parent:
                    skipped_parent = True
                    continue
                if v in seen:
                    return True
                seen.add(v)
                stack.append((v, u))
    return False


def oracle_cyclic_directed(g: SkyGraph) -> bool:
    """Boolean transitive closure: cyclic iff some node reaches itself."""
    ids = list(g.node_ids)
    idx = {n: i for i, n in enumerate(ids)}
    n = len(ids)
    reach = [[False] * n for _ in range(n)]
    for a, b in g.edges:
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return any(reach[i][i] for i in range(n))


def _component_count(node_ids: tuple[str, ...], edges) -> int:
    parent = {n: n for n in node_ids}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(n) for n in node_ids})


def oracle_bridges(g: SkyGraph) -> frozenset[tuple[str, str]]:
    base = _component_count(g.node_ids, g.edges)
    out = set()
    for e in g.edges:
        if _component_count(g.node_ids, g.edges - {e}) > base:
            out.add(e)
    return frozenset(out)


def oracle_articulation_points(g: SkyGraph) -> frozenset[str]:
    base = _component_count(g.node_ids, g.edges)
    out = set()
    for node in g.node_ids:
        rest = tuple(n for n in g.node_ids if n != node)
        kept = {e for e in g.edges if node not in e}
        # articulation = removal increases the component count (the node's
        # own disappearance does not count as an increase)
        if _component_count(rest, kept) > base:
            out.add(node)
    return frozenset(out)


def random_skygraph(rng: random.Random, n: int, directed: bool = False, p: float = 0.35) -> SkyGraph:
    ids = [f"v{i}" for i in range(n)]
    nodes = {node_id: (float(i), 0.0, 0.0) for i, node_id in enumerate(ids)}
    edges = []
    if directed:
        for a, b in itertools.permutations(ids, 2):
            if rng.random() < p:
                edges.append((a, b))
    else:
        for a, b in itertools.combinations(ids, 2):
            if rng.random() < p:
                edges.append((a, b))
    return SkyGraph.build(directed, nodes, edges)


def all_undirected_graphs(n: int):
    """Every labeled undirected graph on n nodes (no positions of note)."""
    ids = [f"v{i}" for i in range(n)]
    nodes = {node_id: (float(i), 0.0, 0.0) for i, node_id in enumerate(ids)}
    pairs = list(itertools.combinations(ids, 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        yield SkyGraph.build(False, nodes, edges)


def all_directed_graphs(n: int):
    ids = [f"v{i}" for i in range(n)]
    nodes = {node_id: (float(i), 0.0, 0.0) for i, node_id in enumerate(ids)}
    pairs = list(itertools.permutations(ids, 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        yield SkyGraph.build(True, nodes, edges)
