"""Weighted 8-way grid graph over terrain snapshots.

There is no materialized graph object: edges are derived on demand from
a snapshot plus a :class:`WeightTable`. A move costs the block-pair base
cost (directional, defaulting when the pair is unlisted) times the
diagonal multiplier, plus a flat elevation penalty for stepping up or
down. Moves across a height gap larger than ``max_step_height`` or over
an impassable pair do not exist as edges.

Searches are confined to a circular region around the start-goal
midpoint whose radius is 1.30 x heuristic(start, goal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .errors import ArgumentError, ParseError
from .terrain import BlockRegistry, Bounds, DEFAULT_REGISTRY, TerrainSnapshot

IMPASSABLE = math.inf

# Fixed neighbor order N, NE, E, SE, S, SW, W, NW with north = -z, east = +x.
# Every traversal iterates in this order, which is what makes runs
# deterministic and "predict the next step" answerable.
DIRECTIONS: tuple[tuple[int, int], ...] = (
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
)
_NEIGHBOR_SET = frozenset(DIRECTIONS)

# Search radius scale, kept as a ratio so decimal radii come out exact
# (13/10 * 10.0 == 13.0, no residue to leak boundary cells).
RADIUS_NUM = 13.0
RADIUS_DEN = 10.0


@dataclass(frozen=True)
class WeightTable:
    """Directional block-pair costs plus elevation and diagonal parameters.

    ``pair_cost`` maps (from_block, to_block) to a cost; unlisted pairs
    fall back to ``default_cost``. ``math.inf`` marks an impassable pair.
    The table is directional on purpose: (a, b) and (b, a) are distinct
    entries and are never symmetrized.
    """

    pair_cost: Mapping[tuple[str, str], float] = field(default_factory=dict)
    default_cost: float = 1.0
    step_up_penalty: float = 0.5
    step_down_penalty: float = 0.25
    diagonal_multiplier: float = math.sqrt(2.0)
    max_step_height: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.default_cost) and self.default_cost >= 0):
            raise ArgumentError("default_cost must be finite and >= 0")
        for name in ("step_up_penalty", "step_down_penalty"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ArgumentError(f"{name} must be finite and >= 0")
        if not (self.diagonal_multiplier > 0 and math.isfinite(self.diagonal_multiplier)):
            raise ArgumentError("diagonal_multiplier must be positive and finite")
        if self.max_step_height < 0:
            raise ArgumentError("max_step_height must be >= 0")
        finite = [self.default_cost]
        for pair, cost in self.pair_cost.items():
            if math.isinf(cost):
                continue
            if not (math.isfinite(cost) and cost >= 0):
                raise ArgumentError(f"pair cost for {pair} must be >= 0 or impassable")
            finite.append(cost)
        object.__setattr__(self, "_min_cost", min(finite))

    @property
    def min_cost(self) -> float:
        """Smallest finite cost in the table (pairs and default)."""
        return self._min_cost  # type: ignore[attr-defined]

    def cost(self, from_block: str, to_block: str) -> float:
        return self.pair_cost.get((from_block, to_block), self.default_cost)


@dataclass(frozen=True)
class GridNode:
    x: int
    z: int
    height: int

    def cell(self) -> tuple[int, int]:
        return self.x, self.z


def node_at(snapshot: TerrainSnapshot, x: int, z: int) -> GridNode:
    return GridNode(x, z, snapshot.height(x, z))


class Heuristic(str, Enum):
    OCTILE = "octile"
    EUCLIDEAN = "euclidean"
    ZERO = "zero"


def heuristic_value(kind: Heuristic, u: GridNode, v: GridNode, table: WeightTable) -> float:
    """Estimated remaining cost from u to v, scaled by the cheapest table entry."""
    if kind == Heuristic.ZERO:
        return 0.0
    dx = abs(u.x - v.x)
    dz = abs(u.z - v.z)
    if kind == Heuristic.EUCLIDEAN:
        return table.min_cost * math.hypot(dx, dz)
    if kind == Heuristic.OCTILE:
        hi, lo = (dx, dz) if dx >= dz else (dz, dx)
        return table.min_cost * (hi + (table.diagonal_multiplier - 1.0) * lo)
    raise ArgumentError(f"unknown heuristic kind {kind!r}")


@dataclass(frozen=True)
class SearchRegion:
    """Circular search constraint; start and goal are always members.

    Membership uses a strict comparison so cells landing exactly on the
    radius stay out -- with the 13/10 scaling this keeps decimal
    boundaries reproducible (radius 13.0 excludes a cell at distance
    13.0).
    """

    start: GridNode
    goal: GridNode
    center: tuple[float, float]
    radius: float

    def contains(self, x: int, z: int) -> bool:
        if (x, z) == (self.start.x, self.start.z) or (x, z) == (self.goal.x, self.goal.z):
            return True
        return math.hypot(x - self.center[0], z - self.center[1]) < self.radius

    def cells(self, bounds: Bounds) -> Iterator[tuple[int, int]]:
        """Member cells clipped to ``bounds``, row-major."""
        x_lo = max(bounds.min_x, math.floor(self.center[0] - self.radius))
        x_hi = min(bounds.min_x + bounds.width - 1, math.ceil(self.center[0] + self.radius))
        z_lo = max(bounds.min_z, math.floor(self.center[1] - self.radius))
        z_hi = min(bounds.min_z + bounds.depth - 1, math.ceil(self.center[1] + self.radius))
        for z in range(z_lo, z_hi + 1):
            for x in range(x_lo, x_hi + 1):
                if self.contains(x, z):
                    yield x, z
        for node in (self.start, self.goal):
            if bounds.contains(node.x, node.z) and not (
                x_lo <= node.x <= x_hi and z_lo <= node.z <= z_hi
            ):
                yield node.x, node.z


def build_region(
    start: GridNode,
    goal: GridNode,
    kind: Heuristic = Heuristic.OCTILE,
    table: WeightTable | None = None,
) -> SearchRegion:
    if table is None:
        table = WeightTable()
    h = heuristic_value(kind, start, goal, table)
    radius = (RADIUS_NUM * h) / RADIUS_DEN
    center = ((start.x + goal.x) / 2.0, (start.z + goal.z) / 2.0)
    return SearchRegion(start, goal, center, radius)


def edge_weight(
    snapshot: TerrainSnapshot, table: WeightTable, u: GridNode, v: GridNode
) -> float | None:
    """Cost of moving u -> v, or None when the edge does not exist."""
    dx = v.x - u.x
    dz = v.z - u.z
    if (dx, dz) not in _NEIGHBOR_SET:
        raise ArgumentError(f"nodes ({u.x},{u.z}) and ({v.x},{v.z}) are not 8-adjacent")
    base = table.cost(snapshot.surface_block(u.x, u.z), snapshot.surface_block(v.x, v.z))
    if math.isinf(base):
        return None
    dh = v.height - u.height
    if abs(dh) > table.max_step_height:
        return None
    weight = base * (table.diagonal_multiplier if dx != 0 and dz != 0 else 1.0)
    if dh > 0:
        weight += table.step_up_penalty
    elif dh < 0:
        weight += table.step_down_penalty
    return weight


def neighbors(
    snapshot: TerrainSnapshot,
    table: WeightTable,
    region: SearchRegion,
    u: GridNode,
) -> list[tuple[GridNode, float]]:
    """Traversable neighbors of u inside region and bounds, in N..NW order."""
    out = []
    for dx, dz in DIRECTIONS:
        x, z = u.x + dx, u.z + dz
        if not snapshot.bounds.contains(x, z):
            continue
        if not region.contains(x, z):
            continue
        v = node_at(snapshot, x, z)
        w = edge_weight(snapshot, table, u, v)
        if w is not None:
            out.append((v, w))
    return out


# Shipped default: plain ground costs 1.0, water entry costs 4.0, slick ice
# is cheap, soul sand is as bad as water. Educators override via config files.
DEFAULT_TABLE = WeightTable(
    pair_cost={
        ("dirt", "dirt"): 1.0,
        ("dirt", "water"): 4.0,
        ("water", "dirt"): 4.0,
        ("water", "water"): 4.0,
        ("grass", "water"): 4.0,
        ("water", "grass"): 4.0,
        ("dirt", "soul_sand"): 4.0,
        ("grass", "soul_sand"): 4.0,
        ("soul_sand", "soul_sand"): 4.0,
        ("dirt", "ice"): 0.5,
        ("ice", "ice"): 0.5,
    },
)


# ---------------------------------------------------------------------------
# Weight-table configuration files (see docs/formats.md):
#
#   default_cost 1.0
#   step_up_penalty 0.5
#   step_down_penalty 0.25
#   diagonal_multiplier 1.4142135623730951
#   max_step_height 1
#   pair dirt water 4.0
#   pair dirt stone impassable
#
# Blank lines and '#' comments are allowed; block ids must be registered.
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "default_cost": float,
    "step_up_penalty": float,
    "step_down_penalty": float,
    "diagonal_multiplier": float,
    "max_step_height": int,
}


def load_weight_table(text: str, registry: BlockRegistry = DEFAULT_REGISTRY) -> WeightTable:
    scalars: dict[str, float | int] = {}
    pairs: dict[tuple[str, str], float] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "pair":
            if len(parts) != 4:
                raise ParseError("expected 'pair <from> <to> <cost|impassable>'", line_no)
            a = registry.require(parts[1])
            b = registry.require(parts[2])
            if parts[3] == "impassable":
                cost = IMPASSABLE
            else:
                try:
                    cost = float(parts[3])
                except ValueError:
                    raise ParseError(f"bad cost {parts[3]!r}", line_no) from None
            pairs[(a, b)] = cost
        elif parts[0] in _SCALAR_KEYS:
            if len(parts) != 2:
                raise ParseError(f"expected '{parts[0]} <value>'", line_no)
            try:
                scalars[parts[0]] = _SCALAR_KEYS[parts[0]](parts[1])
            except ValueError:
                raise ParseError(f"bad value {parts[1]!r} for {parts[0]}", line_no) from None
        else:
            raise ParseError(f"unknown directive {parts[0]!r}", line_no)
    try:
        return WeightTable(pair_cost=pairs, **scalars)
    except ArgumentError as exc:
        raise ParseError(str(exc)) from exc


def save_weight_table(table: WeightTable) -> str:
    lines = [
        f"default_cost {table.default_cost!r}",
        f"step_up_penalty {table.step_up_penalty!r}",
        f"step_down_penalty {table.step_down_penalty!r}",
        f"diagonal_multiplier {table.diagonal_multiplier!r}",
        f"max_step_height {table.max_step_height}",
    ]
    for (a, b), cost in sorted(table.pair_cost.items()):
        cost_tok = "impassable" if math.isinf(cost) else repr(cost)
        lines.append(f"pair {a} {b} {cost_tok}")
    return "\n".join(lines) + "\n"
