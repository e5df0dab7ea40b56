"""Voxel world model: block registry, column stacks, surface snapshots, map documents.

The world is a width x depth field of block columns growing upward from
y = 0. Only the surface (top-most non-air block of each column) ever
enters the pathfinding graph; full columns are kept so that placing and
removing blocks has well-defined semantics. Algorithm runs never read
the live world -- they read an immutable :class:`TerrainSnapshot`
captured just before the run, so later edits cannot bend an execution
that is already recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ArgumentError, BoundsError, ConstraintError, ParseError, RegistryError

AIR = "air"

MAP_HEADER = "gridmap v1"


class BlockRegistry:
    """Set of known block ids. ``air`` is always present."""

    def __init__(self, ids: Iterable[str] = ()):
        self._ids: set[str] = {AIR}
        for block_id in ids:
            self.register(block_id)

    def register(self, block_id: str) -> None:
        if not block_id or any(c.isspace() for c in block_id):
            raise ArgumentError(f"invalid block id {block_id!r}")
        self._ids.add(block_id)

    def __contains__(self, block_id: str) -> bool:
        return block_id in self._ids

    def require(self, block_id: str) -> str:
        if block_id not in self._ids:
            raise RegistryError(f"unknown block id {block_id!r}")
        return block_id

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._ids))


DEFAULT_REGISTRY = BlockRegistry(
    ("dirt", "grass", "stone", "sand", "water", "ice", "soul_sand")
)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned cell rectangle in the (x, z) plane."""

    min_x: int
    min_z: int
    width: int
    depth: int

    def __post_init__(self):
        if self.width <= 0 or self.depth <= 0:
            raise ArgumentError("bounds must span at least one cell")

    def contains(self, x: int, z: int) -> bool:
        return (
            self.min_x <= x < self.min_x + self.width
            and self.min_z <= z < self.min_z + self.depth
        )

    def cells(self) -> Iterator[tuple[int, int]]:
        for z in range(self.min_z, self.min_z + self.depth):
            for x in range(self.min_x, self.min_x + self.width):
                yield x, z

    @property
    def cell_count(self) -> int:
        return self.width * self.depth


@dataclass(frozen=True)
class TerrainSnapshot:
    """Immutable surface capture: per-cell height and surface block.

    ``revision`` increases with every capture of the owning world, which
    is how sessions detect that results belong to an older terrain.
    """

    bounds: Bounds
    revision: int
    heights: tuple[tuple[int, ...], ...]  # [z][x], relative to bounds origin
    blocks: tuple[tuple[str, ...], ...]

    def _index(self, x: int, z: int) -> tuple[int, int]:
        if not self.bounds.contains(x, z):
            raise BoundsError(f"cell ({x}, {z}) outside snapshot bounds")
        return x - self.bounds.min_x, z - self.bounds.min_z

    def height(self, x: int, z: int) -> int:
        cx, cz = self._index(x, z)
        return self.heights[cz][cx]

    def surface_block(self, x: int, z: int) -> str:
        cx, cz = self._index(x, z)
        return self.blocks[cz][cx]

    def same_surface(self, other: "TerrainSnapshot") -> bool:
        """Field equality ignoring the revision counter."""
        return (
            self.bounds == other.bounds
            and self.heights == other.heights
            and self.blocks == other.blocks
        )


class WorldModel:
    """Mutable block-column world. Single writer per session."""

    def __init__(
        self,
        width: int,
        depth: int,
        columns: list[list[str]] | None = None,
        registry: BlockRegistry = DEFAULT_REGISTRY,
    ):
        if width <= 0 or depth <= 0:
            raise ArgumentError("world must span at least one cell")
        self._width = width
        self._depth = depth
        self._registry = registry
        if columns is None:
            columns = [["dirt"] for _ in range(width * depth)]
        if len(columns) != width * depth:
            raise ArgumentError("column list does not match world extent")
        self._columns: list[list[str]] = []
        for col in columns:
            col = list(col)
            while col and col[-1] == AIR:
                col.pop()
            if not col:
                raise ConstraintError("every column needs at least one non-air block")
            for block in col:
                registry.require(block)
            self._columns.append(col)
        self._version = 0
        self._revision = 0

    @classmethod
    def flat(
        cls,
        width: int,
        depth: int,
        block: str = "dirt",
        height: int = 1,
        registry: BlockRegistry = DEFAULT_REGISTRY,
    ) -> "WorldModel":
        if height < 1:
            raise ArgumentError("flat world height must be >= 1")
        columns = [[block] * height for _ in range(width * depth)]
        return cls(width, depth, columns, registry)

    @property
    def width(self) -> int:
        return self._width

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def registry(self) -> BlockRegistry:
        return self._registry

    @property
    def bounds(self) -> Bounds:
        return Bounds(0, 0, self._width, self._depth)

    @property
    def version(self) -> int:
        """Mutation counter; bumps on every accepted set_block."""
        return self._version

    def _column_index(self, x: int, z: int) -> int:
        if not (0 <= x < self._width and 0 <= z < self._depth):
            raise BoundsError(f"cell ({x}, {z}) outside world {self._width}x{self._depth}")
        return z * self._width + x

    def column(self, x: int, z: int) -> tuple[str, ...]:
        return tuple(self._columns[self._column_index(x, z)])

    def surface(self, x: int, z: int) -> tuple[int, str]:
        """(height, surface block) for one cell. Height counts blocks from y=0."""
        col = self._columns[self._column_index(x, z)]
        return len(col), col[-1]

    def set_block(self, pos: tuple[int, int, int], block: str) -> "WorldModel":
        """Place or replace a block at (x, z, y).

        Placing at the top of a column stacks on it; replacing the surface
        with air drops the surface to the next non-air block below. A gap
        above the column is filled with air so floating placements work.
        """
        x, z, y = pos
        idx = self._column_index(x, z)
        if y < 0:
            raise BoundsError(f"negative y {y}")
        self._registry.require(block)
        col = list(self._columns[idx])
        if y < len(col):
            col[y] = block
        elif block == AIR:
            # air above the surface is already implicit
            self._version += 1
            return self
        else:
            col.extend([AIR] * (y - len(col)))
            col.append(block)
        while col and col[-1] == AIR:
            col.pop()
        if not col:
            raise ConstraintError(
                f"removing the last block of column ({x}, {z}) is not allowed"
            )
        self._columns[idx] = col
        self._version += 1
        return self

    def scan_surface(self, bounds: Bounds | None = None) -> TerrainSnapshot:
        """Capture the surface inside ``bounds`` (whole world by default)."""
        if bounds is None:
            bounds = self.bounds
        if not (
            self.bounds.contains(bounds.min_x, bounds.min_z)
            and self.bounds.contains(
                bounds.min_x + bounds.width - 1, bounds.min_z + bounds.depth - 1
            )
        ):
            raise BoundsError("scan bounds exceed world extent")
        heights = []
        blocks = []
        for z in range(bounds.min_z, bounds.min_z + bounds.depth):
            hrow = []
            brow = []
            for x in range(bounds.min_x, bounds.min_x + bounds.width):
                h, b = self.surface(x, z)
                hrow.append(h)
                brow.append(b)
            heights.append(tuple(hrow))
            blocks.append(tuple(brow))
        self._revision += 1
        return TerrainSnapshot(bounds, self._revision, tuple(heights), tuple(blocks))


# ---------------------------------------------------------------------------
# Map documents
#
# Canonical text format (see docs/formats.md):
#
#   gridmap v1
#   width <int>
#   depth <int>
#   block <palette-index> <block-id>     (palette sorted by id, indices 0..)
#   cells
#   <depth rows of width entries "palette@height">
#   column <x> <z> <block-id> ...        (only for non-uniform columns,
#                                         row-major order)
#
# A cells entry "p@h" declares a column of h blocks uniformly made of
# palette[p]; explicit column lines override the fill while keeping the
# same surface block and height. Save is canonical, so save -> load ->
# save round-trips byte-identically.
# ---------------------------------------------------------------------------


def save_map(world: WorldModel) -> str:
    palette_ids = sorted({b for col in world._columns for b in col})
    index = {block_id: i for i, block_id in enumerate(palette_ids)}
    lines = [MAP_HEADER, f"width {world.width}", f"depth {world.depth}"]
    lines.extend(f"block {i} {block_id}" for i, block_id in enumerate(palette_ids))
    lines.append("cells")
    for z in range(world.depth):
        entries = []
        for x in range(world.width):
            h, b = world.surface(x, z)
            entries.append(f"{index[b]}@{h}")
        lines.append(" ".join(entries))
    for z in range(world.depth):
        for x in range(world.width):
            col = world.column(x, z)
            if any(b != col[-1] for b in col):
                lines.append(f"column {x} {z} " + " ".join(col))
    return "\n".join(lines) + "\n"


def _parse_int(token: str, what: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", line_no) from None


def load_map(text: str, registry: BlockRegistry = DEFAULT_REGISTRY) -> WorldModel:
    lines = text.splitlines()
    pos = 0

    def next_line() -> tuple[int, str]:
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise ParseError("unexpected end of document", len(lines))
        pos += 1
        return pos, lines[pos - 1].strip()

    line_no, header = next_line()
    if header != MAP_HEADER:
        raise ParseError(f"expected {MAP_HEADER!r} header", line_no)

    line_no, wline = next_line()
    if not wline.startswith("width "):
        raise ParseError("expected 'width <int>'", line_no)
    width = _parse_int(wline.split()[1], "width", line_no)
    line_no, dline = next_line()
    if not dline.startswith("depth "):
        raise ParseError("expected 'depth <int>'", line_no)
    depth = _parse_int(dline.split()[1], "depth", line_no)
    if width <= 0 or depth <= 0:
        raise ParseError("width and depth must be positive", line_no)

    palette: list[str] = []
    while True:
        line_no, line = next_line()
        if line == "cells":
            break
        parts = line.split()
        if len(parts) != 3 or parts[0] != "block":
            raise ParseError("expected 'block <index> <id>' or 'cells'", line_no)
        idx = _parse_int(parts[1], "palette index", line_no)
        if idx != len(palette):
            raise ParseError(f"palette indices must be consecutive, got {idx}", line_no)
        palette.append(registry.require(parts[2]))

    columns: list[list[str] | None] = [None] * (width * depth)
    surfaces: list[tuple[str, int]] = []
    for z in range(depth):
        line_no, row = next_line()
        entries = row.split()
        if len(entries) != width:
            raise ParseError(f"row {z} has {len(entries)} entries, expected {width}", line_no)
        for x, entry in enumerate(entries):
            if "@" not in entry:
                raise ParseError(f"cell entry {entry!r} is not 'palette@height'", line_no)
            p_tok, h_tok = entry.split("@", 1)
            p = _parse_int(p_tok, "palette index", line_no)
            h = _parse_int(h_tok, "height", line_no)
            if not 0 <= p < len(palette):
                raise ParseError(f"palette index {p} out of range", line_no)
            if h < 1:
                raise ParseError(f"height must be >= 1, got {h}", line_no)
            block = palette[p]
            if block == AIR:
                raise ParseError("air cannot be a surface block", line_no)
            columns[z * width + x] = [block] * h
            surfaces.append((block, h))

    while True:
        try:
            line_no, line = next_line()
        except ParseError:
            break
        parts = line.split()
        if parts[0] != "column":
            raise ParseError("expected 'column <x> <z> <blocks...>'", line_no)
        if len(parts) < 4:
            raise ParseError("column line needs at least one block", line_no)
        x = _parse_int(parts[1], "column x", line_no)
        z = _parse_int(parts[2], "column z", line_no)
        if not (0 <= x < width and 0 <= z < depth):
            raise ParseError(f"column ({x}, {z}) out of bounds", line_no)
        stack = [registry.require(b) for b in parts[3:]]
        for b in stack:
            if b not in palette:
                raise ParseError(f"column block {b!r} missing from palette", line_no)
        while stack and stack[-1] == AIR:
            stack.pop()
        if not stack:
            raise ParseError("column must keep at least one non-air block", line_no)
        declared_block, declared_h = surfaces[z * width + x]
        if len(stack) != declared_h or stack[-1] != declared_block:
            raise ParseError(
                f"column ({x}, {z}) disagrees with its cells entry", line_no
            )
        columns[z * width + x] = stack

    return WorldModel(width, depth, [c for c in columns if c is not None], registry)
