"""Interactive weighted-grid pathfinding engine with a time-travel debugger.

Subpackages by responsibility: ``terrain`` (voxel world and snapshots),
``graph`` (weights, heuristics, search region), ``algorithms`` (traced
BFS/Dijkstra/A* and oracles), ``debugger`` (cursor replay), ``skygraph``
(topology puzzles), ``challenges`` (task checking and telemetry),
``content`` (lesson books), ``server`` (session protocol), ``cli``.
"""

from .algorithms import (
    AlgorithmKind,
    AlgorithmSpec,
    EventKind,
    ExecutionTrace,
    RunMetrics,
    TraceEvent,
    brute_force_shortest,
    export_trace,
    reconstruct_path,
    run_algorithm,
    run_parallel,
    shortest_cost,
)
from .content import Book, GradeResult, QuizItem, grade_quiz, load_book
from .challenges import (
    AttemptRecord,
    Challenge,
    ChallengeKind,
    ChallengeVerdict,
    SessionView,
    TelemetryStore,
    evaluate,
    record_attempt,
)
from .debugger import DebugSession, Mode, VisualState, VisualTrace
from .graph import (
    GridNode,
    Heuristic,
    IMPASSABLE,
    SearchRegion,
    WeightTable,
    build_region,
    edge_weight,
    heuristic_value,
    load_weight_table,
    neighbors,
    node_at,
)
from .skygraph import (
    EditAction,
    GoalPredicate,
    Puzzle,
    PuzzleKind,
    PuzzleVerdict,
    SkyGraph,
    VerdictStatus,
    check_solution,
    edit,
    find_articulation_points,
    find_bridges,
    generate_puzzle,
    is_acyclic,
    load_graph,
    save_graph,
)
from .terrain import (
    AIR,
    BlockRegistry,
    Bounds,
    DEFAULT_REGISTRY,
    TerrainSnapshot,
    WorldModel,
    load_map,
    save_map,
)

__version__ = "0.1.0"
